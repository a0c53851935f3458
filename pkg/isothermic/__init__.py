# Makes the isothermic package importable.
