from .conditions import (
    cmc_test,
    musso_nicolodi_field,
    musso_nicolodi_test,
    profile_ode_tests,
    type2_conformal_test,
)
from .criteria import (
    constant_term_location,
    minimal_type,
    type_d_norm_test,
    type_d_ratio_test,
    type_d_span_test,
)

__all__ = [
    "cmc_test",
    "constant_term_location",
    "minimal_type",
    "musso_nicolodi_field",
    "musso_nicolodi_test",
    "profile_ode_tests",
    "type2_conformal_test",
    "type_d_norm_test",
    "type_d_ratio_test",
    "type_d_span_test",
]
