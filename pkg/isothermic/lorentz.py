"""Linear algebra in the Lorentzian space R^{4,1}.

Vectors are numpy arrays whose last axis holds the five components
``(x1, x2, x3, x4, x0)``; ``e0`` (index 4) is the timelike direction. Every
function broadcasts over leading axes so a whole grid of vectors (shape
``(n, 5)``) is handled in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from .errors import UndefinedConicError

LorentzVector = npt.NDArray[np.float64]

DIM = 5
METRIC = np.array([1.0, 1.0, 1.0, 1.0, -1.0])


def basis(index: int) -> LorentzVector:
    vec = np.zeros(DIM)
    vec[index] = 1.0
    return vec


E1 = basis(0)
E2 = basis(1)
E3 = basis(2)
E4 = basis(3)
E0 = basis(4)

# Null pair for cylinders, normalized so that <V0, V_INF> = -1.
V0 = (E4 + E0) / math.sqrt(2.0)
V_INF = (E0 - E4) / math.sqrt(2.0)


def vector(x1: float, x2: float, x3: float, x4: float, x0: float) -> LorentzVector:
    return np.array([x1, x2, x3, x4, x0], dtype=float)


def inner(a: npt.ArrayLike, b: npt.ArrayLike) -> np.ndarray | float:
    """Signature (4,1) pairing a1b1 + a2b2 + a3b3 + a4b4 - a0b0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    result = np.einsum("...i,i,...i->...", a, METRIC, b)
    if result.ndim == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class WedgeAction:
    """The skew map u^v acting by (u^v)w = <u,w>v - <v,w>u."""

    u: LorentzVector
    v: LorentzVector

    def apply(self, x: npt.ArrayLike) -> LorentzVector:
        return wedge_apply(self, x)

    def matrix(self) -> np.ndarray:
        """Matrix of the action; shape ``(..., 5, 5)`` for gridded u, v."""
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        gu = u * METRIC
        gv = v * METRIC
        return np.einsum("...i,...j->...ij", v, gu) - np.einsum("...i,...j->...ij", u, gv)


def wedge_apply(w: WedgeAction, x: npt.ArrayLike) -> LorentzVector:
    u = np.asarray(w.u, dtype=float)
    v = np.asarray(w.v, dtype=float)
    x = np.asarray(x, dtype=float)
    ux = np.asarray(inner(u, x))[..., None]
    vx = np.asarray(inner(v, x))[..., None]
    return ux * v - vx * u


class SpaceForm(str, Enum):
    SPHERICAL = "spherical"
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class SpaceFormClass:
    tag: SpaceForm
    curvature: float


def classify_space_form(w: npt.ArrayLike, tol: float = 1e-9) -> SpaceFormClass:
    """Classify the conic section E(w); its sectional curvature is -<w,w>.

    ``tol`` is relative to the Euclidean size of ``w`` and decides when a
    numerically computed vector counts as null.
    """
    w = np.asarray(w, dtype=float)
    scale = float(np.dot(w, w))
    if scale == 0.0:
        raise UndefinedConicError("undefined conic section: w is the zero vector")
    pairing = float(inner(w, w))
    if abs(pairing) <= tol * scale:
        return SpaceFormClass(SpaceForm.EUCLIDEAN, 0.0)
    if pairing < 0:
        return SpaceFormClass(SpaceForm.SPHERICAL, -pairing)
    return SpaceFormClass(SpaceForm.HYPERBOLIC, -pairing)
