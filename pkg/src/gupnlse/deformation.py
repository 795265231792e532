"""Deformation of the momentum-fluctuation scaling law and the induced nonlinearity.

The model is the pair (w, w^-1) of an increasing deformation function and its
inverse on the increasing branch, together with the induced dimensionless
function

    W(z) = d/dz [w^-1(sqrt(z))]^2 - 1,

which multiplies the extra |psi|^-1 d^2|psi| term of the modified wave
equation.  Two instances ship: the identity (undeformed theory, W = 0) and
the gravitationally motivated form w(z) = z / (1 + beta z^2), for which W has
the closed form implemented in :func:`W_eval`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

KIND_IDENTITY = "identity"
KIND_GUP = "gup"


@dataclass(frozen=True)
class UnitsConfig:
    """Working units; defaults are hbar = m = 1."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0 or self.mass <= 0:
            raise ValueError("hbar and mass must be positive")

    @property
    def C(self) -> float:
        """Coefficient linking Fisher information to squared fluctuations."""
        return self.hbar**2 / 4.0


@dataclass(frozen=True)
class DeformationModel:
    """The deformation function w, its inverse and validity bounds.

    Attributes
    ----------
    kind : str
        Either ``"identity"`` or ``"gup"``.
    beta : float
        Deformation strength (inverse momentum squared in working units).
        Zero for the identity model.
    """

    kind: str
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in (KIND_IDENTITY, KIND_GUP):
            raise ValueError(f"unknown deformation kind {self.kind!r}")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.kind == KIND_IDENTITY and self.beta != 0.0:
            raise ValueError("identity model has beta = 0")

    @classmethod
    def identity(cls) -> "DeformationModel":
        return cls(KIND_IDENTITY, 0.0)

    @classmethod
    def gup(cls, beta: float) -> "DeformationModel":
        return cls(KIND_GUP, float(beta))

    @property
    def z_max_w(self) -> float:
        """Upper end of the increasing branch of w."""
        if self.kind == KIND_GUP and self.beta > 0:
            return self.beta**-0.5
        return math.inf

    @property
    def z_max_W(self) -> float:
        """Upper (excluded) end of the validity domain of W."""
        if self.kind == KIND_GUP and self.beta > 0:
            return 1.0 / (4.0 * self.beta)
        return math.inf


def physical_beta(beta0: float, planck_length: float, hbar: float = 1.0) -> float:
    """Convert the dimensionless gravity parameter to working units.

    beta = beta0 * l_p^2 / hbar^2.  Conversion metadata only; the solvers
    take beta directly.
    """
    return beta0 * planck_length**2 / hbar**2


def _check_nonneg(x, name):
    if np.any(np.asarray(x) < 0):
        raise DomainError(f"{name} must be nonnegative")


def w_eval(z, model: DeformationModel):
    """Evaluate w(z) on the increasing branch.

    For the gup model w(z) = z / (1 + beta z^2), monotone only up to
    z = beta^-1/2; larger arguments raise DomainError.
    """
    z = np.asarray(z, dtype=float)
    _check_nonneg(z, "z")
    if np.any(z > model.z_max_w):
        raise DomainError(
            f"z > {model.z_max_w:g}: w is no longer increasing there"
        )
    if model.kind == KIND_IDENTITY or model.beta == 0.0:
        out = z.copy()
    else:
        out = z / (1.0 + model.beta * z**2)
    return out if out.ndim else float(out)


def w_inverse(y, model: DeformationModel):
    """Inverse of w on the increasing branch.

    The gup branch maximum is w(beta^-1/2) = 1/(2 sqrt(beta)); larger y
    raise DomainError.  The closed form is written as
    2 y / (1 + sqrt(1 - 4 beta y^2)), which is the minus-branch root of the
    defining quadratic in a form free of cancellation at small y.
    """
    y = np.asarray(y, dtype=float)
    _check_nonneg(y, "y")
    if model.kind == KIND_IDENTITY or model.beta == 0.0:
        out = y.copy()
    else:
        y_max = 0.5 / math.sqrt(model.beta)
        if np.any(y > y_max * (1.0 + 1e-15)):
            raise DomainError(
                f"y > {y_max:g}: beyond the maximum of w on its branch"
            )
        disc = np.maximum(1.0 - 4.0 * model.beta * np.minimum(y, y_max) ** 2, 0.0)
        out = 2.0 * y / (1.0 + np.sqrt(disc))
        # rounding may overshoot the branch top by one ulp
        out = np.minimum(out, model.z_max_w)
    return out if out.ndim else float(out)


def W_eval(z, model: DeformationModel):
    """Induced nonlinearity W(z) = d/dz [w^-1(sqrt(z))]^2 - 1.

    Identity model: identically zero.  Gup model: with s = sqrt(1 - 4 beta z)
    the closed form reduces to 4 / (s (1+s)^2) - 1, valid for
    0 <= z < 1/(4 beta); at the upper end W diverges and beyond it turns
    complex, so the boundary itself is excluded.
    """
    z = np.asarray(z, dtype=float)
    _check_nonneg(z, "z")
    if model.kind == KIND_IDENTITY or model.beta == 0.0:
        out = np.zeros_like(z)
        return out if out.ndim else float(out)
    if np.any(z >= model.z_max_W):
        raise DomainError(
            f"z >= 1/(4 beta) = {model.z_max_W:g}: W is singular/complex there"
        )
    u = model.beta * z
    s = np.sqrt(1.0 - 4.0 * u)
    closed = 4.0 / (s * (1.0 + s) ** 2) - 1.0
    # below u ~ 1e-4 the closed form loses digits to cancellation against 1;
    # the series u (4 + 15u + 56u^2 + 210u^3) is then accurate to O(u^5)
    series = u * (4.0 + u * (15.0 + u * (56.0 + 210.0 * u)))
    out = np.where(u < 1e-4, series, closed)
    return out if out.ndim else float(out)


def scaling_transform(delta_N, kappa: float, model: DeformationModel):
    """Deformed rescaling of a fluctuation measure: w^-1(kappa * w(delta_N)).

    Reduces to kappa * delta_N for the identity model and to the identity
    map for kappa = 1.  For the gup model with kappa > 1 the result grows
    superlinearly in kappa while it stays on the branch.
    """
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    return w_inverse(kappa * np.asarray(w_eval(delta_N, model)), model)
