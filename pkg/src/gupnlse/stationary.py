"""Stationary states of the effective-mass eigenproblem and the consistency closure.

For real stationary states the nonlinear term reduces to multiplying each
Laplacian component by (1 + W_l), so the stationary problem is a linear
eigenproblem parameterized by the W_l, closed by the algebraic conditions

    W_l = W(C * F_l[|psi(.; W)|^2]).

The closure is solved by a damped fixed-point iteration wrapped in a
bisection bracket, which keeps the iteration stable even where the plain
fixed-point map is strongly repelling (large deformation, state near the
domain edge of W).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .deformation import DeformationModel, UnitsConfig, W_eval
from .errors import ConvergenceError, DomainError
from .fields import (
    BOUNDARY_DIRICHLET,
    BOUNDARY_PERIODIC,
    Grid,
    WaveField,
    fisher_per_dim,
    integrate,
    normalize,
)

POTENTIAL_FREE = "free"
POTENTIAL_HARMONIC = "harmonic"
POTENTIAL_TABULATED = "tabulated"


@dataclass(frozen=True)
class PotentialSpec:
    """External potential: free, harmonic (0.5 zeta x^2 per dimension) or tabulated."""

    kind: str
    zeta: float = 1.0
    samples: np.ndarray = None
    separable: bool = True

    def __post_init__(self):
        if self.kind not in (POTENTIAL_FREE, POTENTIAL_HARMONIC, POTENTIAL_TABULATED):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == POTENTIAL_HARMONIC and self.zeta <= 0:
            raise ValueError("zeta must be positive")
        if self.kind == POTENTIAL_TABULATED:
            if self.samples is None:
                raise ValueError("tabulated potential needs samples")
            object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
            object.__setattr__(self, "separable", False)

    @classmethod
    def free(cls) -> "PotentialSpec":
        return cls(POTENTIAL_FREE)

    @classmethod
    def harmonic(cls, zeta: float) -> "PotentialSpec":
        return cls(POTENTIAL_HARMONIC, zeta=float(zeta))

    @classmethod
    def tabulated(cls, samples) -> "PotentialSpec":
        return cls(POTENTIAL_TABULATED, samples=samples)

    def evaluate(self, grid: Grid) -> np.ndarray:
        if self.kind == POTENTIAL_FREE:
            return np.zeros(grid.shape)
        if self.kind == POTENTIAL_HARMONIC:
            V = np.zeros(grid.shape)
            for X in grid.meshgrid():
                V = V + 0.5 * self.zeta * X**2
            return V
        if self.samples.shape != grid.shape:
            raise ValueError("tabulated samples do not match the grid shape")
        return self.samples

    def axis_potential(self, grid: Grid, l: int) -> "PotentialSpec":
        """1D restriction along axis l; requires a separable kind."""
        if self.kind == POTENTIAL_TABULATED:
            raise ValueError("tabulated potentials do not factorize")
        return PotentialSpec(self.kind, zeta=self.zeta)


@dataclass(frozen=True)
class Hamiltonian:
    """Matrix-free H = -(hbar^2/2m) sum_l (1+W_l) d^2_l + V on a grid.

    Central differences with ghost zeros on dirichlet grids, wrap-around on
    periodic ones; symmetric under the plain cell-volume inner product.
    """

    grid: Grid
    potential: PotentialSpec
    W_params: tuple
    units: UnitsConfig
    potential_values: np.ndarray = field(init=False)

    def __post_init__(self):
        W = tuple(float(w) for w in self.W_params)
        if len(W) != self.grid.dims:
            raise ValueError("W_params length must equal grid.dims")
        if not all(math.isfinite(w) for w in W):
            raise ValueError("W_params must be finite")
        object.__setattr__(self, "W_params", W)
        object.__setattr__(self, "potential_values", self.potential.evaluate(self.grid))

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi)
        out = self.potential_values * psi
        for l in range(self.grid.dims):
            d = self.grid.spacing[l]
            coef = (1.0 + self.W_params[l]) * self.units.hbar**2 / (2 * self.units.mass * d**2)
            up = np.roll(psi, -1, axis=l)
            dn = np.roll(psi, 1, axis=l)
            if self.grid.boundary == BOUNDARY_DIRICHLET:
                sl = [slice(None)] * psi.ndim
                sl[l] = -1
                up[tuple(sl)] = 0.0
                sl[l] = 0
                dn[tuple(sl)] = 0.0
            out = out + coef * (2 * psi - up - dn)
        return out

    def tridiagonal(self):
        """(diag, offdiag) of the 1D dirichlet discretization."""
        if self.grid.dims != 1 or self.grid.boundary != BOUNDARY_DIRICHLET:
            raise ValueError("tridiagonal form exists for 1D dirichlet grids only")
        n = self.grid.points_per_dim[0]
        d = self.grid.spacing[0]
        coef = (1.0 + self.W_params[0]) * self.units.hbar**2 / (2 * self.units.mass * d**2)
        diag = 2 * coef + self.potential_values
        off = np.full(n - 1, -coef)
        return diag, off

    def dense(self) -> np.ndarray:
        n = self.grid.total_points
        eye = np.eye(n)
        cols = [self.matvec(eye[:, j].reshape(self.grid.shape)).ravel() for j in range(n)]
        return np.column_stack(cols)


def build_hamiltonian(grid: Grid, potential: PotentialSpec, W_params, units: UnitsConfig) -> Hamiltonian:
    return Hamiltonian(grid, potential, tuple(np.atleast_1d(W_params)), units)


def _ground_1d(H: Hamiltonian):
    grid = H.grid
    n = grid.points_per_dim[0]
    if grid.boundary == BOUNDARY_DIRICHLET:
        diag, off = H.tridiagonal()
        E, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
        E = float(E[0])
        psi = v[:, 0]
    else:
        M = H.dense()
        from scipy.linalg import eigh

        E_all, v = eigh(M, subset_by_index=[0, 0])
        E = float(E_all[0])
        psi = v[:, 0]
    if psi[int(np.argmax(np.abs(psi)))] < 0:
        psi = -psi
    return E, psi


def _polish_1d(H: Hamiltonian, E: float, psi: np.ndarray, sweeps: int = 2):
    """Shifted inverse-iteration refinement on the tridiagonal form."""
    if H.grid.boundary != BOUNDARY_DIRICHLET:
        return E, psi
    diag, off = H.tridiagonal()
    n = len(diag)
    shift = E - 1e-3 * max(abs(E), 1.0)
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1, :] = diag - shift
    ab[2, :-1] = off
    for _ in range(sweeps):
        psi = solve_banded((1, 1), ab, psi)
        psi = psi / np.linalg.norm(psi)
    Hpsi = diag * psi
    Hpsi[:-1] += off * psi[1:]
    Hpsi[1:] += off * psi[:-1]
    E = float(psi @ Hpsi)
    if psi[int(np.argmax(np.abs(psi)))] < 0:
        psi = -psi
    return E, psi


def ground_state(H: Hamiltonian, grid: Grid = None, residual_rtol: float = 1e-9):
    """Lowest eigenpair of H; real, nodeless, unit norm under the grid quadrature.

    1D problems use the LAPACK tridiagonal solver (dirichlet) or a dense
    symmetric solve (periodic).  Separable multi-dimensional problems reduce
    to products of 1D ground states.  ConvergenceError if the eigen-residual
    cannot be brought below residual_rtol * |E| (absolute floor for E ~ 0).
    """
    grid = grid or H.grid
    if grid.dims == 1:
        E, psi = _ground_1d(H)
        vals = psi
    else:
        if not H.potential.separable:
            raise ValueError("multi-dimensional ground states require a separable potential")
        E = 0.0
        factors = []
        for l in range(grid.dims):
            g1 = Grid((grid.points_per_dim[l],), (grid.spacing[l],), (grid.origin[l],), grid.boundary)
            H1 = Hamiltonian(g1, H.potential.axis_potential(grid, l), (H.W_params[l],), H.units)
            E_l, psi_l = _ground_1d(H1)
            E_l, psi_l = _polish_1d(H1, E_l, psi_l)
            E += E_l
            factors.append(psi_l)
        vals = factors[0]
        for f in factors[1:]:
            vals = np.multiply.outer(vals, f)
    psi_field = normalize(WaveField(grid, vals.astype(complex), H.units))
    r = np.real(psi_field.values)
    res = _eigen_residual(H, r, E)
    # rounding floor of the operator application, for |E| ~ 0 (free particle)
    op_scale = max(
        2 * (1 + max(H.W_params)) * H.units.hbar**2 / (H.units.mass * d**2)
        for d in grid.spacing
    ) + float(np.max(np.abs(H.potential_values)))
    threshold = max(residual_rtol * abs(E), 100 * np.finfo(float).eps * op_scale)
    if res > threshold and grid.dims == 1:
        E, r1 = _polish_1d(H, E, np.real(psi_field.values))
        psi_field = normalize(WaveField(grid, r1.astype(complex), H.units))
        r = np.real(psi_field.values)
        res = _eigen_residual(H, r, E)
    if res > threshold:
        raise ConvergenceError(f"eigen-residual {res:.3e} above {residual_rtol:g}*|E|")
    return E, psi_field


def _eigen_residual(H: Hamiltonian, psi_real: np.ndarray, E: float) -> float:
    r = H.matvec(psi_real) - E * psi_real
    nrm2 = float(np.sum(psi_real**2)) * H.grid.cell_volume()
    return math.sqrt(float(np.sum(r**2)) * H.grid.cell_volume() / nrm2)


@dataclass(frozen=True)
class ConsistencyResult:
    """Converged solution of the consistency conditions."""

    W_params: tuple
    energy: float
    psi: WaveField
    iterations: int
    residual: float
    converged: bool


def _consistency_target(grid, potential, model, units, W_vec):
    """Ground state for frozen W, then the W the state implies; None if the
    state's C*F falls outside the W domain."""
    H = build_hamiltonian(grid, potential, W_vec, units)
    E, psi = ground_state(H)
    F = fisher_per_dim(psi)
    z = units.C * F
    if np.any(z >= model.z_max_W):
        return None, E, psi, F
    return np.asarray(W_eval(z, model), dtype=float).reshape(-1), E, psi, F


def _solve_consistent_1d(grid, potential, model, units, tol, max_iter, alpha0):
    WW = 0.0
    lo, hi = 0.0, None
    alpha = alpha0
    prev_res = None
    best = None
    stall = 0
    for it in range(1, max_iter + 1):
        target, E, psi, F = _consistency_target(grid, potential, model, units, (WW,))
        if target is None:
            # state too narrow for the W domain: only a larger W can help
            lo = max(lo, WW)
            if hi is not None and hi - lo <= np.spacing(max(abs(hi), 1.0)):
                raise DomainError(
                    "C*F stays at or above 1/(4 beta): physically excluded regime"
                )
            WW = 1.0 if WW == 0.0 else WW * 4.0
            if WW > 1e15:
                raise DomainError(
                    "C*F stays at or above 1/(4 beta) for any effective mass: "
                    "physically excluded regime"
                )
            continue
        g = float(target[0]) - WW
        res = abs(g)
        if best is None or res < best[0]:
            best = (res, WW, E, psi, it)
        if res <= tol * max(1.0, abs(WW)):
            return ConsistencyResult((WW,), E, psi, it, res, True)
        width_before = math.inf if hi is None else hi - lo
        if g > 0:
            lo = max(lo, WW)
        else:
            hi = WW if hi is None else min(hi, WW)
        if prev_res is not None and res > prev_res:
            alpha = max(alpha / 2, 0.01)
        prev_res = res
        if hi is None:
            WW = max(1.0, WW * 4.0)
            continue
        if hi - lo <= np.spacing(max(abs(hi), 1.0)):
            # bracket exhausted at float resolution without meeting tol
            res_b, WW_b, E_b, psi_b, _ = best
            raise ConvergenceError(
                f"consistency residual stalled at {res_b:.3e} (tolerance {tol:g})"
            )
        stall = stall + 1 if hi - lo > 0.75 * width_before else 0
        cand = WW + alpha * g  # damped fixed-point proposal
        if stall >= 3 or not (lo < cand < hi):
            cand = 0.5 * (lo + hi)  # bisection safeguard guarantees progress
            stall = 0
        WW = cand
    last = best[0] if best is not None else math.inf
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations (best residual {last:.3e})"
    )


def solve_consistent(grid: Grid, potential: PotentialSpec, model: DeformationModel,
                     units: UnitsConfig = UnitsConfig(), tol: float = 1e-8,
                     max_iter: int = 200, alpha: float = 0.5) -> ConsistencyResult:
    """Solve the stationary problem together with its consistency closure.

    Starts from W = 0 (linear theory) and iterates damped fixed-point steps
    W <- W + alpha (W(C F) - W), safeguarded by a bisection bracket so that
    transits through the excluded region C F >= 1/(4 beta) (narrow linear
    states at strong deformation) are survivable.  Convergence means
    residual <= tol * max(1, |W|); the scale factor matters only for large
    W where the consistency map amplifies last-digit Fisher noise.

    DomainError is raised when no effective mass brings C*F below the W
    domain edge (e.g. box-like confinement with F bounded from below).
    """
    if model.kind == "identity" or model.beta == 0.0:
        H = build_hamiltonian(grid, potential, np.zeros(grid.dims), units)
        E, psi = ground_state(H)
        return ConsistencyResult(tuple(0.0 for _ in range(grid.dims)), E, psi, 1, 0.0, True)
    if grid.dims == 1:
        return _solve_consistent_1d(grid, potential, model, units, tol, max_iter, alpha)
    if not potential.separable:
        raise ValueError("multi-dimensional consistency solves require a separable potential")
    # separable case: per-axis closures are independent
    W, E_tot, factors, iters, res = [], 0.0, [], 0, 0.0
    for l in range(grid.dims):
        g1 = Grid((grid.points_per_dim[l],), (grid.spacing[l],), (grid.origin[l],), grid.boundary)
        r1 = _solve_consistent_1d(g1, potential.axis_potential(grid, l), model, units,
                                  tol, max_iter, alpha)
        W.append(r1.W_params[0])
        E_tot += r1.energy
        factors.append(np.real(r1.psi.values))
        iters = max(iters, r1.iterations)
        res = max(res, r1.residual)
    vals = factors[0]
    for f in factors[1:]:
        vals = np.multiply.outer(vals, f)
    psi = normalize(WaveField(grid, vals.astype(complex), units))
    return ConsistencyResult(tuple(W), E_tot, psi, iters, res, True)


def nu_of_q(q):
    """Closed-form deformation parameter of the harmonic ground state.

    nu(q) = q/(1+q^2) * (4 sqrt(1+q^2) + q (7 + 8 q (q + sqrt(1+q^2)))),
    nonnegative and increasing, asymptotically 16 q^2.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("q must be nonnegative")
    r = np.sqrt(1.0 + q**2)
    out = q / (1.0 + q**2) * (4.0 * r + q * (7.0 + 8.0 * q * (q + r)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class HarmonicAnalytic:
    """Closed-form description of the deformed harmonic ground state."""

    sigma0_sq: float
    q: float
    nu: float
    sigma_sq: float


def harmonic_analytic(beta: float, zeta: float, units: UnitsConfig = UnitsConfig()) -> HarmonicAnalytic:
    """sigma0^2 = sqrt(hbar^2/(zeta m)), q = hbar^2 beta/(2 sigma0^2),
    nu = nu(q), sigma^2 = sigma0^2 sqrt(1+nu)."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    sigma0_sq = math.sqrt(units.hbar**2 / (zeta * units.mass))
    q = units.hbar**2 * beta / (2 * sigma0_sq)
    nu = nu_of_q(q)
    return HarmonicAnalytic(sigma0_sq, q, nu, sigma0_sq * math.sqrt(1.0 + nu))


def min_position_uncertainty_scan(beta: float, q_grid, units: UnitsConfig = UnitsConfig()):
    """Ground-state position variance along the stiffness sweep.

    Returns ((Delta x)^2 per q, infimum estimate).  The sequence
    (hbar^2 beta / 4) q^-1 sqrt(1 + nu(q)) decreases monotonically and
    approaches hbar^2 beta from above, the minimal-length limit.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    q = np.asarray(q_grid, dtype=float)
    if np.any(q <= 0):
        raise ValueError("q_grid must be positive")
    vals = (units.hbar**2 * beta / 4.0) * np.sqrt(1.0 + nu_of_q(q)) / q
    return vals, float(vals[np.argmax(q)])


def gup_min_uncertainty_product(beta: float, delta_p, units: UnitsConfig = UnitsConfig()):
    """Minimal Delta x allowed by the deformed relation at given Delta p:
    hbar (1 + beta dp^2) / (2 dp).  Minimized over dp this is hbar sqrt(beta)."""
    dp = np.asarray(delta_p, dtype=float)
    return units.hbar * (1.0 + beta * dp**2) / (2.0 * dp)
