"""Executable cross-checks of the theory's inequalities, scaling laws and structure.

A note on momentum in the inequality checks.  The deformed uncertainty
relation Delta x * w(Delta p) >= hbar/2 is stated for the momentum of the
underlying fluctuating classical description, whose variance decomposes as

    (Delta p)^2 = Var_P[dS/dx] + (Delta N)^2,    Delta N = w^-1(sqrt(C F)),

and which coincides with the variance of the operator -i hbar d/dx exactly
when w is the identity.  The operator variance itself cannot satisfy the
deformed relation on Gaussian states (they saturate Delta x Delta p =
hbar/2, so any w(z) < z pushes the product below hbar/2); the checks here
therefore use the fluctuation momentum above, and report the operator
product alongside for reference.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .deformation import DeformationModel, UnitsConfig, w_eval, w_inverse
from .errors import DomainError, NodeError
from .evolution import EvolutionConfig, Trajectory, evolve
from .fields import (
    BOUNDARY_PERIODIC,
    Grid,
    WaveField,
    _diff1,
    _diff2,
    density,
    fisher_per_dim,
    gaussian_state,
    integrate,
    normalize,
    plane_wave,
    position_stats,
    momentum_stats,
    rescale_density,
)
from .stationary import (
    Hamiltonian,
    PotentialSpec,
    build_hamiltonian,
    solve_consistent,
)

# amplitude below this fraction of the peak is treated as tail when
# unwrapping; phase there is noise but carries no probability
SIGNIFICANT_FRAC = 1e-8
# wrapped phase increment between significant neighbors that signals a node
NODE_JUMP_RAD = 2.8


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    measured: float
    bound: float
    details: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MadelungFields:
    """Hydrodynamic decomposition psi = sqrt(P) exp(i S / hbar)."""

    P: np.ndarray
    S: np.ndarray
    grid: Grid


def _significant_mask(a: np.ndarray) -> np.ndarray:
    return a >= SIGNIFICANT_FRAC * a.max()


def _detect_nodes(psi: WaveField) -> None:
    """Raise NodeError if |psi| has an interior near-zero separating
    substantial regions, or the phase jumps by ~pi between neighbors."""
    a = np.abs(psi.values)
    mask = _significant_mask(a)
    ph = np.angle(psi.values)
    for l in range(psi.grid.dims):
        m_lo = np.take(mask, range(0, mask.shape[l] - 1), axis=l)
        m_hi = np.take(mask, range(1, mask.shape[l]), axis=l)
        both = m_lo & m_hi
        dph = np.diff(ph, axis=l)
        dph = (dph + math.pi) % (2 * math.pi) - math.pi
        if np.any(both & (np.abs(dph) > NODE_JUMP_RAD)):
            raise NodeError(
                f"phase jump above {NODE_JUMP_RAD} rad along axis {l}: "
                "node or under-resolved phase on the unwrapping path"
            )
        # significant set must be contiguous along every grid line
        line_any = mask.any(axis=l)
        first = np.argmax(mask, axis=l)
        count = mask.sum(axis=l)
        last = mask.shape[l] - 1 - np.argmax(np.flip(mask, axis=l), axis=l)
        gap = (last - first + 1) != count
        if np.any(gap & line_any):
            raise NodeError(
                f"|psi| dips below {SIGNIFICANT_FRAC:g} of its peak inside the "
                f"support along axis {l}"
            )


def _unwrap_from(ph: np.ndarray, anchor: tuple) -> np.ndarray:
    """Unwrap an n-D phase field consistently, paths running through the
    anchor's grid lines."""
    s = np.unwrap(ph, axis=0)
    if ph.ndim > 1:
        ref = _unwrap_from(np.take(s, anchor[0], axis=0), anchor[1:])
        s = s + (ref - np.take(s, anchor[0], axis=0))[None, ...]
    # pin the anchor to its principal value
    shift = 2 * math.pi * np.round((s[anchor] - ph[anchor]) / (2 * math.pi))
    return s - shift


def madelung_decompose(psi: WaveField) -> MadelungFields:
    """P = |psi|^2 and S = hbar * unwrapped phase, anchored at the peak of |psi|.

    The reconstruction sqrt(P) exp(iS/hbar) reproduces psi pointwise.  States
    with nodes raise NodeError; tails below the significance floor keep a
    (probability-free) extrapolated phase.
    """
    _detect_nodes(psi)
    a = np.abs(psi.values)
    anchor = np.unravel_index(int(np.argmax(a)), a.shape)
    S = psi.units.hbar * _unwrap_from(np.angle(psi.values), anchor)
    return MadelungFields(P=a**2, S=S, grid=psi.grid)


def fluctuation_momentum_stats(psi: WaveField, model: DeformationModel):
    """Per-dimension fluctuating-momentum spread:
    sqrt(Var_P[d_l S] + w^-1(sqrt(C F_l))^2).

    Identical to the operator momentum spread for the identity model.
    """
    grid = psi.grid
    units = psi.units
    F = fisher_per_dim(psi)
    dN = np.array([w_inverse(math.sqrt(units.C * f), model) for f in F])
    vals = psi.values
    if np.max(np.abs(vals.imag)) <= 1e-14 * np.max(np.abs(vals)):
        var_s = np.zeros(grid.dims)  # real state: dS = 0 identically
    else:
        rho = density(psi)
        w = grid.quad_weights()
        total = float(np.sum(rho * w))
        var_s = np.empty(grid.dims)
        floor = 1e-30 * rho.max()
        for l in range(grid.dims):
            # gauge-invariant velocity field: dS_l = hbar Im(psi* d_l psi)/rho
            ds = units.hbar * np.imag(np.conj(vals) * _diff1(vals, grid, l))
            ds = np.where(rho > floor, ds / np.maximum(rho, floor), 0.0)
            mean = float(np.sum(ds * rho * w)) / total
            var_s[l] = float(np.sum((ds - mean) ** 2 * rho * w)) / total
    return np.sqrt(var_s + dN**2)


def check_sharper_hur(psi: WaveField, model: DeformationModel):
    """Delta x_l * w(Delta p_l) >= hbar/2 per dimension (deformed relation)."""
    hbar = psi.units.hbar
    _, delta_x = position_stats(psi)
    dp_w = fluctuation_momentum_stats(psi, model)
    _, dp_op = momentum_stats(psi)
    bound = hbar / 2 * (1 - 1e-6)
    reports = []
    for l in range(psi.grid.dims):
        if dp_w[l] > model.z_max_w:
            raise DomainError(
                f"Delta p_{l} = {dp_w[l]:.6g} beyond the increasing branch of w"
            )
        measured = delta_x[l] * w_eval(dp_w[l], model)
        reports.append(CheckReport(
            name=f"sharper_hur[{l}]",
            passed=bool(measured >= bound),
            measured=float(measured),
            bound=float(bound),
            details=(f"fluctuation dp={dp_w[l]:.9g}; operator product "
                     f"dx*dp_op={delta_x[l] * dp_op[l]:.9g}"),
        ))
    return reports


def check_gup_form(psi: WaveField, model: DeformationModel):
    """Delta x * Delta p >= (hbar/2)(1 + beta (Delta p)^2) per dimension,
    with the same fluctuation momentum as check_sharper_hur; the two forms
    are algebraically equivalent on the increasing branch of w."""
    hbar = psi.units.hbar
    _, delta_x = position_stats(psi)
    dp_w = fluctuation_momentum_stats(psi, model)
    reports = []
    for l in range(psi.grid.dims):
        measured = delta_x[l] * dp_w[l]
        bound = hbar / 2 * (1 + model.beta * dp_w[l] ** 2) * (1 - 1e-6)
        reports.append(CheckReport(
            name=f"gup_form[{l}]",
            passed=bool(measured >= bound),
            measured=float(measured),
            bound=float(bound),
            details=f"beta={model.beta:g}",
        ))
    return reports


def check_cramer_rao(psi: WaveField):
    """(Delta x_l)^2 F_l >= 1 per dimension."""
    _, delta_x = position_stats(psi)
    F = fisher_per_dim(psi)
    bound = 1 - 1e-6
    return [
        CheckReport(
            name=f"cramer_rao[{l}]",
            passed=bool(delta_x[l] ** 2 * F[l] >= bound),
            measured=float(delta_x[l] ** 2 * F[l]),
            bound=bound,
        )
        for l in range(psi.grid.dims)
    ]


def check_fisher_bound(psi: WaveField, model: DeformationModel) -> CheckReport:
    """hbar^2 beta F_l <= 1 for every l: the Fisher information cap that
    encodes the minimal observable length."""
    F = fisher_per_dim(psi)
    measured = float(np.max(psi.units.hbar**2 * model.beta * F))
    return CheckReport(
        name="fisher_bound",
        passed=bool(measured <= 1.0),
        measured=measured,
        bound=1.0,
        details=f"beta={model.beta:g}, max F={float(np.max(F)):.9g}",
    )


def check_scaling_law(rho: np.ndarray, kappa: float, model: DeformationModel,
                      grid: Grid, units: UnitsConfig = UnitsConfig()) -> CheckReport:
    """The deformed fluctuation measure sqrt(C F) scales linearly with kappa
    under rho -> kappa^n rho(kappa x), for every deformation model."""
    rho_k = rescale_density(rho, kappa, grid)
    F = fisher_per_dim(rho, grid)
    F_k = fisher_per_dim(rho_k, grid)
    base = kappa * np.sqrt(units.C * F)
    measured = float(np.max(np.abs(np.sqrt(units.C * F_k) - base) / base))
    return CheckReport(
        name=f"scaling_law(kappa={kappa:g})",
        passed=bool(measured <= 1e-4),
        measured=measured,
        bound=1e-4,
        details=f"model={model.kind}",
    )


def _eigen_residual_norm(H: Hamiltonian, phi: np.ndarray, E: float) -> float:
    r = H.matvec(phi) - E * phi
    return math.sqrt(float(np.sum(np.abs(r) ** 2)) * H.grid.cell_volume())


def check_homogeneity_stationary(potential: PotentialSpec, model: DeformationModel,
                                 A: float, grid: Grid,
                                 units: UnitsConfig = UnitsConfig()) -> CheckReport:
    """With W frozen from a converged solve, A psi satisfies the same
    eigen-equation: the scaled residual matches the unscaled one at the
    rounding floor of the operator application."""
    if A == 0:
        raise ValueError("A must be nonzero")
    result = solve_consistent(grid, potential, model, units)
    H = build_hamiltonian(grid, potential, result.W_params, units)
    psi = np.real(result.psi.values)
    r_base = _eigen_residual_norm(H, psi, result.energy)
    r_scaled = _eigen_residual_norm(H, A * psi, result.energy) / abs(A)
    # normalize by the operator scale: the raw residuals sit at eps*||H psi||
    op_scale = math.sqrt(float(np.sum(np.abs(H.matvec(psi)) ** 2)) * grid.cell_volume())
    kinetic_scale = max(
        (1 + max(H.W_params)) * units.hbar**2 / (units.mass * d**2) for d in grid.spacing
    )
    scale = max(op_scale, kinetic_scale)
    measured = abs(r_scaled - r_base) / scale
    return CheckReport(
        name=f"homogeneity_stationary(A={A:g})",
        passed=bool(measured <= 1e-12),
        measured=float(measured),
        bound=1e-12,
        details=f"residual {r_base:.3e} vs scaled {r_scaled:.3e}",
    )


def check_separability(psi1: WaveField, psi2: WaveField,
                       config: EvolutionConfig) -> CheckReport:
    """Evolve psi1 x psi2 on the product grid and each factor separately;
    the two answers agree pointwise for separable dynamics."""
    g1, g2 = psi1.grid, psi2.grid
    if g1.boundary != g2.boundary:
        raise ValueError("factor grids must share the boundary type")
    grid2 = Grid(
        g1.points_per_dim + g2.points_per_dim,
        g1.spacing + g2.spacing,
        g1.origin + g2.origin,
        g1.boundary,
    )
    prod = WaveField(grid2, np.multiply.outer(psi1.values, psi2.values), psi1.units)
    traj2 = evolve(prod, config)
    traj_a = evolve(psi1, config)
    traj_b = evolve(psi2, config)
    for t in (traj2, traj_a, traj_b):
        if t.failure:
            raise DomainError(t.failure)
    tensor = np.multiply.outer(traj_a.psi_final.values, traj_b.psi_final.values)
    measured = float(np.max(np.abs(traj2.psi_final.values - tensor)))
    return CheckReport(
        name=f"separability({config.steps} steps)",
        passed=bool(measured <= 1e-6),
        measured=measured,
        bound=1e-6,
        details=f"model={config.model.kind}, beta={config.model.beta:g}",
    )


def _aligned_madelung(snapshots, reference: MadelungFields = None):
    """Decompose snapshots and align the 2 pi hbar phase branch at the peak."""
    fields = []
    for _, psi in snapshots:
        m = madelung_decompose(psi)
        fields.append((m, psi.units.hbar))
    mid = fields[len(fields) // 2][0]
    anchor = np.unravel_index(int(np.argmax(mid.P)), mid.P.shape)
    out = []
    for m, hbar in fields:
        k = np.round((m.S[anchor] - mid.S[anchor]) / (2 * math.pi * hbar))
        out.append(MadelungFields(m.P, m.S - 2 * math.pi * hbar * k, m.grid))
    return out


def madelung_residuals(trajectory: Trajectory, model: DeformationModel,
                       potential: PotentialSpec, units: UnitsConfig = UnitsConfig(),
                       window: tuple = None):
    """L2 residuals of the continuity and modified Hamilton-Jacobi equations.

    Uses the last three consecutive snapshots of the trajectory (central
    time differences) and central space differences.  The L2 norm runs over
    the region where the middle density exceeds 1e-6 of its peak, or over
    the given window (per-axis coordinate bounds).  Returns
    (continuity_l2, hj_l2, window).
    """
    if len(trajectory.snapshots) < 3:
        raise ValueError("need at least three recorded snapshots")
    snaps = trajectory.snapshots[-3:]
    t_m, t_0, t_p = (s[0] for s in snaps)
    dt_m, dt_p = t_0 - t_m, t_p - t_0
    if abs(dt_m - dt_p) > 1e-12 * dt_p:
        raise ValueError("snapshots must be equally spaced in time")
    grid = snaps[1][1].grid
    hbar, mass = units.hbar, units.mass
    dec = _aligned_madelung(snaps)
    P = [d.P for d in dec]
    S = [d.S for d in dec]
    Pt = (P[2] - P[0]) / (2 * dt_p)
    St = (S[2] - S[0]) / (2 * dt_p)
    P0, S0 = P[1], S[1]

    z = units.C * fisher_per_dim(P0, grid)
    from .deformation import W_eval

    W = np.atleast_1d(np.asarray(W_eval(z, model), dtype=float))
    V = potential.evaluate(grid)

    cont = Pt.copy()
    hj = St + V
    for l in range(grid.dims):
        dS = _diff1(S0, grid, l)
        cont = cont + _diff1(P0 * dS / mass, grid, l)
        dP = _diff1(P0, grid, l)
        d2P = _diff2(P0, grid, l)
        hj = hj + dS**2 / (2 * mass)
        hj = hj + (hbar**2 / (8 * mass)) * (1 + W[l]) * ((dP / P0) ** 2 - 2 * d2P / P0)

    if window is None:
        window = []
        sig = P0 >= 1e-6 * P0.max()
        for l in range(grid.dims):
            x = grid.axis(l)
            proj = sig.any(axis=tuple(a for a in range(grid.dims) if a != l))
            window.append((float(x[proj][0]), float(x[proj][-1])))
        window = tuple(window)
    mask = np.ones(grid.shape, dtype=bool)
    for l, (lo, hi) in enumerate(window):
        x = grid.axis(l)
        shape = [1] * grid.dims
        shape[l] = -1
        mask &= ((x >= lo) & (x <= hi)).reshape(shape)
    w = grid.quad_weights()
    l2 = lambda f: math.sqrt(float(np.sum(np.where(mask, f, 0.0) ** 2 * w)))
    return l2(cont), l2(hj), window


def check_modified_hj_residual(trajectory: Trajectory, refined: Trajectory,
                               model: DeformationModel, potential: PotentialSpec,
                               units: UnitsConfig = UnitsConfig()) -> CheckReport:
    """Second-order convergence of the Madelung residuals: halving dx and dt
    together divides both L2 residuals by 4 (+- 0.5)."""
    cont_c, hj_c, window = madelung_residuals(trajectory, model, potential, units)
    cont_f, hj_f, _ = madelung_residuals(refined, model, potential, units, window=window)
    ratio_cont = cont_c / cont_f
    ratio_hj = hj_c / hj_f
    measured = max(abs(ratio_cont - 4.0), abs(ratio_hj - 4.0))
    return CheckReport(
        name="modified_hj_residual",
        passed=bool(3.5 <= ratio_cont <= 4.5 and 3.5 <= ratio_hj <= 4.5),
        measured=float(measured),
        bound=0.5,
        details=(f"continuity ratio {ratio_cont:.3f}, hj ratio {ratio_hj:.3f}; "
                 f"coarse residuals cont={cont_c:.3e} hj={hj_c:.3e}"),
    )


# ---------------------------------------------------------------------------
# full suite

@dataclass(frozen=True)
class SuiteConfig:
    """State/parameter matrix for run_all."""

    betas: tuple = (0.0, 1e-4, 1e-2, 1.0)
    zeta: float = 1.0
    grid_points: int = 512
    extent_sigmas: float = 9.0
    evolve_steps: int = 200
    dt: float = 2e-3
    units: UnitsConfig = field(default_factory=UnitsConfig)
    seed: int = 0


def run_all(config: SuiteConfig = SuiteConfig()):
    """Run the whole suite over {identity, gup(beta)} x {free, harmonic}."""
    from .stationary import harmonic_analytic

    units = config.units
    reports = []
    rng = np.random.default_rng(config.seed)
    for beta in config.betas:
        model = DeformationModel.identity() if beta == 0.0 else DeformationModel.gup(beta)
        tag = f"beta={beta:g}"

        # free particle on a periodic box: plane waves are transparent
        n = 128
        L = 16.0
        pgrid = Grid.centered(L / 2, n, boundary=BOUNDARY_PERIODIC)
        pw = plane_wave(pgrid, 2 * math.pi * 3 / L, units)
        traj = evolve(pw, EvolutionConfig(
            dt=config.dt, steps=config.evolve_steps, model=model,
            potential=PotentialSpec.free(), units=units))
        if traj.failure:
            reports.append(CheckReport(f"plane_wave_transparency[{tag}]", False,
                                       math.inf, 1e-10, traj.failure))
        else:
            target = 1 / math.sqrt(L)
            dev = max(float(np.max(np.abs(np.abs(t[1].values) - target)))
                      for t in traj.snapshots)
            reports.append(CheckReport(
                f"plane_wave_transparency[{tag}]", dev <= 1e-10, dev, 1e-10))
            drift = float(np.max(np.abs(traj.norms - traj.norms[0])))
            reports.append(CheckReport(
                f"norm_conservation_free[{tag}]", drift <= 1e-8, drift, 1e-8))
            F0 = float(np.max(fisher_per_dim(pw)))
            reports.append(CheckReport(
                f"plane_wave_fisher_zero[{tag}]", F0 <= 1e-12, F0, 1e-12))

        # harmonic confinement: consistent ground state and its inequalities
        ana = harmonic_analytic(beta, config.zeta, units)
        sigma = math.sqrt(ana.sigma_sq)
        hgrid = Grid.centered(config.extent_sigmas * sigma, config.grid_points)
        result = solve_consistent(hgrid, PotentialSpec.harmonic(config.zeta), model, units)
        psi = result.psi
        for rep in check_sharper_hur(psi, model):
            reports.append(CheckReport(f"{rep.name}[{tag}]", rep.passed,
                                       rep.measured, rep.bound, rep.details))
        for rep in check_gup_form(psi, model):
            reports.append(CheckReport(f"{rep.name}[{tag}]", rep.passed,
                                       rep.measured, rep.bound, rep.details))
        for rep in check_cramer_rao(psi):
            reports.append(CheckReport(f"{rep.name}[{tag}]", rep.passed,
                                       rep.measured, rep.bound, rep.details))
        rep = check_fisher_bound(psi, model)
        reports.append(CheckReport(f"{rep.name}[{tag}]", rep.passed,
                                   rep.measured, rep.bound, rep.details))
        kappa = 1.25 + 0.5 * rng.random()
        # rescaling needs a finer grid than the solver does for 1e-4 accuracy
        fgrid = Grid.centered(1.2 * config.extent_sigmas * sigma, 4096)
        rep = check_scaling_law(density(gaussian_state(fgrid, sigma, units=units)),
                                kappa, model, fgrid, units)
        reports.append(CheckReport(f"{rep.name}[{tag}]", rep.passed,
                                   rep.measured, rep.bound, rep.details))
        rep = check_homogeneity_stationary(PotentialSpec.harmonic(config.zeta),
                                           model, 2.0**10, hgrid, units)
        reports.append(CheckReport(f"{rep.name}[{tag}]", rep.passed,
                                   rep.measured, rep.bound, rep.details))
        # real stationary state: the phase field is flat
        m = madelung_decompose(psi)
        smax = float(np.max(np.abs(m.S[_significant_mask(np.sqrt(m.P))])))
        reports.append(CheckReport(
            f"madelung_flat_phase[{tag}]", smax <= 1e-10, smax, 1e-10))
    return reports


def format_report_table(reports) -> str:
    lines = [f"{'check':48s} {'status':6s} {'measured':>14s} {'bound':>14s}"]
    for r in reports:
        lines.append(
            f"{r.name:48s} {'PASS' if r.passed else 'FAIL':6s} "
            f"{r.measured:14.6e} {r.bound:14.6e}"
        )
    n_fail = sum(0 if r.passed else 1 for r in reports)
    lines.append(f"{len(reports)} checks, {n_fail} failures")
    return "\n".join(lines)
