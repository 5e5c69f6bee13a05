"""Truncated Fourier inversion from visible-region data.

The reconstruction keeps only lattice frequencies inside the ball B_R that
lie in the visible cone, fills them from chord-family slice data, zeroes
the hidden region, and inverts with the (2 pi)^-(n+1) convention.  The cut
radius R follows the delta rule

    lower = 3 (1 - eps) log(1/delta),
    upper = (1 - eps/2) log(1/delta) / (n + 2),
    R = min(lower, upper),

with a conflict flag when the two ends cross (they always do for n >= 2:
the printed interval is empty as derived, so the binding constraint is the
upper end).  InfeasibleSandwich is raised when no R > 1 exists.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleSandwich, RTooLargeForGrid
from .fields import SpaceTimeField
from .geometry import ConvexBody
from .parallel import parallel_map
from .spectral import (SpectralField, SpectralGrid, fourier_full,
                       slice_from_sinogram, visible_direction)


# ---------------------------------------------------------------- R rule


@dataclass
class RCut:
    R: float
    lower: float
    upper: float
    conflict: bool


def feasibility_threshold(epsilon: float, n: int) -> float:
    """Largest delta for which choose_R still returns R > 1."""
    need = max((n + 2) / (1.0 - epsilon / 2.0), 1.0 / (3.0 * (1.0 - epsilon)))
    return float(np.exp(-need))


def choose_R(delta: float, epsilon: float, n: int) -> RCut:
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    L = np.log(1.0 / delta)
    lower = 3.0 * (1.0 - epsilon) * L
    upper = (1.0 - epsilon / 2.0) * L / (n + 2)
    R = min(lower, upper)
    if R <= 1.0:
        raise InfeasibleSandwich(
            f"delta = {delta:.3e} too large: R = {R:.3f} <= 1 "
            f"(feasible below {feasibility_threshold(epsilon, n):.3e})")
    return RCut(float(R), float(lower), float(upper), bool(lower > upper))


@dataclass
class ReconstructionPlan:
    R: float
    delta: float
    n: int
    a: float | None = None       # tail decay exponent, defaults to n + 2
    epsilon: float = 0.5

    def __post_init__(self):
        if self.a is None:
            self.a = self.n + 2
        if self.R <= 1.0:
            raise ValueError("cut radius must exceed 1")
        if self.a <= self.n + 1:
            raise ValueError("tail exponent must exceed n + 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")


def tail_bound(R: float, a: float, n: int, C: float) -> float:
    """Out-of-ball contribution envelope C * R^(n+1-a)."""
    if a <= n + 1 or R <= 1.0:
        raise ValueError("need a > n+1 and R > 1")
    return float(C * R ** (n + 1 - a))


# ---------------------------------------------------------------- sources


@dataclass
class SpectralSource:
    """Lattice of frequency data feeding the inversion.

    ``available`` marks the points whose values are data-backed; the
    inversion treats everything else as zero.
    """

    grid: SpectralGrid
    values: np.ndarray
    available: np.ndarray


def source_from_spectral(sf: SpectralField) -> SpectralSource:
    """Oracle source: the full tensor-grid transform, available everywhere."""
    return SpectralSource(sf.grid, sf.values.copy(),
                          np.ones(sf.values.shape, dtype=bool))


def visible_slice_source(f: SpaceTimeField, body: ConvexBody,
                         grid: SpectralGrid, R_max: float,
                         n_launch: int = 200, n_s: int = 160) -> SpectralSource:
    """Fill the visible lattice inside B_Rmax from chord-family slices.

    Each visible lattice point (tau, xi) with xi != 0 gets the chord slice
    in the direction omega(tau, xi) with omega . xi = -tau; the origin is
    taken from the tensor-grid transform (no chord direction exists for
    xi = 0).  Values are Hermitian-symmetrised: only one point per mirror
    pair is integrated, the other is its conjugate, as for real data.
    """
    mesh = grid.frequency_mesh()
    radius = grid.radius_mesh()
    visible = grid.visible_mask()
    pick = visible & (radius <= R_max)

    values = np.zeros(pick.shape, dtype=complex)
    available = np.zeros(pick.shape, dtype=bool)
    claimed = np.zeros(pick.shape, dtype=bool)

    # one representative per Hermitian mirror pair; on the centered even
    # lattice freq(j) = (j - N/2) dk, so -freq lives at index N - j and the
    # j = 0 row (most negative frequency) has no mirror
    shape = pick.shape
    reps: list[tuple] = []
    mirrors: list[tuple | None] = []
    for idx in map(tuple, np.argwhere(pick)):
        if claimed[idx]:
            continue
        claimed[idx] = True
        mirror = None
        if all(i >= 1 for i in idx):
            cand = tuple(s - i for s, i in zip(shape, idx))
            if pick[cand] and not claimed[cand]:
                claimed[cand] = True
                mirror = cand
        reps.append(idx)
        mirrors.append(mirror)

    samples = None

    def one_slice(idx):
        nonlocal samples
        tau = float(mesh[0][idx])
        xi = np.array([float(mesh[a + 1][idx]) for a in range(grid.dim)])
        if np.all(xi == 0.0):
            if samples is None:
                samples = grid.sample(f)
            return grid.point_transform(samples, [tau], [xi])[0]
        omega = visible_direction(tau, xi)
        return slice_from_sinogram(f, omega, xi, body,
                                   n_launch=n_launch, n_s=n_s)

    results = parallel_map(one_slice, reps)
    for idx, mirror, val in zip(reps, mirrors, results):
        values[idx] = val
        available[idx] = True
        if mirror is not None:
            values[mirror] = np.conj(val)
            available[mirror] = True
    return SpectralSource(grid, values, available)


def hermitian_noise(grid: SpectralGrid, mask: np.ndarray, amplitude: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Complex uniform noise on the masked lattice with eta(-k) = conj(eta(k)).

    Components are uniform in [-amplitude, amplitude]; symmetrisation
    averages mirror pairs, preserving the amplitude bound.
    """
    shape = mask.shape
    eta = (rng.uniform(-amplitude, amplitude, shape)
           + 1j * rng.uniform(-amplitude, amplitude, shape))
    eta[~mask] = 0.0
    core = tuple(slice(1, None) for _ in shape)
    rev = tuple(slice(None, None, -1) for _ in shape)
    sym = eta.copy()
    sym[core] = 0.5 * (eta[core] + np.conj(eta[core][rev]))
    sym[~mask] = 0.0
    return sym


# ---------------------------------------------------------------- inversion


def lattice_radius_limit(grid: SpectralGrid) -> float:
    """Largest ball radius fully inside the centered lattice."""
    limits = [np.max(grid.taus)] + [np.max(grid.xis(a))
                                    for a in range(grid.dim)]
    return float(min(limits))


def truncated_inversion(source: SpectralSource, plan: ReconstructionPlan,
                        keep_hidden: bool = False):
    """Invert the masked lattice back onto the sample grid.

    Returns (real reconstruction samples, diagnostics dict).  Hidden
    lattice points contribute zero unless ``keep_hidden``; the imaginary
    residual of the inverse transform is reported and should be at
    roundoff level for noise-free Hermitian data.
    """
    grid = source.grid
    if plan.R > lattice_radius_limit(grid):
        raise RTooLargeForGrid(
            f"R = {plan.R:.2f} exceeds the lattice radius "
            f"{lattice_radius_limit(grid):.2f}")
    mask = (grid.radius_mesh() < plan.R) & source.available
    if not keep_hidden:
        mask &= grid.visible_mask()
    rec = grid.inverse(np.where(mask, source.values, 0.0))
    field_norm = grid.discrete_l2(rec.real)
    diag = {
        "n_modes": int(mask.sum()),
        "imag_residual": (grid.discrete_l2(rec.imag)
                          / (field_norm + 1e-300)),
    }
    return rec.real, diag


def reconstruction_errors(grid: SpectralGrid, truth: np.ndarray,
                          rec: np.ndarray) -> tuple[float, float]:
    """Relative discrete L2 and sampled sup-norm errors."""
    l2 = grid.discrete_l2(rec - truth) / grid.discrete_l2(truth)
    c0 = float(np.max(np.abs(rec - truth)) / np.max(np.abs(truth)))
    return float(l2), c0


def parseval_split(sf: SpectralField, R: float) -> dict:
    """Three-way energy split of the lattice transform at cut radius R."""
    E2 = np.abs(sf.values) ** 2
    radius = sf.grid.radius_mesh()
    in_ball = radius < R
    vis = sf.visible
    w = np.prod(sf.grid.dk) / (2 * np.pi) ** (sf.grid.dim + 1)
    return {
        "kept": float(E2[in_ball & vis].sum() * w),
        "hidden_in_ball": float(E2[in_ball & ~vis].sum() * w),
        "out_of_ball": float(E2[~in_ball].sum() * w),
        "total": float(E2.sum() * w),
    }


# ---------------------------------------------------------------- sweep


@dataclass
class StabilityRow:
    delta: float
    R: float
    l2_error: float
    c0_error: float
    envelope: float
    feasible: bool
    conflict: bool


@dataclass
class StabilityCurve:
    rows: list[StabilityRow] = field(default_factory=list)
    envelope_C: float = float("nan")

    def fit(self) -> dict:
        """Least-squares fit err = C / log(1/delta) on feasible rows."""
        feas = [r for r in self.rows if r.feasible and r.delta > 0]
        L = np.array([np.log(1 / r.delta) for r in feas])
        e = np.array([r.l2_error for r in feas])
        z = 1.0 / L
        C = float((e * z).sum() / (z * z).sum())
        pred = C * z
        ss_res = float(((e - pred) ** 2).sum())
        ss_tot = float(((e - e.mean()) ** 2).sum())
        return {"C": C, "r_squared": 1.0 - ss_res / ss_tot,
                "n_rows": len(feas)}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["delta", "R", "l2_error", "c0_error", "envelope",
                        "feasible"])
            for r in self.rows:
                w.writerow([repr(r.delta), repr(r.R), repr(r.l2_error),
                            repr(r.c0_error), repr(r.envelope),
                            int(r.feasible)])


def noise_transfer_volume(f: SpaceTimeField) -> float:
    """Worst-case launch-region area transferring per-ray sup noise to a
    slice value: |F(dIf)| <= area * sup|dIf|."""
    (t_lo, t_hi), x_lo, x_hi = f.support_box
    span = np.asarray(x_hi) - np.asarray(x_lo) + (t_hi - t_lo)
    return float(np.prod(span))


def stability_curve(f: SpaceTimeField, body: ConvexBody,
                    noise_levels, epsilon: float, seed: int,
                    grid: SpectralGrid,
                    base_sinogram=None,
                    source: SpectralSource | None = None,
                    n_launch: int = 200, n_s: int = 160) -> StabilityCurve:
    """Log-stability sweep: perturb data at each level, cut, reconstruct.

    Each level perturbs the base sinogram (a 64-ray uniform draw when no
    sinogram is given); the measured sup-norm of the perturbation is the
    level's delta.  Noise enters the visible lattice values as Hermitian
    complex uniform noise of amplitude delta * V, where V is the
    worst-case launch-area factor transferring per-ray sup noise into a
    slice value.  The envelope constant is calibrated on the first
    feasible row.
    """
    noise_levels = list(noise_levels)
    if any(noise_levels[i] < noise_levels[i + 1]
           for i in range(len(noise_levels) - 1)):
        raise ValueError("noise levels must be nonincreasing")
    n = f.dim
    truth = grid.sample(f)
    sf = fourier_full(f, grid)
    rng = np.random.default_rng(seed)
    V = noise_transfer_volume(f)
    R_limit = lattice_radius_limit(grid)

    cuts: list[RCut | None] = []
    deltas: list[float] = []
    for i, level in enumerate(noise_levels):
        if level == 0.0:
            deltas.append(0.0)
            cuts.append(None)
            continue
        if base_sinogram is not None:
            from .xray import perturb_sinogram
            _, delta_hat = perturb_sinogram(base_sinogram, level, seed + i)
        else:
            delta_hat = float(np.max(np.abs(
                rng.uniform(-level, level, 64))))
        deltas.append(delta_hat)
        try:
            cuts.append(choose_R(delta_hat, epsilon, n))
        except InfeasibleSandwich:
            cuts.append(None)

    R_need = max([c.R for c in cuts if c is not None], default=0.0)
    if source is None:
        if R_need > 0.0:
            source = visible_slice_source(f, body, grid, R_need,
                                          n_launch=n_launch, n_s=n_s)
        else:
            source = source_from_spectral(sf)

    curve = StabilityCurve()
    for level, delta_hat, cut in zip(noise_levels, deltas, cuts):
        if level == 0.0:
            plan = ReconstructionPlan(R=0.98 * R_limit, delta=0.0, n=n,
                                      epsilon=epsilon)
            base = source_from_spectral(sf)
            rec, _ = truncated_inversion(base, plan)
            l2, c0 = reconstruction_errors(grid, truth, rec)
            curve.rows.append(StabilityRow(0.0, plan.R, l2, c0,
                                           float("nan"), True, False))
            continue
        if cut is None:
            curve.rows.append(StabilityRow(delta_hat, float("nan"),
                                           float("nan"), float("nan"),
                                           float("nan"), False, False))
            continue
        plan = ReconstructionPlan(R=cut.R, delta=delta_hat, n=n,
                                  epsilon=epsilon)
        mask = (grid.radius_mesh() < cut.R) & grid.visible_mask() \
            & source.available
        noisy = SpectralSource(
            grid,
            source.values + hermitian_noise(grid, mask, delta_hat * V, rng),
            source.available)
        rec, _ = truncated_inversion(noisy, plan)
        l2, c0 = reconstruction_errors(grid, truth, rec)
        curve.rows.append(StabilityRow(delta_hat, cut.R, l2, c0,
                                       float("nan"), True, cut.conflict))

    feas = [r for r in curve.rows if r.feasible and r.delta > 0]
    if feas:
        first = feas[0]
        curve.envelope_C = first.l2_error * np.log(1.0 / first.delta)
        for r in curve.rows:
            if r.feasible and r.delta > 0:
                r.envelope = float(curve.envelope_C / np.log(1.0 / r.delta))
    return curve
