"""Explicit wave solver on the unit square, DtN probing, and the boundary
identity for conformal factors.

The conformal wave equation is discretised in the divergence form

    c^{n/2} d_t^2 u = div(c^{n/2 - 1} grad u),      n = 2:  c u_tt = Lap u,

the convention under which the boundary identity

    int (Lam_g - Lam_cg) f1 conj(f2) = int rho1 du1 du2
                                       - int rho2 <grad u1, grad u2>

holds exactly (time-independent c) with rho1 = c^{n/2} - 1 and
rho2 = c^{n/2-1} - 1.  At n = 2 the gradient term drops out since rho2 = 0.

Grid: vertex-centred lattice on [0,1]^2 including the boundary; leapfrog in
time; one-sided second-order normal derivative for the DtN trace.  Corner
nodes carry Dirichlet data but are excluded from DtN outputs (no single
outward normal exists there).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .conformal import ConformalFactor, constant_factor
from .errors import CFLViolation, Unstable
from .fields import bump_profile


@dataclass
class WaveGrid:
    nx: int                  # nodes per axis, boundary included
    k: float                 # time step
    T: float

    def __post_init__(self):
        self.h = 1.0 / (self.nx - 1)
        self.nt = int(round(self.T / self.k)) + 1

    def check_cfl(self, c_max: float, n: int = 2) -> None:
        limit = self.h / np.sqrt(n * c_max)
        if self.k > limit * (1 + 1e-12):
            raise CFLViolation(
                f"k = {self.k:.3e} exceeds h/sqrt(n max c) = {limit:.3e}")

    @property
    def times(self) -> np.ndarray:
        return self.k * np.arange(self.nt)

    def mesh(self) -> np.ndarray:
        ax = np.linspace(0.0, 1.0, self.nx)
        return np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)

    # --- boundary path -------------------------------------------------

    def boundary_indices(self) -> list[tuple[int, int]]:
        """Closed path around the square, arclength order, corners included."""
        n = self.nx
        path = [(i, 0) for i in range(n - 1)]
        path += [(n - 1, j) for j in range(n - 1)]
        path += [(i, n - 1) for i in range(n - 1, 0, -1)]
        path += [(0, j) for j in range(n - 1, 0, -1)]
        return path

    def boundary_points(self) -> np.ndarray:
        return np.array([(i * self.h, j * self.h)
                         for i, j in self.boundary_indices()])

    def boundary_arclength(self) -> np.ndarray:
        return self.h * np.arange(len(self.boundary_indices()))

    def corner_mask(self) -> np.ndarray:
        pts = self.boundary_indices()
        n = self.nx - 1
        return np.array([(i in (0, n)) and (j in (0, n)) for i, j in pts])


@dataclass
class BoundaryData:
    """Dirichlet input f(t, s) on the boundary path, s = arclength.

    Must vanish to first order at t = 0 (zero-initial-data compatibility).
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "probe"

    def sample(self, grid: WaveGrid) -> np.ndarray:
        s = grid.boundary_arclength()
        return np.stack([self.func(np.full(s.shape, t), s)
                         for t in grid.times])


def time_window(T: float, rise: float = 0.3) -> Callable:
    """Smooth window vanishing identically near t = 0, plateau-free bump."""
    center = 0.5 * (T + rise)
    width = 0.5 * (T - rise) + 0.02 * T

    def w(t):
        return bump_profile(((np.asarray(t, float) - center) / width) ** 2)

    return w


def boundary_probes(count: int, T: float, perimeter: float = 4.0
                    ) -> list[BoundaryData]:
    """Tensor probes: time window x boundary Fourier modes."""
    w = time_window(T)
    probes = []
    m = 1
    while len(probes) < count:
        for trig in (np.cos, np.sin):
            if len(probes) >= count:
                break
            k_ang = 2.0 * np.pi * m / perimeter

            def func(t, s, trig=trig, k_ang=k_ang):
                return w(t) * trig(k_ang * s)

            probes.append(BoundaryData(func, name=f"{trig.__name__}{m}"))
        m += 1
    return probes


# ---------------------------------------------------------------- solver


@dataclass
class WaveSolution:
    grid: WaveGrid
    u: np.ndarray            # (nt, nx, nx)
    c_max: float

    def dt_interior(self) -> np.ndarray:
        """Centred time derivative on interior time levels (nt-2, nx, nx)."""
        return (self.u[2:] - self.u[:-2]) / (2.0 * self.grid.k)

    def grad(self) -> tuple[np.ndarray, np.ndarray]:
        """Centred spatial gradient on interior nodes, zero on the frame."""
        h = self.grid.h
        gx = np.zeros_like(self.u)
        gy = np.zeros_like(self.u)
        gx[:, 1:-1, :] = (self.u[:, 2:, :] - self.u[:, :-2, :]) / (2 * h)
        gy[:, :, 1:-1] = (self.u[:, :, 2:] - self.u[:, :, :-2]) / (2 * h)
        return gx, gy


def _laplacian(u: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(u)
    out[1:-1, 1:-1] = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:]
                       + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / h**2
    return out


def solve_dirichlet(c: ConformalFactor, grid: WaveGrid, data: BoundaryData,
                    u0: np.ndarray | None = None,
                    v0: np.ndarray | None = None,
                    source: Callable | None = None) -> WaveSolution:
    """Leapfrog solution of c u_tt = Lap u + F with Dirichlet data.

    Zero initial data unless u0/v0 given (used by the energy-conservation
    checks).  The first step uses the Taylor expansion
    u^1 = u^0 + k v^0 + (k^2/2) (Lap u^0 + F^0)/c.
    """
    mesh = grid.mesh()
    c_grid = [np.asarray(c(np.full(mesh.shape[:-1], t), mesh))
              for t in grid.times]
    c_max = float(max(np.max(cg) for cg in c_grid))
    grid.check_cfl(c_max)

    bidx = grid.boundary_indices()
    bI = np.array([i for i, _ in bidx])
    bJ = np.array([j for _, j in bidx])
    bvals = data.sample(grid) if data is not None else \
        np.zeros((grid.nt, len(bidx)))

    nt, nx, h, k = grid.nt, grid.nx, grid.h, grid.k
    u = np.zeros((nt, nx, nx))
    u_prev = np.zeros((nx, nx)) if u0 is None else u0.copy()
    u_prev[bI, bJ] = bvals[0]
    u[0] = u_prev

    def F_at(m):
        if source is None:
            return 0.0
        return source(grid.times[m], mesh)

    first = u_prev + (k if v0 is not None else 0.0) * (v0 if v0 is not None
                                                       else 0.0)
    first = first + 0.5 * k**2 * (_laplacian(u_prev, h) + F_at(0)) / c_grid[0]
    first[bI, bJ] = bvals[1]
    u[1] = first

    bound = 1e8 * (1.0 + np.max(np.abs(bvals))
                   + (np.max(np.abs(u0)) if u0 is not None else 0.0)
                   + (np.max(np.abs(v0)) if v0 is not None else 0.0))
    for m in range(1, nt - 1):
        nxt = (2.0 * u[m] - u[m - 1]
               + k**2 * (_laplacian(u[m], h) + F_at(m)) / c_grid[m])
        nxt[bI, bJ] = bvals[m + 1]
        u[m + 1] = nxt
        if not np.all(np.isfinite(nxt)) or np.max(np.abs(nxt)) > bound:
            raise Unstable(f"solution blew up at step {m + 1}")
    return WaveSolution(grid, u, c_max)


def solve_source(c: ConformalFactor, grid: WaveGrid,
                 source: Callable) -> WaveSolution:
    """Inhomogeneous problem with zero boundary and initial data."""
    return solve_dirichlet(c, grid, data=None, source=source)


def energy_bound_report(sol: WaveSolution, c: ConformalFactor,
                        data: BoundaryData) -> dict:
    """Observed constant in sup_t(|u|_H1 + |du/dt|_L2) <= C |f|_H1.

    Reported, not asserted: the continuum bound guarantees existence of
    some C; the discrete ratio documents the solver's realisation of it.
    """
    g = sol.grid
    mesh = g.mesh()
    h = g.h
    sup = 0.0
    for m in range(g.nt - 1):
        u = sol.u[m]
        gx = (u[1:, :] - u[:-1, :]) / h
        gy = (u[:, 1:] - u[:, :-1]) / h
        h1 = np.sqrt(np.sum(u * u) * h * h
                     + (np.sum(gx * gx) + np.sum(gy * gy)) * h * h)
        du = (sol.u[m + 1] - sol.u[m]) / g.k
        l2 = np.sqrt(np.sum(du * du) * h * h)
        sup = max(sup, h1 + l2)
    fnorm = h1_boundary_norm(g, data.sample(g))
    return {"sup_energy": float(sup), "boundary_h1": float(fnorm),
            "constant": float(sup / fnorm) if fnorm > 0 else 0.0}


def discrete_energy(sol: WaveSolution, c: ConformalFactor) -> np.ndarray:
    """Leapfrog energy at half time steps (kinetic + cross-gradient form)."""
    g = sol.grid
    mesh = g.mesh()
    u = sol.u
    k, h = g.k, g.h
    es = []
    for m in range(g.nt - 1):
        cg = np.asarray(c(np.full(mesh.shape[:-1], g.times[m]), mesh))
        du = (u[m + 1] - u[m]) / k
        kin = 0.5 * np.sum(cg * du * du) * h * h
        gx0 = (u[m][1:, :] - u[m][:-1, :]) / h
        gx1 = (u[m + 1][1:, :] - u[m + 1][:-1, :]) / h
        gy0 = (u[m][:, 1:] - u[m][:, :-1]) / h
        gy1 = (u[m + 1][:, 1:] - u[m + 1][:, :-1]) / h
        pot = 0.5 * (np.sum(gx0 * gx1) + np.sum(gy0 * gy1)) * h * h
        es.append(kin + pot)
    return np.array(es)


# ---------------------------------------------------------------- norms


def h1_boundary_norm(grid: WaveGrid, bvals: np.ndarray) -> float:
    """Discrete H^1 norm of boundary data: trapezoid in time, lumped mass
    along the closed path, value + time-derivative + arc-derivative."""
    k, h = grid.k, grid.h
    dt = np.gradient(bvals, k, axis=0)
    ds = (np.roll(bvals, -1, axis=1) - np.roll(bvals, 1, axis=1)) / (2 * h)
    wt = np.ones(grid.nt)
    wt[0] = wt[-1] = 0.5
    total = np.sum(wt[:, None] * (bvals**2 + dt**2 + ds**2)) * k * h
    return float(np.sqrt(total))


def l2_boundary_norm(grid: WaveGrid, bvals: np.ndarray,
                     mask: np.ndarray | None = None) -> float:
    k, h = grid.k, grid.h
    wt = np.ones(grid.nt)
    wt[0] = wt[-1] = 0.5
    vals = bvals if mask is None else bvals[:, ~mask]
    return float(np.sqrt(np.sum(wt[:, None] * vals**2) * k * h))


# ---------------------------------------------------------------- DtN


@dataclass
class DtNProbe:
    """One probe of the DtN map: input, solution, conormal trace, norms."""

    data: BoundaryData
    bvals: np.ndarray          # (nt, n_boundary) Dirichlet input samples
    trace: np.ndarray          # (nt, n_boundary) conormal output, NaN corners
    h1_norm: float
    l2_norm: float

    @property
    def ratio(self) -> float:
        return self.l2_norm / self.h1_norm


def run_probe(c: ConformalFactor, grid: WaveGrid,
              data: BoundaryData) -> DtNProbe:
    """Solve, trace, and norm one boundary input.

    The input must vanish to first order at t = 0 (zero-initial-data
    compatibility); violations raise.
    """
    bvals = data.sample(grid)
    if np.max(np.abs(bvals[0])) > 1e-12 or \
            np.max(np.abs(bvals[1] - bvals[0])) / grid.k > 1e-6:
        raise ValueError("boundary input must vanish to first order at t=0")
    trace = dtn_apply(c, grid, data)
    corner = grid.corner_mask()
    return DtNProbe(data, bvals, trace,
                    h1_boundary_norm(grid, bvals),
                    l2_boundary_norm(grid, np.nan_to_num(trace), corner))


def dtn_apply(c: ConformalFactor, grid: WaveGrid, data: BoundaryData,
              sol: WaveSolution | None = None) -> np.ndarray:
    """Conormal trace c * du/dnu on the boundary path (corners NaN).

    One-sided three-point second-order stencils along the inward axis.
    """
    if sol is None:
        sol = solve_dirichlet(c, grid, data)
    g = grid
    u = sol.u
    h = g.h
    mesh = g.mesh()
    out = np.full((g.nt, len(g.boundary_indices())), np.nan)
    corner = g.corner_mask()
    for idx, (i, j) in enumerate(g.boundary_indices()):
        if corner[idx]:
            continue
        if i == 0:
            dn = -(-3.0 * u[:, 0, j] + 4.0 * u[:, 1, j] - u[:, 2, j]) / (2 * h)
        elif i == g.nx - 1:
            dn = -(-3.0 * u[:, -1, j] + 4.0 * u[:, -2, j] - u[:, -3, j]) / (2 * h)
        elif j == 0:
            dn = -(-3.0 * u[:, i, 0] + 4.0 * u[:, i, 1] - u[:, i, 2]) / (2 * h)
        else:
            dn = -(-3.0 * u[:, i, -1] + 4.0 * u[:, i, -2] - u[:, i, -3]) / (2 * h)
        cb = c(g.times, np.broadcast_to(mesh[i, j], (g.nt, 2)))
        out[:, idx] = cb * dn
    return out


def dtn_norm_diff(c1: ConformalFactor, c2: ConformalFactor, grid: WaveGrid,
                  probes: list[BoundaryData]) -> dict:
    """Probed lower bound of the H^1_0 -> L^2 norm of Lam_c1 - Lam_c2."""
    if not probes:
        raise ValueError("need at least one probe")
    corner = grid.corner_mask()
    best = 0.0
    ratios = []
    for probe in probes:
        bvals = probe.sample(grid)
        lam1 = dtn_apply(c1, grid, probe)
        lam2 = dtn_apply(c2, grid, probe)
        num = l2_boundary_norm(grid, np.nan_to_num(lam1 - lam2), corner)
        den = h1_boundary_norm(grid, bvals)
        ratios.append(num / den)
        best = max(best, num / den)
    return {"norm_lower_bound": best, "ratios": ratios}


# ---------------------------------------------------------------- rho algebra


@dataclass
class RhoFactors:
    c: ConformalFactor
    n: int

    def rho0(self, t, x):
        return 1.0 - self.c(t, x)

    def rho1(self, t, x):
        return self.c(t, x) ** (self.n / 2) - 1.0

    def rho2(self, t, x):
        return self.c(t, x) ** (self.n / 2 - 1) - 1.0

    def rho(self, t, x):
        return self.rho1(t, x) - self.rho2(t, x)

    def identity_residual(self, t, x) -> float:
        """Pointwise |rho - c^(n/2-1)(c-1)|, algebraically zero."""
        cv = self.c(t, x)
        return float(np.max(np.abs(
            self.rho(t, x) - cv ** (self.n / 2 - 1) * (cv - 1.0))))

    def c1_bound_check(self, x_lo, x_hi, n_samples: int = 2000,
                       seed: int = 0) -> dict:
        """Sampled |rho_j|_C1 <= C |rho0|_C0 with C from the class bounds."""
        rng = np.random.default_rng(seed)
        ts = rng.uniform(0.0, self.c.T, n_samples)
        xs = rng.uniform(np.asarray(x_lo, float), np.asarray(x_hi, float),
                         (n_samples, self.c.dim))
        cv = self.c(ts, xs)
        gv = self.c.grad_x(ts, xs)
        dtv = self.c.dt(ts, xs)
        rho0_c0 = float(np.max(np.abs(1.0 - cv)))
        out = {"rho0_c0": rho0_c0}
        M0, m0 = self.c.M0, self.c.m0
        for name, expo in (("rho1", self.n / 2), ("rho2", self.n / 2 - 1)):
            vals = cv**expo - 1.0
            dvals = expo * cv ** (expo - 1)
            c1 = max(float(np.max(np.abs(vals))),
                     float(np.max(np.abs(dvals[:, None] * gv))),
                     float(np.max(np.abs(dvals * dtv))))
            # |c^e - 1| <= e max(c)^(e-1,0) m0^(min(e-1,0)) |c-1|, and the
            # derivative factor is bounded the same way
            bound = (abs(expo) * max(M0 ** max(expo - 1, 0),
                                     m0 ** min(expo - 1, 0))
                     * (1.0 + M0) + 1.0)
            out[name] = {"c1": c1, "bound_constant": bound,
                         "ok": c1 <= bound * max(rho0_c0, 1e-300)}
        return out


def rho_factors(c: ConformalFactor, n: int) -> RhoFactors:
    return RhoFactors(c, n)


# ---------------------------------------------------------------- identity


def _trapz_time(vals: np.ndarray, k: float) -> np.ndarray:
    wt = np.ones(vals.shape[0])
    wt[0] = wt[-1] = 0.5
    return np.tensordot(wt, vals, axes=(0, 0)) * k


def key_identity_check(c: ConformalFactor, grid: WaveGrid,
                       f1: BoundaryData, f2: BoundaryData,
                       n: int = 2) -> dict:
    """Boundary pairing of (Lam_g - Lam_cg) f1 with f2 against the interior
    rho-weighted energy pairing.

    u1 solves the c = 1 problem forward with data f1; u2 solves the
    conformal problem backward (zero state at t = T) with data f2, realised
    by time reversal of the scheme.  Exact in the continuum for
    time-independent c; the discrete gap shrinks at second order.
    """
    g = constant_factor(1.0, dim=c.dim, T=c.T)
    sol1 = solve_dirichlet(g, grid, f1)
    lam_g = dtn_apply(g, grid, f1, sol=sol1)
    lam_cg = dtn_apply(c, grid, f1)

    # backward conformal solve via time reversal
    T = grid.T

    def rev_func(t, s):
        return f2.func(T - np.asarray(t, dtype=float), s)

    if c.time_dependent:
        raise ValueError("identity check requires time-independent c")
    sol2_rev = solve_dirichlet(c, grid, BoundaryData(rev_func, "rev"))
    u2 = sol2_rev.u[::-1].copy()
    sol2 = WaveSolution(grid, u2, sol2_rev.c_max)

    corner = grid.corner_mask()
    f2_vals = f2.sample(grid)
    diff = np.nan_to_num(lam_g - lam_cg)[:, ~corner]
    wt = np.ones(grid.nt)
    wt[0] = wt[-1] = 0.5
    lhs = float(np.sum(wt[:, None] * diff * f2_vals[:, ~corner])
                * grid.k * grid.h)

    mesh = grid.mesh()
    factors = rho_factors(c, n)
    tmid = grid.times[1:-1]
    du1 = sol1.dt_interior()
    du2 = sol2.dt_interior()
    rho1_vals = np.stack([factors.rho1(np.full(mesh.shape[:-1], t), mesh)
                          for t in tmid])
    term_t = _trapz_time(
        np.sum(rho1_vals * du1 * du2, axis=(1, 2))[..., None],
        grid.k)[0] * grid.h**2

    g1x, g1y = sol1.grad()
    g2x, g2y = sol2.grad()
    rho2_vals = np.stack([factors.rho2(np.full(mesh.shape[:-1], t), mesh)
                          for t in grid.times])
    term_x = _trapz_time(
        np.sum(rho2_vals * (g1x * g2x + g1y * g2y),
               axis=(1, 2))[..., None], grid.k)[0] * grid.h**2

    rhs = float(term_t - term_x)
    gap = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)
    return {"lhs": lhs, "rhs": rhs, "relative_gap": gap}


# ---------------------------------------------------------------- stability


def conformal_stability_experiment(scales, grid: WaveGrid,
                                   probe_count: int = 6,
                                   bump_center=(0.5, 0.5),
                                   bump_width: float = 0.3,
                                   T: float | None = None) -> dict:
    """Rows (|1 - c_s|_L2, probed DtN norm, envelope) for c_s = 1 + s bump.

    The envelope constant is the smallest C with |1 - c_s| <=
    C / log(1 / norm) across all rows (fit-then-assert protocol).
    """
    from .conformal import bump_factor

    T = T if T is not None else grid.T
    probes = boundary_probes(probe_count, T)
    g1 = constant_factor(1.0, T=T)
    mesh = grid.mesh()
    rows = []
    for s in scales:
        cs = bump_factor(s, bump_center, bump_width, T=T,
                         name=f"bump{s:g}")
        norm = dtn_norm_diff(g1, cs, grid, probes)["norm_lower_bound"]
        vals = np.stack([1.0 - cs(np.full(mesh.shape[:-1], t), mesh)
                         for t in grid.times])
        wt = np.ones(grid.nt)
        wt[0] = wt[-1] = 0.5
        l2 = float(np.sqrt(np.sum(wt[:, None, None] * vals**2)
                           * grid.k * grid.h**2))
        rows.append({"scale": float(s), "c_dist_l2": l2, "dtn_norm": norm})
    # degenerate rows (vanishing DtN difference) carry no log-scale
    # information and are excluded from the envelope fit
    live = [r for r in rows if r["dtn_norm"] > 1e-14]
    for r in rows:
        r["log_inv_norm"] = (float(np.log(1.0 / r["dtn_norm"]))
                             if r["dtn_norm"] > 1e-14 else float("inf"))
    C = max((r["c_dist_l2"] * r["log_inv_norm"] for r in live),
            default=float("nan"))
    for r in rows:
        r["envelope"] = (C / r["log_inv_norm"]
                         if np.isfinite(r["log_inv_norm"]) else 0.0)
    return {"rows": rows, "envelope_C": C}
