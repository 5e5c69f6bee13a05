"""Discrete (n+1)-dimensional Fourier analysis and the slice identity.

Convention (no 2*pi in the forward exponent):

    f^(tau, xi) = integral f(t, x) exp(-i (t tau + x . xi)) dt dx,

so inversion carries (2*pi)^-(n+1).  On a uniform sample grid the forward
transform is the trapezoid rule, i.e. a DFT scaled by the cell volume; the
frequency lattice is the DFT-conjugate lattice, stored centered.

Phase space splits into the visible region {|tau| <= |xi|}, where slice
data determines f^ exactly, and the hidden region {|tau| > |xi|}, where
only the exponentially weighted envelope bound holds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AliasingSuspected, CoverageError, NotVisible, ZeroXi
from .fields import SpaceTimeField
from .geometry import ConvexBody


class FrequencyPoint(NamedTuple):
    """A point (tau, xi) of the frequency space dual to (t, x)."""

    tau: float
    xi: tuple[float, ...]

    @property
    def region(self) -> str:
        return classify_region(self.tau, self.xi)


# ---------------------------------------------------------------- regions


def is_visible(tau, xi) -> np.ndarray:
    """Visible iff |tau| <= |xi| (ties visible).

    |xi| is evaluated with max-scaling so the comparison stays exact even
    where naive squaring would underflow.
    """
    tau = np.asarray(tau, dtype=float)
    xi = np.asarray(xi, dtype=float)
    scale = np.max(np.abs(xi), axis=-1)
    safe = np.where(scale > 0.0, scale, 1.0)
    norm = safe * np.sqrt(np.sum((xi / safe[..., None]) ** 2, axis=-1))
    return np.abs(tau) <= norm


def classify_region(tau: float, xi) -> str:
    return "Visible" if bool(is_visible(tau, xi)) else "Hidden"


def visible_direction(tau, xi) -> np.ndarray:
    """Unit omega with omega . xi = -tau, deterministic construction.

    omega = -(tau/|xi|^2) xi + sqrt(1 - tau^2/|xi|^2) e_perp, where e_perp
    is the first canonical basis vector with nonzero rejection against xi,
    normalised.  Supports batched xi with shape (..., n).
    """
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    norm2 = np.sum(xi * xi, axis=-1)
    if np.any(norm2 == 0.0):
        if np.all(np.abs(tau) == 0.0):
            raise ZeroXi("xi = 0 with tau = 0: direction undefined at the origin")
        raise ZeroXi("xi = 0: no direction can match a nonzero tau")
    if np.any(np.abs(tau) > np.sqrt(norm2) * (1 + 1e-15)):
        raise NotVisible("|tau| > |xi|: point lies in the hidden region")

    n = xi.shape[-1]
    batch = xi.shape[:-1]
    e_perp = np.zeros(batch + (n,))
    chosen = np.zeros(batch, dtype=bool)
    for j in range(n):
        ej = np.zeros(n)
        ej[j] = 1.0
        rej = ej - (xi[..., j] / norm2)[..., None] * xi
        rnorm = np.linalg.norm(rej, axis=-1)
        take = (~chosen) & (rnorm > 1e-12)
        if np.any(take):
            e_perp[take] = rej[take] / rnorm[take][..., None]
            chosen |= take
        if np.all(chosen):
            break
    # second orthogonalisation pass: when the chosen basis vector is almost
    # parallel to xi the first rejection is all cancellation noise
    dot = np.sum(e_perp * xi, axis=-1)
    e_perp = e_perp - (dot / norm2)[..., None] * xi
    e_perp = e_perp / np.linalg.norm(e_perp, axis=-1, keepdims=True)
    ratio = np.clip(tau * tau / norm2, 0.0, 1.0)
    omega = (-(tau / norm2)[..., None] * xi
             + np.sqrt(1.0 - ratio)[..., None] * e_perp)
    return omega / np.linalg.norm(omega, axis=-1, keepdims=True)


def hidden_bound(tau: float, delta: float, C: float) -> float:
    """Certified envelope C * exp(|tau|/3) |tau|^(-1/3) delta^(2/3)."""
    if tau == 0:
        raise ValueError("hidden bound needs |tau| > 0")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    at = abs(tau)
    return C * np.exp(at / 3.0) * at ** (-1.0 / 3.0) * delta ** (2.0 / 3.0)


# ---------------------------------------------------------------- grid


@dataclass
class SpectralGrid:
    """Uniform (t, x) sample grid and its DFT-conjugate frequency lattice."""

    t0: float
    dt: float
    nt: int
    x0: np.ndarray
    dx: np.ndarray
    nx: tuple[int, ...]
    dim: int

    @classmethod
    def for_field(cls, f: SpaceTimeField, n_points: int = 64,
                  pad: float = 0.25,
                  extent: float | None = None) -> "SpectralGrid":
        """Grid covering the field support.

        With ``extent`` unset the box is the support padded by ``pad`` per
        side.  An explicit ``extent`` centers a box of that total length on
        the support (heavy zero padding refines the frequency lattice;
        the delta-sweep experiments need that resolution).
        """
        (t_lo, t_hi), x_lo, x_hi = f.support_box
        if extent is None:
            t_pad = pad * (t_hi - t_lo)
            x_pad = pad * (x_hi - x_lo)
            t0, t1 = t_lo - t_pad, t_hi + t_pad
            lo, hi = x_lo - x_pad, x_hi + x_pad
        else:
            span = max(t_hi - t_lo, float(np.max(np.asarray(x_hi)
                                                 - np.asarray(x_lo))))
            if extent < span:
                raise ValueError(
                    f"extent {extent} smaller than the field support span "
                    f"{span:.3g}: samples would truncate the field")
            tc = 0.5 * (t_lo + t_hi)
            xc = 0.5 * (x_lo + x_hi)
            t0, t1 = tc - extent / 2, tc + extent / 2
            lo, hi = xc - extent / 2, xc + extent / 2
        nxs = (n_points,) * f.dim
        return cls(
            t0=float(t0), dt=float((t1 - t0) / n_points), nt=n_points,
            x0=np.asarray(lo, dtype=float),
            dx=(np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float))
               / n_points,
            nx=nxs, dim=f.dim)

    # --- sample axes -------------------------------------------------

    @property
    def t_samples(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nt)

    def x_samples(self, axis: int) -> np.ndarray:
        return self.x0[axis] + self.dx[axis] * np.arange(self.nx[axis])

    @property
    def cell_volume(self) -> float:
        return float(self.dt * np.prod(self.dx))

    # --- frequency axes (centered / fftshift order) -------------------

    @property
    def taus(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(self.nt, self.dt))

    def xis(self, axis: int) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftshift(
            np.fft.fftfreq(self.nx[axis], self.dx[axis]))

    @property
    def dk(self) -> np.ndarray:
        """Frequency spacing per axis, tau first."""
        return np.array([2 * np.pi / (self.nt * self.dt)]
                        + [2 * np.pi / (n * d)
                           for n, d in zip(self.nx, self.dx)])

    @property
    def k_max(self) -> float:
        """Smallest per-axis Nyquist frequency."""
        return float(min(np.pi / self.dt, *(np.pi / d for d in self.dx)))

    def frequency_mesh(self):
        axes = [self.taus] + [self.xis(a) for a in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")

    def radius_mesh(self) -> np.ndarray:
        mesh = self.frequency_mesh()
        return np.sqrt(sum(m * m for m in mesh))

    def visible_mask(self) -> np.ndarray:
        mesh = self.frequency_mesh()
        return is_visible(mesh[0], np.stack(mesh[1:], axis=-1))

    # --- transforms ----------------------------------------------------

    def sample(self, f: SpaceTimeField) -> np.ndarray:
        axes = [self.x_samples(a) for a in range(self.dim)]
        xmesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        out = np.empty((self.nt,) + self.nx)
        for j, t in enumerate(self.t_samples):
            out[j] = f(np.full(self.nx, t), xmesh)
        return out

    def _corner_phase(self) -> np.ndarray:
        """exp(-i (t0 tau + x0 . xi)) on the centered lattice."""
        mesh = self.frequency_mesh()
        phase = self.t0 * mesh[0]
        for a in range(self.dim):
            phase = phase + self.x0[a] * mesh[a + 1]
        return np.exp(-1j * phase)

    def forward(self, samples: np.ndarray) -> np.ndarray:
        """Trapezoid-rule transform on the centered frequency lattice."""
        spec = np.fft.fftshift(np.fft.fftn(samples))
        return self.cell_volume * self._corner_phase() * spec

    def inverse(self, values: np.ndarray) -> np.ndarray:
        """Exact inverse of :meth:`forward` back onto the sample grid."""
        spec = values / (self.cell_volume * self._corner_phase())
        return np.fft.ifftn(np.fft.ifftshift(spec))

    def point_transform(self, samples: np.ndarray, taus, xis) -> np.ndarray:
        """Direct trapezoid sum at arbitrary (tau, xi) points.

        Same quadrature as :meth:`forward`, so lattice and off-lattice
        evaluations are mutually consistent.
        """
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        xis = np.atleast_2d(np.asarray(xis, dtype=float))
        out = np.empty(taus.shape, dtype=complex)
        ts = self.t_samples
        axes = [self.x_samples(a) for a in range(self.dim)]
        for i, (tau, xi) in enumerate(zip(taus, xis)):
            et = np.exp(-1j * ts * tau)
            phis = [np.exp(-1j * axes[a] * xi[a]) for a in range(self.dim)]
            if self.dim == 2:
                out[i] = np.einsum("tab,t,a,b->", samples, et, *phis)
            else:
                out[i] = np.einsum("tabc,t,a,b,c->", samples, et, *phis)
        return self.cell_volume * out

    def discrete_l2(self, samples: np.ndarray) -> float:
        return float(np.sqrt(self.cell_volume * np.sum(np.abs(samples) ** 2)))


# ---------------------------------------------------------------- field


@dataclass
class SpectralField:
    grid: SpectralGrid
    values: np.ndarray           # centered complex lattice values
    visible: np.ndarray          # bool mask, True on the visible region

    def hermitian_residual(self) -> float:
        """Relative sup distance between f^(-k) and conj(f^(k)).

        For even lattice sizes the most negative frequency row has no
        mirror; it is excluded from the comparison.
        """
        v = self.values
        sl = tuple(slice(1, None) for _ in range(v.ndim))
        core = v[sl]
        flipped = np.conj(core[tuple(slice(None, None, -1)
                                     for _ in range(v.ndim))])
        scale = np.max(np.abs(core)) + 1e-300
        return float(np.max(np.abs(core - flipped)) / scale)

    def region_labels(self) -> np.ndarray:
        return np.where(self.visible, "Visible", "Hidden")

    def write_csv(self, path) -> None:
        grid = self.grid
        mesh = grid.frequency_mesh()
        labels = self.region_labels()
        header = (["tau"] + [f"xi{i+1}" for i in range(grid.dim)]
                  + ["re", "im", "region"])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            it = np.nditer(self.values, flags=["multi_index"])
            for val in it:
                idx = it.multi_index
                row = [repr(float(mesh[0][idx]))]
                row += [repr(float(mesh[a + 1][idx])) for a in range(grid.dim)]
                row += [repr(float(val.real)), repr(float(val.imag)),
                        str(labels[idx])]
                w.writerow(row)


def fourier_full(f: SpaceTimeField, grid: SpectralGrid,
                 check_aliasing: bool = False,
                 probe_seed: int = 7) -> SpectralField:
    """Full transform of f on the grid's frequency lattice."""
    samples = grid.sample(f)
    values = grid.forward(samples)
    if check_aliasing:
        rng = np.random.default_rng(probe_seed)
        k = 0.4 * grid.k_max
        taus = rng.uniform(-k, k, 8)
        xis = rng.uniform(-k, k, (8, grid.dim))
        zoom = SpectralGrid(grid.t0, grid.dt / 2, grid.nt * 2, grid.x0,
                            grid.dx / 2, tuple(2 * n for n in grid.nx),
                            grid.dim)
        base = grid.point_transform(samples, taus, xis)
        fine = zoom.point_transform(zoom.sample(f), taus, xis)
        rel = np.max(np.abs(base - fine) / (1.0 + np.abs(fine)))
        if rel > 1e-6:
            raise AliasingSuspected(
                f"grid doubling moved probe values by {rel:.3e} relative")
    return SpectralField(grid, values, grid.visible_mask())


def fourier_at(f: SpaceTimeField, grid: SpectralGrid, taus, xis) -> np.ndarray:
    """f^ at arbitrary frequency points via the direct trapezoid sum."""
    return grid.point_transform(grid.sample(f), taus, xis)


# ---------------------------------------------------------------- slices


def _coverage_check(f: SpaceTimeField, body: ConvexBody,
                    n_grid: int = 24) -> None:
    """The spatial support (where f is actually nonzero) must sit strictly
    inside the body; the bounding box alone may poke outside it."""
    lo, hi = np.asarray(f.x_lo), np.asarray(f.x_hi)
    axes = [np.linspace(lo[a], hi[a], n_grid) for a in range(f.dim)]
    g = np.stack(np.meshgrid(*axes, indexing="ij"),
                 axis=-1).reshape(-1, f.dim)
    (t_lo, t_hi), _, _ = f.support_box
    ts = np.linspace(t_lo, t_hi, 7)[1:-1]
    alive = np.zeros(g.shape[0], dtype=bool)
    for t in ts:
        alive |= np.abs(f(np.full(g.shape[0], t), g)) > 1e-13
    if np.any(body.phi(g[alive]) >= 0.0):
        raise CoverageError(
            "field support reaches the domain boundary: the chord family "
            "cannot sweep it")


def _perp_frame(omega: np.ndarray) -> list[np.ndarray]:
    if omega.size == 2:
        return [np.array([-omega[1], omega[0]])]
    a = np.array([1.0, 0.0, 0.0])
    if abs(omega[0]) > 0.9:
        a = np.array([0.0, 1.0, 0.0])
    e1 = a - np.dot(a, omega) * omega
    e1 /= np.linalg.norm(e1)
    return [e1, np.cross(omega, e1)]


def slice_from_sinogram(f: SpaceTimeField, omega, xi, body: ConvexBody,
                        n_launch: int = 160, n_s: int = 160,
                        pad: float = 0.06,
                        use_separable: bool = True) -> complex:
    """Spatial Fourier transform of the ray data in direction omega at xi.

    Evaluates F_{x->xi}(If)(xi, omega) by quadrature organised along the
    chord family: launch points X live on a grid in the frame spanned by
    omega and its orthogonal complement, each carries the ray integral
    q(X) = int f(s, X + s omega) ds, and the result is the spatial Fourier
    sum of q.  Equals f^(-omega . xi, xi); the identity is exercised by
    comparing against the tensor-grid transform, which organises the same
    integral along coordinate axes instead.

    n_launch sets the point count across the support (perpendicular axis);
    the along-ray axis inherits the same spacing.  For separable fields
    the s-integration is an exact discrete convolution along the ray,
    which is much cheaper; pass use_separable=False to force the direct
    tensor evaluation.
    """
    omega = np.asarray(omega, dtype=float)
    omega = omega / np.linalg.norm(omega)
    xi = np.asarray(xi, dtype=float)
    _coverage_check(f, body)

    (t_lo, t_hi), x_lo, x_hi = f.support_box
    center = 0.5 * (np.asarray(x_lo) + np.asarray(x_hi))
    half = 0.5 * (np.asarray(x_hi) - np.asarray(x_lo))
    perp = _perp_frame(omega)

    h_par = float(np.sum(np.abs(omega) * half))
    h_perp = [float(np.sum(np.abs(e) * half)) for e in perp]

    # launch coordinates: x = center + u*omega + sum_k v_k*perp_k, with u
    # shifted by the time support so every chord through the support at
    # some admissible time is launched
    perp_pad = pad * 2 * max(h_perp)
    spacing = (2 * max(h_perp) + 2 * perp_pad) / n_launch
    u_lo = -h_par - t_hi - perp_pad
    u_hi = h_par - t_lo + perp_pad
    n_u = int(np.ceil((u_hi - u_lo) / spacing)) + 1
    u = u_lo + spacing * np.arange(n_u)
    v_axes = [np.arange(n_launch) * spacing - (h + perp_pad)
              for h in h_perp]

    s_grid = np.linspace(t_lo, t_hi, n_s)
    ds = float(s_grid[1] - s_grid[0])

    if use_separable and f.separable is not None:
        # f = g(t) H(x):  q(u, v) = sum_k g(s_k) H(center + (u+s_k) omega
        # + v.perp) ds, an exact correlation on a shared lattice when the
        # s-grid uses the launch spacing
        n_s_conv = int(np.ceil((t_hi - t_lo) / spacing)) + 1
        s_conv = t_lo + spacing * np.arange(n_s_conv)
        g, H = f.separable
        gv = g(s_conv)
        m = u_lo + t_lo + spacing * np.arange(n_u + n_s_conv - 1)
        mesh = np.meshgrid(m, *v_axes, indexing="ij")
        pts = (center + mesh[0][..., None] * omega
               + sum(mesh[k + 1][..., None] * perp[k]
                     for k in range(len(perp))))
        Hv = H(pts)
        q = np.zeros((n_u,) + Hv.shape[1:])
        for k in range(n_s_conv):
            q += gv[k] * Hv[k:k + n_u]
        q *= spacing
    else:
        mesh = np.meshgrid(u, *v_axes, indexing="ij")
        base = (center + mesh[0][..., None] * omega
                + sum(mesh[k + 1][..., None] * perp[k]
                      for k in range(len(perp))))
        q = np.zeros(base.shape[:-1])
        for s in s_grid:
            q += f(np.full(base.shape[:-1], s), base + s * omega)
        q *= ds

    # Fourier sum: X . xi = center.xi + u (omega.xi) + sum v_k (perp_k.xi)
    ph_u = np.exp(-1j * u * float(np.dot(omega, xi)))
    ph_v = [np.exp(-1j * v_axes[k] * float(np.dot(perp[k], xi)))
            for k in range(len(perp))]
    if f.dim == 2:
        val = np.einsum("ab,a,b->", q, ph_u, ph_v[0])
    else:
        val = np.einsum("abc,a,b,c->", q, ph_u, ph_v[0], ph_v[1])
    cell = spacing ** (1 + len(perp))
    return complex(val * cell * np.exp(-1j * float(np.dot(center, xi))))
