"""Run manifests: provenance record written next to every CSV."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .. import __version__
from .config import canonical_text, config_hash

#: Numerical tolerances the operations commit to; recorded per run.
TOLERANCES = {
    "boundary_tol": 1e-9,
    "grazing_tol": 1e-8,
    "quad_tol": 1e-9,
    "slice_identity_tol": 1e-6,
    "hermitian_tol": 1e-10,
    "direction_identity_tol": 1e-12,
    "rho_identity_tol": 1e-12,
}


@dataclass
class RunManifest:
    subcommand: str
    cfg: dict
    seed: int
    stages: list = field(default_factory=list)
    _t0: float = field(default_factory=time.perf_counter)

    @property
    def hash(self) -> str:
        return config_hash(self.cfg, self.seed)

    def stage(self, name: str) -> None:
        self.stages.append((name, time.perf_counter() - self._t0))
        self._t0 = time.perf_counter()

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"subcommand = {self.subcommand}\n")
            fh.write(f"version = {__version__}\n")
            fh.write(f"config_hash = {self.hash}\n")
            fh.write(f"seed = {self.seed}\n")
            fh.write("[config]\n")
            fh.write(canonical_text(self.cfg, self.seed))
            fh.write("[tolerances]\n")
            for k, v in TOLERANCES.items():
                fh.write(f"{k} = {v!r}\n")
            fh.write("[wall_clock_seconds]\n")
            for name, dt in self.stages:
                fh.write(f"{name} = {dt:.3f}\n")
