"""Extended Gray-Scott model in which only Z diffuses.

Reactions ``X + 2Y <-> 3Y`` and ``Y <-> Z`` with feed/removal rate
``gamma``::

    dx/dt = -x y^2 + eta1 y^3 + gamma (1 - x)
    dy/dt =  x y^2 - eta1 y^3 - k (y - eta2 z) - gamma y
    dz/dt =  k (y - eta2 z) - gamma z            (+ mu z'' in space)
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .classify import lemma3_check, theorem2_conditions
from .errors import DegenerateParametersError, InvalidInputError
from .model import LinearSystem
from .numerics import eigenvalues

TOL_EQ = 1e-10

TYPE_I = "TypeI"
NOT_TYPE_I = "notTypeI"
NO_EQUILIBRIUM = "noEquilibrium"


@dataclass(frozen=True)
class GSParams:
    eta1: float = 0.1
    eta2: float = 0.1
    k_rate: float = 6.2e-2
    gamma: float = 1.0e-2
    mu: float = 1.0e-3

    def __post_init__(self):
        for name in ("eta1", "eta2", "k_rate", "gamma", "mu"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise InvalidInputError(f"{name} must be finite and >= 0, got {val}")

    @property
    def v(self) -> float:
        return self.gamma + self.k_rate * self.eta2

    @property
    def w(self) -> float:
        v, g, k = self.v, self.gamma, self.k_rate
        return v * v - 4 * g * (k + v) * ((1 + self.eta1) * v + k)


PRESETS = {
    "A": GSParams(eta1=0.1, eta2=0.1, k_rate=6.2e-2, gamma=1.0e-2, mu=1.0e-3),
    "B": GSParams(eta1=0.1, eta2=0.1, k_rate=5.5e-2, gamma=1.0e-2, mu=1.0e-3),
}
PRESET_L = 1.0


@dataclass(frozen=True)
class GSEquilibrium:
    x: float
    y: float
    z: float
    branch: str
    nonphysical: bool = False

    @property
    def state(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def rhs(p: GSParams, state):
    """Reaction terms; ``state`` has shape ``(3, ...)``."""
    x, y, z = state[0], state[1], state[2]
    auto = x * y * y - p.eta1 * y ** 3
    conv = p.k_rate * (y - p.eta2 * z)
    return np.stack([
        -auto + p.gamma * (1 - x),
        auto - conv - p.gamma * y,
        conv - p.gamma * z,
    ])


def residual(p: GSParams, eq: GSEquilibrium) -> float:
    return float(np.max(np.abs(rhs(p, eq.state))))


def equilibria(p: GSParams) -> list[GSEquilibrium]:
    """Homogeneous equilibria: ``(1, 0, 0)`` and, when ``w >= 0``, the +/- pair."""
    v = p.v
    if v == 0:
        raise DegenerateParametersError("v = gamma + k*eta2 vanishes")
    out = [GSEquilibrium(1.0, 0.0, 0.0, "Zero")]
    w = p.w
    if w < 0:
        return out
    denom = 2 * ((1 + p.eta1) * v + p.k_rate)
    for branch, sign in (("Plus", 1.0), ("Minus", -1.0)):
        y = (v + sign * math.sqrt(w)) / denom
        if y * y + p.gamma == 0:
            continue
        x = (p.eta1 * y ** 3 + p.gamma) / (y * y + p.gamma)
        z = p.k_rate * y / v
        eq = GSEquilibrium(x, y, z, branch, nonphysical=min(x, y, z) < 0)
        res = residual(p, eq)
        if res > TOL_EQ:
            raise ArithmeticError(f"{branch} equilibrium residual {res:.3g} exceeds {TOL_EQ}")
        out.append(eq)
    return out


def equilibrium(p: GSParams, branch: str = "Plus") -> Optional[GSEquilibrium]:
    for eq in equilibria(p):
        if eq.branch == branch:
            return eq
    return None


def jacobian_at(p: GSParams, eq) -> np.ndarray:
    if isinstance(eq, GSEquilibrium):
        x, y = eq.x, eq.y
        res = residual(p, eq)
    else:
        x, y, _ = eq
        res = float(np.max(np.abs(rhs(p, np.asarray(eq, dtype=float)))))
    if res > TOL_EQ:
        raise InvalidInputError(f"not an equilibrium (residual {res:.3g})")
    g, k, e1, e2 = p.gamma, p.k_rate, p.eta1, p.eta2
    cross = 2 * x * y - 3 * e1 * y * y
    return np.array([
        [-y * y - g, -cross, 0.0],
        [y * y, cross - k - g, k * e2],
        [0.0, k, -k * e2 - g],
    ])


def linear_system(p: GSParams, branch: str = "Plus") -> LinearSystem:
    eq = equilibrium(p, branch)
    if eq is None:
        raise InvalidInputError(f"no {branch} equilibrium for {p}")
    return LinearSystem(jacobian_at(p, eq))


@dataclass
class SweepResult:
    """Per-cell outcome of a (gamma, k) sweep; grids are indexed ``[i_k, i_gamma]``."""

    gammas: np.ndarray
    ks: np.ndarray
    status: np.ndarray
    alpha: np.ndarray
    alpha_t: np.ndarray
    flags: np.ndarray
    eta1: float
    eta2: float
    mu: float
    L: float
    verified: int = 0
    verify_mismatches: int = 0

    @property
    def mask(self) -> np.ndarray:
        return self.status == TYPE_I

    def cell_of(self, gamma: float, k: float) -> tuple:
        return (int(np.argmin(np.abs(self.ks - k))), int(np.argmin(np.abs(self.gammas - gamma))))

    def contains(self, gamma: float, k: float) -> bool:
        """Whether the grid cell nearest ``(gamma, k)`` is Type-I."""
        return bool(self.mask[self.cell_of(gamma, k)])

    def bounding_box(self) -> Optional[dict]:
        rows, cols = np.nonzero(self.mask)
        if not rows.size:
            return None
        return {"gamma_min": float(self.gammas[cols.min()]), "gamma_max": float(self.gammas[cols.max()]),
                "k_min": float(self.ks[rows.min()]), "k_max": float(self.ks[rows.max()])}

    def summary(self) -> dict:
        marks = {name: self.contains(p.gamma, p.k_rate) for name, p in PRESETS.items()}
        return {
            "grid": [int(self.gammas.size), int(self.ks.size)],
            "type_i_cells": int(self.mask.sum()),
            "bounding_box": self.bounding_box(),
            "simply_connected": simply_connected(self.mask),
            "marks_inside": marks,
            "eta1": self.eta1, "eta2": self.eta2, "mu": self.mu, "L": self.L,
            "verified_cells": self.verified,
            "verify_mismatches": self.verify_mismatches,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["gamma", "k", "status", "alpha2", "alpha1", "alpha0",
                          "alpha_t1", "alpha_t0", "I", "II_A", "II_B"])
            for i, k in enumerate(self.ks):
                for j, g in enumerate(self.gammas):
                    nums = list(self.alpha[i, j]) + list(self.alpha_t[i, j])
                    out.writerow([_fmt(g), _fmt(k), self.status[i, j]]
                                 + [_fmt(a) for a in nums]
                                 + [int(b) for b in self.flags[i, j]])

    def write_summary(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else format(float(x), ".17g")


def _cell(gamma: float, k: float, eta1: float, eta2: float):
    nan3, nan2 = (math.nan,) * 3, (math.nan,) * 2
    p = GSParams(eta1=eta1, eta2=eta2, k_rate=k, gamma=gamma)
    try:
        eq = equilibrium(p, "Plus")
    except DegenerateParametersError:
        eq = None
    if eq is None or eq.nonphysical:
        return NO_EQUILIBRIUM, nan3, nan2, (False, False, False)
    f = theorem2_conditions(LinearSystem(jacobian_at(p, eq)))
    status = TYPE_I if f.type_one else NOT_TYPE_I
    return status, f.alpha, f.alpha_t, (f.I, f.II_A, f.II_B)


def _row(args):
    k, gammas, eta1, eta2 = args
    return [_cell(g, k, eta1, eta2) for g in gammas]


def default_workers() -> int:
    env = os.environ.get("TURING_ONE_THREADS")
    if env:
        return max(1, int(env))
    return 1


def region_sweep(gamma_range=(1e-3, 5e-2), k_range=(2e-2, 1e-1), grid=(100, 100),
                 eta1: float = 0.1, eta2: float = 0.1, mu: float = 1e-3, L: float = 1.0,
                 verify_lemma3: bool = False, verify_fraction: float = 0.01,
                 seed: int = 0, workers: Optional[int] = None) -> SweepResult:
    """Type-I map of the Plus equilibrium over a ``(gamma, k)`` window.

    ``grid`` is ``(n_gamma, n_k)``.  Type-I membership uses the closed-form
    three-species conditions; with ``verify_lemma3`` a random fraction of the
    Type-I cells is re-checked by the critical-line search and mismatches are
    counted in the result.
    """
    n_g, n_k = (grid, grid) if isinstance(grid, int) else grid
    if n_g < 1 or n_k < 1:
        raise InvalidInputError("grid resolution must be positive")
    for name, (lo, hi) in (("gamma", gamma_range), ("k", k_range)):
        if not (lo > 0 and hi >= lo):
            raise InvalidInputError(f"{name} range must satisfy 0 < lo <= hi, got {(lo, hi)}")
    gammas = np.linspace(*gamma_range, n_g) if n_g > 1 else np.array([float(gamma_range[0])])
    ks = np.linspace(*k_range, n_k) if n_k > 1 else np.array([float(k_range[0])])

    jobs = [(float(k), gammas.tolist(), eta1, eta2) for k in ks]
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_row(j) for j in jobs]

    status = np.array([[c[0] for c in r] for r in rows], dtype=object)
    alpha = np.array([[c[1] for c in r] for r in rows], dtype=float)
    alpha_t = np.array([[c[2] for c in r] for r in rows], dtype=float)
    flags = np.array([[c[3] for c in r] for r in rows], dtype=bool)
    result = SweepResult(gammas, ks, status, alpha, alpha_t, flags, eta1, eta2, mu, L)

    if verify_lemma3:
        cells = np.argwhere(result.mask)
        if cells.size:
            rng = np.random.default_rng(seed)
            n_pick = max(1, int(math.ceil(verify_fraction * len(cells))))
            for i, j in cells[rng.choice(len(cells), size=n_pick, replace=False)]:
                p = GSParams(eta1=eta1, eta2=eta2, k_rate=float(ks[i]), gamma=float(gammas[j]))
                ok = lemma3_check(linear_system(p)).satisfied
                result.verified += 1
                result.verify_mismatches += int(not ok)
    return result


def simply_connected(mask: np.ndarray) -> bool:
    """Nonempty, one 4-connected component, and no enclosed holes."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return False
    _, n_parts = ndimage.label(mask)
    if n_parts != 1:
        return False
    padded = np.pad(~mask, 1, constant_values=True)
    _, n_bg = ndimage.label(padded)
    return n_bg == 1


def stability(p: GSParams, eq: GSEquilibrium) -> dict:
    ev = eigenvalues(jacobian_at(p, eq))
    return {"max_real": ev.max_real, "hurwitz": ev.max_real < 0,
            "eigenvalues": [[z.real, z.imag] for z in ev]}
