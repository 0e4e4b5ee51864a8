"""Method-of-lines simulation on ``[0, L]`` with zero-flux boundaries.

Only the last species diffuses.  The grid is ``xi_j = j L / (N - 1)``; the
Laplacian is the second-order central difference closed with ghost points
``u[-1] = u[1]`` and ``u[N] = u[N-2]``, for which every sampled cosine
``cos(k pi xi / L)`` is an exact eigenvector.  Spectra use the type-I DCT,
normalised so that ``u(xi) = sum_k c_k cos(k pi xi / L)`` on the grid.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.fft import dct, idct
from scipy.integrate import solve_ivp

from .errors import ConfigurationError, DivergenceError

BLOWUP = 1e12
NOISE_FLOOR = 1e-14
PATTERN_FLOOR = 1e-6
CFL = 0.4
IMPLICIT = {"BDF", "Radau", "LSODA"}


@dataclass
class SimConfig:
    """Grid, horizon and time-stepping policy.

    ``dt=None`` selects adaptive stepping with ``method`` (any
    ``solve_ivp`` method name); a number selects fixed-step classical RK4,
    which must respect the explicit diffusion bound ``dt <= 0.4 dx^2 / mu``.
    """

    N: int = 128
    L: float = 1.0
    T: float = 5000.0
    mu: float = 1e-3
    dt: Optional[float] = None
    method: str = "RK45"
    rtol: float = 1e-6
    atol: float = 1e-9
    sample_every: float = 10.0
    k_spec: Optional[int] = None
    ic: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.N < 16:
            raise ConfigurationError(f"need N >= 16 grid points, got {self.N}")
        if not self.L > 0 or not self.T > 0 or not self.sample_every > 0:
            raise ConfigurationError("L, T and sample_every must be positive")
        if self.mu < 0:
            raise ConfigurationError("mu must be >= 0")
        if self.dt is not None:
            if not self.dt > 0:
                raise ConfigurationError("dt must be positive")
            if self.mu > 0 and self.dt > self.dt_limit:
                raise ConfigurationError(
                    f"dt={self.dt:g} violates the diffusion bound {self.dt_limit:.4g}")
        if self.k_spec is not None and not 0 <= self.k_spec <= self.N - 1:
            raise ConfigurationError(f"k_spec must lie in [0, {self.N - 1}]")

    @property
    def dx(self) -> float:
        return self.L / (self.N - 1)

    @property
    def dt_limit(self) -> float:
        return CFL * self.dx ** 2 / self.mu if self.mu > 0 else math.inf

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N)

    def sample_times(self) -> np.ndarray:
        n = int(math.floor(self.T / self.sample_every + 1e-9))
        t = self.sample_every * np.arange(n + 1)
        if self.T - t[-1] > 1e-9 * self.T:
            t = np.append(t, self.T)
        return t


def neumann_laplacian(u: np.ndarray, dx: float) -> np.ndarray:
    lap = np.empty_like(u)
    lap[..., 1:-1] = u[..., 2:] - 2 * u[..., 1:-1] + u[..., :-2]
    lap[..., 0] = 2 * (u[..., 1] - u[..., 0])
    lap[..., -1] = 2 * (u[..., -2] - u[..., -1])
    return lap / dx ** 2


def mode_spectrum(field, k_spec: Optional[int] = None) -> np.ndarray:
    """Cosine coefficients of grid values along the last axis."""
    field = np.asarray(field, dtype=float)
    N = field.shape[-1]
    c = dct(field, type=1, axis=-1) / (N - 1)
    c[..., 0] /= 2
    c[..., -1] /= 2
    return c if k_spec is None else c[..., :k_spec + 1]


def reconstruct(coeffs) -> np.ndarray:
    """Inverse of :func:`mode_spectrum` for a full set of ``N`` coefficients."""
    c = np.array(coeffs, dtype=float)
    N = c.shape[-1]
    c[..., 0] *= 2
    c[..., -1] *= 2
    return idct(c * (N - 1), type=1, axis=-1)


def cosine_ic(base, N: int, L: float = 1.0, modes=range(1, 21), amplitude: float = 0.01,
              weights=None) -> np.ndarray:
    """Homogeneous state plus ``amplitude * sum_k cos(k pi xi / L)`` in every species.

    ``weights`` optionally scales the perturbation per species.
    """
    base = np.asarray(base, dtype=float)
    xi = np.linspace(0.0, L, N)
    pert = sum(np.cos(k * np.pi * xi / L) for k in modes) * amplitude
    w = np.ones(base.size) if weights is None else np.asarray(weights, dtype=float)
    return base[:, None] + w[:, None] * pert[None, :]


@dataclass
class Trajectory:
    times: np.ndarray
    xi: np.ndarray
    fields: np.ndarray  # (n_times, n_species, N)
    spectra: np.ndarray  # (n_times, n_species, k_spec + 1)

    @property
    def n_species(self) -> int:
        return self.fields.shape[1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["time", "xi"] + [f"u{s}" for s in range(self.n_species)])
            for t, snap in zip(self.times, self.fields):
                for j, x in enumerate(self.xi):
                    out.writerow([_fmt(t), _fmt(x)] + [_fmt(v) for v in snap[:, j]])

    def write_spectra_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["time", "k", "species", "coefficient"])
            for t, spec in zip(self.times, self.spectra):
                for k in range(spec.shape[1]):
                    for s in range(spec.shape[0]):
                        out.writerow([_fmt(t), k, s, _fmt(spec[s, k])])

    def write_binary(self, path) -> None:
        """Header ``N, n_species, n_times`` as little-endian int64, then float64 fields."""
        n_t, n_s, N = self.fields.shape
        with open(path, "wb") as fh:
            fh.write(struct.pack("<3q", N, n_s, n_t))
            fh.write(np.ascontiguousarray(self.fields, dtype="<f8").tobytes())


def read_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        N, n_s, n_t = struct.unpack("<3q", fh.read(24))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != N * n_s * n_t:
        raise ValueError(f"payload holds {data.size} values, header implies {N * n_s * n_t}")
    return data.reshape(n_t, n_s, N)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def jacobian_sparsity(n_species: int, N: int) -> sparse.csr_matrix:
    local = sparse.kron(np.ones((n_species, n_species)), sparse.eye(N))
    tri = sparse.diags([1, 1, 1], [-1, 0, 1], shape=(N, N))
    corner = np.zeros((n_species, n_species))
    corner[-1, -1] = 1
    return (local + sparse.kron(corner, tri)).tocsr().astype(bool)


def simulate(model_rhs: Callable[[np.ndarray], np.ndarray], cfg: SimConfig,
             ic=None) -> Trajectory:
    """Integrate ``u_t = f(u) + mu * D u_xx`` with diffusion on the last species.

    ``model_rhs`` maps an ``(n_species, N)`` array of states to reaction
    rates of the same shape.  ``ic`` overrides ``cfg.ic``.
    """
    u0 = np.array(cfg.ic if ic is None else ic, dtype=float)
    if u0.ndim != 2 or u0.shape[1] != cfg.N:
        raise ConfigurationError(f"initial condition must have shape (n_species, {cfg.N})")
    S, N, dx, mu = u0.shape[0], cfg.N, cfg.dx, cfg.mu

    def f(t, y):
        U = y.reshape(S, N)
        R = np.array(model_rhs(U), dtype=float)
        if mu > 0:
            R[-1] += mu * neumann_laplacian(U[-1], dx)
        return R.ravel()

    times = cfg.sample_times()
    if cfg.dt is not None:
        Y = _rk4(f, u0.ravel(), times, cfg.dt)
    else:
        Y = _adaptive(f, u0.ravel(), times, cfg, S)
    fields = Y.reshape(len(times), S, N)
    return Trajectory(times, cfg.xi, fields, mode_spectrum(fields, cfg.k_spec))


def _check(t, y):
    if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP:
        raise DivergenceError(t)


def _rk4(f, y, times, dt):
    out = np.empty((len(times), y.size))
    out[0] = y
    t = times[0]
    for i in range(1, len(times)):
        n_sub = max(1, int(math.ceil((times[i] - t) / dt - 1e-9)))
        h = (times[i] - t) / n_sub
        for _ in range(n_sub):
            k1 = f(t, y)
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
            _check(t, y)
        t = times[i]
        out[i] = y
    return out


def _adaptive(f, y0, times, cfg, S):
    def blowup(t, y):
        return BLOWUP - np.max(np.abs(y))

    blowup.terminal = True
    opts = {}
    if cfg.method in IMPLICIT - {"LSODA"}:
        opts["jac_sparsity"] = jacobian_sparsity(S, cfg.N)
    sol = solve_ivp(f, (times[0], times[-1]), y0, method=cfg.method, t_eval=times,
                    rtol=cfg.rtol, atol=cfg.atol, events=blowup, **opts)
    if sol.status != 0 or sol.y.shape[1] != len(times) or not np.all(np.isfinite(sol.y)):
        t_fail = sol.t_events[0][0] if sol.t_events and len(sol.t_events[0]) else (
            sol.t[-1] if sol.t.size else times[0])
        raise DivergenceError(t_fail, f"integration failed at t={t_fail:.6g}: {sol.message}")
    return sol.y.T


@dataclass(frozen=True)
class ModeReport:
    k_star: Optional[int]
    growth_rate: Optional[float]
    saturated: bool
    amplitude: float
    window_slope: Optional[float]
    pattern: bool

    def as_dict(self) -> dict:
        return {"k_star": self.k_star, "growth_rate": self.growth_rate,
                "saturated": self.saturated, "amplitude": self.amplitude,
                "window_slope": self.window_slope, "pattern": self.pattern}


def _slope(t, a) -> float:
    return float(np.polyfit(t, a, 1)[0])


def mode_amplitudes(traj: Trajectory, species=None) -> np.ndarray:
    """Per-time, per-mode amplitude; Euclidean norm over the chosen species."""
    spec = traj.spectra if species is None else traj.spectra[:, np.atleast_1d(species), :]
    return np.sqrt(np.sum(spec ** 2, axis=1))


def dominant_mode(traj: Trajectory, window=None, species=None, noise_floor: float = NOISE_FLOOR,
                  pattern_floor: float = PATTERN_FLOOR, detect_saturation: bool = True,
                  segments: int = 8) -> ModeReport:
    """Dominant nonzero spatial mode in ``window`` and its early growth rate.

    ``k_star`` maximises the time-averaged amplitude over ``window``.  The
    growth rate is the least-squares slope of ``log|c_k*|`` from the start of
    the run; with ``detect_saturation`` the fit stops at the first of
    ``segments`` equal time slices whose slope falls below 10% of the slope
    over the first two slices.  ``pattern`` additionally requires the
    windowed amplitude to exceed ``pattern_floor``.
    """
    t = traj.times
    lo, hi = (t[0], t[-1]) if window is None else window
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 5:
        raise ValueError("window must contain at least 5 samples")
    amp = mode_amplitudes(traj, species)
    if amp.shape[1] < 2 or np.max(amp[sel, 1:]) < noise_floor:
        return ModeReport(None, None, False, 0.0, None, False)

    k_star = 1 + int(np.argmax(np.mean(amp[sel, 1:], axis=0)))
    a = amp[:, k_star]
    mean_amp = float(np.mean(a[sel]))

    live = (a > noise_floor) & (t <= hi)
    wsel = sel & live
    window_slope = _slope(t[wsel], np.log(a[wsel])) if wsel.sum() >= 2 else None

    tt, la = t[live], np.log(a[live])
    growth, saturated = None, False
    if tt.size >= 2:
        growth = _slope(tt, la)
        if detect_saturation and tt.size >= 2 * segments:
            edges = np.linspace(tt[0], tt[-1], segments + 1)
            part = [(tt >= edges[i]) & (tt <= edges[i + 1]) for i in range(segments)]
            early = part[0] | part[1]
            s0 = _slope(tt[early], la[early])
            if s0 > 0:
                for i in range(2, segments):
                    if part[i].sum() >= 2 and _slope(tt[part[i]], la[part[i]]) < 0.1 * s0:
                        pre = tt < edges[i]
                        growth = _slope(tt[pre], la[pre])
                        saturated = True
                        break
    return ModeReport(k_star, growth, saturated, mean_amp, window_slope,
                      mean_amp >= pattern_floor)

