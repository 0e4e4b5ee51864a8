"""Linearised single-diffuser reaction-diffusion model.

The diffusing species is always stored last.  Its local reaction dynamics
form the SISO transfer function ``h(s) = n(s)/d(s)`` with
``n = det(sI - A~)`` and ``d = det(sI - A)``, where ``A~`` is the
non-diffuser block of the Jacobian.  Spatial mode ``k`` closes the loop
around ``h`` with gain ``lambda_k = mu (k pi / L)^2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidGainError, InvalidInputError, InvalidModelError
from .numerics import TOL_ROOT, Poly, char_poly, poly_roots

LambdaPolicy = Literal["discrete", "continuous"]


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Jacobian ``A`` at a homogeneous equilibrium, diffuser last."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidModelError(f"A must be square, got shape {A.shape}")
        if A.shape[0] < 2:
            raise InvalidModelError("need at least two species (one diffuser, one not)")
        if not np.all(np.isfinite(A)):
            raise InvalidModelError("A has NaN or infinite entries")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @classmethod
    def from_matrix(cls, A, diffuser_index: int = -1) -> "LinearSystem":
        """Build a system, moving species ``diffuser_index`` to the last slot."""
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidModelError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        if not -n <= diffuser_index < n:
            raise InvalidModelError(f"diffuser_index {diffuser_index} out of range for n={n}")
        i = diffuser_index % n
        perm = [j for j in range(n) if j != i] + [i]
        return cls(A[np.ix_(perm, perm)])

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.A, 2))


@dataclass(frozen=True)
class RationalTransfer:
    """``h(s) = num(s) / den(s)`` with ``deg num = deg den - 1``."""

    num: Poly
    den: Poly

    def __post_init__(self):
        if self.num.degree != self.den.degree - 1:
            raise InvalidInputError(
                f"relative degree must be 1 (got {self.num.degree}/{self.den.degree})")

    def __call__(self, s):
        return self.num(s) / self.den(s)

    @property
    def scale(self) -> float:
        return max(self.num.scale, self.den.scale)


@dataclass(frozen=True)
class SpatialSpec:
    """Diffusion coefficient, domain length and mode range."""

    mu: float
    L: float = 1.0
    k_max: int = 200
    lambda_policy: LambdaPolicy = "discrete"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise InvalidModelError(f"mu must be a finite value >= 0, got {self.mu}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise InvalidModelError(f"L must be positive, got {self.L}")
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise InvalidModelError(f"k_max must be a positive integer, got {self.k_max}")
        if self.lambda_policy not in ("discrete", "continuous"):
            raise InvalidModelError(f"unknown lambda_policy {self.lambda_policy!r}")

    def gain(self, k) -> float:
        return mode_gain(self, k)

    def gains(self) -> np.ndarray:
        k = np.arange(self.k_max + 1)
        return self.mu * (k * np.pi / self.L) ** 2

    def mode_of(self, lam: float) -> float:
        """Continuous mode index whose gain equals ``lam``."""
        if self.mu == 0:
            return math.inf if lam > 0 else 0.0
        return self.L / math.pi * math.sqrt(max(lam, 0.0) / self.mu)


def partition(sys: LinearSystem):
    """Split ``A`` into ``(A~, b, c, d)`` blocks."""
    if not isinstance(sys, LinearSystem):
        sys = LinearSystem(sys)
    A = sys.A
    return A[:-1, :-1].copy(), A[:-1, -1].copy(), A[-1, :-1].copy(), float(A[-1, -1])


def transfer_function(sys: LinearSystem) -> RationalTransfer:
    At = partition(sys)[0]
    return RationalTransfer(char_poly(At), char_poly(sys.A))


def closed_loop_poly(tf: RationalTransfer, lam: float) -> Poly:
    """Characteristic polynomial ``d(s) + lam * n(s)`` of the feedback loop."""
    if not lam >= 0:
        raise InvalidGainError(f"gain must be >= 0, got {lam}")
    if lam == 0:
        return tf.den
    return Poly(np.polyadd(tf.den.coeffs, lam * tf.num.coeffs))


def mode_gain(spec: SpatialSpec, k) -> float:
    if k < 0:
        raise InvalidInputError(f"mode index must be >= 0, got {k}")
    return spec.mu * (k * math.pi / spec.L) ** 2


def detect_cancellation(tf: RationalTransfer, tol: float = TOL_ROOT) -> list[complex]:
    """Roots shared by numerator and denominator (pole-zero cancellations)."""
    out = []
    d = tf.den
    for r in poly_roots(tf.num):
        bound = tol * d.scale * (1.0 + abs(r)) ** d.degree
        if abs(d(r)) <= bound:
            out.append(complex(r))
    return out


def is_decoupled(sys: LinearSystem) -> bool:
    """Diffuser neither drives nor is driven by the other species."""
    _, b, c, _ = partition(sys)
    return not (np.any(b) or np.any(c))


def load_model(source) -> tuple[LinearSystem, SpatialSpec]:
    """Parse a model description (JSON text, path or dict).

    Keys: ``A`` (square matrix), ``diffuser_index`` (0-based, default last),
    ``mu``, ``L``, and optionally ``k_max`` and ``lambda_policy``.
    """
    if isinstance(source, dict):
        data = source
    else:
        text = source
        if not isinstance(source, str) or not source.lstrip().startswith("{"):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(
                f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError("model must be a JSON object")
    for key in ("A", "mu", "L"):
        if key not in data:
            raise InvalidInputError(f"field {key!r}: missing")
    A = data["A"]
    if (not isinstance(A, list) or not A
            or not all(isinstance(row, list) and len(row) == len(A) for row in A)):
        raise InvalidInputError("field 'A': must be a non-empty square list of rows")
    try:
        A = np.array(A, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"field 'A': non-numeric entry ({exc})") from exc
    idx = data.get("diffuser_index", -1)
    if not isinstance(idx, int) or isinstance(idx, bool):
        raise InvalidInputError("field 'diffuser_index': must be an integer")
    for key in ("mu", "L"):
        if not isinstance(data[key], (int, float)) or isinstance(data[key], bool):
            raise InvalidInputError(f"field {key!r}: must be a number")
    sys = LinearSystem.from_matrix(A, idx)
    spec = SpatialSpec(
        mu=float(data["mu"]),
        L=float(data["L"]),
        k_max=int(data.get("k_max", 200)),
        lambda_policy=data.get("lambda_policy", "discrete"),
    )
    return sys, spec
