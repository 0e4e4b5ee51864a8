"""Polynomial and small dense matrix numerics.

Polynomials are stored highest-degree first, the same convention as
``numpy.polyval``.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError

TOL_ROOT = 1e-9
TOL_EIG = 1e-8
TOL_CONJ = 1e-8
TOL_HURWITZ = 1e-9
TOL_MERGE = 1e-6


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix has non-finite entries")
    return M


@dataclass(frozen=True, eq=False)
class Poly:
    """Real polynomial, coefficients highest degree first.

    Leading zeros are stripped on construction, so ``Poly([0, 1, 2])`` is the
    degree-1 polynomial ``s + 2``.  The zero polynomial is ``Poly([0])``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise InvalidInputError("coefficients must be a non-empty 1-d sequence")
        nz = np.flatnonzero(c)
        c = c[nz[0]:] if nz.size else np.zeros(1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    @property
    def scale(self) -> float:
        return 1.0 + float(np.max(np.abs(self.coeffs)))

    def monic(self) -> "Poly":
        if self.is_zero:
            raise InvalidInputError("the zero polynomial has no monic form")
        return Poly(self.coeffs / self.coeffs[0])

    def __call__(self, s):
        return np.polyval(self.coeffs, s)

    def __add__(self, other: "Poly") -> "Poly":
        return Poly(np.polyadd(self.coeffs, other.coeffs))

    def __mul__(self, a: float) -> "Poly":
        return Poly(float(a) * self.coeffs)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(
            np.all(self.coeffs == other.coeffs))

    def allclose(self, other: "Poly", rtol=1e-10, atol=0.0) -> bool:
        return self.degree == other.degree and np.allclose(
            self.coeffs, other.coeffs, rtol=rtol, atol=atol)

    def __repr__(self):
        return f"Poly({self.coeffs.tolist()!r})"


@dataclass(frozen=True, eq=False)
class ComplexRootSet:
    """Multiset of complex roots, sorted by descending real part.

    Roots are kept individually (multiplicity is implicit in repetition);
    :meth:`groups` clusters nearby roots into (root, multiplicity) pairs.
    """

    roots: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.roots, dtype=complex).ravel()
        r = r[np.lexsort((-r.imag, -r.real))]
        r.setflags(write=False)
        object.__setattr__(self, "roots", r)

    def __len__(self):
        return self.roots.size

    def __iter__(self):
        return iter(self.roots)

    @property
    def real(self) -> np.ndarray:
        return self.roots.real

    @property
    def max_real(self) -> float:
        return float(np.max(self.roots.real)) if self.roots.size else -np.inf

    def rightmost(self, tol: float = 0.0) -> np.ndarray:
        """Roots whose real part is within ``tol`` of the maximum."""
        if not self.roots.size:
            return self.roots
        return self.roots[self.roots.real >= self.max_real - tol]

    def groups(self, tol: float = TOL_MERGE):
        """Cluster roots closer than ``tol * scale``; returns [(mean, count)]."""
        out = []
        used = np.zeros(self.roots.size, dtype=bool)
        for i, r in enumerate(self.roots):
            if used[i]:
                continue
            close = (~used) & (np.abs(self.roots - r) <= tol * self.scale)
            used |= close
            out.append((complex(np.mean(self.roots[close])), int(close.sum())))
        return out

    def conjugate_closed(self, tol: float = TOL_CONJ) -> bool:
        """True when every non-real root has a conjugate partner."""
        for r in self.roots:
            if abs(r.imag) > tol * self.scale:
                if np.min(np.abs(self.roots - np.conj(r))) > tol * self.scale:
                    return False
        return True


def char_poly(M) -> Poly:
    """Monic characteristic polynomial det(sI - M) by Faddeev-LeVerrier."""
    M = _as_square(M)
    n = M.shape[0]
    coeffs = np.empty(n + 1)
    coeffs[0] = 1.0
    I = np.eye(n)
    Mk = np.zeros_like(M)
    for k in range(1, n + 1):
        Mk = M @ Mk + coeffs[k - 1] * I
        coeffs[k] = -np.trace(M @ Mk) / k
    return Poly(coeffs)


def companion(p: Poly) -> np.ndarray:
    """Upper companion matrix of a polynomial of degree >= 1."""
    if p.is_zero:
        raise InvalidInputError("the zero polynomial has no roots")
    c = p.monic().coeffs
    n = c.size - 1
    C = np.zeros((n, n))
    C[0, :] = -c[1:]
    C[1:, :-1] = np.eye(n - 1)
    return C


def poly_roots(p: Poly) -> ComplexRootSet:
    """All complex roots of ``p`` as companion-matrix eigenvalues."""
    if not isinstance(p, Poly):
        p = Poly(p)
    if p.is_zero:
        raise InvalidInputError("the zero polynomial has no roots")
    if p.degree < 1:
        raise InvalidInputError("a nonzero constant has no roots")
    if p.degree == 1:
        c = p.coeffs
        return ComplexRootSet(np.array([-c[1] / c[0]], dtype=complex), p.scale)
    # LAPACK geev balances the matrix before the QR iteration.
    return ComplexRootSet(np.linalg.eigvals(companion(p)), p.monic().scale)


def eigenvalues(M) -> ComplexRootSet:
    M = _as_square(M)
    return ComplexRootSet(np.linalg.eigvals(M), 1.0 + float(np.max(np.abs(M))))


def _hurwitz_coefficients(c: np.ndarray) -> bool:
    n = c.size - 1
    if n == 1:
        return c[1] > 0
    if n == 2:
        return c[1] > 0 and c[2] > 0
    a2, a1, a0 = c[1:]
    return a2 > 0 and a0 > 0 and a1 * a2 - a0 > 0


def is_hurwitz(p: Poly, tol: float = TOL_HURWITZ, method: str = "auto") -> bool:
    """Whether every root of ``p`` lies in the open left half-plane.

    ``method`` is ``"coefficients"`` (Routh-Hurwitz inequalities, degree <= 3),
    ``"roots"`` (max real part < -tol * scale) or ``"auto"``, which picks the
    coefficient test whenever it applies.
    """
    if not isinstance(p, Poly):
        p = Poly(p)
    if p.is_zero:
        raise InvalidInputError("the zero polynomial is not a characteristic polynomial")
    if p.degree == 0:
        return True
    m = p.monic()
    if method == "auto":
        method = "coefficients" if m.degree <= 3 else "roots"
    if method == "coefficients":
        if m.degree > 3:
            raise InvalidInputError("closed-form Hurwitz test only covers degree <= 3")
        return bool(_hurwitz_coefficients(m.coeffs))
    if method == "roots":
        return poly_roots(m).max_real < -tol * m.scale
    raise ValueError(f"unknown method {method!r}")
