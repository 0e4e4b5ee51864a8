"""Stable / Type-I / Type-II classification of single-diffuser systems.

Spatial mode ``k`` of the linearised system is a negative feedback loop
around the local reaction dynamics ``h(s)`` with gain ``lambda_k``, so the
poles of every mode lie on the root locus of ``h``.  The locus starts at
``spec(A)`` and, apart from one branch escaping to ``-inf``, ends at
``spec(A~)``.  A Turing instability is Type-I when the rightmost pole over
all modes is attained at a finite mode, and Type-II when it is only reached
in the limit ``k -> inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import InvalidModelError, ModeRangeError, PreconditionError
from .model import (
    LinearSystem,
    RationalTransfer,
    SpatialSpec,
    closed_loop_poly,
    detect_cancellation,
    is_decoupled,
    transfer_function,
)
from .numerics import ComplexRootSet, char_poly, is_hurwitz, poly_roots

LIMIT = "inf"
"""Marker used in ``attained_at`` for the ``k -> inf`` end of the locus."""

KINDS = ("Stable", "NotTuring", "TypeI", "TypeII")
SCAN_POINTS = 2000


def tol_dom(sys: LinearSystem) -> float:
    return 1e-7 * (1.0 + sys.norm)


@dataclass(frozen=True)
class LocusSample:
    lam: float
    roots: ComplexRootSet
    source_k: Optional[int] = None


@dataclass(frozen=True)
class DominantPoleSet:
    """Closed-right-half-plane poles sharing the largest real part.

    An empty ``poles`` tuple means no mode has a pole with ``Re >= 0``;
    ``max_real`` then holds the (negative) largest real part found.
    """

    poles: tuple = ()
    attained_at: tuple = ()
    max_real: float = -math.inf

    @property
    def is_empty(self) -> bool:
        return not self.poles

    @property
    def finite_modes(self) -> tuple:
        return tuple(k for k in self.attained_at if k != LIMIT)

    @property
    def limit_only(self) -> bool:
        return bool(self.attained_at) and not self.finite_modes


@dataclass(frozen=True)
class Theorem2Flags:
    """Closed-form Type-I conditions for three species.

    ``alpha`` holds ``(a2, a1, a0)`` of ``det(sI - A)`` and ``alpha_t`` holds
    ``(at1, at0)`` of ``det(sI - A~)``.
    """

    I: bool
    II_A: bool
    II_B: bool
    alpha: tuple
    alpha_t: tuple

    @property
    def type_one(self) -> bool:
        return self.I and (self.II_A or self.II_B)

    @property
    def margin(self) -> float:
        """Smallest distance of any inequality to its boundary."""
        a2, a1, a0 = self.alpha
        t1, t0 = self.alpha_t
        h = a1 * a2 - a0
        slacks = [a2, h, a0, t1, t0, t1 * t1 - 4 * t0, -t1 * t1 + t0 + t1 * a2 - a1]
        if t1 * h >= 0:
            slacks.append(-2 * math.sqrt(t1 * h) - (a1 + t1 * a2 - t0))
        slacks.append(t1 * h)
        return float(min(abs(x) for x in slacks))

    def as_dict(self) -> dict:
        return {"I": self.I, "II_A": self.II_A, "II_B": self.II_B}


@dataclass
class Verdict:
    kind: str
    dominant: Optional[DominantPoleSet] = None
    condition_flags: Optional[Theorem2Flags] = None
    degenerate: bool = False
    near_instability: bool = False
    critical_lambda: Optional[float] = None
    evidence: list = field(default_factory=list, repr=False)
    tol: float = 1e-7

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown verdict kind {self.kind!r}")

    @property
    def dominant_modes(self) -> tuple:
        return self.dominant.finite_modes if self.dominant else ()

    def to_dict(self, evidence: bool = False) -> dict:
        dom = self.dominant
        out = {
            "kind": self.kind,
            "dominant_poles": [[p.real, p.imag] for p in dom.poles] if dom else [],
            "attained_at": list(dom.attained_at) if dom else [],
            "max_real": dom.max_real if dom and math.isfinite(dom.max_real) else None,
            "condition_flags": self.condition_flags.as_dict() if self.condition_flags else None,
            "degenerate": self.degenerate,
            "near_instability": self.near_instability,
            "critical_lambda": self.critical_lambda,
        }
        if evidence:
            out["evidence"] = [
                {"lambda": s.lam, "source_k": s.source_k,
                 "roots": [[r.real, r.imag] for r in s.roots]}
                for s in self.evidence
            ]
        return out


def _loop_roots(tf: RationalTransfer, lams) -> np.ndarray:
    """Roots of ``d + lam*n`` for every gain, shape ``(len(lams), deg d)``."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    den = tf.den.coeffs
    num = np.concatenate([[0.0], tf.num.coeffs])
    c = (den[None, :] + lams[:, None] * num[None, :]) / den[0]
    m = den.size - 1
    C = np.zeros((lams.size, m, m))
    C[:, 0, :] = -c[:, 1:]
    idx = np.arange(m - 1)
    C[:, idx + 1, idx] = 1.0
    return np.linalg.eigvals(C)


def rightmost_real(tf: RationalTransfer, lams) -> np.ndarray:
    return _loop_roots(tf, lams).real.max(axis=1)


@dataclass(frozen=True)
class LocusScan:
    """Rightmost real part of the closed-loop poles over a gain grid."""

    lambdas: np.ndarray
    rightmost: np.ndarray
    peak_lambda: float
    peak_real: float
    peak_at_edge: bool
    crossings: tuple
    threshold: float


def locus_scan(tf: RationalTransfer, lam_min: float, lam_max: float,
               points: int = SCAN_POINTS, threshold: float = 0.0) -> LocusScan:
    """Dense geometric gain scan of the rightmost closed-loop pole.

    The peak is refined by bounded scalar maximisation between the grid
    neighbours of the best sample, and every sign change of
    ``rightmost - threshold`` is located by bisection.
    """
    if not 0 < lam_min < lam_max:
        raise ValueError(f"need 0 < lam_min < lam_max, got {lam_min}, {lam_max}")
    lams = np.geomspace(lam_min, lam_max, points)
    rr = rightmost_real(tf, lams)
    i = int(np.argmax(rr))
    peak_lam, peak = float(lams[i]), float(rr[i])
    edge = i == points - 1
    if 0 < i < points - 1:
        f = lambda u: -rightmost_real(tf, [math.exp(u)])[0]
        res = minimize_scalar(f, bounds=(math.log(lams[i - 1]), math.log(lams[i + 1])),
                              method="bounded", options={"xatol": 1e-12})
        if -res.fun > peak:
            peak_lam, peak = math.exp(res.x), float(-res.fun)

    g = rr - threshold
    crossings = []
    for j in np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:])):
        h = lambda u: rightmost_real(tf, [math.exp(u)])[0] - threshold
        u = brentq(h, math.log(lams[j]), math.log(lams[j + 1]), xtol=1e-13)
        crossings.append(math.exp(u))
    return LocusScan(lams, rr, peak_lam, peak, edge, tuple(crossings), threshold)


def default_lambda_range(sys: LinearSystem, spec: SpatialSpec) -> tuple:
    # Reach below lambda_1 so an unstable band under the first mode is seen.
    lo = 1e-6 * (1.0 + sys.norm)
    if spec.mu > 0:
        lo = min(lo, spec.gain(1))
    hi = max(spec.gain(spec.k_max), 1e3 * sys.norm, 10 * lo)
    return lo, hi


def subsystem_poles(tf: RationalTransfer, spec: SpatialSpec, k: int) -> ComplexRootSet:
    if k > spec.k_max:
        raise ModeRangeError(f"mode {k} exceeds k_max={spec.k_max}")
    return poly_roots(closed_loop_poly(tf, spec.gain(k)))


def _default_tol(tf: RationalTransfer) -> float:
    return 1e-7 * (1.0 + float(np.max(np.abs(poly_roots(tf.den).roots))))


def _limit_roots(tf: RationalTransfer) -> ComplexRootSet:
    return poly_roots(tf.num)


def dominant_poles(tf: RationalTransfer, spec: SpatialSpec, tol: Optional[float] = None,
                   _mode_roots: Optional[np.ndarray] = None) -> DominantPoleSet:
    """Dominant closed-loop poles over modes ``0..k_max`` and ``k -> inf``.

    The limit is represented by the terminal points ``spec(A~)`` of the
    locus.  When the rightmost real part is still increasing at ``k_max``
    and reaches the limit value within ``tol``, the finite modes are only
    approaching the limit and attainment is credited to ``LIMIT`` alone.
    """
    tol = _default_tol(tf) if tol is None else tol
    roots = _loop_roots(tf, spec.gains()) if _mode_roots is None else _mode_roots
    rr = roots.real.max(axis=1)
    limit = _limit_roots(tf)
    beta = limit.max_real

    kf = int(np.argmax(rr))
    m_fin = float(rr[kf])
    top = max(m_fin, beta)
    if top < 0:
        return DominantPoleSet((), (), top)

    limit_hit = beta >= top - tol
    at_edge = kf == spec.k_max and spec.k_max > 0 and rr[-1] > rr[-2]
    finite_hit = m_fin >= top - tol and not (at_edge and limit_hit)

    poles, where = [], []
    if finite_hit:
        for k in np.flatnonzero(rr >= top - tol):
            where.append(int(k))
            r = roots[k]
            poles.extend(complex(z) for z in r[r.real >= top - tol])
    if limit_hit:
        where.append(LIMIT)
        poles.extend(complex(z) for z in limit.rightmost(tol))
    return DominantPoleSet(tuple(poles), tuple(where), top)


def theorem2_conditions(sys: LinearSystem) -> Theorem2Flags:
    """Closed-form Type-I test for ``n = 3``, inequalities as printed.

    (I)    a2 > 0, a1 a2 - a0 > 0, a0 > 0
    (II-A) at1 > 0, at0 > 0, a1 + at1 a2 - at0 <= -2 sqrt(at1 (a1 a2 - a0))
    (II-B) at1 <= 0, at1^2 - 4 at0 < 0, -at1^2 + at0 + at1 a2 - a1 > 0
    """
    if not isinstance(sys, LinearSystem):
        sys = LinearSystem(sys)
    if sys.n != 3:
        raise PreconditionError(f"closed-form conditions need n = 3, got n = {sys.n}")
    _, a2, a1, a0 = char_poly(sys.A).coeffs
    _, t1, t0 = char_poly(sys.A[:2, :2]).coeffs
    h = a1 * a2 - a0
    cond_i = a2 > 0 and h > 0 and a0 > 0
    cond_a = (t1 > 0 and t0 > 0 and t1 * h >= 0
              and a1 + t1 * a2 - t0 <= -2.0 * math.sqrt(t1 * h))
    cond_b = t1 <= 0 and t1 * t1 - 4 * t0 < 0 and -t1 * t1 + t0 + t1 * a2 - a1 > 0
    return Theorem2Flags(bool(cond_i), bool(cond_a), bool(cond_b),
                         (float(a2), float(a1), float(a0)), (float(t1), float(t0)))


@dataclass(frozen=True)
class Lemma3Result:
    satisfied: bool
    branch: str
    witness: Optional[tuple] = None


def _on_line(coeffs: np.ndarray, sigma: float) -> np.ndarray:
    """Coefficients in ``w`` of ``P(sigma + j w)``, highest power first."""
    out = np.zeros(1, dtype=complex)
    for c in coeffs:
        out = np.polyadd(np.polymul(out, [1j, sigma]), [c])
    return out


def lemma3_check(sys: LinearSystem) -> Lemma3Result:
    """Search for a finite gain placing a pole on the critical vertical line.

    The line is the imaginary axis when ``A~`` is Hurwitz (branch ``ii_a``)
    and ``Re s = beta = max Re spec(A~)`` otherwise (branch ``ii_b``).  On
    the line ``s = sigma + j w`` a pole exists at gain ``lam`` iff
    ``lam = -d(s)/n(s)`` is real and positive, so ``w`` must be a real root of
    ``Im[d(s) conj(n(s))]``.
    """
    if not isinstance(sys, LinearSystem):
        sys = LinearSystem(sys)
    tf = transfer_function(sys)
    if not is_hurwitz(tf.den):
        return Lemma3Result(False, "none")
    if is_hurwitz(tf.num):
        sigma, branch = 0.0, "ii_a"
    else:
        sigma, branch = _limit_roots(tf).max_real, "ii_b"

    D = _on_line(tf.den.coeffs, sigma)
    N = _on_line(tf.num.coeffs, sigma)
    G = np.polymul(D, np.conj(N)).imag
    scale = np.max(np.abs(G)) if G.size else 0.0
    if scale == 0:
        return Lemma3Result(False, "none")
    G = np.trim_zeros(np.where(np.abs(G) > 1e-14 * scale, G, 0.0), "f")
    if G.size < 2:
        return Lemma3Result(False, "none")
    best = None
    for w in np.roots(G):
        if abs(w.imag) > 1e-7 * (1 + abs(w)):
            continue
        s = complex(sigma, w.real)
        nv = tf.num(s)
        if abs(nv) <= 1e-12 * tf.num.scale * (1 + abs(s)) ** tf.num.degree:
            continue
        lam = -tf.den(s) / nv
        if abs(lam.imag) > 1e-6 * (1 + abs(lam)) or lam.real <= 1e-12:
            continue
        if best is None or lam.real < best[0]:
            best = (float(lam.real), s)
    if best is None:
        return Lemma3Result(False, "none")
    return Lemma3Result(True, branch, best)


def classify(sys: LinearSystem, spec: SpatialSpec, lambda_range: Optional[tuple] = None,
             scan_points: int = SCAN_POINTS) -> Verdict:
    """Classify the homogeneous equilibrium described by ``sys``.

    The discrete policy judges modes ``0..k_max`` and uses the continuous
    gain scan only to flag ``near_instability``.  The continuous policy
    judges the scan directly and reports the mode nearest the critical gain.
    """
    if not isinstance(sys, LinearSystem):
        sys = LinearSystem(sys)
    if not np.all(np.isfinite(sys.A)):
        raise InvalidModelError("A has NaN or infinite entries")
    tf = transfer_function(sys)
    tol = tol_dom(sys)
    degenerate = bool(detect_cancellation(tf)) or is_decoupled(sys)
    flags = theorem2_conditions(sys) if sys.n == 3 else None

    gains = spec.gains()
    mode_roots = _loop_roots(tf, gains)
    evidence = [LocusSample(float(lam), ComplexRootSet(r), k)
                for k, (lam, r) in enumerate(zip(gains, mode_roots))]

    if not is_hurwitz(tf.den):
        return Verdict("NotTuring", None, flags, degenerate, evidence=evidence, tol=tol)

    beta = _limit_roots(tf).max_real
    scan = None
    if spec.mu > 0 or lambda_range is not None:
        lo, hi = lambda_range or default_lambda_range(sys, spec)
        scan = locus_scan(tf, lo, hi, scan_points, threshold=max(beta, 0.0))

    if spec.lambda_policy == "continuous":
        return _classify_continuous(tf, spec, scan, beta, tol, flags, degenerate, evidence)

    dom = dominant_poles(tf, spec, tol, _mode_roots=mode_roots)
    crit = scan.crossings[0] if scan and scan.crossings else None
    if dom.is_empty:
        near = bool(scan and not scan.peak_at_edge and scan.peak_real >= 0
                    and scan.peak_real >= beta - tol)
        return Verdict("Stable", dom, flags, degenerate, near, crit, evidence, tol)
    kind = "TypeII" if dom.limit_only else "TypeI"
    return Verdict(kind, dom, flags, degenerate, False, crit, evidence, tol)


def _classify_continuous(tf, spec, scan, beta, tol, flags, degenerate, evidence):
    if scan is None:
        peak, edge = -math.inf, True
    else:
        peak, edge = scan.peak_real, scan.peak_at_edge
    top = max(peak, beta)
    if top < 0:
        return Verdict("Stable", DominantPoleSet((), (), top), flags, degenerate,
                       evidence=evidence, tol=tol)
    crit = scan.crossings[0] if scan and scan.crossings else None
    if not edge and peak >= top - tol:
        roots = poly_roots(closed_loop_poly(tf, scan.peak_lambda))
        k_near = max(1, int(round(spec.mode_of(scan.peak_lambda))))
        dom = DominantPoleSet(tuple(complex(z) for z in roots.rightmost(tol)), (k_near,), top)
        return Verdict("TypeI", dom, flags, degenerate, False, crit or scan.peak_lambda,
                       evidence, tol)
    limit = _limit_roots(tf)
    dom = DominantPoleSet(tuple(complex(z) for z in limit.rightmost(tol)), (LIMIT,), top)
    return Verdict("TypeII", dom, flags, degenerate, False, crit, evidence, tol)


def theorem1_property(A) -> bool:
    """True when a Hurwitz two-species system is not Type-I under a dense scan."""
    sys = A if isinstance(A, LinearSystem) else LinearSystem(A)
    if sys.n != 2:
        raise PreconditionError(f"two-species property needs n = 2, got n = {sys.n}")
    if not is_hurwitz(char_poly(sys.A)):
        raise PreconditionError("A is not Hurwitz")
    s = 1.0 + sys.norm
    v = classify(sys, SpatialSpec(mu=1.0, lambda_policy="continuous"),
                 lambda_range=(1e-6 * s, 1e6 * s))
    return v.kind != "TypeI"


def proposition1_check(verdict: Verdict, tol: Optional[float] = None) -> bool:
    """Every dominant pole of a Type-I verdict is non-real."""
    if verdict.kind != "TypeI":
        raise PreconditionError(f"expected a TypeI verdict, got {verdict.kind}")
    tol = verdict.tol if tol is None else tol
    return all(abs(p.imag) > tol for p in verdict.dominant.poles)


def locus_table(tf: RationalTransfer, lams, spec: Optional[SpatialSpec] = None):
    """Rows ``(lam, re, im, source_k)`` for plotting a root locus.

    When ``spec`` is given, the discrete mode gains inside the requested
    range are added and tagged with their mode index.
    """
    lams = [float(x) for x in np.atleast_1d(lams)]
    tags = {lam: None for lam in lams}
    if spec is not None and lams:
        lo, hi = min(lams), max(lams)
        for k, g in enumerate(spec.gains()):
            if lo <= g <= hi and tags.get(float(g)) is None:
                tags[float(g)] = k
    tagged = list(tags.items())
    tagged.sort(key=lambda t: (t[0], -1 if t[1] is None else t[1]))
    rows = []
    roots = _loop_roots(tf, [t[0] for t in tagged]) if tagged else []
    for (lam, k), rs in zip(tagged, roots):
        for r in ComplexRootSet(rs):
            rows.append((lam, float(r.real), float(r.imag), k))
    return rows
