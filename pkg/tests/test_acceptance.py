"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Each test prints a single PASS/FAIL line; the session summary repeats them.
"""

import json
import os
import time

import numpy as np
import pytest

import conftest
import oracles
from turing_one import grayscott as gs
from turing_one.classify import (
    classify,
    lemma3_check,
    proposition1_check,
    theorem1_property,
    theorem2_conditions,
    tol_dom,
)
from turing_one.cli import main
from turing_one.model import LinearSystem, SpatialSpec, closed_loop_poly, transfer_function
from turing_one.numerics import poly_roots
from turing_one.pdesim import SimConfig, cosine_ic, dominant_mode, simulate

SPEC = SpatialSpec(mu=1e-3, L=1.0)


def report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")


def cli(argv, capsys):
    code = main([str(a) for a in argv])
    out, _ = capsys.readouterr()
    return code, out


@pytest.mark.acceptance(1, "set A is Type-I with dominant mode 2 and a complex pair (< 1 s)")
def test_criterion_1_set_a_classification(tmp_path, capsys):
    t0 = time.perf_counter()
    p = gs.PRESETS["A"]
    J = gs.jacobian_at(p, gs.equilibrium(p, "Plus"))
    model = tmp_path / "set_a.json"
    model.write_text(json.dumps({"A": J.tolist(), "mu": 1e-3, "L": 1.0}))
    code, out = cli(["analyze", model], capsys)
    elapsed = time.perf_counter() - t0
    d = json.loads(out)
    ims = [im for _, im in d["dominant_poles"]]
    # Independent route: poles as eigenvalues of A - lam_k e_n e_n^T.
    rr = oracles.rightmost(J, SPEC.gains())
    ok = (code == 10 and d["kind"] == "TypeI" and d["attained_at"] == [2]
          and len(ims) == 2 and all(abs(v) > 0 for v in ims)
          and int(np.argmax(rr)) == 2 and elapsed < 1.0)
    report(1, ok, f"exit={code} attained_at={d['attained_at']} poles={d['dominant_poles']} "
                  f"oracle_k={int(np.argmax(rr))} t={elapsed:.2f}s")
    assert code == 10 and d["kind"] == "TypeI"
    assert d["attained_at"] == [2] and int(np.argmax(rr)) == 2
    assert len(ims) == 2 and all(abs(v) > 0 for v in ims)
    assert elapsed < 1.0


@pytest.mark.acceptance(2, "simulate grayscott:A saturates in mode 2 (< 2 min at N = 128)")
def test_criterion_2_set_a_pattern(tmp_path, capsys):
    t0 = time.perf_counter()
    code, out = cli(["simulate", "grayscott:A", "--N", 128, "--out-dir", tmp_path], capsys)
    elapsed = time.perf_counter() - t0
    rep = json.loads(out)
    ok = code == 0 and rep["k_star"] == 2 and rep["saturated"] and elapsed < 120
    report(2, ok, f"k_star={rep.get('k_star')} saturated={rep.get('saturated')} "
                  f"amplitude={rep.get('amplitude'):.3g} t={elapsed:.1f}s")
    assert code == 0
    assert rep["k_star"] == 2 and rep["saturated"]
    assert elapsed < 120


@pytest.mark.acceptance(3, "set B forms a pattern and is classified Type-I (< 2 min)")
def test_criterion_3_set_b_pattern(tmp_path, capsys):
    t0 = time.perf_counter()
    code, out = cli(["simulate", "grayscott:B", "--N", 128, "--out-dir", tmp_path], capsys)
    elapsed = time.perf_counter() - t0
    rep = json.loads(out)
    v = classify(gs.linear_system(gs.PRESETS["B"]), SPEC)
    pattern = rep["k_star"] is not None and rep["k_star"] >= 1 and rep["pattern"]
    ok = code == 0 and pattern and v.kind == "TypeI" and elapsed < 120
    report(3, ok, f"k_star={rep['k_star']} pattern={rep['pattern']} "
                  f"amplitude={rep['amplitude']:.3g} verdict={v.kind} "
                  f"max_real={v.dominant.max_real:.4g} flags={v.condition_flags.as_dict()} "
                  f"t={elapsed:.1f}s")
    assert code == 0 and elapsed < 120
    assert pattern, f"no pattern at set B: {rep}"
    assert v.kind == "TypeI", f"set B verdict {v.kind}"


@pytest.mark.acceptance(4, "1000 Hurwitz 2x2 systems, zero Type-I verdicts (< 30 s)")
def test_criterion_4_theorem1(rng):
    t0 = time.perf_counter()
    type_one = oracle_hits = 0
    for i in range(1000):
        box = [0.1, 1.0, 10.0][i % 3]
        A = oracles.random_hurwitz(rng, 2, box)
        type_one += not theorem1_property(A)
        s = 1 + np.linalg.norm(A, 2)
        ok_oracle, gap = oracles.scan_type_one(A, 1e-6 * s, 1e6 * s)
        oracle_hits += bool(ok_oracle and gap > tol_dom(LinearSystem(A)))
    elapsed = time.perf_counter() - t0
    ok = type_one == 0 and oracle_hits == 0 and elapsed < 30
    report(4, ok, f"type_one={type_one} oracle_hits={oracle_hits} t={elapsed:.1f}s")
    assert type_one == 0 and oracle_hits == 0
    assert elapsed < 30


@pytest.mark.acceptance(5, "closed form agrees with the gain scan on 2000 Hurwitz 3x3 (< 2 min)")
def test_criterion_5_theorem2_equivalence(rng):
    t0 = time.perf_counter()
    n = agree = lemma_agree = positives = discarded = 0
    branches = set()
    mismatches = []
    while n < 2000:
        # Half uniform samples, half drawn near the Type-I region.
        A = rng.uniform(-1, 1, (3, 3)) if n % 2 == 0 else oracles.structured_three(rng)
        if np.linalg.eigvals(A).real.max() >= -1e-6:
            continue
        sys = LinearSystem(A)
        f = theorem2_conditions(sys)
        s = 1 + sys.norm
        scan, gap = oracles.scan_type_one(A, 1e-6 * s, 1e6 * s)
        if f.margin < 1e-6 or (gap is not None and abs(gap) < 1e-6 * s):
            discarded += 1
            continue
        n += 1
        positives += scan
        agree += scan == f.type_one
        res = lemma3_check(sys)
        lemma_agree += res.satisfied == f.type_one
        if f.type_one:
            branches.add("II_A" if f.II_A else "II_B")
        if scan != f.type_one:
            mismatches.append(A)
    elapsed = time.perf_counter() - t0
    ok = agree == lemma_agree == 2000 and elapsed < 120
    report(5, ok, f"scan_agree={agree}/2000 lemma3_agree={lemma_agree}/2000 "
                  f"type_one={positives} branches={sorted(branches)} "
                  f"discarded={discarded} t={elapsed:.1f}s")
    assert agree == 2000, mismatches[:3]
    assert lemma_agree == 2000
    assert positives > 50 and branches == {"II_A", "II_B"}
    assert elapsed < 120


@pytest.mark.acceptance(6, "locus endpoints: spec(A) at 0, spec(A~) at 1e6 scale (< 30 s)")
def test_criterion_6_lemma2_endpoints(rng):
    t0 = time.perf_counter()
    worst0 = worst_inf = 0.0
    for i in range(200):
        n = 2 + i % 3
        A = rng.normal(size=(n, n))
        tf = transfer_function(LinearSystem(A))
        r0 = poly_roots(closed_loop_poly(tf, 0.0)).roots
        worst0 = max(worst0, oracles.match_error(r0, np.linalg.eigvals(A)))
        r = poly_roots(closed_loop_poly(tf, 1e6 * tf.scale)).roots
        bounded = r[np.argsort(np.abs(r))][:-1]
        worst_inf = max(worst_inf, oracles.match_error(bounded, np.linalg.eigvals(A[:-1, :-1])))
    elapsed = time.perf_counter() - t0
    ok = worst0 <= 1e-8 and worst_inf <= 1e-3 and elapsed < 30
    report(6, ok, f"max|start-spec(A)|={worst0:.2e} max|end-spec(A~)|={worst_inf:.2e} "
                  f"t={elapsed:.1f}s")
    assert worst0 <= 1e-8 and worst_inf <= 1e-3
    assert elapsed < 30


@pytest.mark.acceptance(7, "every Type-I verdict in the suite has non-real dominant poles")
def test_criterion_7_proposition1():
    verdicts = list(conftest.TYPE_I_VERDICTS)
    bad = [v for v in verdicts if not proposition1_check(v)]
    ok = bool(verdicts) and not bad
    report(7, ok, f"type_one_verdicts={len(verdicts)} violations={len(bad)}")
    assert verdicts, "no Type-I verdicts were produced"
    assert not bad, [v.dominant for v in bad[:3]]


@pytest.mark.acceptance(8, "linearised set A growth rates for modes 1-3 within 5% (< 1 min)")
def test_criterion_8_linear_growth():
    t0 = time.perf_counter()
    A = gs.linear_system(gs.PRESETS["A"]).A
    N = 128
    errors = {}
    for k in (1, 2, 3):
        predicted = poly_roots(closed_loop_poly(transfer_function(LinearSystem(A)),
                                                SPEC.gain(k))).max_real
        cfg = SimConfig(N=N, T=10000.0, mu=1e-3, method="BDF", rtol=1e-9, atol=1e-15,
                        sample_every=10.0)
        tr = simulate(lambda U: A @ U, cfg, cosine_ic(np.zeros(3), N, modes=[k], amplitude=1e-3))
        rep = dominant_mode(tr, detect_saturation=False)
        assert rep.k_star == k
        errors[k] = abs(rep.growth_rate - predicted) / abs(predicted)
    elapsed = time.perf_counter() - t0
    ok = max(errors.values()) <= 0.05 and elapsed < 60
    report(8, ok, " ".join(f"k={k}:{e:.2%}" for k, e in errors.items()) + f" t={elapsed:.1f}s")
    assert max(errors.values()) <= 0.05
    assert elapsed < 60


@pytest.mark.acceptance(9, "100x100 sweep: both marks inside, region simply connected (< 2 min)")
def test_criterion_9_region_sweep():
    t0 = time.perf_counter()
    workers = int(os.environ.get("TURING_ONE_THREADS") or min(4, os.cpu_count() or 1))
    res = gs.region_sweep(grid=(100, 100), workers=workers)
    elapsed = time.perf_counter() - t0
    summ = res.summary()
    marks = summ["marks_inside"]
    ok = (summ["type_i_cells"] > 0 and summ["simply_connected"] and marks["A"] and marks["B"]
          and elapsed < 120)
    report(9, ok, f"cells={summ['type_i_cells']} simply_connected={summ['simply_connected']} "
                  f"marks={marks} box={summ['bounding_box']} t={elapsed:.1f}s")
    assert summ["type_i_cells"] > 0 and summ["simply_connected"]
    assert marks["A"], "set A outside the Type-I region"
    assert marks["B"], "set B outside the Type-I region"
    assert elapsed < 120


@pytest.mark.acceptance(10, "Gray-Scott sum identity, equilibrium residuals, stable Zero branch")
def test_criterion_10_gray_scott_identities(rng):
    worst_sum = 0.0
    for _ in range(1000):
        p = gs.GSParams(eta1=rng.uniform(0, 1), eta2=rng.uniform(0, 1),
                        k_rate=rng.uniform(0, 0.2), gamma=rng.uniform(0, 0.2))
        x, y, z = rng.uniform(-1, 2, 3)
        d = gs.rhs(p, np.array([x, y, z]))
        worst_sum = max(worst_sum, abs(d.sum() - p.gamma * (1 - x - y - z)))
    worst_res = 0.0
    zero_kinds = set()
    for g in np.linspace(1e-3, 0.1, 50):
        for k in np.linspace(1e-3, 0.12, 50):
            p = gs.GSParams(gamma=g, k_rate=k)
            eqs = gs.equilibria(p)
            worst_res = max(worst_res, max(gs.residual(p, e) for e in eqs))
            J = gs.jacobian_at(p, eqs[0])
            zero_kinds.add(classify(LinearSystem(J), SPEC).kind)
    ok = worst_sum <= 1e-12 and worst_res <= 1e-10 and zero_kinds == {"Stable"}
    report(10, ok, f"sum_identity={worst_sum:.1e} residual={worst_res:.1e} zero={zero_kinds}")
    assert worst_sum <= 1e-12
    assert worst_res <= 1e-10
    assert zero_kinds == {"Stable"}
