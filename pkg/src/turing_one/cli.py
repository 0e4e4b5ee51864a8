"""Command-line front end: ``turing-one <command> ...``.

Commands
--------
analyze     classify a model file or a Gray-Scott preset
locus       tabulate the root locus of the local reaction dynamics
sweep       map the Type-I region of the Gray-Scott model over (gamma, k)
simulate    run the 1-D reaction-diffusion simulation and report the dominant mode
equilibria  list the homogeneous Gray-Scott equilibria with their stability

Exit codes: analyze returns 0/10/11/12 for Stable/TypeI/TypeII/NotTuring;
every command returns 2 on invalid input and simulate returns 3 on divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import grayscott as gs
from .classify import classify, locus_table
from .errors import DegenerateParametersError, DivergenceError, TuringError
from .model import SpatialSpec, load_model, transfer_function
from .pdesim import SimConfig, cosine_ic, dominant_mode, simulate

EXIT_CODES = {"Stable": 0, "TypeI": 10, "TypeII": 11, "NotTuring": 12}
EXIT_INVALID = 2
EXIT_DIVERGED = 3


class UsageError(Exception):
    pass


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


@dataclasses.dataclass
class RunManifest:
    command: str
    input_digest: str
    parameters: dict
    tool_version: str
    wall_time: float
    outputs: list

    @classmethod
    def build(cls, command, inputs: bytes, parameters, outputs, started):
        files = [{"path": str(p), "sha256": _sha256(Path(p).read_bytes())} for p in outputs]
        return cls(command, _sha256(inputs), parameters, _version(),
                   time.perf_counter() - started, files)

    def write(self, path) -> None:
        Path(path).write_text(_dump(dataclasses.asdict(self)) + "\n", encoding="utf-8")


def _err(msg: str) -> None:
    print(f"turing-one: {msg}", file=sys.stderr)


def _preset_name(source: str):
    if source.startswith("grayscott:"):
        name = source.split(":", 1)[1].upper()
        if name not in gs.PRESETS:
            raise UsageError(f"unknown preset {source!r}; choose grayscott:A or grayscott:B")
        return name
    return None


def _load(source: str, args):
    """Model and spatial spec from a preset or file; flags override file values."""
    name = _preset_name(source)
    if name:
        p = gs.PRESETS[name]
        sys_, spec = gs.linear_system(p), SpatialSpec(mu=p.mu, L=gs.PRESET_L)
        raw = json.dumps({"preset": name}).encode()
    else:
        path = Path(source)
        if not path.is_file():
            raise UsageError(f"model file not found: {source}")
        raw = path.read_bytes()
        sys_, spec = load_model(raw.decode("utf-8"))
    overrides = {k: v for k, v in (("mu", getattr(args, "mu", None)),
                                   ("L", getattr(args, "L", None)),
                                   ("k_max", getattr(args, "k_max", None)),
                                   ("lambda_policy", getattr(args, "policy", None)))
                 if v is not None}
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    return sys_, spec, raw


def cmd_analyze(args) -> int:
    sys_, spec, _ = _load(args.model, args)
    verdict = classify(sys_, spec)
    print(_dump(verdict.to_dict(evidence=args.evidence)))
    return EXIT_CODES[verdict.kind]


def _gain_grid(lo: float, hi: float, points: int) -> np.ndarray:
    if lo < 0 or hi < lo or points < 1:
        raise UsageError("need 0 <= lambda-min <= lambda-max and points >= 1")
    if hi == lo or points == 1:
        return np.array([lo])
    if lo == 0:
        return np.concatenate([[0.0], np.geomspace(hi * 1e-6, hi, points - 1)])
    return np.geomspace(lo, hi, points)


def cmd_locus(args) -> int:
    sys_, spec, _ = _load(args.model, args)
    lams = _gain_grid(args.lambda_min, args.lambda_max, args.points)
    rows = locus_table(transfer_function(sys_), lams, spec)
    if args.json:
        print(_dump([{"lambda": r[0], "re": r[1], "im": r[2], "source_k": r[3]} for r in rows]))
        return 0
    lines = ["lambda,re,im,source_k"]
    lines += [f"{r[0]:.17g},{r[1]:.17g},{r[2]:.17g},{'' if r[3] is None else r[3]}"
              for r in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _range(vals, name):
    lo, hi = vals
    if not (lo > 0 and hi >= lo):
        raise UsageError(f"--{name}-range must satisfy 0 < lo <= hi, got {lo} {hi}")
    return lo, hi


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    g_rng = _range(args.gamma_range, "gamma")
    k_rng = _range(args.k_range, "k")
    grid = args.grid if len(args.grid) == 2 else args.grid * 2
    if min(grid) < 1:
        raise UsageError("--grid must be positive")
    eta1 = args.eta1 if args.eta1 is not None else args.eta
    eta2 = args.eta2 if args.eta2 is not None else args.eta
    result = gs.region_sweep(g_rng, k_rng, tuple(grid), eta1=eta1, eta2=eta2, mu=args.mu,
                             L=args.L, verify_lemma3=args.verify_lemma3, seed=args.seed,
                             workers=args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / "region.csv", out / "summary.json"
    result.write_csv(csv_path)
    result.write_summary(json_path)
    params = {"gamma_range": list(g_rng), "k_range": list(k_rng), "grid": list(grid),
              "eta1": eta1, "eta2": eta2, "mu": args.mu, "L": args.L,
              "verify_lemma3": args.verify_lemma3, "seed": args.seed}
    RunManifest.build("sweep", _dump(params).encode(), params, [csv_path, json_path],
                      started).write(out / "manifest.json")
    print(_dump(result.summary()))
    return 0


def _simulation_setup(args):
    """Reaction terms, initial state, simulation config and predicted rate."""
    name = _preset_name(args.model)
    mu = args.mu
    predicted = None
    if name and not args.linearize:
        p = gs.PRESETS[name]
        mu = p.mu if mu is None else mu
        base = gs.equilibrium(p, "Plus").state
        rhs = lambda U: gs.rhs(p, U)
        defaults = dict(T=20000.0, method="BDF", sample_every=20.0)
    else:
        sys_, spec, _ = _load(args.model, argparse.Namespace(mu=mu, L=args.L))
        mu = spec.mu
        A = sys_.A
        base = np.zeros(sys_.n)
        rhs = lambda U: A @ U
        defaults = dict(T=10000.0, method="BDF", sample_every=10.0, rtol=1e-9, atol=1e-15)
        if args.seed_mode is not None:
            from .classify import subsystem_poles
            tf = transfer_function(sys_)
            spec = dataclasses.replace(spec, mu=mu, L=args.L if args.L else spec.L,
                                       k_max=max(spec.k_max, args.seed_mode))
            predicted = subsystem_poles(tf, spec, args.seed_mode).max_real
    L = args.L if args.L is not None else gs.PRESET_L
    cfg_kw = dict(defaults)
    for key in ("T", "method", "dt", "sample_every", "rtol", "atol"):
        val = getattr(args, key)
        if val is not None:
            cfg_kw[key] = val
    cfg = SimConfig(N=args.N, L=L, mu=mu, **cfg_kw)
    if args.ic == "equilibrium":
        ic = np.repeat(base[:, None], cfg.N, axis=1)
    elif args.seed_mode is not None:
        ic = cosine_ic(base, cfg.N, L, modes=[args.seed_mode], amplitude=args.amplitude)
    else:
        ic = cosine_ic(base, cfg.N, L, amplitude=args.amplitude)
    return rhs, ic, cfg, predicted


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    rhs, ic, cfg, predicted = _simulation_setup(args)
    try:
        traj = simulate(rhs, cfg, ic)
    except DivergenceError as exc:
        _err(str(exc))
        print(_dump({"error": "divergence", "time": exc.time}))
        return EXIT_DIVERGED
    if args.window:
        window = tuple(args.window)
    else:
        # Last quarter of the run, widened to hold at least five samples.
        t = traj.times
        window = (float(min(0.75 * cfg.T, t[max(0, t.size - 5)])), cfg.T)
    saturation = args.seed_mode is None and not args.linearize
    report = dominant_mode(traj, window=window, detect_saturation=saturation).as_dict()
    report["window"] = list(window)
    if predicted is not None:
        report["predicted_growth_rate"] = predicted
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "trajectory.csv", out / "trajectory.bin", out / "spectra.csv",
             out / "report.json"]
    traj.write_csv(paths[0])
    traj.write_binary(paths[1])
    traj.write_spectra_csv(paths[2])
    paths[3].write_text(_dump(report) + "\n", encoding="utf-8")
    params = {"model": args.model, "linearize": args.linearize, "seed_mode": args.seed_mode,
              "ic": args.ic, "amplitude": args.amplitude, "N": cfg.N, "L": cfg.L, "T": cfg.T,
              "mu": cfg.mu, "dt": cfg.dt, "method": cfg.method, "rtol": cfg.rtol,
              "atol": cfg.atol, "sample_every": cfg.sample_every, "window": list(window)}
    RunManifest.build("simulate", _dump(params).encode(), params, paths,
                      started).write(out / "manifest.json")
    print(_dump(report))
    return 0


def cmd_equilibria(args) -> int:
    p = gs.GSParams(eta1=args.eta1, eta2=args.eta2, k_rate=args.k, gamma=args.gamma)
    try:
        eqs = gs.equilibria(p)
    except DegenerateParametersError as exc:
        raise UsageError(str(exc)) from exc
    out = []
    for eq in eqs:
        out.append({"branch": eq.branch, "x": eq.x, "y": eq.y, "z": eq.z,
                    "residual": gs.residual(p, eq), "nonphysical": eq.nonphysical,
                    "stability": gs.stability(p, eq)})
    print(_dump({"params": dataclasses.asdict(p), "v": p.v, "w": p.w, "equilibria": out}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="turing-one", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=_version())
    sub = ap.add_subparsers(dest="command", required=True)

    def spatial(p):
        p.add_argument("--mu", type=float)
        p.add_argument("--L", type=float)
        p.add_argument("--k-max", type=int)
        p.add_argument("--policy", choices=["discrete", "continuous"])

    p = sub.add_parser("analyze", help="classify a model")
    p.add_argument("model", help="model JSON file or grayscott:A / grayscott:B")
    spatial(p)
    p.add_argument("--evidence", action="store_true", help="include per-mode pole table")
    p.add_argument("--json", action="store_true", help="accepted for symmetry; output is JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("locus", help="root locus table")
    p.add_argument("model")
    spatial(p)
    p.add_argument("--lambda-min", type=float, default=0.0)
    p.add_argument("--lambda-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_locus)

    p = sub.add_parser("sweep", help="Type-I region over (gamma, k)")
    p.add_argument("--gamma-range", type=float, nargs=2, default=[1e-3, 5e-2])
    p.add_argument("--k-range", type=float, nargs=2, default=[2e-2, 1e-1])
    p.add_argument("--grid", type=int, nargs="+", default=[100, 100],
                   help="N (square) or N_GAMMA N_K")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--eta1", type=float)
    p.add_argument("--eta2", type=float)
    p.add_argument("--mu", type=float, default=1e-3)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--verify-lemma3", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    p.add_argument("--out-dir", default="sweep_out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="1-D simulation and dominant mode")
    p.add_argument("model", help="grayscott:A, grayscott:B or a linear model JSON file")
    p.add_argument("--linearize", action="store_true",
                   help="simulate the linearisation about the preset equilibrium")
    p.add_argument("--seed-mode", type=int, help="perturb only this cosine mode")
    p.add_argument("--ic", choices=["cosine", "equilibrium"], default="cosine")
    p.add_argument("--amplitude", type=float, default=0.01)
    p.add_argument("--N", type=int, default=128)
    p.add_argument("--L", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--dt", type=float, help="fixed RK4 step (default: adaptive)")
    p.add_argument("--method", help="adaptive method (RK45, BDF, Radau, LSODA, ...)")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--sample-every", type=float)
    p.add_argument("--window", type=float, nargs=2)
    p.add_argument("--out-dir", default="sim_out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equilibria", help="Gray-Scott homogeneous equilibria")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--eta1", type=float, default=0.1)
    p.add_argument("--eta2", type=float, default=0.1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_equilibria)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, TuringError, ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
