"""Command line: ``wsansim run | sweep | verify``.

Every flag can also be given in a ``--config`` file of ``key = value`` lines
(keys are flag names without the leading dashes, ``#`` starts a comment).
Flags on the command line win over the file.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .engine import NonTermination, run
from .harness import ALGORITHMS, BEST_SETTINGS, ExperimentSpec, emit_csv, emit_scatter, policy_for, run_sweep
from .world import InvalidConfig, WorldConfig, default_positions

EXIT_OK, EXIT_CONFIG, EXIT_NONTERM, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("wsansim")

CONFIG_KEYS = {
    "algorithm", "alpha", "ddas", "seeds", "base-seed", "grid", "actors",
    "quota", "out", "jobs", "trace", "max-steps", "svg",
}


def read_config(path: Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep or key not in CONFIG_KEYS:
            raise InvalidConfig(f"{path}:{lineno}: cannot parse {raw!r}")
        values[key] = value.strip()
    return values


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise InvalidConfig(f"--grid expects WxH, got {text!r}")


def _parse_list(text: str, kind):
    return tuple(kind(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value file mirroring the flags")
    common.add_argument("--algorithm", help=f"one of {', '.join(ALGORITHMS)}")
    common.add_argument("--alpha", help="STS alpha (comma list for sweep)")
    common.add_argument("--ddas", help="DAS distance threshold (comma list for sweep)")
    common.add_argument("--seeds", type=int, help="number of seeds (sweep default 20)")
    common.add_argument("--base-seed", type=int, help="first seed; runs use base, base+1, ...")
    common.add_argument("--grid", help="grid size WxH (default 200x200)")
    common.add_argument("--actors", type=int, help="actor count (default 16)")
    common.add_argument("--quota", type=int, help="eliminations that end a run (default 2700)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("--trace", type=Path, help="write a per-event trace (run only)")
    common.add_argument("--max-steps", type=int, help="non-termination ceiling per run")
    common.add_argument("--svg", action="store_const", const="true", help="also render the scatter")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wsansim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one algorithm, parameter and seed")
    sub.add_parser("sweep", parents=[common], help="parameter sweep over seeds, writes CSV")
    v = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    v.add_argument("--quick", action="store_true", help="skip the paper-scale comparison")
    return parser


def _settings(args: argparse.Namespace) -> dict:
    merged = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            merged[key] = value
    return merged


def _world(s: dict) -> WorldConfig:
    cfg = WorldConfig()
    changes = {}
    if "grid" in s:
        changes["width"], changes["height"] = _parse_grid(str(s["grid"]))
    if "actors" in s:
        changes["actor_count"] = int(s["actors"])
    if "quota" in s:
        changes["elimination_quota"] = int(s["quota"])
    cfg = replace(cfg, **changes)
    default_positions(cfg)  # fail early on layouts that cannot be built
    return cfg


def _params(s: dict, algorithm: str) -> tuple:
    name = algorithm.upper()
    if name.startswith("STS") and "alpha" in s:
        return _parse_list(str(s["alpha"]), float)
    if name.startswith("DAS") and "ddas" in s:
        return _parse_list(str(s["ddas"]), int)
    return ()


def _cmd_run(s: dict) -> int:
    cfg = _world(s)
    algorithm = s.get("algorithm", "TS-1")
    params = _params(s, algorithm)
    param = params[0] if params else BEST_SETTINGS.get(algorithm.upper())
    policy = policy_for(algorithm, param)
    seed = int(s.get("base-seed", 0))
    max_steps = int(s.get("max-steps", 10**6))
    with contextlib.ExitStack() as stack:
        trace = stack.enter_context(open(s["trace"], "w")) if "trace" in s else None
        m = run(cfg, policy, seed=seed, max_steps=max_steps, trace=trace)
    print(f"algorithm={algorithm.upper()} param={'' if param is None else param} seed={seed}")
    print(f"steps={m.steps_elapsed} eliminated={m.eliminated} spawned={m.spawned}")
    print(f"transfers={m.transfers} hops={m.hops} mean_ttc={m.mean_capture_time:.4f}")
    return EXIT_OK


def _cmd_sweep(s: dict) -> int:
    cfg = _world(s)
    algorithms = _parse_list(str(s.get("algorithm", ",".join(ALGORITHMS))), str)
    seeds = tuple(int(s.get("base-seed", 0)) + k for k in range(int(s.get("seeds", 20))))
    out = Path(s.get("out", "results"))
    jobs = int(s.get("jobs", 1))
    max_steps = int(s.get("max-steps", 10**6))
    rows = []
    for algorithm in algorithms:
        spec = ExperimentSpec(algorithm.upper(), _params(s, algorithm), seeds, cfg)
        log.info("sweeping %s over %d parameter(s), %d seed(s)", spec.algorithm, len(spec.params), len(seeds))
        rows.extend(run_sweep(spec, jobs=jobs, max_steps=max_steps))
    out.mkdir(parents=True, exist_ok=True)
    emit_csv(rows, out / "aggregate.csv")
    emit_scatter(rows, out / "scatter.csv", svg=str(s.get("svg", "")).lower() in {"1", "true", "yes"})
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _cmd_verify(quick: bool) -> int:
    from . import acceptance

    results = acceptance.run_all(paper=not quick, progress=log.info)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        s = _settings(args)
        if args.command == "run":
            return _cmd_run(s)
        if args.command == "sweep":
            return _cmd_sweep(s)
        return _cmd_verify(args.quick)
    except (InvalidConfig, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonTermination as exc:
        print(f"simulation did not terminate: {exc}", file=sys.stderr)
        return EXIT_NONTERM
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
