"""Command-line entry points.

Subcommands: generate (emit model JSON), bounds (emit the bound table), run
(execute an experiment config), reproduce (named claim suites), serve (start
the live-session HTTP service), replay (rebuild a run from its transcript).
Exit codes: 0 pass, 1 fail, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import algorithms, lab, model
from .bounds import compute_bounds
from .lab import ConfigError


def _parse_blocks(text: str) -> tuple[tuple[int, float], ...]:
    """Parse '8:0.5,2:0.9' into ((8, 0.5), (2, 0.9))."""
    blocks = []
    for part in text.split(","):
        count, _, freq = part.partition(":")
        blocks.append((int(count), float(freq)))
    return tuple(blocks)


def _write_or_print(payload: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(payload)
    else:
        print(payload)


def cmd_generate(args) -> int:
    spec = lab.ModelSpec(
        kind=args.kind,
        m=args.m,
        d=args.d,
        leaf_budget=args.leaf_budget,
        blocks=_parse_blocks(args.blocks) if args.blocks else None,
        n=args.n,
        l=args.l,
        r=args.r,
    )
    spec.validate()
    truth = spec.build(args.seed)
    payload = {"kind": args.kind, "matrix": truth.matrix.to_json_dict()}
    if truth.tree is not None:
        payload["tree"] = truth.tree.to_json_dict()
    _write_or_print(json.dumps(payload, sort_keys=True, indent=2), args.out)
    return 0


def cmd_bounds(args) -> int:
    spec = model.IndependentSpec(blocks=_parse_blocks(args.blocks)) if args.blocks else None
    if spec is None and args.m is None:
        raise ConfigError("bounds needs --m or --blocks")
    table = compute_bounds(m=args.m, spec=spec, d=args.d, delta=args.delta, n=args.n)
    _write_or_print(json.dumps(table.to_json_dict(), sort_keys=True, indent=2), args.out)
    return 0


def cmd_run(args) -> int:
    cfg_dict = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.trials is not None:
        cfg_dict["trials"] = args.trials
    config = lab.ExperimentConfig.from_dict(cfg_dict)
    result = lab.run_experiment(config, workers=args.workers)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.with_suffix(".csv").write_text(result.to_csv())
        out.with_suffix(".json").write_text(
            json.dumps(result.to_json_dict(), sort_keys=True, indent=2)
        )
        print(f"wrote {out.with_suffix('.csv')} and {out.with_suffix('.json')}")
    else:
        print(json.dumps(result.to_json_dict()["aggregate"], sort_keys=True, indent=2))
    return 0


def cmd_reproduce(args) -> int:
    names = list(lab.SUITES) if args.suite == "all" else [args.suite]
    all_passed = True
    for name in names:
        report = lab.reproduce(name, seed=args.seed)
        print(report.summary())
        for line in report.lines:
            print("  " + line)
        if args.out and report.rows:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            import csv as _csv

            path = out_dir / f"{name.replace('.', '_')}.csv"
            with path.open("w", newline="") as fh:
                w = _csv.DictWriter(fh, fieldnames=list(report.rows[0].keys()))
                w.writeheader()
                w.writerows(report.rows)
        all_passed &= report.passed
    return 0 if all_passed else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .session import SessionStore

    app = create_app(SessionStore(Path(args.data_dir)))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_replay(args) -> int:
    transcript = algorithms.Transcript.from_jsonl(Path(args.transcript).read_text())
    truth = None
    if args.truth:
        payload = json.loads(Path(args.truth).read_text())
        from .oracle import GroundTruth

        matrix = model.FeatureMatrix.from_json_dict(payload["matrix"])
        tree = (
            model.FeatureTree.from_json_dict(payload["tree"])
            if payload.get("tree")
            else None
        )
        truth = GroundTruth(matrix=matrix, tree=tree)
    result = algorithms.replay(transcript, truth)
    print(json.dumps(result.to_json_dict(), sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oddoneout",
        description="Feature discovery via adaptively chosen two-out-of-three comparisons",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a ground-truth model as JSON")
    p.add_argument("--kind", required=True, choices=(
        "binary-tree", "caterpillar-tree", "leafy-tree", "independent", "lr",
        "tree-plus-independent"))
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--leaf-budget", dest="leaf_budget", type=int)
    p.add_argument("--blocks", help="independent blocks, e.g. 8:0.5,2:0.9")
    p.add_argument("--n", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("bounds", help="emit the closed-form bound table")
    p.add_argument("--m", type=int)
    p.add_argument("--blocks")
    p.add_argument("--d", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("run", help="run an experiment config (JSON file)")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output path stem (.csv and .json)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("reproduce", help="run a named claim suite (or 'all')")
    p.add_argument("suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for evidence CSVs")
    p.set_defaults(fn=cmd_reproduce)

    p = sub.add_parser("serve", help="start the live-session HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default="./sessions")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("replay", help="rebuild a run result from a transcript")
    p.add_argument("transcript")
    p.add_argument("--truth", help="model JSON to validate answers against")
    p.set_defaults(fn=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, model.InvalidParameter) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
