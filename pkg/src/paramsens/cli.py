"""Command line interface: sample, synth, run, analyze, serve, report."""

from __future__ import annotations

import argparse
import configparser
import logging
import sys

from .config import ConfigError, load_config, parse_parameters
from .fibers import write_fiber_csv
from .preprocess import STAGES, preprocess
from .report import SENSITIVITY_CSV, write_report, write_sensitivity_csv
from .runner import run_study
from .sampling import build_plan, write_plan_csv
from .synthetic import SynthConfig, generate


def _read_descriptors(path):
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read parameter file {path}")
    return parse_parameters(cp)


def _cmd_sample(args):
    descriptors = _read_descriptors(args.params)
    plan = build_plan(descriptors, args.n, args.step, args.seed, args.max_steps)
    write_plan_csv(args.out, plan)
    print(f"wrote {len(plan.samples)} samples to {args.out}")


def _cmd_synth(args):
    extent = tuple(float(v) for v in args.extent.split(","))
    if len(extent) != 3:
        raise ConfigError("--extent needs ax,ay,az")
    cfg = SynthConfig(extent=extent, fiber_count=args.count, seed=args.seed)
    result = generate(args.param1, args.param2, cfg)
    write_fiber_csv(args.out, result)
    print(f"wrote {len(result.fibers)} fibers to {args.out}")


def _cmd_run(args):
    cfg = load_config(args.config)
    collection = run_study(cfg, args.out, force=args.force)
    print(f"collection ready at {collection}")


def _cmd_analyze(args):
    stages = tuple(args.stages.split(",")) if args.stages else STAGES
    study = preprocess(args.collection, stages=stages)
    if study.field is not None:
        out = f"{args.collection}/{SENSITIVITY_CSV}"
        write_sensitivity_csv(out, study)
        print(f"wrote {out}")
    print(f"preprocessed stages: {', '.join(stages)}")


def _cmd_serve(args):
    from .service import serve

    study = preprocess(args.collection)
    print(f"serving {args.collection} on http://{args.host}:{args.port}")
    serve(study, host=args.host, port=args.port)


def _cmd_report(args):
    study = preprocess(args.collection)
    out = write_report(study, args.out)
    print(f"report written to {out}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="paramsens", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="generate a sample plan")
    p.add_argument("--params", required=True, help="file with a [parameters] section")
    p.add_argument("--n", type=int, required=True, help="number of stars")
    p.add_argument("--step", type=float, required=True, help="step width (fraction of range)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("synth", help="run the synthetic fiber generator once")
    p.add_argument("--param1", type=float, required=True)
    p.add_argument("--param2", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=80)
    p.add_argument("--extent", default="300,300,300")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("run", help="execute a study into a collection directory")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("analyze", help="preprocess a collection and write sensitivity.csv")
    p.add_argument("--collection", required=True)
    p.add_argument("--stages", default=None, help=f"comma list of {','.join(STAGES)}")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("serve", help="start the read-only query service")
    p.add_argument("--collection", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("report", help="write a static summary with data files")
    p.add_argument("--collection", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_report)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.fn(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
