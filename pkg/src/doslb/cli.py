"""Command line entry point: run, compare, gaps, validate."""

import argparse
import math
import os
import sys

import yaml

from . import gaps, harness, instances
from .errors import DoslbError, NumericalError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _sim_flags(p):
    p.add_argument("--config", metavar="PATH", help="experiment config file (YAML)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--seeds", metavar="LIST", help='seed list, e.g. "0-29" or "1,2,3"')
    p.add_argument("--horizon", metavar="N", type=int, help="number of rounds T")
    p.add_argument("--geometry", choices=sorted(harness.GEOMETRIES), help="confidence region geometry")
    p.add_argument("--policy", action="append", choices=["doslb", "safelts", "oracle"],
                   help="policy to run; repeat to compare several")
    p.add_argument("--instance", help="builtin instance spec or instance file")
    p.add_argument("--eps", type=float, help="slack for the relaxed regret")
    p.add_argument("--jobs", type=int, help="parallel workers")


def _instance_flags(p):
    p.add_argument("source", nargs="?", help="builtin instance spec or instance file")
    p.add_argument("--instance", dest="instance", help="same as the positional argument")
    p.add_argument("--config", metavar="PATH", help="take the instance from an experiment config")
    p.add_argument("--out", metavar="DIR", help="also write a YAML report here")


def build_parser():
    ap = _Parser(prog="doslb", description="Safe linear bandit simulator and gap analysis.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    _sim_flags(sub.add_parser("run", help="simulate policies and write curves"))
    _sim_flags(sub.add_parser("compare", help="overlay several policies on paired seeds"))
    _instance_flags(sub.add_parser("gaps", help="per-BIS gap table"))
    _instance_flags(sub.add_parser("validate", help="check the modelling assumptions"))
    return ap


def _config(args, default_policies):
    cfg = harness.load_config(args.config) if args.config else harness.ExperimentConfig()
    if args.policy:
        cfg.policies = list(args.policy)
    elif not args.config:
        cfg.policies = list(default_policies)
    if args.seeds is not None:
        cfg.seeds = harness.parse_seeds(args.seeds)
    for attr, val in (("T", args.horizon), ("geometry", args.geometry), ("instance", args.instance),
                      ("eps", args.eps), ("jobs", args.jobs), ("out", args.out)):
        if val is not None:
            setattr(cfg, attr, val)
    if not cfg.out:
        raise UsageError("an output directory is required (--out or 'out' in the config)")
    return cfg.validate()


def cmd_run(args, out=sys.stdout):
    cfg = _config(args, ["doslb"])
    setup = harness.prepare(cfg)
    results = harness.run(cfg)
    harness.write_run_report(cfg.out, cfg, setup, results)
    print(f"wrote {len(results)} run(s) to {cfg.out}", file=out)
    return EXIT_OK


def cmd_compare(args, out=sys.stdout):
    cfg = _config(args, ["doslb", "safelts"])
    if len(cfg.policies) < 2:
        raise UsageError("compare needs at least two policies")
    setup = harness.prepare(cfg)
    results = harness.run(cfg)
    groups = harness.write_compare_report(cfg.out, cfg, setup, results)
    for name, sums in groups.items():
        eff = sum(s.efficacy_regret[-1] for s in sums) / len(sums)
        saf = sum(s.safety_regret[-1] for s in sums) / len(sums)
        print(f"{name:8s} mean efficacy regret {eff:.6g}  mean safety regret {saf:.6g}", file=out)
    return EXIT_OK


def _source(args):
    src = args.source or args.instance
    if src is None and args.config:
        src = harness.load_config(args.config).instance
    if src is None:
        raise UsageError("an instance is required")
    return src


def _num(v):
    return f"{v:.6g}" if math.isfinite(v) else str(v)


def render_gap_table(rep):
    head = f"{'BIS':10s} {'status':12s} {'Delta':>10s} {'Gamma':>10s} {'Lambda':>10s}  point"
    lines = [head, "-" * len(head)]
    for r in rep.records:
        c = r.classification
        status = "optimal" if c.optimal else ("consistent" if c.consistent else "inconsistent")
        pt = "-" if c.point is None else "(" + ", ".join(f"{v:.6g}" for v in c.point) + ")"
        lines.append(f"{r.bis.label:10s} {status:12s} {_num(r.delta):>10s} {_num(r.gamma):>10s}"
                     f" {_num(r.lam):>10s}  {pt}")
    label = "-" if rep.xi_bis is None else rep.xi_bis.label
    lines.append(f"Xi = {_num(rep.xi)} at {label}")
    lines += [f"note: {n}" for n in rep.notes]
    lines += [f"VIOLATION: {v}" for v in rep.violations]
    return "\n".join(lines)


def cmd_gaps(args, out=sys.stdout):
    inst = instances.resolve(_source(args))
    rep = gaps.xi(inst)
    print(render_gap_table(rep), file=out)
    doc = gaps.report_to_dict(rep)
    if inst.label == "simplex_mab":
        ag = gaps.arm_gaps(inst)
        print(f"arms: best e_{ag.best_arm + 1}, Delta = {_num(ag.delta)}, Gamma = {_num(ag.gamma)}", file=out)
        doc["arms"] = {"best": ag.best_arm + 1, "Delta": ag.delta, "Gamma": ag.gamma,
                       "deltas": [float(v) for v in ag.deltas], "gammas": [float(v) for v in ag.gammas]}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "gaps.yaml"), "w") as fh:
            yaml.safe_dump(doc, fh, sort_keys=False)
    return EXIT_OK


def cmd_validate(args, out=sys.stdout):
    inst = instances.resolve(_source(args))
    rep = instances.validate(inst)
    doc = {
        "instance": inst.label, "d": inst.d, "known": inst.K, "unknown": inst.U,
        "L": float(rep.L), "S": float(rep.S), "satisfies_a1": rep.satisfies_a1, "satisfies_a2": rep.satisfies_a2,
        "suggested_lambda": float(rep.suggested_lambda), "unique_optimum": rep.unique_optimum,
        "n_vertices": rep.n_vertices, "warnings": list(rep.warnings),
    }
    text = yaml.safe_dump(doc, sort_keys=False)
    out.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "validate.yaml"), "w") as fh:
            fh.write(text)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "gaps": cmd_gaps, "validate": cmd_validate}


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DoslbError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
