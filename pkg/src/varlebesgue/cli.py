"""Command line interface: ``varlebesgue {audit,verify,norm,apply}``.

Exit codes: 0 when every verdict is pass/bounded-stable, 1 when any verdict
is fail, growing or inconclusive, 2 on configuration or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .io import FormatError, dumps_sampled, read_sampled
from .maximal import MaximalConfig
from .norms import luxemburg_norm
from .rough import apply_T_alpha
from .verify import (
    ConfigError,
    HypothesisError,
    InequalityReport,
    audit_hypotheses,
    load_config,
    make_suite,
    render_report,
    run_experiment,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
OPERATORS = ("M", "M_alpha", "M_alpha_s", "sharp", "T_alpha")


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--refine", type=int, metavar="LEVELS", help="number of grids in the refinement ladder")
    p.add_argument("--waive-hypotheses", action="store_true", help="run even if the hypothesis audit fails")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varlebesgue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("audit", "check every hypothesis the config's checks depend on"),
        ("verify", "run the configured checks and emit reports"),
        ("norm", "Luxemburg norms of an input function or of the suite"),
        ("apply", "apply an operator to an input function"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name in ("norm", "apply"):
            p.add_argument("--input", help="sampled function in the columnar text format")
        if name == "apply":
            p.add_argument("--operator", choices=OPERATORS, default="M")
            p.add_argument("--function", help="suite function id when no --input is given")
    return parser


def _overrides(args) -> dict:
    return {"refinement_levels": args.refine, "waive_hypotheses": args.waive_hypotheses}


def _cmd_audit(args, config) -> int:
    rep = audit_hypotheses(config)
    report = InequalityReport("conditions_audit", rep.constant, [], [], rep.verdict, config.config_hash(),
                              notes=rep.notes, clauses=dict(rep.clauses))
    _write(render_report([report], args.format, config.config_hash()), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _cmd_verify(args, config) -> int:
    reports = run_experiment(config)
    _write(render_report(reports, args.format, config.config_hash()), args.out)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def _functions(args, config):
    if args.input:
        f = read_sampled(args.input)
        return [("input", f)]
    cases = make_suite(config.suite)
    fid = getattr(args, "function", None)
    if fid:
        cases = [c for c in cases if c.id == fid]
        if not cases:
            raise ConfigError(f"no suite function {fid!r}")
    return [(c.id, c.on(config.grid)) for c in cases]


def _cmd_norm(args, config) -> int:
    rows = []
    for fid, f in _functions(args, config):
        res = luxemburg_norm(f, config.exponent, config.norm_tol)
        rows.append({"function_id": fid, "norm": res.value, "modular_at_value": res.modular_at_value,
                     "bracket": list(res.bracket)})
    if args.format == "json":
        doc = {"config_hash": config.config_hash(), "exponent": config.exponent.description, "norms": rows}
        text = json.dumps(doc, sort_keys=True, indent=2, default=float) + "\n"
    else:
        text = "function_id,norm,modular_at_value\n" + "".join(
            f"{r['function_id']},{r['norm']:.12g},{r['modular_at_value']:.12g}\n" for r in rows
        )
    _write(text, args.out)
    return EXIT_OK


def _cmd_apply(args, config) -> int:
    fid, f = _functions(args, config)[0]
    op = args.operator
    if op == "T_alpha":
        if config.kernel is None:
            raise ConfigError("operator T_alpha needs a kernel section")
        g = apply_T_alpha(f, config.kernel, config.quadrature)
    else:
        flavor = {"M": "hl", "M_alpha": "fractional", "M_alpha_s": "fractional_s", "sharp": "sharp"}[op]
        s = config.kernel.s if (op == "M_alpha_s" and config.kernel is not None) else 1.0
        alpha = 0.0 if op in ("M", "sharp") else config.alpha
        g = MaximalConfig(config.family.build(f.grid), flavor, alpha, s).apply(f)
    _write(dumps_sampled(g), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _overrides(args))
        handler = {"audit": _cmd_audit, "verify": _cmd_verify, "norm": _cmd_norm, "apply": _cmd_apply}
        return handler[args.command](args, config)
    except (ConfigError, HypothesisError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
