"""Command-line front end: ``beliefweb <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path


from . import expansion, harness, maxent, scoring, sysfile, web
from .model import enumerate_states
from .web import format_set



# joint tables larger than this are not enumerated for the direct score check
ENUMERATE_LIMIT = 1 << 16


class CLIError(Exception):
    def __init__(self, code: str, message: str, status: int = 2):
        super().__init__(message)
        self.code = code
        self.status = status


def _fmt(x: float) -> str:
    return harness.format_float(float(x))


def _load(path) -> "sysfile.ProbabilitySystem":
    try:
        return sysfile.load_system(path)
    except FileNotFoundError:
        raise CLIError("io", f"no such file: {path}") from None
    except sysfile.SystemFileError as exc:
        raise CLIError(exc.code, str(exc)) from None
    except ValueError as exc:
        raise CLIError("format", str(exc)) from None


def _unpacking(system):
    try:
        return web.preferred_unpacking(system.structure)
    except web.NotAWeb as exc:
        raise CLIError("not_a_web", str(exc)) from None


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise CLIError("io", f"no such file: {args.file}") from None
    except json.JSONDecodeError as exc:
        raise CLIError("format", f"invalid JSON: {exc}") from None
    system, report = sysfile.validate_doc(doc)
    for comp, total in report.sums:
        print(f"component {format_set(comp)}: sum = {total:.12g}")
    for w in report.warnings:
        print(f"warning: {w}")
    if not report.ok:
        for code, msg in report.errors:
            print(f"error: {code}: {msg}", file=sys.stderr)
        print("status = invalid")
        return 1
    labels = sorted(web.classify(system.structure))
    print(f"variables = {len(system.space.variables)}")
    print(f"components = {system.structure.m}")
    print(f"states = {system.space.size}")
    print(f"classification = {','.join(labels)}")
    print("status = valid")
    return 0


def cmd_unpack(args) -> int:
    system = _load(args.file)
    structure = system.structure
    labels = sorted(web.classify(structure))
    print(f"structure = {structure}")
    print(f"classification = {','.join(labels)}")
    if web.NON_WEB in labels:
        return 0
    unpacking = web.intersection_overlaps(structure, web.preferred_unpacking(structure), args.ostar)
    for i, step in enumerate(unpacking.steps, 1):
        ostar = ", ".join(format_set(step.ordered(o)) for o in step.intersection_overlaps) or "-"
        print(
            f"step {i}: component={format_set(step.component)} "
            f"tail={format_set(step.ordered(step.tail))} "
            f"overlap={format_set(step.ordered(step.overlap))} "
            f"ostar=[{ostar}]"
        )
    print(f"partition = {'true' if unpacking.partition_holds else 'false'}")
    return 0


def _joint_text(result) -> str:
    space = result.joint.space
    lines = [f"model = {result.model}", f"k = {_fmt(result.k)}", "\t".join(space.names) + "\tp"]
    for state, p in zip(enumerate_states(space), result.joint.flat):
        lines.append("\t".join(str(s) for s in state) + "\t" + _fmt(p))
    return "\n".join(lines) + "\n"


def cmd_expand(args) -> int:
    system = _load(args.file)
    if args.model == "standard":
        result = expansion.product_extension(system, _unpacking(system))
    else:
        unpacking = None
        if not web.is_web(system.structure):
            if not args.allow_non_web:
                raise CLIError("not_a_web", "structure is not a web; pass --allow-non-web for the alternative model")
        else:
            unpacking = web.preferred_unpacking(system.structure)
        try:
            result = expansion.alternative_model(system, unpacking, args.ostar, allow_non_web=args.allow_non_web)
        except expansion.AllZeroWeight as exc:
            raise CLIError("all_zero_weight", str(exc)) from None
    _write(_joint_text(result), args.out)
    return 0


def cmd_score(args) -> int:
    system = _load(args.file)
    unpacking = _unpacking(system)
    witness = None
    if system.space.size <= ENUMERATE_LIMIT:
        verdict = expansion.check_consistency(system, tol=args.tol, max_iter=args.max_iter)
        witness = verdict.witness
    try:
        report = scoring.score_report(system, unpacking, args.ostar, witness=witness)
    except expansion.AllZeroWeight as exc:
        raise CLIError("all_zero_weight", str(exc)) from None
    lines = [
        f"g_standard = {report.g_guaranteed_standard:.6f}",
        f"g_alt = {report.g_guaranteed_alt:.6f}",
        f"k = {report.k:.6f}",
        f"ln_k = {report.ln_k:.6f}",
        f"uniform = {report.uniform_baseline:.6f}",
        f"partition = {'true' if report.unpacking.partition_holds else 'false'}",
        "unpacking = " + " ".join(format_set(c) for c in report.unpacking.order),
        "terms_standard:",
    ]
    for label, g in report.standard_terms.component_terms:
        lines.append(f"  + G({label}) = {_fmt(g)}")
    for label, g in report.standard_terms.overlap_terms:
        lines.append(f"  - G({label}) = {_fmt(g)}")
    lines.append("terms_alt:")
    for label, g in report.alt_terms.component_terms:
        lines.append(f"  + G({label}) = {_fmt(g)}")
    for label, g in report.alt_terms.overlap_terms:
        lines.append(f"  - G({label}) = {_fmt(g)}")
    lines.append(f"  + ln k = {_fmt(report.ln_k)}")
    if report.direct_standard is not None:
        lines += [
            f"direct_standard = {_fmt(report.direct_standard)}",
            f"direct_alt = {_fmt(report.direct_alt)}",
            f"check_standard = {_fmt(abs(report.direct_standard - report.g_guaranteed_standard))}",
            f"check_alt = {_fmt(abs(report.direct_alt - report.g_guaranteed_alt))}",
            f"g_px_self = {_fmt(report.g_self_standard)}",
        ]
    elif system.space.size > ENUMERATE_LIMIT:
        lines.append("direct_check = skipped (joint too large)")
    else:
        lines.append("direct_check = skipped (no consistent witness)")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_consistency(args) -> int:
    system = _load(args.file)
    verdict = expansion.check_consistency(system, tol=args.tol, max_iter=args.max_iter)
    print(f"status = {verdict.status}")
    print(f"residual = {_fmt(verdict.residual)}")
    print(f"iterations = {verdict.iterations}")
    if verdict.witness is not None and args.out:
        result = expansion.ExpansionResult(verdict.witness, "witness", 1.0, None)
        _write(_joint_text(result), args.out)
    return 0


def cmd_maxent(args) -> int:
    system = _load(args.file)
    try:
        fit = maxent.maxent_fit(system, tol=args.tol, max_iter=args.max_iter)
    except maxent.Inconsistent as exc:
        raise CLIError("inconsistent", str(exc)) from None
    except maxent.NotConverged as exc:
        raise CLIError("not_converged", str(exc)) from None
    print(f"entropy = {_fmt(fit.entropy)}")
    print(f"iterations = {fit.iterations}")
    print(f"residual = {_fmt(fit.residual)}")
    if web.is_web(system.structure):
        gap = maxent.maxent_gap(system, fit)
        print(f"entropy_px = {_fmt(gap.entropy_px)}")
        print(f"entropy_gap = {_fmt(gap.gap)}")
        print(f"px_marginal_deviation = {_fmt(gap.px_marginal_deviation)}")
        print(f"px_in_K = {'true' if gap.px_in_K else 'false'}")
    return 0


def _structure_arg(value: str):
    if value in harness.PRESETS:
        return harness.preset(value), None
    if os.path.exists(value):
        try:
            return sysfile.load_structure(value)
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise CLIError("format", str(exc)) from None
    try:
        return web.Structure.parse(value), None
    except ValueError as exc:
        raise CLIError("structure", f"{value!r} is neither a preset, a file, nor a structure: {exc}") from None


def _plot(csv_path: str, png_path: str, title: str | None = None) -> str:
    from .plotting import plot_experiment

    return plot_experiment(harness.read_csv(csv_path), png_path, title)


def cmd_experiment(args) -> int:
    structure, cards = _structure_arg(args.structure)
    if not web.is_web(structure):
        raise CLIError("not_a_web", f"{structure} is not a web")
    try:
        config = harness.ExperimentConfig(
            structure, args.trials, args.seed, args.ostar, args.out, cards, args.workers
        )
    except ValueError as exc:
        raise CLIError("config", str(exc)) from None
    result = harness.run_experiment(config)
    print(f"structure = {structure}")
    print(f"seed = {args.seed}")
    for line in result.summary.lines():
        print(line)
    if args.out:
        print(f"csv = {args.out}")
        png = args.plot or (None if args.no_plot else str(Path(args.out).with_suffix(".png")))
        if png:
            print(f"figure = {_plot(args.out, png, str(structure))}")
    else:
        sys.stdout.write(harness.records_to_csv(result.records))
    return 0


def cmd_plot(args) -> int:
    out = args.out or str(Path(args.csv).with_suffix(".png"))
    try:
        print(f"figure = {_plot(args.csv, out)}")
    except FileNotFoundError:
        raise CLIError("io", f"no such file: {args.csv}") from None
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beliefweb", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def ostar(p):
        p.add_argument("--ostar", choices=web.OSTAR_RULES, default="maximal")

    def ipf_flags(p, tol):
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--max-iter", type=int, default=10000)

    p = sub.add_parser("validate", help="check structure and normalization")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("unpack", help="print unpacking steps and classification")
    p.add_argument("file")
    ostar(p)
    p.set_defaults(func=cmd_unpack)

    p = sub.add_parser("expand", help="print the full joint of a model")
    p.add_argument("file")
    p.add_argument("--model", choices=("standard", "alt"), default="standard")
    p.add_argument("--allow-non-web", action="store_true")
    ostar(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("score", help="guaranteed scores and their breakdown")
    p.add_argument("file")
    ostar(p)
    ipf_flags(p, 1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("consistency", help="IPF-based consistency verdict")
    p.add_argument("file")
    ipf_flags(p, 1e-9)
    p.add_argument("--out", help="write the witness joint here")
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("maxent", help="maximum-entropy fit and gap to the product extension")
    p.add_argument("file")
    ipf_flags(p, 1e-10)
    p.set_defaults(func=cmd_maxent)

    p = sub.add_parser("experiment", help="Monte Carlo comparison of the two models")
    p.add_argument("--structure", default="fig1", help="preset name, system/structure file, or e.g. AB,AC,BCD")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    ostar(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV path; a PNG figure is written next to it")
    p.add_argument("--plot", help="figure path (default: CSV path with .png)")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="render figures from an experiment CSV")
    p.add_argument("csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
