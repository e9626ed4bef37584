"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 parse error,
3 emulation-certificate failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .core import Semigroupoid, SgpoidError, StructuralError, Violation
from .decomposition import STRATEGIES
from .dot import decomposition_dot, semigroupoid_dot
from .formats import (
    ParseError,
    ParsedFun,
    ResolutionError,
    emit_sgd,
    load_fun,
    load_sgd,
    sgd_json,
)
from .pipeline import DecompositionResult, decompose_functor, decompose_morphism
from .relational import validate_relational_functor, validate_relational_morphism_ts
from .transformation import (
    generate_closure,
    pad_with_identities,
    sink_completion,
    validate_transformation_semigroupoid,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_CERTIFICATE = 3


def _load_any(path: Path):
    if path.suffix == ".fun":
        return load_fun(path)
    return load_sgd(path)


def _print_report(name: str, violations: list[Violation], fmt: str) -> None:
    if fmt == "json":
        doc = {
            "input": name,
            "valid": not violations,
            "violations": [
                {"kind": v.kind, "message": v.message, "witness": list(v.witness)}
                for v in violations
            ],
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
        return
    if not violations:
        print(f"{name}: valid")
    else:
        print(f"{name}: {len(violations)} violation(s)")
        for v in violations:
            print(f"  {v}")


def cmd_validate(args) -> int:
    path = Path(args.path)
    parsed = _load_any(path)
    if isinstance(parsed, ParsedFun):
        if parsed.morphism is not None:
            violations = validate_relational_morphism_ts(parsed.morphism)
        else:
            violations = validate_relational_functor(parsed.functor)
    elif parsed.ts is not None:
        violations = validate_transformation_semigroupoid(parsed.ts)
    else:
        from .core import validate_semigroupoid

        violations = validate_semigroupoid(parsed.sgpoid)
    _print_report(str(path), violations, args.format)
    return EXIT_OK if not violations else EXIT_INVALID


def cmd_generate(args) -> int:
    parsed = load_sgd(Path(args.path))
    if parsed.ts is None:
        print("generate needs a transformation file (arrows with mappings)",
              file=sys.stderr)
        return EXIT_INVALID
    ts = parsed.ts
    closure = generate_closure(
        ts.state_sets,
        [
            (a.label, ts.transformations[a.id])
            for a in ts.abstract.arrows
        ],
    )
    closure = _copy_object_labels(closure, ts.abstract)
    text = sgd_json(closure) if args.format == "json" else emit_sgd(closure)
    Path(args.out).write_text(text)
    print(f"wrote {args.out} ({len(closure.transformations)} arrows)")
    return EXIT_OK


def _copy_object_labels(closure, abstract: Semigroupoid):
    from .transformation import relabel_objects

    return relabel_objects(closure, [o.label for o in abstract.objects])


def _kernel_tsv(dec: DecompositionResult) -> str:
    lines = ["class\ttop_arrow\trepresentative_top\tpreimage\tencoded"]
    top = dec.top
    src = dec.functor.source
    if dec.kernel is not None:
        k = dec.kernel
        for ci, cls in enumerate(k.classes):
            for t in cls.tops:
                pre = ",".join(src.arrows[a].label for a in sorted(k.preimage[t]))
                enc = ",".join(
                    src.arrows[k.codec.enc_map[t][a]].label
                    for a in sorted(k.preimage[t])
                )
                lines.append(
                    f"{ci}\t{top.arrows[t].label}\t"
                    f"{top.arrows[cls.representative_top].label}\t{pre}\t{enc}"
                )
    else:
        bottom = dec.cascade.bottom
        for f, x in dec.cascade.arrows:
            lines.append(
                f"-\t{top.arrows[f].label}\t-\t-\t{bottom.arrows[x].label}"
            )
    return "\n".join(lines) + "\n"


def _codec_tsv(dec: DecompositionResult) -> str:
    lines = ["top_arrow\tarrow\tencoded"]
    src = dec.functor.source
    if dec.kernel is not None:
        for t in sorted(dec.kernel.codec.enc_map):
            for a, x in sorted(dec.kernel.codec.enc_map[t].items()):
                lines.append(
                    f"{dec.top.arrows[t].label}\t{src.arrows[a].label}\t"
                    f"{src.arrows[x].label}"
                )
    else:
        bottom = dec.cascade.bottom
        for f, x in dec.cascade.arrows:
            lines.append(f"{dec.top.arrows[f].label}\t-\t{bottom.arrows[x].label}")
    return "\n".join(lines) + "\n"


def _rule_table_tsv(dec: DecompositionResult) -> str:
    rules = dec.rules
    bottom = dec.cascade.bottom
    top = dec.top
    lines = ["top_f\ttop_g\tkind\tbottom_a\tbottom_b\tresult"]
    for (f, g), entries in sorted(rules.cells.items()):
        factor = rules.factors[(f, g)]
        lines.append(
            f"{top.arrows[f].label}\t{top.arrows[g].label}\tfactor\t-\t-\t"
            + (bottom.arrows[factor].label if factor is not None else "-")
        )
        for (x, y), z in sorted(entries.items()):
            lines.append(
                f"{top.arrows[f].label}\t{top.arrows[g].label}\tentry\t"
                f"{bottom.arrows[x].label}\t{bottom.arrows[y].label}\t"
                f"{bottom.arrows[z].label}"
            )
    return "\n".join(lines) + "\n"


def _certificate_text(dec: DecompositionResult) -> str:
    lines = [
        f"strategy: {dec.strategy}",
        f"cascade arrows: {len(dec.cascade.arrows)}",
        f"certificate: {'PASS' if dec.certificate.ok else 'FAIL'}",
    ]
    for v in dec.certificate.violations:
        lines.append(f"  {v}")
    for note in dec.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def cmd_decompose(args) -> int:
    path = Path(args.path)
    fun = load_fun(path)
    try:
        if fun.morphism is not None:
            dec = decompose_morphism(fun.morphism, args.strategy)
        else:
            dec = decompose_functor(fun.functor, args.strategy)
    except StructuralError as exc:
        print(f"cannot decompose: {exc}", file=sys.stderr)
        return EXIT_INVALID

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cascade_sgp = dec.cascade.as_semigroupoid()
    (out_dir / "top.sgd").write_text(emit_sgd(dec.top, include_table=True))
    (out_dir / "cascade.sgd").write_text(emit_sgd(cascade_sgp, include_table=True))
    (out_dir / "kernel.tsv").write_text(_kernel_tsv(dec))
    (out_dir / "codec.tsv").write_text(_codec_tsv(dec))
    (out_dir / "rule_table.tsv").write_text(_rule_table_tsv(dec))
    (out_dir / "certificate.txt").write_text(_certificate_text(dec))
    if dec.bottom_component is not None:
        (out_dir / "bottom.sgd").write_text(emit_sgd(dec.bottom_component))
    if not args.no_figures:
        from .viz import render_semigroupoid

        render_semigroupoid(dec.top, out_dir / "top.png", title="top level")
        render_semigroupoid(cascade_sgp, out_dir / "cascade.png", title="cascade")
        if dec.bottom_component is not None:
            render_semigroupoid(
                dec.bottom_component, out_dir / "bottom.png", title="bottom level"
            )

    if args.format == "json":
        doc = {
            "strategy": dec.strategy,
            "cascade_arrows": len(dec.cascade.arrows),
            "certificate": dec.certificate.ok,
            "violations": [str(v) for v in dec.certificate.violations],
            "notes": dec.notes,
            "out_dir": str(out_dir),
        }
        if dec.bottom_component is not None:
            doc["bottom_states"] = len(dec.bottom_component.state_sets[0].states)
            doc["bottom_arrows"] = len(dec.bottom_component.transformations)
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(_certificate_text(dec), end="")
        if dec.bottom_component is not None:
            print(
                f"bottom component: "
                f"{len(dec.bottom_component.state_sets[0].states)} states, "
                f"{len(dec.bottom_component.transformations)} arrows"
            )
        print(f"wrote decomposition to {out_dir}")
    return EXIT_OK if dec.certificate.ok else EXIT_CERTIFICATE


def cmd_dot(args) -> int:
    path = Path(args.path)
    parsed = _load_any(path)
    if isinstance(parsed, ParsedFun):
        text = decomposition_dot(
            parsed.target.sgpoid, parsed.source.sgpoid, name=path.stem
        )
    else:
        value = parsed.ts if parsed.ts is not None else parsed.sgpoid
        text = semigroupoid_dot(value, name=path.stem)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    parsed = load_sgd(Path(args.path))
    if parsed.ts is None:
        print("diagnose needs a transformation file (arrows with mappings)",
              file=sys.stderr)
        return EXIT_INVALID
    ts = parsed.ts
    closure = generate_closure(
        ts.state_sets,
        [(a.label, ts.transformations[a.id]) for a in ts.abstract.arrows],
    )
    closure = _copy_object_labels(closure, ts.abstract)
    if args.mode == "pad":
        completed, report = pad_with_identities(closure)
    else:
        completed, report = sink_completion(closure)
    if args.format == "json":
        doc = {
            "mode": args.mode,
            "original_arrows": report.original_arrow_count,
            "completed_arrows": report.completed_arrow_count,
            "completed_states": len(completed.state_sets[0].states),
            "new_elements": len(report.new_elements),
        }
        if report.orbit_witness is not None:
            doc["orbit_generator"] = report.orbit_witness.label
            doc["orbit_size"] = len(report.orbit_witness.orbit)
        if report.absorbed_composites is not None:
            doc["absorbed_composites"] = report.absorbed_composites
        print(json.dumps(doc, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"mode: {args.mode}")
    print(f"original arrows: {report.original_arrow_count}")
    print(
        f"completed: {report.completed_arrow_count} arrows on "
        f"{len(completed.state_sets[0].states)} states"
    )
    print(f"new elements: {len(report.new_elements)}")
    if report.orbit_witness is not None:
        print(
            f"orbit witness: {report.orbit_witness.label} generates an orbit of "
            f"{len(report.orbit_witness.orbit)} elements"
        )
    if report.absorbed_composites is not None:
        print(f"sink-absorbed composites: {report.absorbed_composites}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgpoid",
        description="Semigroupoid toolkit: validation, closure generation, "
        "and certified cascade decompositions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a .sgd or .fun file")
    p.add_argument("path")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="close a generator file under composition")
    p.add_argument("path")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("decompose", help="decompose along a functor/morphism file")
    p.add_argument("path")
    p.add_argument("--strategy", choices=STRATEGIES, default="sets")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--no-figures", action="store_true",
                   help="skip rendering PNG figures")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("dot", help="emit a DOT diagram")
    p.add_argument("path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("diagnose", help="report what untyped completions add")
    p.add_argument("path")
    p.add_argument("--mode", choices=("pad", "sink"), required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResolutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StructuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SgpoidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
