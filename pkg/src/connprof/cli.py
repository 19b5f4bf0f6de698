"""Command-line entry point.

Exit codes: 0 clean, 1 validation or domain failure, 2 unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dialog, synth
from .dialog import metrics_from_events, validate_tree
from .errors import ProfilingError
from .model import (
    check_alignment,
    inventory_from_json,
    validate_document,
    validate_inventory,
)
from .reports import render_table, report_to_json
from .stats import (
    GRANULARITY_CATEGORY,
    WEIGHTING_PER_PAIR,
    WEIGHTING_POOLED_PAIRS,
    mode_agreement,
    pooled_report,
    text_report,
)
from .store import Project


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProfilingError("io-error", f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ProfilingError("io-error", f"{path} is not valid JSON: {exc}") from exc


def _sniff_kind(obj: dict) -> str:
    if "conjuncts" in obj and "categories" in obj:
        return "inventory"
    if "nodes" in obj and "root" in obj:
        return "dialog_tree"
    if "sentences" in obj:
        return "document"
    raise ProfilingError("validation-failed", "cannot tell what kind of artifact this file is")


def cmd_validate(args) -> int:
    """Validate inventories, dialog trees, and documents given as files.

    Trees are validated against an inventory passed in the same invocation
    (matched by the tree's inventory_id).
    """
    loaded: list[tuple[Path, str, dict]] = []
    for raw in args.paths:
        path = Path(raw)
        try:
            obj = _read_json(path)
            loaded.append((path, _sniff_kind(obj), obj))
        except ProfilingError as exc:
            print(f"{path}: {exc.code}: {exc.message}", file=sys.stderr)
            return 2 if exc.code == "io-error" else 1

    inventories = {}
    for path, kind, obj in loaded:
        if kind == "inventory":
            try:
                inventories[obj.get("id")] = inventory_from_json(obj)
            except ProfilingError as exc:
                print(f"{path}: {exc.code}: {exc.message}", file=sys.stderr)
                return 1

    clean = True
    for path, kind, obj in loaded:
        violations = []
        try:
            if kind == "inventory":
                violations = validate_inventory(inventories[obj.get("id")])
            elif kind == "document":
                violations = validate_document(obj)
            else:
                tree = dialog.dialog_tree_from_json(obj)
                inv = inventories.get(tree.inventory_id)
                if inv is None:
                    print(
                        f"{path}: missing-inventory: tree needs inventory "
                        f"{tree.inventory_id!r}; pass its file in the same invocation",
                        file=sys.stderr,
                    )
                    clean = False
                    continue
                violations = validate_tree(tree, inv)
        except ProfilingError as exc:
            print(f"{path}: {exc.code}: {exc.message}", file=sys.stderr)
            clean = False
            continue
        for violation in violations:
            print(f"{path}: {violation}", file=sys.stderr)
        if violations:
            clean = False
        else:
            print(f"{path}: ok ({kind})")
    return 0 if clean else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        project = Project(args.project)
    except ProfilingError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 2
    app = create_app(project)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _load_groups(project: Project, document_ids: list[str]):
    groups = []
    for document_id in document_ids:
        rows = project.profiles_by_document(document_id)
        if not rows:
            raise ProfilingError("no-profiles", f"no profiles stored for document {document_id!r}")
        groups.append((document_id, rows))
    return groups


def _group_inventory(project: Project, rows):
    session_id = rows[0][0]
    events = project.read_session_events(session_id)
    tree = project.get_dialog_tree(events[0].payload["dialog_tree_id"])
    return project.get_inventory(tree.inventory_id)


def cmd_report(args) -> int:
    try:
        project = Project(args.project)
        document_ids = args.docs.split(",") if args.docs else None
        if document_ids is None:
            document_ids = []
            for session_id in project.profile_session_ids():
                document_id = project.load_profile(session_id).document_id
                if document_id not in document_ids:
                    document_ids.append(document_id)
        if not document_ids:
            print("no profiles in project", file=sys.stderr)
            return 1
        groups = _load_groups(project, document_ids)
        inv = _group_inventory(project, groups[0][1])

        reports = []
        for document_id, rows in groups:
            profiles = [profile for _, profile in rows]
            metrics = [metrics_from_events(project.read_session_events(sid)) for sid, _ in rows]
            reports.append(text_report(profiles, metrics, inv, args.pair_weighting))

        pooled = None
        if args.pooled:
            docs = [project.get_document(document_id) for document_id in document_ids]
            for i, a in enumerate(docs):
                for b in docs[i + 1:]:
                    alignment = check_alignment(a, b)
                    if not alignment.aligned:
                        raise ProfilingError("misaligned-documents", "; ".join(alignment.reasons))
            pooled = pooled_report(
                [(document_id, [p for _, p in rows]) for document_id, rows in groups],
                inv,
                args.pair_weighting,
            )

        if args.format == "json":
            payload = {"reports": [report_to_json(r, args.granularity) for r in reports]}
            if pooled is not None:
                payload["pooled_report"] = report_to_json(pooled, args.granularity)
            print(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))
        else:
            shown = reports + ([pooled] if pooled is not None else [])
            print(render_table(shown))
        return 0
    except ProfilingError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 2 if exc.code == "io-error" else 1


def cmd_compare(args) -> int:
    try:
        project = Project(args.project)
        groups = _load_groups(project, [args.group_a, args.group_b])
        inv = _group_inventory(project, groups[0][1])
        profiles_a = [p for _, p in groups[0][1]]
        profiles_b = [p for _, p in groups[1][1]]

        doc_a = project.get_document(args.group_a)
        doc_b = project.get_document(args.group_b)
        alignment = check_alignment(doc_a, doc_b)
        if not alignment.aligned:
            raise ProfilingError("misaligned-documents", "; ".join(alignment.reasons))

        agreement = mode_agreement(profiles_a, profiles_b, args.granularity, inv)
        print(f"mode agreement ({args.granularity}): {agreement.fraction:.3f}")
        for pair_index, mode_a, mode_b, equal in agreement.per_pair:
            marker = "=" if equal else "!"
            print(f"  pair {pair_index}: {mode_a} {marker} {mode_b}")
        pooled = pooled_report(
            [(args.group_a, profiles_a), (args.group_b, profiles_b)], inv
        )
        print()
        print(render_table([pooled]))
        return 0
    except ProfilingError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 2 if exc.code == "io-error" else 1


def cmd_synthesize(args) -> int:
    try:
        recipe = synth.load_recipe(args.recipe)
        project = Project(args.project, create=True)
        summary = synth.synthesize(project, recipe, seed=args.seed, emit_requests=args.emit_requests)
        print(json.dumps(summary, ensure_ascii=False, indent=2, sort_keys=True))
        return 0
    except ProfilingError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 2 if exc.code == "io-error" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="connprof", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate inventory/dialog/document files")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the evaluation HTTP service")
    p.add_argument("--project", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="per-text and pooled agreement reports")
    p.add_argument("--project", required=True)
    p.add_argument("--docs", default="", help="comma-separated document ids (default: all)")
    p.add_argument("--granularity", choices=["category", "conjunct"], default=GRANULARITY_CATEGORY)
    p.add_argument("--pooled", action="store_true")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument(
        "--pair-weighting",
        choices=[WEIGHTING_PER_PAIR, WEIGHTING_POOLED_PAIRS],
        default=WEIGHTING_PER_PAIR,
        help="average per-pair spreads, or pool all pairs into one distribution",
    )
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("compare", help="mode agreement between two groups")
    p.add_argument("--project", required=True)
    p.add_argument("--group-a", required=True, help="document id of the first group")
    p.add_argument("--group-b", required=True, help="document id of the second group")
    p.add_argument("--granularity", choices=["category", "conjunct"], default=GRANULARITY_CATEGORY)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synthesize", help="generate a synthetic corpus from a recipe")
    p.add_argument("--project", required=True)
    p.add_argument("--recipe", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-requests", default=None, help="also write the API request sequence (JSONL)")
    p.set_defaults(func=cmd_synthesize)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
