"""Command-line front end: orchestrates the analyses and renders reports.

Subcommands map one-to-one onto module entry points; ``analyze`` is the
composite.  Exit codes: 0 success, 2 validation failure, 3 dimension cap
exceeded, 1 internal error.  The environment variable GATEID_CAP overrides
the tensor-power dimension cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import discriminate as disc
from . import groups as groups_mod
from . import optimize as opt
from .gatesets import (
    FAMILIES,
    GateSetFormatError,
    load_gate_set,
    make_named_set,
    validate_gate_set,
)
from .numerics import DimensionCapError, NumericConfig

__all__ = ["main", "build_parser", "render_report"]

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_CAP = 3


def _make_config(args) -> NumericConfig:
    cap = int(os.environ.get("GATEID_CAP", 4096))
    return NumericConfig(rank_tol=args.tol_rank, psd_tol=args.tol_psd, dim_cap=cap)


def _resolve_gate_set(args, cfg):
    if getattr(args, "input", None):
        return load_gate_set(args.input, cfg), {"input": args.input}
    family = getattr(args, "family", None)
    if not family:
        raise GateSetFormatError("provide --input FILE or --family NAME")
    g = make_named_set(family, d=args.d, K=args.K)
    params = {"family": family}
    if args.d is not None:
        params["d"] = args.d
    if args.K is not None:
        params["K"] = args.K
    return g, params


def _gate_set_section(g, source, report) -> dict:
    return {
        "source": source,
        "dimension": g.dimension,
        "size": g.size,
        "labels": list(g.labels),
        "priors": [float(p) for p in g.priors],
        "validation": report.to_jsonable(),
    }


def _detect_group(g, cfg):
    try:
        table = groups_mod.closure_table(g, up_to_phase=True, cfg=cfg)
    except groups_mod.ClosureError as exc:
        return None, {"is_group": False, "witness": list(exc.witness or [])}
    info = {
        "is_group": True,
        "order": table.order,
        "projective": bool(table.projective),
        "abelian": bool(table.is_abelian()),
    }
    return table, info


# -- subcommand handlers ----------------------------------------------------


def _cmd_catalog(args):
    if not args.family and not args.input:
        return {"families": dict(FAMILIES)}, EXIT_OK
    cfg = _make_config(args)
    g, source = _resolve_gate_set(args, cfg)
    report = validate_gate_set(g, cfg)
    code = EXIT_OK if report.ok else EXIT_VALIDATION
    return {"gate_set": _gate_set_section(g, source, report)}, code


def _cmd_analyze(args):
    cfg = _make_config(args)
    g, source = _resolve_gate_set(args, cfg)
    validation = validate_gate_set(g, cfg)
    exit_code = EXIT_OK if validation.ok else EXIT_VALIDATION
    table, group_info = _detect_group(g, cfg)
    if table is not None:
        group_info["design_residual_haar_t1"] = groups_mod.design_check(
            g, None, 1, cfg
        ).to_jsonable()
    commuting = groups_mod.commutes_pairwise(g)
    group_info["commuting"] = commuting

    per_query = []
    measured = None
    for n in range(1, args.n_max + 1):
        row = {"queries": n}
        try:
            unambiguous, error_free = disc.classify_discriminability(g, n, cfg)
            row.update(
                {
                    "span_dimension": disc.span_dimension(g, n, cfg),
                    "unambiguous": unambiguous,
                    "error_free_labels": sorted(error_free),
                    "pmax": disc.pmax(g, n, cfg),
                    "status": "ok",
                }
            )
            if table is not None and g.uniform_priors():
                row["design_pmax"] = disc.design_pmax(g, n, cfg)
            if unambiguous and measured is None:
                measured = n
        except DimensionCapError as exc:
            row.update({"status": "cap-exceeded", "detail": str(exc)})
            exit_code = EXIT_CAP if exit_code == EXIT_OK else exit_code
        per_query.append(row)

    fidelity = None
    fidelity_section = None
    if args.restarts > 0:
        fid = opt.minimax_fidelity(g, "bipartite", restarts=args.restarts, seed=args.seed, cfg=cfg)
        fidelity = fid.value
        fidelity_section = {
            "value": float(fid.value),
            "max_entangled_value": (
                None if fid.max_entangled_value is None else float(fid.max_entangled_value)
            ),
            "mode": fid.mode,
            "restarts": fid.restarts_used,
            "converged": bool(fid.converged),
        }

    ancilla = {}
    if measured is not None:
        young = groups_mod.young_decomposition(measured, g.dimension) if measured <= 12 else None
        entries = bounds_mod.ancilla_bounds(
            measured,
            g.dimension,
            group_order=table.order if table is not None else None,
            commuting=commuting,
            young_bound=young.ancilla_bound if young is not None else None,
        )
        ancilla["bounds"] = [e.to_jsonable() for e in entries]
        if args.trials > 0:
            cap_da = min(int(e.value) for e in entries if isinstance(e.value, int))
            try:
                probe = opt.min_ancilla_probe(
                    g, measured, max(cap_da, 1), trials=args.trials, seed=args.seed, cfg=cfg
                )
                ancilla["probe"] = {
                    "min_ancilla_dim": probe.value,
                    "queries": measured,
                    "trials": probe.trials,
                    "seed": probe.seed,
                }
            except (disc.InfeasibleError, DimensionCapError) as exc:
                ancilla["probe"] = {"status": "failed", "detail": str(exc)}

    report = bounds_mod.assemble_report(
        g,
        dim_u=next(
            (r["span_dimension"] for r in per_query if r.get("status") == "ok"),
            1,
        ),
        measured_n_min=measured,
        fidelity=fidelity,
        group_order=table.order if table is not None else None,
        commuting=commuting,
        ancilla_queries=measured,
        young_bound=(
            groups_mod.young_decomposition(measured, g.dimension).ancilla_bound
            if measured is not None and measured <= 12
            else None
        ),
    )

    doc = {
        "gate_set": _gate_set_section(g, source, validation),
        "per_query": per_query,
        "measured": {"min_queries_unambiguous": measured},
        "bounds": report.to_jsonable(),
        "ancilla": ancilla,
        "group": group_info,
        "seed": args.seed,
    }
    if fidelity_section is not None:
        doc["minimax_fidelity"] = fidelity_section
    return doc, exit_code


def _cmd_pmax(args):
    cfg = _make_config(args)
    g, source = _resolve_gate_set(args, cfg)
    table, _ = _detect_group(g, cfg)
    rows = []
    code = EXIT_OK
    for n in range(1, args.n_max + 1):
        row = {"queries": n}
        try:
            row["pmax"] = disc.pmax(g, n, cfg)
            if table is not None and g.uniform_priors():
                row["design_pmax"] = disc.design_pmax(g, n, cfg)
            row["status"] = "ok"
        except DimensionCapError as exc:
            row.update({"status": "cap-exceeded", "detail": str(exc)})
            code = EXIT_CAP
        rows.append(row)
    return {"gate_set": {"source": source}, "pmax": rows, "seed": args.seed}, code


def _build_strategy(g, args, cfg):
    n = args.n
    if args.kind == "perfect":
        return disc.perfect_strategy(g, n, cfg)
    psi = disc.max_entangled_input(g.dimension, n)
    outs = disc.output_states(g, n, psi, g.dimension**n, cfg)
    if args.kind == "pgm":
        povm = disc.pgm_povm(outs, g.priors, list(g.labels), cfg)
    else:
        povm = disc.unambiguous_povm(outs, cfg, list(g.labels))
    return disc.Strategy(n, g.dimension**n, psi, povm)


def _cmd_povm(args):
    cfg = _make_config(args)
    g, source = _resolve_gate_set(args, cfg)
    strategy = _build_strategy(g, args, cfg)
    result = disc.evaluate_strategy(g, strategy, cfg)
    return {
        "gate_set": {"source": source},
        "kind": args.kind,
        "strategy": disc.strategy_to_jsonable(strategy),
        "evaluation": disc.eval_result_to_jsonable(result),
    }, EXIT_OK


def _cmd_simulate(args):
    cfg = _make_config(args)
    g, source = _resolve_gate_set(args, cfg)
    strategy = _build_strategy(g, args, cfg)
    sim = disc.simulate_strategy(g, strategy, args.shots, args.seed, cfg)
    return {
        "gate_set": {"source": source},
        "kind": args.kind,
        "queries": args.n,
        "shots": sim.shots,
        "seed": sim.seed,
        "gate_labels": sim.gate_labels,
        "outcome_labels": sim.outcome_labels,
        "counts": [[int(c) for c in row] for row in sim.counts],
    }, EXIT_OK


def _cmd_design_check(args):
    cfg = _make_config(args)
    g, source = _resolve_gate_set(args, cfg)
    if args.reference == "haar":
        reference = None
    elif args.reference == "self":
        reference = g
    else:
        reference = make_named_set(args.reference, d=args.reference_d, K=args.reference_K)
    result = groups_mod.design_check(g, reference, args.t, cfg)
    return {
        "gate_set": {"source": source},
        "reference": args.reference,
        "design_check": result.to_jsonable(),
    }, EXIT_OK


def _cmd_ancilla(args):
    cfg = _make_config(args)
    g, source = _resolve_gate_set(args, cfg)
    table, group_info = _detect_group(g, cfg)
    commuting = groups_mod.commutes_pairwise(g)
    young = groups_mod.young_decomposition(args.n, g.dimension) if args.n <= 12 else None
    entries = bounds_mod.ancilla_bounds(
        args.n,
        g.dimension,
        group_order=table.order if table is not None else None,
        commuting=commuting,
        young_bound=young.ancilla_bound if young is not None else None,
    )
    doc = {
        "gate_set": {"source": source},
        "queries": args.n,
        "group": group_info,
        "commuting": commuting,
        "bounds": [e.to_jsonable() for e in entries],
    }
    if young is not None:
        doc["irrep_blocks"] = [
            {"partition": list(r.id), "dim": r.dim, "mult": r.mult} for r in young.records
        ]
    if args.trials > 0:
        d_a_max = args.max_ancilla or max(
            1, min(int(e.value) for e in entries if isinstance(e.value, int))
        )
        try:
            probe = opt.min_ancilla_probe(
                g, args.n, d_a_max, trials=args.trials, seed=args.seed, cfg=cfg
            )
            doc["probe"] = {
                "min_ancilla_dim": probe.value,
                "trials": probe.trials,
                "seed": probe.seed,
            }
        except (disc.InfeasibleError, DimensionCapError) as exc:
            doc["probe"] = {"status": "failed", "detail": str(exc)}
    return doc, EXIT_OK


def _cmd_group(args):
    cfg = _make_config(args)
    g, source = _resolve_gate_set(args, cfg)
    table, group_info = _detect_group(g, cfg)
    doc = {"gate_set": {"source": source}, "group": group_info}
    if table is not None:
        doc["group"]["table"] = [[int(v) for v in row] for row in table.table]
        doc["group"]["identity_index"] = table.identity_index
        characters = None
        if args.character_table:
            characters = groups_mod.load_character_table(args.character_table)
        elif table.is_abelian() and not table.projective:
            characters = [
                (f"chi{k}", chi)
                for k, chi in enumerate(groups_mod.abelian_characters(table, seed=args.seed))
            ]
        if characters is not None:
            mults = []
            for cid, chi in characters:
                m = groups_mod.multiplicity_by_characters(g, chi, args.n)
                mults.append(
                    {
                        "id": cid,
                        "multiplicity": m.value,
                        "nearest_integer": m.nearest_integer,
                        "consistent": m.consistent,
                    }
                )
            doc["multiplicities"] = {"queries": args.n, "characters": mults}
    return doc, EXIT_OK


# -- rendering ---------------------------------------------------------------


def _md_table(rows) -> list:
    keys = []
    for row in rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    out = ["| " + " | ".join(keys) + " |", "| " + " | ".join("---" for _ in keys) + " |"]
    for row in rows:
        cells = []
        for k in keys:
            v = row.get(k, "")
            if isinstance(v, float):
                v = f"{v:.6g}"
            cells.append(str(v))
        out.append("| " + " | ".join(cells) + " |")
    return out


def _md_section(title, value, out) -> None:
    out.append(f"## {title}")
    if isinstance(value, list) and value and all(isinstance(r, dict) for r in value):
        out.extend(_md_table(value))
    elif isinstance(value, dict):
        nested = {k: v for k, v in value.items() if isinstance(v, (dict, list))}
        flat = {k: v for k, v in value.items() if not isinstance(v, (dict, list))}
        for k, v in flat.items():
            out.append(f"- {k}: {v}")
        for k, v in nested.items():
            if isinstance(v, list) and v and all(isinstance(r, dict) for r in v):
                out.append(f"### {k}")
                out.extend(_md_table(v))
            else:
                out.append(f"- {k}: {json.dumps(v, sort_keys=True)}")
    else:
        out.append(f"- {json.dumps(value, sort_keys=True)}")
    out.append("")


def render_report(report: dict, fmt: str) -> str:
    """Render a report document as stable JSON, markdown tables, or CSV
    (one bound entry per row)."""
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, allow_nan=False)
    if fmt == "markdown":
        out = ["# gateid report"]
        for key, value in report.items():
            _md_section(key, value, out)
        return "\n".join(out)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        entries = report.get("bounds", {})
        if isinstance(entries, dict):
            entries = entries.get("entries", [])
        if entries and all(isinstance(e, dict) for e in entries):
            writer.writerow(["name", "kind", "value", "eq_tag"])
            for e in entries:
                writer.writerow([e.get("name"), e.get("kind"), e.get("value"), e.get("eq_tag")])
        else:
            writer.writerow(["key", "value"])
            for k, v in sorted(report.items()):
                writer.writerow([k, json.dumps(v, sort_keys=True)])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


# -- parser ------------------------------------------------------------------


def _common_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="gate-set JSON file")
    p.add_argument("--family", choices=sorted(FAMILIES), help="named gate family")
    p.add_argument("--d", type=int, help="family dimension parameter")
    p.add_argument("--K", type=int, help="family count parameter")
    p.add_argument("--tol-rank", type=float, default=1e-8, dest="tol_rank")
    p.add_argument("--tol-psd", type=float, default=1e-10, dest="tol_psd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "markdown", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gateid",
        description="Resources needed to identify an unknown unitary gate in a finite set.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list families or summarize one gate set")
    _common_arguments(p)
    p.set_defaults(handler=_cmd_catalog)

    p = sub.add_parser("analyze", help="composite per-query analysis with bounds")
    _common_arguments(p)
    p.add_argument("--n-max", type=int, default=4, dest="n_max")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--trials", type=int, default=8)
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("pmax", help="optimal identification probability per query count")
    _common_arguments(p)
    p.add_argument("--n-max", type=int, default=4, dest="n_max")
    p.set_defaults(handler=_cmd_pmax)

    p = sub.add_parser("povm", help="construct a strategy and its measurement")
    _common_arguments(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--kind", choices=["pgm", "unambiguous", "perfect"], default="perfect")
    p.set_defaults(handler=_cmd_povm)

    p = sub.add_parser("simulate", help="sample outcomes from a constructed strategy")
    _common_arguments(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--kind", choices=["pgm", "unambiguous", "perfect"], default="perfect")
    p.add_argument("--shots", type=int, default=10000)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("design-check", help="twirl residual against a reference")
    _common_arguments(p)
    p.add_argument("--t", type=int, default=1)
    p.add_argument(
        "--reference",
        default="haar",
        help="'haar' (t=1 analytic), 'self', or a family name",
    )
    p.add_argument("--reference-d", type=int, dest="reference_d")
    p.add_argument("--reference-K", type=int, dest="reference_K")
    p.set_defaults(handler=_cmd_design_check)

    p = sub.add_parser("ancilla", help="ancilla bounds and random probing")
    _common_arguments(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--max-ancilla", type=int, dest="max_ancilla")
    p.add_argument("--trials", type=int, default=8)
    p.set_defaults(handler=_cmd_ancilla)

    p = sub.add_parser("group", help="closure table and character multiplicities")
    _common_arguments(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--character-table", dest="character_table", help="character JSON file")
    p.set_defaults(handler=_cmd_group)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.handler(args)
    except GateSetFormatError as exc:
        print(render_report({"error": str(exc), "kind": "validation"}, args.format))
        return EXIT_VALIDATION
    except DimensionCapError as exc:
        print(render_report({"error": str(exc), "kind": "dimension-cap"}, args.format))
        return EXIT_CAP
    except (ValueError, disc.InfeasibleError, groups_mod.ClosureError) as exc:
        print(render_report({"error": str(exc), "kind": "invalid-request"}, args.format))
        return EXIT_INTERNAL
    print(render_report(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
