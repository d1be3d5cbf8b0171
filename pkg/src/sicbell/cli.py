"""Command-line entry point: ``sicbell <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import io as sio
from .io import SCHEMA_VERSION, SchemaError, format_rational

log = logging.getLogger("sicbell")

EXIT_OK, EXIT_USAGE, EXIT_SCHEMA, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------- #
# Shared helpers

def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _load_functional(spec: str):
    from .catalog import NAMES, get_functional

    if spec in NAMES:
        return get_functional(spec)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"{spec!r} is neither a built-in inequality ({', '.join(NAMES)}) nor a file")
    return sio.functional_from_dict(sio.load_json(path))


def _set_for(f, explicit: str | None) -> str:
    from .catalog import SET_OF

    if explicit:
        return explicit
    if f.name in SET_OF:
        return SET_OF[f.name]
    raise UsageError("--set is required for functionals outside the catalog")


def _vertices(vs) -> list[dict]:
    return [{"a": "".join(map(str, v.a_bits)), "b": "".join(map(str, v.b_bits))} for v in vs]


def _envelope(kind: str, **payload) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **payload}


def _flat_rows(payload: dict) -> tuple[list[str], list[list]]:
    """Tabular view of a payload: its ``rows`` list when present, else key/value pairs."""
    rows = payload.get("rows")
    if isinstance(rows, list) and rows and isinstance(rows[0], dict):
        fields = list(rows[0])
        return fields, [[r.get(k, "") for k in fields] for r in rows]
    return ["field", "value"], [[k, v] for k, v in payload.items() if not isinstance(v, (list, dict))]


def render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return sio.dumps(payload)
    fields, rows = _flat_rows(payload)
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        w.writerows(rows)
        return buf.getvalue()
    widths = [max(len(str(x)) for x in col) for col in zip(fields, *rows)] if rows else [len(f) for f in fields]
    lines = ["  ".join(str(x).ljust(w) for x, w in zip(line, widths)).rstrip() for line in [fields] + rows]
    return "\n".join(lines) + "\n"


def emit(args, payload: dict, text: str | None = None) -> None:
    """Single writer: the whole output is rendered before anything is written."""
    out = text if text is not None else render(payload, args.format)
    if args.out and not getattr(args, "out_is_dir", False):
        path = Path(args.out)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(out)
        tmp.replace(path)
    else:
        sys.stdout.write(out)


def _out_dir(args, default: str) -> Path:
    path = Path(args.out or default)
    path.mkdir(parents=True, exist_ok=True)
    return path


# --------------------------------------------------------------------------- #
# Commands

def cmd_rays(args):
    from .rays import build_rayset, dumps_rayset

    rs = build_rayset(args.set)
    if args.format == "json":
        emit(args, _envelope("rayset", name=rs.name, dim=rs.dim, n=rs.n,
                             rays=[list(r.components) for r in rs.rays]))
    else:
        emit(args, {}, dumps_rayset(rs))


def cmd_graph(args):
    from .rays import (build_rayset, check_sic_certificate, compatibility_graph, expected_structure,
                       find_class_certificate, find_uniform_certificate, independence_number, ks_colorable,
                       maximal_cliques_of_size, verify_labeling)

    rs = build_rayset(args.set)
    g = compatibility_graph(rs)
    verify_labeling(g, expected_structure(rs.name))
    coloring = ks_colorable(g, rs.dim)

    def cert_dict(cert):
        if cert is None:
            return None
        return {"weights": [format_rational(w) for w in cert.weights], "y": format_rational(cert.y),
                "accepted": bool(check_sic_certificate(rs, cert))}

    payload = _envelope(
        "graph", set=rs.name, n=g.n, edge_count=len(g.edges),
        edges=[[i + 1, j + 1] for i, j in g.sorted_edges()],
        bases=[[v + 1 for v in c] for c in maximal_cliques_of_size(g, rs.dim)],
        independence_number=independence_number(g),
        ks_colorable=coloring is not None,
        ks_assignment=None if coloring is None else "".join(map(str, coloring.bits)),
        uniform_certificate=cert_dict(find_uniform_certificate(rs)),
        class_certificate=cert_dict(find_class_certificate(rs)),
    )
    emit(args, payload)


def cmd_behavior(args):
    from .behavior import apply_efficiency, apply_visibility, ideal_behavior
    from .rays import build_rayset

    rs = build_rayset(args.set)
    b = ideal_behavior(rs)
    if args.visibility is not None:
        b = apply_visibility(b, args.visibility, rs.dim)
    elif args.efficiency is not None:
        b = apply_efficiency(b, args.efficiency)
    emit(args, sio.behavior_to_dict(b))


def cmd_bound(args):
    from .polytope import local_bound_exact

    f = _load_functional(args.ineq)
    bound, v = local_bound_exact(f)
    payload = _envelope("bound", name=f.name, m=f.m, bound=format_rational(bound), maximizer=_vertices([v])[0])
    if f.bound is not None:
        payload["stated_bound"] = format_rational(f.bound)
        payload["stated_bound_matches"] = f.bound == bound
    emit(args, payload)


def cmd_tightness(args):
    from .polytope import check_tightness, coordinate_label

    f = _load_functional(args.ineq)
    cert = check_tightness(f, cap=args.cap)
    payload = _envelope(
        "tightness", name=f.name, dimension=cert.dimension, bound=format_rational(cert.bound),
        saturating_count=cert.saturating_count, affine_rank=cert.affine_rank, is_facet=cert.is_facet,
        exhaustive=cert.exhausted, witness_vertices=_vertices(cert.witness_vertices),
        extra_normals=[[str(x) for x in k] for k in cert.extra_normals])
    if args.verbose:
        payload["coordinates"] = [coordinate_label(i, f.m) for i in range(cert.dimension)]
    emit(args, payload)


def _gilbert_config(args):
    from .gilbert import GilbertConfig

    return GilbertConfig(delta=args.delta, max_iterations=args.max_iterations, oracle_restarts=args.restarts,
                         rng_seed=args.seed)


def _sweep_rows(results, ideal_value_of=None):
    rows = []
    for v, r in results:
        w = r.witness
        rows.append({"parameter": format_rational(v), "status": r.status, "distance": f"{r.distance:.6g}",
                     "iterations": r.iterations,
                     "bound": "" if w is None else format_rational(w.bound),
                     "quantum_value": "" if w is None or ideal_value_of is None else format_rational(ideal_value_of(w))})
    return rows


def _write_sweep(out: Path, results, model: str, set_name: str) -> None:
    from .behavior import NoiseModel, ideal_behavior
    from .polytope import evaluate
    from .rays import build_rayset

    rs = build_rayset(set_name)
    ideal = ideal_behavior(rs)
    for i, (v, r) in enumerate(results):
        target = NoiseModel(model, v).apply(ideal, rs.dim)
        point = _envelope("gilbert_point", set=rs.name, model=model, parameter=format_rational(v),
                          status=r.status, distance=r.distance, iterations=r.iterations,
                          distances=[round(x, 10) for x in r.distances])
        if r.witness is not None:
            point["witness"] = sio.functional_to_dict(r.witness)
            point["target_value"] = format_rational(evaluate(r.witness, target))
        sio.write_json(out / f"point_{i:03d}.json", point)
    rows = _sweep_rows(results, lambda w: evaluate(w, NoiseModel(model, 1).apply(ideal, rs.dim)))
    fields, table = _flat_rows({"rows": rows})
    buf = _io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows([fields] + table)
    (out / "summary.csv").write_text(buf.getvalue())


def cmd_gilbert(args):
    from .gilbert import sweep
    from .rays import build_rayset
    from .report import write_distance_figure

    rs = build_rayset(args.set)
    results = sweep(rs, args.noise, args.from_, args.to, args.step, _gilbert_config(args), args.oracle,
                    args.threads)
    args.out_is_dir = True
    out = _out_dir(args, "gilbert_out")
    _write_sweep(out, results, args.noise, rs.name)
    write_distance_figure(results, out / "distance.png", f"{rs.name} / {args.noise}")
    emit(args, _envelope("gilbert_sweep", set=rs.name, model=args.noise, out=str(out),
                         rows=_sweep_rows(results)))


def _hit_dict(h) -> dict:
    return {"assignment": h.assignment, "bound": format_rational(h.functional.bound),
            "saturating_count": h.saturating_count, "affine_rank": h.certificate.affine_rank,
            "functional": sio.functional_to_dict(h.functional)}


def cmd_tighten(args):
    from .tighten import coefficient_search, default_signs, parse_signs, template_from_witness

    if args.template:
        t = sio.template_from_dict(sio.load_json(args.template))
    else:
        obj = sio.load_json(args.from_witness)
        if obj.get("kind") == "gilbert_point":
            obj = obj.get("witness") or {}
        t = template_from_witness(sio.functional_from_dict(obj), args.tolerance)
    if args.signs:
        signs = parse_signs(args.signs, t.letters)
    elif t.values:
        signs = default_signs(t)
    else:
        raise UsageError("--signs is required for templates without letter values")
    hits = coefficient_search(t, signs, args.kmax, threads=args.threads)
    emit(args, _envelope("tighten", template=sio.template_to_dict(t), signs=signs, k_max=args.kmax,
                         rows=[{"rank": i + 1, **{k: v for k, v in _hit_dict(h).items() if k != "functional"},
                                "assignment": ",".join(f"{k}={v}" for k, v in h.assignment.items())}
                               for i, h in enumerate(hits)],
                         facets=[_hit_dict(h) for h in hits]))


def cmd_certify(args):
    from .behavior import ideal_behavior
    from .certify import certify_critical
    from .polytope import saturating_vertices
    from .rays import build_rayset

    f = _load_functional(args.ineq)
    rs = build_rayset(_set_for(f, args.set))
    if f.bound is None:
        from .polytope import local_bound_exact

        f = f.with_bound(local_bound_exact(f)[0])
    sat = saturating_vertices(f, cap=args.cap)
    if sat.truncated:
        from .polytope import InconclusiveError

        raise InconclusiveError(f"more than {args.cap} saturating vertices")
    rep = certify_critical(f, ideal_behavior(rs), rs.dim, args.noise, list(sat))
    emit(args, _envelope("certify", name=f.name, set=rs.name, noise=args.noise, **rep.to_dict()))


def cmd_orbits(args):
    from .rays import build_rayset, compatibility_graph
    from .symmetry import automorphisms, functional_respects_orbits, name_orbits, orbit_partition

    rs = build_rayset(args.set)
    g = compatibility_graph(rs)
    grp = automorphisms(g)
    p = name_orbits(orbit_partition(g, grp), rs.name)

    def pairs(orbs):
        return [[[i + 1, j + 1] for i, j in o] for o in orbs]

    payload = _envelope(
        "orbits", set=rs.name, group_order=grp.order,
        vertex_orbits={n: [v + 1 for v in o] for n, o in zip(p.vertex_names, p.vertex_orbits)},
        edge_orbits=dict(zip(p.edge_names, pairs(p.edge_orbits))),
        non_edge_orbits=dict(zip(p.non_edge_names, pairs(p.non_edge_orbits))),
        sizes=p.sizes())
    if args.check_ineq:
        f = _load_functional(args.check_ineq)
        chk = functional_respects_orbits(f, p)
        payload["check"] = {"name": f.name, "respects_orbits": chk.ok,
                            "letters": {k: format_rational(v) for k, v in chk.letters.items()},
                            "violation": None if chk.ok else str(chk.violation)}
    emit(args, payload)


def cmd_report(args):
    from .report import build_report, report_to_csv, report_to_dict, report_to_table, write_figures

    reports = build_report(args.target)
    args.out_is_dir = True
    out = _out_dir(args, "report")
    data = report_to_dict(reports)
    sio.write_json(out / "report.json", data)
    (out / "report.csv").write_text(report_to_csv(reports))
    figs = write_figures(reports, out / "figures")
    data["files"] = [str(out / "report.json"), str(out / "report.csv")] + [str(p) for p in figs]
    if args.format == "table":
        emit(args, data, report_to_table(reports))
    elif args.format == "csv":
        emit(args, data, report_to_csv(reports))
    else:
        emit(args, data)


def cmd_pipeline(args):
    from .pipeline import run_pipeline
    from .report import write_distance_figure

    res = run_pipeline(args.set, args.noise, (args.from_, args.to, args.step), args.kmax, _gilbert_config(args),
                       args.oracle, args.threads, args.tolerance)
    args.out_is_dir = True
    out = _out_dir(args, "pipeline_out")
    (out / "sweep").mkdir(exist_ok=True)
    _write_sweep(out / "sweep", res.sweep, args.noise, res.set_name)
    write_distance_figure(res.sweep, out / "distance.png", f"{res.set_name} / {args.noise}")
    if res.template is not None:
        sio.write_json(out / "template.json", sio.template_to_dict(res.template))
    summary = _envelope("pipeline", set=res.set_name, noise=args.noise,
                        seed_parameter=None if res.seed_parameter is None else format_rational(res.seed_parameter),
                        facets_found=len(res.hits), provenance=res.log.entries)
    if res.best is not None:
        sio.write_json(out / "facet.json", sio.functional_to_dict(res.best.functional))
        summary["facet"] = _hit_dict(res.best)
        summary["critical"] = res.critical.exact_text()
        summary["critical_decimal"] = res.critical.decimal
    if res.certificate is not None:
        summary["certificate"] = res.certificate.to_dict()
    sio.write_json(out / "provenance.json", summary)
    if res.best is None:
        from .tighten import BudgetExhaustedError

        raise BudgetExhaustedError("pipeline produced no violated facet; see provenance.json")
    emit(args, summary)


# --------------------------------------------------------------------------- #
# Parser

SETS = ("ks18", "yu-oh", "yuoh")
NOISES = ("visibility", "efficiency")


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--threads", type=int, default=d(1), help="worker processes (default 1)")
    p.add_argument("--seed", type=int, default=d(0), help="RNG seed (default 0)")
    p.add_argument("--out", default=d(None), help="output file, or directory for gilbert/report/pipeline")
    p.add_argument("--format", choices=("json", "csv", "table"), default=d("json"))
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def _gilbert_flags(p, default_from=0.69, default_to=1.0):
    p.add_argument("--set", required=True, choices=SETS)
    p.add_argument("--noise", required=True, choices=NOISES)
    p.add_argument("--from", dest="from_", type=float, default=default_from)
    p.add_argument("--to", type=float, default=default_to)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--max-iterations", type=int, default=20_000)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--oracle", choices=("heuristic", "exact"), default="heuristic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sicbell", description="Bell inequalities from contextuality sets.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("rays", cmd_rays, "print a built-in ray set")
    p.add_argument("--set", required=True, choices=SETS)

    p = add("graph", cmd_graph, "compatibility graph, KS colorability and the SI-C certificate")
    p.add_argument("--set", required=True, choices=SETS)

    p = add("behavior", cmd_behavior, "quantum behavior with optional noise")
    p.add_argument("--set", required=True, choices=SETS)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--visibility", type=_fraction_arg)
    g.add_argument("--efficiency", type=_fraction_arg)

    p = add("bound", cmd_bound, "exact local bound")
    p.add_argument("--ineq", required=True, help="built-in name or functional JSON file")

    p = add("tightness", cmd_tightness, "facet test by affine rank of saturating vertices")
    p.add_argument("--ineq", required=True)
    p.add_argument("--cap", type=int, default=10**6)

    p = add("gilbert", cmd_gilbert, "Gilbert sweep over a noise grid")
    _gilbert_flags(p)

    p = add("tighten", cmd_tighten, "integer coefficient search over a template")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--template")
    src.add_argument("--from-witness")
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--signs", help='"a:+,b:-" or one of +-0* per letter')
    p.add_argument("--tolerance", type=float, default=0.02)

    p = add("certify", cmd_certify, "critical parameter and LP local-model certificates")
    p.add_argument("--ineq", required=True)
    p.add_argument("--set", choices=SETS)
    p.add_argument("--noise", required=True, choices=NOISES)
    p.add_argument("--cap", type=int, default=10**6)

    p = add("orbits", cmd_orbits, "automorphism orbits of the compatibility graph")
    p.add_argument("--set", required=True, choices=SETS)
    p.add_argument("--check-ineq")

    p = add("report", cmd_report, "recompute the comparison tables and figures")
    p.add_argument("--target", choices=("ks18", "yuoh", "all"), default="all")

    p = add("pipeline", cmd_pipeline, "sweep, template, search and certify in one go")
    _gilbert_flags(p)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--tolerance", type=float, default=0.02)
    return parser


def _exit_code(exc: BaseException) -> int:
    from .behavior import ParameterRangeError
    from .certify import NeverViolatedError, NoRootInRangeError
    from .polytope import InconclusiveError, ScenarioTooLargeError
    from .rays import UnknownSetError
    from .symmetry import GraphTooLargeError
    from .tighten import BudgetExhaustedError

    if isinstance(exc, SchemaError):
        return EXIT_SCHEMA
    if isinstance(exc, (InconclusiveError, ScenarioTooLargeError, BudgetExhaustedError, GraphTooLargeError,
                        NeverViolatedError, NoRootInRangeError)):
        return EXIT_INFEASIBLE
    if isinstance(exc, (UsageError, ParameterRangeError, UnknownSetError, ValueError)):
        # remaining ValueErrors come from argument validation (grids, configs, sizes)
        return EXIT_USAGE
    return EXIT_INTERNAL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("sicbell: error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    args.threads = min(args.threads, os.cpu_count() or 1)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - mapped to the exit-code contract
        code = _exit_code(exc)
        if code == EXIT_INTERNAL and args.verbose:
            log.exception("internal error")
        print(f"sicbell: error: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
