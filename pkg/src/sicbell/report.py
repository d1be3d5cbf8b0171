"""Comparison tables for the built-in inequalities, recomputed from scratch."""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .behavior import ideal_behavior
from .catalog import KS18_NAMES, YUOH_NAMES, get_functional
from .certify import critical_efficiency, critical_visibility, round_half_up
from .io import SCHEMA_VERSION, format_rational
from .polytope import check_tightness, evaluate, local_bound_exact, saturating_vertices
from .rays import build_rayset

TARGETS = {"ks18": ("ks18", KS18_NAMES), "yuoh": ("yu-oh", YUOH_NAMES)}


@dataclass(frozen=True)
class ReportRow:
    name: str
    local_bound: Fraction
    quantum_value: Fraction
    v_crit: str
    eta_crit: str
    tight: str
    v_crit_exact: str
    eta_crit_exact: str
    saturating: int
    affine_rank: int

    def to_dict(self) -> dict:
        return {"name": self.name, "local_bound": format_rational(self.local_bound),
                "quantum_value": format_rational(self.quantum_value),
                "quantum_decimal": round_half_up(self.quantum_value, 4),
                "v_crit": self.v_crit, "eta_crit": self.eta_crit, "tight": self.tight,
                "v_crit_exact": self.v_crit_exact, "eta_crit_exact": self.eta_crit_exact,
                "saturating_vertices": self.saturating, "affine_rank": self.affine_rank}


@dataclass
class SetReport:
    set_name: str
    rows: list[ReportRow]
    shared_vertices: int

    def to_dict(self) -> dict:
        return {"set": self.set_name, "rows": [r.to_dict() for r in self.rows],
                "shared_vertices": self.shared_vertices}


def report_row(name: str) -> tuple[ReportRow, set]:
    """One table row plus the saturating-vertex keys (for the shared count)."""
    set_name = "ks18" if name.startswith("ks18") else "yu-oh"
    rs = build_rayset(set_name)
    ideal = ideal_behavior(rs)
    f = get_functional(name)
    bound, _ = local_bound_exact(f)  # recomputed, not read from the catalog
    f = f.with_bound(bound)
    value = evaluate(f, ideal)
    cv = critical_visibility(f, ideal, rs.dim)
    ce = critical_efficiency(f, ideal)
    cert = check_tightness(f)
    keys = saturating_vertices(f).keys()
    row = ReportRow(name, bound, value, cv.decimal, ce.decimal, "Yes" if cert.is_facet else "No",
                    cv.exact_text(), ce.exact_text(), len(keys), cert.affine_rank)
    return row, keys


def build_report(target: str) -> list[SetReport]:
    if target == "all":
        keys = list(TARGETS)
    elif target in TARGETS:
        keys = [target]
    else:
        raise ValueError(f"unknown report target {target!r}")
    out = []
    for key in keys:
        set_name, names = TARGETS[key]
        rows, shared = [], None
        for n in names:
            row, sat = report_row(n)
            rows.append(row)
            shared = sat if shared is None else shared & sat
        out.append(SetReport(set_name, rows, len(shared)))
    return out


def report_to_dict(reports: list[SetReport]) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "report", "tables": [r.to_dict() for r in reports]}


CSV_FIELDS = ("set", "name", "local_bound", "quantum_value", "v_crit", "eta_crit", "tight",
              "saturating_vertices", "affine_rank")


def report_to_csv(reports: list[SetReport]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rep in reports:
        for r in rep.rows:
            d = r.to_dict()
            w.writerow([rep.set_name] + [d[k] for k in CSV_FIELDS[1:]])
    return buf.getvalue()


def report_to_table(reports: list[SetReport]) -> str:
    lines = []
    for rep in reports:
        lines.append(f"{rep.set_name}")
        header = ("inequality", "bound", "value", "V_crit", "eta_crit", "tight")
        body = [(r.name, format_rational(r.local_bound), format_rational(r.quantum_value), r.v_crit, r.eta_crit,
                 r.tight) for r in rep.rows]
        widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
        for line in [header] + body:
            lines.append("  " + "  ".join(str(x).ljust(w) for x, w in zip(line, widths)))
        lines.append(f"  shared saturating vertices: {rep.shared_vertices}")
    return "\n".join(lines) + "\n"


def write_figures(reports: list[SetReport], out_dir: Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for rep in reports:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        names = [r.name for r in rep.rows]
        xs = range(len(names))
        ax.bar([x - 0.2 for x in xs], [float(r.v_crit) for r in rep.rows], width=0.4, label="V_crit")
        ax.bar([x + 0.2 for x in xs], [float(r.eta_crit) for r in rep.rows], width=0.4, label="eta_crit")
        for x, r in zip(xs, rep.rows):
            if r.tight == "Yes":
                ax.annotate("facet", (x, 1.0), ha="center", fontsize=8)
        ax.set_xticks(list(xs), names, rotation=20, fontsize=8)
        ax.set_ylim(0.7, 1.05)
        ax.set_ylabel("critical parameter")
        ax.set_title(f"{rep.set_name}: critical noise levels")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / f"critical_{rep.set_name}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)

        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.bar(names, [r.saturating for r in rep.rows])
        ax.axhline(rep.shared_vertices, color="k", ls="--", lw=1, label=f"shared by all ({rep.shared_vertices})")
        ax.set_yscale("log")
        ax.set_ylabel("saturating vertices")
        ax.tick_params(axis="x", labelrotation=20, labelsize=8)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / f"saturating_{rep.set_name}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def write_distance_figure(sweep_results, path: Path, title: str = "") -> Path:
    """Final Gilbert distance per grid point."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = [float(v) for v, _ in sweep_results]
    ax.plot(xs, [r.distance for _, r in sweep_results], "o-", ms=3)
    sep = [float(v) for v, r in sweep_results if r.status == "separated"]
    if sep:
        ax.axvline(min(sep), color="r", ls="--", lw=1, label=f"first separated {min(sep):.2f}")
        ax.legend(fontsize=8)
    ax.set_yscale("log")
    ax.set_xlabel("noise parameter")
    ax.set_ylabel("final distance")
    ax.set_title(title)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
