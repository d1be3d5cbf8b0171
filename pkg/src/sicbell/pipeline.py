"""End-to-end search: Gilbert sweep, witness template, integer search, certificates."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .behavior import ideal_behavior
from .certify import (CertifyReport, CriticalPoint, NeverViolatedError, NoRootInRangeError, certify_critical,
                      critical_efficiency, critical_visibility)
from .gilbert import GilbertConfig, GilbertResult, sweep
from .polytope import DeterministicVertex, saturating_vertices
from .rays import build_rayset
from .tighten import SearchHit, Template, coefficient_search, default_signs, template_from_witness

DEFAULT_GRID = (0.69, 1.0, 0.01)


@dataclass
class ProvenanceLog:
    entries: list[dict] = field(default_factory=list)

    def record(self, step: str, started: float, **details) -> None:
        self.entries.append({"step": step, "seconds": round(time.perf_counter() - started, 3), **details})


@dataclass
class PipelineResult:
    set_name: str
    noise: str
    sweep: list[tuple[Fraction, GilbertResult]]
    seed_parameter: Fraction | None = None
    template: Template | None = None
    hits: list[SearchHit] = field(default_factory=list)
    best: SearchHit | None = None
    critical: CriticalPoint | None = None
    certificate: CertifyReport | None = None
    log: ProvenanceLog = field(default_factory=ProvenanceLog)


def _critical(f, ideal, d, noise) -> CriticalPoint | None:
    try:
        if noise == "visibility":
            return critical_visibility(f, ideal, d)
        return critical_efficiency(f, ideal)
    except (NeverViolatedError, NoRootInRangeError):
        return None


def run_pipeline(set_name: str, noise: str, grid: tuple = DEFAULT_GRID, k_max: int = 4,
                 cfg: GilbertConfig = GilbertConfig(), oracle: str = "heuristic", threads: int = 1,
                 tolerance: float = 0.02, certify: bool = True) -> PipelineResult:
    """Returns whatever was reached; ``best`` stays ``None`` when no step produced a facet.

    The seed witness is the separated one at the lowest grid parameter, the
    one closest to the critical noise level.  Among facets found, the one
    with the lowest critical parameter wins.
    """
    if noise not in ("visibility", "efficiency"):
        raise ValueError(f"unknown noise model {noise!r}")
    rs = build_rayset(set_name)
    ideal = ideal_behavior(rs)
    log = ProvenanceLog()

    t0 = time.perf_counter()
    results = sweep(rs, noise, *grid, cfg=cfg, oracle=oracle, threads=threads)
    log.record("sweep", t0, grid=[str(g) for g in grid], points=len(results),
               statuses={str(v): r.status for v, r in results}, seed=cfg.rng_seed, oracle=oracle)
    out = PipelineResult(rs.name, noise, results, log=log)

    separated = [(v, r) for v, r in results if r.status == "separated"]
    if not separated:
        return out
    v0, r0 = min(separated, key=lambda vr: vr[0])
    out.seed_parameter = v0

    t0 = time.perf_counter()
    t = template_from_witness(r0.witness, tolerance)
    out.template = t
    log.record("template", t0, parameter=str(v0), letters=list(t.letters),
               values={k: str(v) for k, v in t.values}, tolerance=tolerance)

    t0 = time.perf_counter()
    signs = default_signs(t)
    hits = coefficient_search(t, signs, k_max, threads=threads)
    out.hits = hits
    log.record("search", t0, k_max=k_max, signs=signs, facets=len(hits))

    t0 = time.perf_counter()
    scored = [(cp, h) for h in hits if (cp := _critical(h.functional, ideal, rs.dim, noise)) is not None]
    if not scored:
        log.record("critical", t0, violated=0)
        return out
    cp, best = min(scored, key=lambda s: (float(s[0].value), s[1].key()))
    out.best, out.critical = best, cp
    log.record("critical", t0, violated=len(scored), assignment=best.assignment,
               bound=str(best.functional.bound), critical=cp.exact_text(), decimal=cp.decimal,
               affine_rank=best.certificate.affine_rank)

    if certify:
        t0 = time.perf_counter()
        sat = saturating_vertices(best.functional)
        cands = [DeterministicVertex(tuple(a), tuple(b)) for a, b in zip(sat.a, sat.b)]
        out.certificate = certify_critical(best.functional, ideal, rs.dim, noise, cands)
        log.record("certify", t0, **out.certificate.to_dict())
    return out
