"""Gilbert's distance minimisation to the local polytope.

Points live in the outcome-resolved table P[a, b, x, y] flattened to R^(4 m^2)
with the Euclidean norm.  The linear oracle maximises the overlap of a
residual with the deterministic vertices, either exactly (separable search
over Alice's assignments) or heuristically (alternating best responses).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .behavior import Behavior, NoiseModel, ideal_behavior
from .polytope import (DEFAULT_LIMIT, BellFunctional, DeterministicVertex, ScenarioTooLargeError, evaluate,
                       local_bound_exact)
from .rays import RaySet

STATUSES = ("inside", "separated", "iteration-budget")


@dataclass(frozen=True)
class GilbertConfig:
    delta: float = 1e-3
    max_iterations: int = 20_000
    oracle_restarts: int = 50
    rng_seed: int = 0
    max_denominator: int = 9999
    # extra iterations spent sharpening a witness after the first separation
    polish_iterations: int = 500
    polish_tolerance: float = 1e-3
    # re-optimise the weights of the active vertices every this many steps (0: plain Gilbert)
    corrective_every: int = 20

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.max_iterations < 1 or self.oracle_restarts < 1:
            raise ValueError("max_iterations and oracle_restarts must be at least 1")


@dataclass
class GilbertResult:
    status: str
    distance: float
    closest_local: np.ndarray
    witness: BellFunctional | None
    iterations: int
    distances: list[float] = field(default_factory=list)
    violation: Fraction | None = None

    def summary(self) -> dict:
        return {"status": self.status, "distance": self.distance, "iterations": self.iterations,
                "bound": None if self.witness is None else self.witness.bound,
                "violation": self.violation}


# --------------------------------------------------------------------------- #
# Tables and functionals

def vertex_table(a_bits: Sequence[int], b_bits: Sequence[int]) -> np.ndarray:
    a = np.asarray(a_bits, dtype=int)
    b = np.asarray(b_bits, dtype=int)
    m = len(a)
    A = np.stack([1 - a, a])  # A[o, x] = [a_x == o]
    B = np.stack([1 - b, b])
    return (A[:, None, :, None] * B[None, :, None, :]).astype(float).reshape(4 * m * m)


def residual_to_cg(gamma: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Split a table functional into ``(joint, marg_a, marg_b, constant)`` on CG coordinates."""
    G = np.asarray(gamma, dtype=float).reshape(2, 2, m, m)
    joint = G[1, 1] - G[1, 0] - G[0, 1] + G[0, 0]
    ca = (G[1, 0] - G[0, 0]).sum(axis=1)
    cb = (G[0, 1] - G[0, 0]).sum(axis=0)
    return joint, ca, cb, float(G[0, 0].sum())


def _values_for_alice(A: np.ndarray, joint, ca, cb):
    T = A @ joint + cb
    return A @ ca + np.where(T > 0, T, 0).sum(axis=1), T


def oracle_exact(gamma: np.ndarray, m: int, limit: int = DEFAULT_LIMIT) -> tuple[DeterministicVertex, float]:
    """Overlap-maximising vertex, exhaustive over Alice and optimal for Bob."""
    if m > limit:
        raise ScenarioTooLargeError(f"m={m} exceeds {limit}")
    joint, ca, cb, const = residual_to_cg(gamma, m)
    best, best_a, best_t = -np.inf, None, None
    shifts = np.arange(m)
    for start in range(0, 1 << m, 1 << 15):
        masks = np.arange(start, min(1 << m, start + (1 << 15)))
        A = ((masks[:, None] >> shifts) & 1).astype(float)
        val, T = _values_for_alice(A, joint, ca, cb)
        i = int(np.argmax(val))
        if val[i] > best:
            best, best_a, best_t = val[i], A[i], T[i]
    v = DeterministicVertex(tuple(int(x) for x in best_a), tuple(int(t > 0) for t in best_t))
    return v, float(best + const)


def oracle_heuristic(gamma: np.ndarray, m: int, restarts: int, rng: np.random.Generator,
                     max_rounds: int = 100) -> tuple[DeterministicVertex, float]:
    """Alternating best responses from random starting vertices; best over restarts."""
    joint, ca, cb, const = residual_to_cg(gamma, m)
    A = rng.integers(0, 2, size=(restarts, m)).astype(float)
    B = None
    for _ in range(max_rounds):
        B_new = ((A @ joint + cb) > 0).astype(float)
        A_new = ((B_new @ joint.T + ca) > 0).astype(float)
        if B is not None and np.array_equal(A_new, A) and np.array_equal(B_new, B):
            break
        A, B = A_new, B_new
    B = ((A @ joint + cb) > 0).astype(float)
    vals = np.einsum("rx,xy,ry->r", A, joint, B) + A @ ca + B @ cb
    i = int(np.argmax(vals))
    return DeterministicVertex(tuple(int(x) for x in A[i]), tuple(int(x) for x in B[i])), float(vals[i] + const)


def table_to_cg_functional(c: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    joint, ca, cb, _ = residual_to_cg(c, m)
    return joint, ca, cb


def rationalize_witness(c: np.ndarray, m: int, max_denominator: int = 9999, name: str = "witness") -> BellFunctional:
    """CG functional with small rational coefficients close to the direction of ``c``.

    Coefficients are scaled to a unit maximum before rounding.
    """
    joint, ca, cb = table_to_cg_functional(c, m)
    scale = max(np.abs(joint).max(), np.abs(ca).max(), np.abs(cb).max())
    if scale == 0:
        return BellFunctional.zero(m)

    def q(v):
        return Fraction(float(v) / scale).limit_denominator(max_denominator)

    return BellFunctional(m, [[q(v) for v in row] for row in joint], [q(v) for v in ca], [q(v) for v in cb],
                          None, name)


def _verified_witness(c, m, target: Behavior, cfg: GilbertConfig):
    f = rationalize_witness(c, m, cfg.max_denominator)
    if f.is_zero():
        return None, None
    bound, _ = local_bound_exact(f)
    value = evaluate(f, target)
    if value > bound:
        return f.with_bound(bound), value - bound
    return None, None


# --------------------------------------------------------------------------- #
# Main loop

def _corrective(r, atoms: list[np.ndarray], weights: np.ndarray) -> np.ndarray:
    """Re-weight the active vertices by a penalised NNLS; the caller keeps it only if it helps."""
    from scipy.optimize import nnls

    V = np.stack(atoms, axis=1)
    big = 1e3
    M = np.vstack([V, big * np.ones((1, V.shape[1]))])
    lam, _ = nnls(M, np.concatenate([r, [big]]))
    total = lam.sum()
    return lam / total if total > 0 else weights


def gilbert_run(target: Behavior, cfg: GilbertConfig = GilbertConfig(), oracle: str = "heuristic",
                grid_index: int = 0) -> GilbertResult:
    if oracle not in ("heuristic", "exact"):
        raise ValueError(f"unknown oracle {oracle!r}")
    m = target.m
    rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed & (2**64 - 1), grid_index]))
    r = target.full_table().reshape(-1)
    a0 = rng.integers(0, 2, size=m)
    b0 = rng.integers(0, 2, size=m)
    atoms = [vertex_table(a0, b0)]
    keys = {(tuple(a0), tuple(b0)): 0}
    weights = np.array([1.0])
    s = atoms[0].copy()
    distances: list[float] = []
    best = None  # (lower bound on the distance, residual)
    first_sep = None
    status = "iteration-budget"
    for k in range(cfg.max_iterations):
        c = r - s
        dist = float(np.linalg.norm(c))
        distances.append(dist)
        if dist < cfg.delta:
            status = "inside"
            break
        if oracle == "exact":
            v, lval = oracle_exact(c, m)
        else:
            v, lval = oracle_heuristic(c, m, cfg.oracle_restarts, rng)
        gap = float(c @ r) - lval
        if gap > 1e-12 * max(1.0, dist):
            if oracle == "heuristic":
                # the heuristic may have missed the best vertex; settle it exactly
                v, lval = oracle_exact(c, m)
                gap = float(c @ r) - lval
        if gap > 1e-12 * max(1.0, dist):
            score = gap / dist
            if best is None or score > best[0]:
                best = (score, c.copy())
            if first_sep is None:
                first_sep = k
            # stop once the Frank-Wolfe lower bound on the distance is nearly tight
            if dist - score < cfg.polish_tolerance * dist or k - first_sep >= cfg.polish_iterations:
                break
        l = vertex_table(v.a_bits, v.b_bits)
        key = (v.a_bits, v.b_bits)
        if key not in keys:
            keys[key] = len(atoms)
            atoms.append(l)
            weights = np.append(weights, 0.0)
        d = s - l
        denom = float(d @ d)
        eps = 1.0 if denom == 0 else min(1.0, max(0.0, float((r - l) @ d) / denom))
        s = eps * s + (1 - eps) * l
        weights *= eps
        weights[keys[key]] += 1 - eps
        if cfg.corrective_every and (k + 1) % cfg.corrective_every == 0 and len(atoms) > 1:
            w_new = _corrective(r, atoms, weights)
            s_new = np.stack(atoms, axis=1) @ w_new
            if np.linalg.norm(r - s_new) <= np.linalg.norm(r - s):
                s = s_new
                keep = np.nonzero(w_new > 0)[0]
                atoms = [atoms[i] for i in keep]
                weights = w_new[keep]
                old = {i: k for k, i in keys.items()}
                keys = {old[i]: j for j, i in enumerate(keep)}
    witness = violation = None
    if best is not None and status != "inside":
        # candidates: best-scoring residual, then the last one
        for cand in (best[1], r - s):
            witness, violation = _verified_witness(cand, m, target, cfg)
            if witness is not None:
                status = "separated"
                break
    return GilbertResult(status, distances[-1], s.reshape(2, 2, m, m), witness, len(distances),
                         distances, violation)


# --------------------------------------------------------------------------- #
# Sweeps

def parameter_grid(start: float, stop: float, step: float) -> list[Fraction]:
    a, b, h = (Fraction(str(v)) for v in (start, stop, step))
    if not (0 <= a <= b <= 1):
        raise ValueError("need 0 <= from <= to <= 1")
    if h <= 0:
        raise ValueError("step must be positive")
    n = int((b - a) / h)
    return [a + i * h for i in range(n + 1)]


def _sweep_task(args):
    rs, kind, value, cfg, oracle, index = args
    target = NoiseModel(kind, value).apply(ideal_behavior(rs), rs.dim)
    return index, gilbert_run(target, cfg, oracle, grid_index=index)


def sweep(rs: RaySet, model: str, start: float, stop: float, step: float, cfg: GilbertConfig = GilbertConfig(),
          oracle: str = "heuristic", threads: int = 1) -> list[tuple[Fraction, GilbertResult]]:
    """One independent run per grid point; witnesses are already re-bounded exactly."""
    grid = parameter_grid(start, stop, step)
    tasks = [(rs, model, v, cfg, oracle, i) for i, v in enumerate(grid)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=min(threads, os.cpu_count() or 1)) as pool:
            results = dict(pool.map(_sweep_task, tasks))
    else:
        results = dict(map(_sweep_task, tasks))
    return [(grid[i], results[i]) for i in range(len(grid))]
