"""Critical noise parameters, LP local models and the desk-scale entropies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction
from typing import Sequence

import numpy as np

from .behavior import Behavior, apply_visibility
from .exact import simplex_feasibility, solve_particular
from .polytope import BellFunctional, DeterministicVertex, embed_bits, evaluate, local_bound_exact


class NeverViolatedError(ValueError):
    pass


class NoRootInRangeError(ValueError):
    pass


class InvalidDistributionError(ValueError):
    pass


def _squarefree_split(n: int) -> tuple[int, int]:
    """``n = k*k*r`` with ``r`` free of small square factors."""
    if n < 0:
        raise ValueError("negative radicand")
    k, r = 1, n
    root = math.isqrt(r)
    if root * root == r:
        return root, 1
    p = 2
    while p * p <= r and p < 100_000:
        while r % (p * p) == 0:
            r //= p * p
            k *= p
        p += 1 if p == 2 else 2
    return k, r


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number (p + q*sqrt(r)) / s with integers and r >= 1."""

    p: int
    q: int
    r: int
    s: int

    def __post_init__(self):
        if self.s == 0 or self.r < 1:
            raise ValueError("invalid surd")
        if self.s < 0:
            object.__setattr__(self, "p", -self.p)
            object.__setattr__(self, "q", -self.q)
            object.__setattr__(self, "s", -self.s)

    @classmethod
    def from_parts(cls, a: Fraction, b: Fraction, r: int) -> "QuadraticSurd":
        """a + b*sqrt(r)."""
        a, b = Fraction(a), Fraction(b)
        k, r = _squarefree_split(r)
        b *= k
        if r == 1:
            a, b = a + b, Fraction(0)
        s = math.lcm(a.denominator, b.denominator)
        return cls(int(a * s), int(b * s), r, s)

    def is_rational(self) -> bool:
        return self.q == 0 or self.r == 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("irrational surd")
        return Fraction(self.p + self.q * math.isqrt(self.r), self.s)

    def sign(self) -> int:
        """Exact sign of the value."""
        a, b = self.p, self.q
        if b == 0 or a == 0:
            return (a > 0) - (a < 0) if b == 0 else (b > 0) - (b < 0)
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        # opposite signs: compare a^2 with b^2 r
        d = a * a - b * b * self.r
        return (a > 0) - (a < 0) if d > 0 else ((b > 0) - (b < 0) if d < 0 else 0)

    def __sub__(self, other) -> "QuadraticSurd":
        other = Fraction(other)
        return QuadraticSurd.from_parts(Fraction(self.p, self.s) - other, Fraction(self.q, self.s), self.r)

    def to_decimal(self, digits: int = 50) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = digits + 10
            return (Decimal(self.p) + Decimal(self.q) * Decimal(self.r).sqrt()) / Decimal(self.s)

    def __float__(self) -> float:
        return float(self.to_decimal(30))

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.as_fraction())
        q = "" if abs(self.q) == 1 else f"{abs(self.q)}*"
        if self.p == 0:
            num = f"{'-' if self.q < 0 else ''}{q}sqrt({self.r})"
        else:
            num = f"({self.p}{'+' if self.q >= 0 else '-'}{q}sqrt({self.r}))"
        return num if self.s == 1 else f"{num}/{self.s}"


def round_half_up(x, places: int = 4) -> str:
    if isinstance(x, QuadraticSurd):
        d = x.to_decimal()
    elif isinstance(x, Fraction):
        with localcontext() as ctx:
            ctx.prec = 60
            d = Decimal(x.numerator) / Decimal(x.denominator)
    else:
        d = Decimal(str(x))
    return str(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class CriticalPoint:
    parameter: str
    value: Fraction | QuadraticSurd
    decimal: str

    def as_float(self) -> float:
        return float(self.value)

    def exact_text(self) -> str:
        return str(self.value)


def _bound_of(f: BellFunctional) -> Fraction:
    return f.bound if f.bound is not None else local_bound_exact(f)[0]


def critical_visibility(f: BellFunctional, ideal: Behavior, d: int) -> CriticalPoint:
    bound = _bound_of(f)
    top = evaluate(f, ideal)
    if top <= bound:
        raise NeverViolatedError(f"ideal value {top} does not exceed the bound {bound}")
    mixed = evaluate(f, apply_visibility(ideal, 0, d))
    v = (bound - mixed) / (top - mixed)
    return CriticalPoint("V", v, round_half_up(v))


def efficiency_parts(f: BellFunctional, ideal: Behavior) -> tuple[Fraction, Fraction]:
    """``(J, M)``: joint and marginal contributions to the ideal value."""
    J = sum((f.joint[x][y] * ideal.joint[x][y] for x in range(f.m) for y in range(f.m)), Fraction(0))
    M = sum((c * p for c, p in zip(f.marg_a, ideal.marg_a)), Fraction(0)) + \
        sum((c * p for c, p in zip(f.marg_b, ideal.marg_b)), Fraction(0))
    return J, M


def critical_efficiency(f: BellFunctional, ideal: Behavior) -> CriticalPoint:
    """Largest root in (0, 1] of J eta^2 + M eta = bound."""
    bound = _bound_of(f)
    J, M = efficiency_parts(f, ideal)
    if J + M <= bound:
        raise NeverViolatedError(f"ideal value {J + M} does not exceed the bound {bound}")
    if J == 0:
        roots = [QuadraticSurd.from_parts(bound / M, Fraction(0), 1)]
    else:
        disc = M * M + 4 * J * bound
        if disc < 0:
            raise NoRootInRangeError("no real root")
        # sqrt(a/b) = sqrt(a*b)/b
        rad = disc.numerator * disc.denominator
        a = -M / (2 * J)
        b = Fraction(1, 2 * J * disc.denominator)
        roots = [QuadraticSurd.from_parts(a, b, rad), QuadraticSurd.from_parts(a, -b, rad)]
    inside = [z for z in roots if z.sign() > 0 and (z - 1).sign() <= 0]
    if not inside:
        raise NoRootInRangeError("no root in (0, 1]")
    best = max(inside, key=lambda z: z.to_decimal())
    value = best.as_fraction() if best.is_rational() else best
    return CriticalPoint("eta", value, round_half_up(best))


# --------------------------------------------------------------------------- #
# Local models

@dataclass
class LocalModel:
    support: list[DeterministicVertex]
    weights: list[Fraction]

    def __post_init__(self):
        if sum(self.weights, Fraction(0)) != 1 or any(w < 0 for w in self.weights):
            raise ValueError("weights must be a probability vector")

    def coordinates(self) -> list[Fraction]:
        from .polytope import embed_vertex

        D = len(embed_vertex(self.support[0]))
        out = [Fraction(0)] * D
        for v, w in zip(self.support, self.weights):
            for i, c in enumerate(embed_vertex(v)):
                if c:
                    out[i] += w
        return out

    def reproduces(self, target: Behavior) -> bool:
        return self.coordinates() == target.coordinates()


@dataclass
class LpOutcome:
    """``status`` is "feasible" or "infeasible"; the matching certificate is set."""

    status: str
    model: LocalModel | None = None
    # Farkas vector y over (CG coordinates..., normalisation): y.[v;1] >= 0 for all
    # candidates and y.[p;1] < 0
    farkas: list[Fraction] | None = None
    method: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _candidate_matrix(candidates: Sequence[DeterministicVertex]) -> np.ndarray:
    A = np.array([v.a_bits for v in candidates], dtype=np.int8)
    B = np.array([v.b_bits for v in candidates], dtype=np.int8)
    return embed_bits(A, B, homogeneous=True).T.astype(np.int64)  # (D+1, N)


def verify_farkas(cols: np.ndarray, rhs: Sequence[Fraction], y: Sequence[Fraction]) -> bool:
    den = math.lcm(*(Fraction(v).denominator for v in y))
    yi = np.array([int(Fraction(v) * den) for v in y], dtype=object)
    if (yi @ cols.astype(object) < 0).any():
        return False
    return sum((a * b for a, b in zip(y, rhs)), Fraction(0)) < 0


def _functional_farkas(f: BellFunctional) -> list[Fraction]:
    bound = _bound_of(f)
    return [-c for c in f.coordinates()] + [bound]


def local_model_lp(target: Behavior, candidates: Sequence[DeterministicVertex],
                   hints: Sequence[BellFunctional] = (), exact_pivots: int = 20_000) -> LpOutcome:
    """Decide whether ``target`` is a convex combination of ``candidates``.

    A floating LP proposes a support (or a dual ray); the answer is accepted
    only after exact rational verification.  ``hints`` are functionals tried
    first as infeasibility certificates.
    """
    from scipy.optimize import linprog

    if not candidates:
        raise ValueError("candidate list is empty")
    cols = _candidate_matrix(candidates)
    rhs = list(target.coordinates()) + [Fraction(1)]
    nrow, ncol = cols.shape
    if nrow != len(rhs):
        raise ValueError("candidate and target dimensions differ")

    for f in hints:
        y = _functional_farkas(f)
        if verify_farkas(cols, rhs, y):
            return LpOutcome("infeasible", farkas=y, method="hint")

    b = np.array([float(v) for v in rhs])
    res = linprog(np.zeros(ncol), A_eq=cols.astype(float), b_eq=b, bounds=(0, None), method="highs-ds")
    notes = []
    if res.status == 0:
        support = [int(j) for j in np.nonzero(res.x > 1e-10)[0]]
        q = solve_particular(cols[:, support].tolist(), rhs)
        if q is not None and all(w >= 0 for w in q):
            keep = [(j, w) for j, w in zip(support, q) if w > 0]
            model = LocalModel([candidates[j] for j, _ in keep], [w for _, w in keep])
            if model.reproduces(target):
                return LpOutcome("feasible", model=model, method="support-solve")
        notes.append("float support did not verify")
    else:
        # dual ray: maximise b.y subject to A^T y <= 0, -1 <= y <= 1
        dual = linprog(-b, A_ub=cols.T.astype(float), b_ub=np.zeros(ncol), bounds=(-1, 1), method="highs-ds")
        if dual.status == 0 and -dual.fun > 1e-9:
            y = dual.x
            active = [j for j in range(ncol) if abs(cols[:, j] @ y) < 1e-9]
            fixed = [i for i in range(nrow) if abs(abs(y[i]) - 1) < 1e-9]
            M = [cols[:, j].tolist() for j in active] + [[int(k == i) for k in range(nrow)] for i in fixed]
            r = [0] * len(active) + [int(round(y[i])) for i in fixed]
            ye = solve_particular(M, r)
            if ye is not None:
                farkas = [-v for v in ye]
                if verify_farkas(cols, rhs, farkas):
                    return LpOutcome("infeasible", farkas=farkas, method="dual-solve")
        notes.append("float dual ray did not verify")

    x, y = simplex_feasibility(cols.tolist(), rhs, max_pivots=exact_pivots)
    if x is not None:
        keep = [(j, w) for j, w in enumerate(x) if w > 0]
        model = LocalModel([candidates[j] for j, _ in keep], [w for _, w in keep])
        assert model.reproduces(target)
        return LpOutcome("feasible", model=model, method="exact-simplex", notes=notes)
    assert verify_farkas(cols, rhs, y)
    return LpOutcome("infeasible", farkas=y, method="exact-simplex", notes=notes)


def noise_floor_model(kind: str, m: int, d: int) -> LocalModel:
    """Local model of the fully noisy behavior (V = 0 or eta = 0).

    White noise gives independent parties with click probability 1/d; a
    shared cyclic shift k (click iff x = k mod d) reproduces that marginal,
    so the product of two such models has d^2 equally weighted vertices.
    """
    if kind == "efficiency":
        return LocalModel([DeterministicVertex((0,) * m, (0,) * m)], [Fraction(1)])
    if kind != "visibility":
        raise ValueError(f"unknown noise model {kind!r}")
    if d < 1 or d > m:
        raise ValueError("need 1 <= d <= m")
    cyc = [tuple(int(x % d == k) for x in range(m)) for k in range(d)]
    support = [DeterministicVertex(a, b) for a in cyc for b in cyc]
    return LocalModel(support, [Fraction(1, d * d)] * len(support))


@dataclass
class CertifyReport:
    critical: CriticalPoint
    certified: str  # "exact", "numeric" or "infeasible"
    support_size: int
    above: LpOutcome | None
    at: LpOutcome | None = None
    residual: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"parameter": self.critical.parameter, "critical": self.critical.exact_text(),
               "critical_decimal": self.critical.decimal, "certified": self.certified,
               "model_support_size": self.support_size, "notes": list(self.notes)}
        if self.above is not None:
            out["above_critical"] = {"status": self.above.status, "method": self.above.method}
        if self.residual is not None:
            out["residual"] = self.residual
        return out


def _float_lp_residual(target_float: np.ndarray, candidates: Sequence[DeterministicVertex]):
    """Float feasibility LP; returns (support size, max residual) or None."""
    from scipy.optimize import linprog

    cols = _candidate_matrix(candidates).astype(float)
    b = np.concatenate([target_float, [1.0]])
    res = linprog(np.zeros(cols.shape[1]), A_eq=cols, b_eq=b, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        return None
    return int((res.x > 1e-12).sum()), float(np.abs(cols @ res.x - b).max())


def certify_critical(f: BellFunctional, ideal: Behavior, d: int, kind: str,
                     candidates: Sequence[DeterministicVertex], offset: Fraction = Fraction(1, 100)) -> CertifyReport:
    """Local model at the critical parameter and an infeasibility certificate just above it.

    An irrational critical efficiency is handled by a float LP at the double
    nearest the root, reported as "numeric" with its residual.
    """
    from .behavior import apply_efficiency

    if kind == "visibility":
        cp = critical_visibility(f, ideal, d)
        at_param = cp.value
        make = lambda t: apply_visibility(ideal, t, d)  # noqa: E731
    elif kind == "efficiency":
        cp = critical_efficiency(f, ideal)
        at_param = cp.value
        make = lambda t: apply_efficiency(ideal, t)  # noqa: E731
    else:
        raise ValueError(f"unknown noise model {kind!r}")
    notes: list[str] = []
    above = None
    hi = Fraction(cp.value.to_decimal()).limit_denominator(10**12) if isinstance(cp.value, QuadraticSurd) else cp.value
    if hi + offset <= 1:
        above = local_model_lp(make(hi + offset), candidates, hints=[f])
    if isinstance(at_param, Fraction):
        at = local_model_lp(make(at_param), candidates, hints=[f])
        if at.feasible:
            return CertifyReport(cp, "exact", len(at.model.support), above, at, notes=notes)
        return CertifyReport(cp, "infeasible", 0, above, at, notes=notes)
    # surd: the behavior has irrational entries
    eta = float(at_param)
    J = np.array([[float(p) for p in row] for row in ideal.joint]).reshape(-1)
    marg = np.array([float(p) for p in ideal.marg_a] + [float(p) for p in ideal.marg_b])
    target = np.concatenate([eta * eta * J, eta * marg])
    got = _float_lp_residual(target, candidates)
    notes.append("critical value is irrational; local model solved in floating point")
    if got is None:
        return CertifyReport(cp, "infeasible", 0, above, None, notes=notes)
    size, resid = got
    return CertifyReport(cp, "numeric" if resid <= 1e-9 else "infeasible", size, above, None, resid, notes)


# --------------------------------------------------------------------------- #
# Entropy

def binary_entropy(x) -> float:
    x = float(x)
    if not 0 <= x <= 1:
        raise ValueError(f"{x} outside [0, 1]")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def _h(ps) -> float:
    return -sum(p * math.log2(p) for p in ps if p > 0)


def cond_entropy_A_given_B(joint11, marg_a1, marg_b1) -> float:
    """H(A|B) in bits for one pair of two-outcome settings."""
    j, a, b = (Fraction(v) if not isinstance(v, float) else v for v in (joint11, marg_a1, marg_b1))
    table = [j, a - j, b - j, 1 - a - b + j]
    if any(p < 0 for p in table) or not (0 <= b <= 1):
        raise InvalidDistributionError(f"not a distribution: {table}")
    return _h(float(p) for p in table) - _h([float(b), float(1 - b)])
