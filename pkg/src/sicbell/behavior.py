"""Quantum behaviors in Collins-Gisin form and the two noise models.

The maximally entangled two-qudit state gives P(1,1|x,y) = |<v_x|v_y>|^2 / d
(the transpose on Bob's side is a no-op for real rays) and marginals 1/d.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .rays import RaySet


class ParameterRangeError(ValueError):
    pass


def _frac_matrix(rows) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


@dataclass(frozen=True)
class Behavior:
    """Collins-Gisin data: ``joint[x][y]`` = P(A_x = B_y = 1), x for Alice."""

    m: int
    joint: tuple[tuple[Fraction, ...], ...]
    marg_a: tuple[Fraction, ...]
    marg_b: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "joint", _frac_matrix(self.joint))
        object.__setattr__(self, "marg_a", tuple(Fraction(v) for v in self.marg_a))
        object.__setattr__(self, "marg_b", tuple(Fraction(v) for v in self.marg_b))
        if len(self.joint) != self.m or any(len(r) != self.m for r in self.joint):
            raise ValueError("joint block must be m x m")
        if len(self.marg_a) != self.m or len(self.marg_b) != self.m:
            raise ValueError("marginal vectors must have length m")
        for v in self.coordinates():
            if not (0 <= v <= 1):
                raise ValueError(f"probability {v} outside [0, 1]")

    def coordinates(self) -> list[Fraction]:
        """Flat CG vector: joint row-major over (x, y), then Alice, then Bob marginals."""
        return [v for row in self.joint for v in row] + list(self.marg_a) + list(self.marg_b)

    def to_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.coordinates()])

    def is_consistent(self) -> bool:
        """joint(x,y) <= min(margA(x), margB(y)) and the four-outcome table is nonnegative."""
        for x in range(self.m):
            for y in range(self.m):
                p = self.joint[x][y]
                if p > self.marg_a[x] or p > self.marg_b[y]:
                    return False
                if 1 - self.marg_a[x] - self.marg_b[y] + p < 0:
                    return False
        return True

    def full_table(self) -> np.ndarray:
        """Float array ``P[a, b, x, y]`` of outcome-resolved probabilities."""
        return cg_to_full(self.to_float(), self.m)


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    value: Fraction

    def __post_init__(self):
        if self.kind not in ("visibility", "efficiency"):
            raise ValueError(f"unknown noise model {self.kind!r}")
        object.__setattr__(self, "value", Fraction(self.value))
        if not (0 <= self.value <= 1):
            raise ParameterRangeError(f"{self.kind} {self.value} outside [0, 1]")

    def apply(self, b: Behavior, d: int) -> Behavior:
        if self.kind == "visibility":
            return apply_visibility(b, self.value, d)
        return apply_efficiency(b, self.value)


def ideal_behavior(rs: RaySet) -> Behavior:
    d = rs.dim
    n = rs.n
    joint = [[rs.squared_overlap(x, y) / d for y in range(n)] for x in range(n)]
    marg = [Fraction(1, d)] * n
    return Behavior(n, joint, marg, marg)


def _check_unit(name: str, value) -> Fraction:
    v = Fraction(value)
    if not (0 <= v <= 1):
        raise ParameterRangeError(f"{name}={value} outside [0, 1]")
    return v


def apply_visibility(b: Behavior, V, d: int) -> Behavior:
    V = _check_unit("V", V)
    noise_joint = (1 - V) / (d * d)
    noise_marg = (1 - V) / d
    return Behavior(
        b.m,
        [[V * p + noise_joint for p in row] for row in b.joint],
        [V * p + noise_marg for p in b.marg_a],
        [V * p + noise_marg for p in b.marg_b],
    )


def apply_efficiency(b: Behavior, eta) -> Behavior:
    eta = _check_unit("eta", eta)
    e2 = eta * eta
    return Behavior(
        b.m,
        [[e2 * p for p in row] for row in b.joint],
        [eta * p for p in b.marg_a],
        [eta * p for p in b.marg_b],
    )


def noisy_behavior(rs: RaySet, kind: str, value) -> Behavior:
    return NoiseModel(kind, value).apply(ideal_behavior(rs), rs.dim)


def mix(behaviors: Sequence[Behavior], weights: Sequence[Fraction]) -> Behavior:
    m = behaviors[0].m
    w = [Fraction(x) for x in weights]
    joint = [[sum((wi * b.joint[x][y] for wi, b in zip(w, behaviors)), Fraction(0)) for y in range(m)]
             for x in range(m)]
    ma = [sum((wi * b.marg_a[x] for wi, b in zip(w, behaviors)), Fraction(0)) for x in range(m)]
    mb = [sum((wi * b.marg_b[y] for wi, b in zip(w, behaviors)), Fraction(0)) for y in range(m)]
    return Behavior(m, joint, ma, mb)


def behavior_from_coordinates(coords: Sequence[Fraction], m: int) -> Behavior:
    joint = [list(coords[x * m:(x + 1) * m]) for x in range(m)]
    return Behavior(m, joint, coords[m * m:m * m + m], coords[m * m + m:])


# --------------------------------------------------------------------------- #
# Outcome-resolved table  P[a, b, x, y]  <->  Collins-Gisin vector

def cg_to_full(cg: np.ndarray, m: int) -> np.ndarray:
    cg = np.asarray(cg, dtype=float)
    p11 = cg[: m * m].reshape(m, m)
    pa = cg[m * m: m * m + m][:, None]
    pb = cg[m * m + m:][None, :]
    P = np.empty((2, 2, m, m))
    P[1, 1] = p11
    P[1, 0] = pa - p11
    P[0, 1] = pb - p11
    P[0, 0] = 1 - pa - pb + p11
    return P


def full_to_cg(P: np.ndarray) -> np.ndarray:
    m = P.shape[-1]
    p11 = P[1, 1]
    pa = (P[1, 0] + P[1, 1]).mean(axis=1)
    pb = (P[0, 1] + P[1, 1]).mean(axis=0)
    return np.concatenate([p11.reshape(-1), pa, pb])
