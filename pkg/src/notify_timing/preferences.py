"""Synthetic shift-preference distributions.

Six kinds are available:

``fixed``
    Every employee ranks shifts 1..L.
``undesirable``
    Ranked order with ``num_disliked`` shifts moved to the tail, relative
    order kept. The disliked set depends only on (seed, employee), so it is
    the same in every simulation.
``grouped``
    Shifts split into halves 1..L/2 and L/2+1..L; each employee prefers one
    half with probability 1/2; ascending order inside each half.
``perturbed``
    Random-key sort with key(l) = l + U{-window..window}, ties by shift id.
``perturbed_undesirable``
    Perturbed order, then the employee's disliked shifts moved to the tail.
``uniform``
    Uniform random permutation per employee.

Draws that vary between simulations are keyed by ``(seed, draw)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import InvalidInstanceError, PreferenceProfile

__all__ = ["KINDS", "PreferenceSpec", "generate", "disliked_shifts", "move_to_tail"]

KINDS = ("fixed", "undesirable", "grouped", "perturbed", "perturbed_undesirable", "uniform")

_DISLIKE_STREAM = 1
_DRAW_STREAM = 2


@dataclass(frozen=True)
class PreferenceSpec:
    """Which distribution to draw preferences from."""

    kind: str = "fixed"
    seed: int = 0
    num_disliked: int = 5
    window: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown preference kind {self.kind!r}; expected one of {KINDS}")
        if self.num_disliked < 0:
            raise ValueError("num_disliked must be nonnegative")
        if self.window < 0:
            raise ValueError("window must be nonnegative")

    @property
    def identical(self) -> bool:
        return self.kind == "fixed"


def disliked_shifts(seed: int, employee: int, num_shifts: int, count: int) -> list[int]:
    """The ``count`` shifts (1-based) employee ``employee`` (1-based) dislikes."""
    rng = np.random.default_rng([seed, _DISLIKE_STREAM, employee])
    return sorted(int(x) + 1 for x in rng.choice(num_shifts, size=count, replace=False))


def move_to_tail(order: list[int], disliked: list[int]) -> list[int]:
    """Move ``disliked`` shifts to the end, keeping relative order on both sides."""
    bad = set(disliked)
    return [l for l in order if l not in bad] + [l for l in order if l in bad]


def _perturbed(rng: np.random.Generator, L: int, window: int) -> list[int]:
    ids = np.arange(1, L + 1)
    keys = ids + rng.integers(-window, window + 1, size=L)
    # lexsort uses the last key as primary
    return [int(x) for x in ids[np.lexsort((ids, keys))]]


def generate(spec: PreferenceSpec, num_employees: int, num_shifts: int, draw: int = 0) -> PreferenceProfile:
    """Draw a profile for ``num_employees`` employees over ``num_shifts`` shifts.

    Parameters
    ----------
    spec : PreferenceSpec
    num_employees, num_shifts : int
    draw : int
        Simulation index; varies the random part while keeping disliked sets.
    """
    M, L = num_employees, num_shifts
    kind = spec.kind
    if kind in ("undesirable", "perturbed_undesirable") and spec.num_disliked >= L:
        raise InvalidInstanceError(f"num_disliked={spec.num_disliked} must be below L={L}")
    if kind == "grouped" and L % 2:
        raise InvalidInstanceError("grouped preferences need an even number of shifts")
    base = list(range(1, L + 1))
    rng = np.random.default_rng([spec.seed, _DRAW_STREAM, draw])
    rows = []
    if kind == "fixed":
        rows = [tuple(base)] * M
    elif kind == "undesirable":
        for i in range(M):
            rows.append(tuple(move_to_tail(base, disliked_shifts(spec.seed, i + 1, L, spec.num_disliked))))
    elif kind == "grouped":
        half = L // 2
        first, second = base[:half], base[half:]
        picks = rng.random(M) < 0.5
        rows = [tuple(first + second) if p else tuple(second + first) for p in picks]
    elif kind == "perturbed":
        rows = [tuple(_perturbed(rng, L, spec.window)) for _ in range(M)]
    elif kind == "perturbed_undesirable":
        for i in range(M):
            order = _perturbed(rng, L, spec.window)
            rows.append(tuple(move_to_tail(order, disliked_shifts(spec.seed, i + 1, L, spec.num_disliked))))
    else:
        rows = [tuple(int(x) + 1 for x in rng.permutation(L)) for _ in range(M)]
    return PreferenceProfile(tuple(rows))
