"""
Sampler
Uniform random s-subsets of [n] in O(s) words with the replacement-pointer
technique: a virtual Fisher-Yates shuffle in which every sampled number x
that still lies inside the shrinking range [n-k+1] remembers which unsampled
number stands in for it.
"""

import bisect
import logging
from dataclasses import dataclass
from typing import Any, Dict, Hashable, List, Optional, Sequence

import numpy as np

from tools.workspace_harness import INDEX_WORDS, CwGeomError, WorkspaceBudget

logger = logging.getLogger(__name__)


class TooManySamples(CwGeomError):
    """Requested per-vertex samples do not fit the workspace."""


class Rng:
    """
    Seeded PCG64 stream

    Args:
        seed: 64-bit seed; None draws one from OS entropy (kept in `seed`)
    """

    def __init__(self, seed: Optional[int] = None):
        if seed is None:
            seed = int(np.random.SeedSequence().entropy) & ((1 << 64) - 1)
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, m: int) -> int:
        """Uniform integer in [1, m]; numpy draws bounded integers without modulo bias."""
        if m < 1:
            raise ValueError("uniform needs m >= 1")
        return int(self.generator.integers(1, m + 1))


class ReplacementTree:
    """
    Sampled numbers I in an ordered map, plus replacements rho_x for the
    sampled x still inside [n-k+1].
    """

    def __init__(self, n: int, budget: Optional[WorkspaceBudget] = None):
        self.n = n
        self.k = 1
        self.sampled: List[int] = []
        self.order: List[int] = []
        self.replacement: Dict[int, int] = {}
        self._grant = budget.alloc(INDEX_WORDS, "replacement tree") if budget else None

    def __contains__(self, x: int) -> bool:
        i = bisect.bisect_left(self.sampled, x)
        return i < len(self.sampled) and self.sampled[i] == x

    def _charge(self, words: int) -> None:
        if self._grant is not None:
            self._grant.grow(words)

    def draw(self, rng: Rng) -> int:
        """One round: add a uniform element of [n] \\ I and return it."""
        top = self.n - self.k + 1
        if top < 1:
            raise ValueError("every number has been sampled")
        x = rng.uniform(top)
        chosen = self.replacement[x] if x in self else x
        bisect.insort(self.sampled, chosen)
        self.order.append(chosen)
        self._charge(2 * INDEX_WORDS)

        if x == top:
            if self.replacement.pop(x, None) is not None:
                self._charge(-INDEX_WORDS)
        else:
            if top in self:
                new_rho = self.replacement.pop(top)
                self._charge(-INDEX_WORDS)
            else:
                new_rho = top
            if x not in self.replacement:
                self._charge(INDEX_WORDS)
            self.replacement[x] = new_rho
        self.k += 1
        return chosen

    def invariant_holds(self) -> bool:
        """Materialise both sides of the replacement invariant (debug aid)."""
        top = self.n - self.k + 1
        sampled = set(self.sampled)
        inside = {x for x in sampled if x <= top}
        if set(self.replacement) != inside:
            return False
        rhos = list(self.replacement.values())
        if len(set(rhos)) != len(rhos):
            return False
        if any(r in sampled or r <= top for r in rhos):
            return False
        rest = set(range(1, self.n + 1)) - sampled
        return rest == ({x for x in range(1, top + 1)} - sampled) | set(rhos)

    def release(self) -> None:
        if self._grant is not None:
            self._grant.release()


def sample_distinct(n: int, s: int, rng: Rng,
                    budget: Optional[WorkspaceBudget] = None,
                    check_invariant: bool = False) -> List[int]:
    """
    Uniform random sequence of s distinct numbers from [n]

    Args:
        n: Population size
        s: Sample size, 1 <= s <= n
        rng: Random stream
        budget: Charged with the tree while it lives
        check_invariant: Verify the replacement invariant after every round

    Returns:
        The sequence I in draw order (1-based numbers)
    """
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    tree = ReplacementTree(n, budget)
    try:
        for _ in range(s):
            tree.draw(rng)
            if check_invariant and not tree.invariant_holds():
                raise AssertionError(f"replacement invariant broken in round {tree.k - 1}")
        return list(tree.order)
    finally:
        tree.release()


@dataclass(frozen=True)
class SampleSpec:
    """Request for `count` distinct members of a population of size `population`."""

    vertex: Hashable
    population: int
    count: int


def sample_many(specs: Sequence[SampleSpec], rng: Rng, limit: Optional[int] = None,
                budget: Optional[WorkspaceBudget] = None) -> Dict[Any, List[int]]:
    """
    Independent uniform index sequences for several vertices at once

    Counts above a population are clamped to it.

    Raises:
        TooManySamples: the clamped counts add up to more than `limit`
    """
    clamped = [(spec.vertex, spec.population, min(spec.count, spec.population))
               for spec in specs]
    total = sum(count for _, _, count in clamped)
    if limit is not None and total > limit:
        raise TooManySamples(f"{total} samples requested, room for {limit}")
    result: Dict[Any, List[int]] = {}
    for vertex, population, count in clamped:
        if count <= 0:
            result[vertex] = []
            continue
        result[vertex] = sample_distinct(population, count, rng, budget)
    logger.debug("sampled %d indices for %d vertices", total, len(clamped))
    return result
