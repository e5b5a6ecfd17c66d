"""The two dissimilarity objectives.

Chinese: mean of tanh-normalized per-character embedding distances, bounded
in [0,1). English: minimum-cost alignment of phoneme sequences where
deletions and insertions cost 1 and substituting p for q costs twice their
phoneme distance, normalized by the combined length; bounded in [0,1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .embedding import character_distance
from .errors import BothEmpty, LengthMismatch
from .phonemes import BOUNDARY, PhonemeSequence, phoneme_distance
from .pinyin import ChineseWord


@dataclass(frozen=True)
class DistanceConfig:
    normalizer: float = 100.0      # divisor inside tanh for Chinese characters
    space_cost: float = 1.0        # boundary-vs-phoneme substitution base cost
    tone_penalty: float = 1.0      # flat character-distance charge per tone mismatch

    def __post_init__(self):
        if self.normalizer <= 0:
            raise ValueError("normalizer must be positive")
        if not 0 < self.space_cost <= 1:
            raise ValueError("space_cost must be in (0, 1]")


def chinese_dist(w1: ChineseWord, w2: ChineseWord,
                 cfg: DistanceConfig = DistanceConfig()) -> float:
    if len(w1) != len(w2):
        raise LengthMismatch(f"{len(w1)} vs {len(w2)} characters")
    total = 0.0
    for a, b in zip(w1.syllables, w2.syllables):
        total += math.tanh(character_distance(a, b, cfg.tone_penalty) / cfg.normalizer)
    return total / len(w1)


def _unit_dist(a: str, b: str, space_cost: float) -> float:
    if a == b:
        return 0.0
    if a == BOUNDARY or b == BOUNDARY:
        return space_cost
    return phoneme_distance(a, b)


def english_dist(w1: PhonemeSequence, w2: PhonemeSequence,
                 cfg: DistanceConfig = DistanceConfig()) -> float:
    """Minimum (deletions + insertions + 2 * substitution distances) / (m+n)."""
    m, n = len(w1), len(w2)
    if m + n == 0:
        raise BothEmpty("cannot compare two empty sequences")
    prev = [float(j) for j in range(n + 1)]
    for i in range(1, m + 1):
        cur = [float(i)] + [0.0] * n
        for j in range(1, n + 1):
            sub = prev[j - 1] + 2.0 * _unit_dist(w1[i - 1], w2[j - 1], cfg.space_cost)
            cur[j] = min(sub, prev[j] + 1.0, cur[j - 1] + 1.0)
        prev = cur
    return prev[n] / (m + n)


def levenshtein_dist(s1, s2) -> float:
    """Plain uniform-cost edit distance over symbols, normalized by m+n.

    Baseline for the separation report; substitution costs 2 so the value is
    comparable with the phoneme-weighted objective.
    """
    m, n = len(s1), len(s2)
    if m + n == 0:
        raise BothEmpty("cannot compare two empty sequences")
    prev = list(range(n + 1))
    for i in range(1, m + 1):
        cur = [i] + [0] * n
        for j in range(1, n + 1):
            sub = prev[j - 1] + (0 if s1[i - 1] == s2[j - 1] else 2)
            cur[j] = min(sub, prev[j] + 1, cur[j - 1] + 1)
        prev = cur
    return prev[n] / (m + n)
