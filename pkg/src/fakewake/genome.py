"""Integer-vector word encodings and the variation operators.

Chinese genomes hold (initial, final, tone) triples per character; English
genomes hold one value per letter slot with 27 meaning space. All operators
are pure functions of their inputs and the supplied RNG stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embedding import embedding_table
from .errors import AllSpaces, LengthMismatch
from .phonemes import LetterWord
from .pinyin import ChineseWord, Syllable, is_valid_pair, unit_tables

N_INITIALS = 24   # index 0 is the zero initial
N_FINALS = 37
N_TONES = 4
N_LETTERS = 27    # 1..26 -> a..z, 27 -> space

LENGTH_RATIO = 1.5


@dataclass(frozen=True)
class VariationConfig:
    mutation_rate: float = 0.1
    crossover_rate: float = 0.9

    def __post_init__(self):
        if not 0 <= self.mutation_rate <= 1:
            raise ValueError("mutation_rate must be in [0, 1]")
        if not 0 <= self.crossover_rate <= 1:
            raise ValueError("crossover_rate must be in [0, 1]")


class ChineseGenome(tuple):
    """3n genes: per character initial 0..23, final 1..37, tone 1..4."""

    language = "zh"

    def __new__(cls, genes):
        genes = tuple(int(g) for g in genes)
        if not genes or len(genes) % 3:
            raise ValueError("Chinese genome length must be a positive multiple of 3")
        for ini, fin, tone in _triples(genes):
            if not 0 <= ini < N_INITIALS:
                raise ValueError(f"initial gene out of range: {ini}")
            if not 1 <= fin <= N_FINALS:
                raise ValueError(f"final gene out of range: {fin}")
            if not 1 <= tone <= N_TONES:
                raise ValueError(f"tone gene out of range: {tone}")
        return super().__new__(cls, genes)

    def gene_range(self, position: int) -> tuple[int, int]:
        kind = position % 3
        if kind == 0:
            return 0, N_INITIALS - 1
        if kind == 1:
            return 1, N_FINALS
        return 1, N_TONES


class EnglishGenome(tuple):
    """L genes, each in 1..27."""

    language = "en"

    def __new__(cls, genes):
        genes = tuple(int(g) for g in genes)
        if not genes:
            raise ValueError("English genome must be nonempty")
        for g in genes:
            if not 1 <= g <= N_LETTERS:
                raise ValueError(f"letter gene out of range: {g}")
        return super().__new__(cls, genes)

    def gene_range(self, position: int) -> tuple[int, int]:
        return 1, N_LETTERS


Genome = ChineseGenome | EnglishGenome


def _triples(genes):
    return ((genes[i], genes[i + 1], genes[i + 2]) for i in range(0, len(genes), 3))


def decode_chinese(g: ChineseGenome) -> ChineseWord:
    return ChineseWord(tuple(Syllable(ini, fin, tone) for ini, fin, tone in _triples(g)))


def encode_chinese(word: ChineseWord) -> ChineseGenome:
    genes = []
    for s in word.syllables:
        genes.extend((s.initial, s.final, s.tone))
    return ChineseGenome(genes)


def decode_english(g: EnglishGenome) -> LetterWord:
    chars = "".join(" " if v == N_LETTERS else chr(ord("a") + v - 1) for v in g)
    text = " ".join(chars.split())
    if not text:
        raise AllSpaces("genome decodes to spaces only")
    return LetterWord(text)


def encode_english(text: str, length: int | None = None) -> EnglishGenome:
    """Letters to genes, right-padded with spaces to ``length`` when given."""
    if length is None:
        length = len(text)
    if len(text) > length:
        raise LengthMismatch(f"{text!r} longer than genome length {length}")
    genes = [N_LETTERS if c == " " else ord(c) - ord("a") + 1 for c in text]
    genes.extend([N_LETTERS] * (length - len(text)))
    return EnglishGenome(genes)


def english_genome_length(wake_word: str, ratio: float = LENGTH_RATIO) -> int:
    return math.floor(ratio * len(wake_word))


def decode_text(genome: "Genome") -> str:
    """Word text for any genome; empty string for space-only English ones."""
    from .pinyin import render_word

    if isinstance(genome, ChineseGenome):
        return render_word(decode_chinese(genome))
    try:
        return decode_english(genome).symbols
    except AllSpaces:
        return ""


def repair_chinese(g: ChineseGenome) -> ChineseGenome:
    """Replace each invalid final with the valid final (for that initial)
    whose embedding is nearest; ties break to the lowest final index."""
    table = unit_tables()
    emb = embedding_table()
    genes = list(g)
    for i in range(0, len(genes), 3):
        ini, fin = genes[i], genes[i + 1]
        if is_valid_pair(ini, fin):
            continue
        best, best_dist = None, None
        target = emb.final_vec(fin)
        for cand in table.finals_for_initial[ini]:
            d = float(np.linalg.norm(emb.final_vec(cand) - target))
            if best is None or d < best_dist:
                best, best_dist = cand, d
        genes[i + 1] = best
    return ChineseGenome(genes)


def _repaired(genome: Genome) -> Genome:
    return repair_chinese(genome) if isinstance(genome, ChineseGenome) else genome


def mutate(g: Genome, cfg: VariationConfig, rng: np.random.Generator) -> Genome:
    """Resample each gene uniformly from its range with the configured
    probability; Chinese results are repaired."""
    flips = rng.random(len(g)) < cfg.mutation_rate
    genes = list(g)
    for i, flip in enumerate(flips):
        if flip:
            lo, hi = g.gene_range(i)
            genes[i] = int(rng.integers(lo, hi + 1))
    return _repaired(type(g)(genes))


def crossover(g1: Genome, g2: Genome, cfg: VariationConfig,
              rng: np.random.Generator) -> tuple[Genome, Genome]:
    """Single-point crossover at a uniform cut in 1..len-1."""
    if len(g1) != len(g2) or type(g1) is not type(g2):
        raise LengthMismatch("crossover operands must match in type and length")
    if len(g1) == 1:
        return _repaired(g1), _repaired(g2)
    cut = int(rng.integers(1, len(g1)))
    c1 = type(g1)(g1[:cut] + g2[cut:])
    c2 = type(g1)(g2[:cut] + g1[cut:])
    return _repaired(c1), _repaired(c2)


def random_genome(kind: type, length: int, rng: np.random.Generator) -> Genome:
    if kind is ChineseGenome:
        genes = []
        for i in range(length):
            lo, hi = (0, N_INITIALS - 1) if i % 3 == 0 else \
                     (1, N_FINALS) if i % 3 == 1 else (1, N_TONES)
            genes.append(int(rng.integers(lo, hi + 1)))
        return repair_chinese(ChineseGenome(genes))
    return EnglishGenome(rng.integers(1, N_LETTERS + 1, size=length))


def seed_genomes(wake_word: Genome, count: int, cfg: VariationConfig,
                 rng: np.random.Generator) -> list[Genome]:
    """Initial population: the wake word, near perturbations of it, and
    uniform random individuals."""
    if count < 3:
        raise ValueError("population needs at least 3 individuals")
    population = [_repaired(wake_word)]
    n_perturbed = math.ceil((count - 1) / 2)
    for _ in range(n_perturbed):
        # Re-draw rather than repair so perturbations stay within two genes
        # of the wake word.
        for _attempt in range(100):
            genes = list(wake_word)
            n_changes = int(rng.integers(1, 3))
            positions = rng.choice(len(genes), size=min(n_changes, len(genes)),
                                   replace=False)
            for pos in positions:
                lo, hi = wake_word.gene_range(int(pos))
                genes[int(pos)] = int(rng.integers(lo, hi + 1))
            candidate = type(wake_word)(genes)
            if candidate == _repaired(candidate):
                break
        population.append(_repaired(candidate))
    while len(population) < count:
        population.append(random_genome(type(wake_word), len(wake_word), rng))
    return population
