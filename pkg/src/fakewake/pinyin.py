"""Mandarin syllable machinery: unit inventories, parsing, validation.

A syllable is an (initial, final, tone) triple over the shipped inventories:
24 initial values (index 0 is the zero initial ``-``), 37 finals in
lexicographic order, and tones 1-4. The written forms treat ``y``/``w`` as
initials and use ``v`` for ``ü``.
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from functools import lru_cache

from .dataio import read_tsv
from .errors import InvalidCombination, UnknownSyllable

ZERO_INITIAL = "-"

_TONE_MARKS = {
    "̄": 1,  # macron
    "́": 2,  # acute
    "̌": 3,  # caron
    "̀": 4,  # grave
}


@dataclass(frozen=True)
class Syllable:
    """One character's pronunciation as inventory indices."""

    initial: int
    final: int
    tone: int

    def __post_init__(self):
        table = unit_tables()
        if self.initial not in table.initial_by_index:
            raise UnknownSyllable(f"initial index out of range: {self.initial}")
        if self.final not in table.final_by_index:
            raise UnknownSyllable(f"final index out of range: {self.final}")
        if self.tone not in (1, 2, 3, 4):
            raise UnknownSyllable(f"tone out of range: {self.tone}")
        if not is_valid_pair(self.initial, self.final):
            raise InvalidCombination(
                f"unpronounceable syllable: "
                f"{table.initial_by_index[self.initial]}+{table.final_by_index[self.final]}"
            )


@dataclass(frozen=True)
class ChineseWord:
    syllables: tuple[Syllable, ...]

    def __post_init__(self):
        if not self.syllables:
            raise UnknownSyllable("a Chinese word needs at least one syllable")

    def __len__(self) -> int:
        return len(self.syllables)


class UnitTables:
    """Index <-> symbol maps for initials and finals plus the validity set."""

    def __init__(self):
        initials: dict[int, str] = {}
        finals: dict[int, str] = {}
        for kind, idx, sym in read_tsv("pinyin_units.tsv"):
            if kind == "initial":
                initials[int(idx)] = sym
            elif kind == "final":
                finals[int(idx)] = sym
        self.initial_by_index = initials
        self.final_by_index = finals
        self.initial_index = {s: i for i, s in initials.items()}
        self.final_index = {s: i for i, s in finals.items()}
        self.valid_pairs = frozenset(
            (self.initial_index[ini], self.final_index[fin])
            for ini, fin in read_tsv("pinyin_validity.tsv")
        )
        # valid finals per initial, ascending index (repair tie-break order)
        self.finals_for_initial: dict[int, tuple[int, ...]] = {}
        for i in initials:
            self.finals_for_initial[i] = tuple(
                sorted(f for (ini, f) in self.valid_pairs if ini == i)
            )


@lru_cache(maxsize=None)
def unit_tables() -> UnitTables:
    return UnitTables()


def validate_syllable(initial: int, final: int) -> bool:
    """True iff the (initial, final) pair is in the shipped validity table."""
    table = unit_tables()
    if initial not in table.initial_by_index or final not in table.final_by_index:
        raise UnknownSyllable(f"unit index out of range: ({initial}, {final})")
    return (initial, final) in table.valid_pairs


def is_valid_pair(initial: int, final: int) -> bool:
    return (initial, final) in unit_tables().valid_pairs


def _strip_tone(syllable: str) -> tuple[str, int | None]:
    """Remove the tone diacritic or trailing digit; return (base, tone)."""
    digit = None
    if syllable and syllable[-1] in "1234":
        digit = int(syllable[-1])
        syllable = syllable[:-1]
    tone = None
    base = []
    for ch in unicodedata.normalize("NFD", syllable):
        if ch in _TONE_MARKS:
            if tone is not None:
                raise UnknownSyllable(f"two tone marks in {syllable!r}")
            tone = _TONE_MARKS[ch]
        elif ch == "̈":  # diaeresis: ü -> v
            if not base or base[-1] != "u":
                raise UnknownSyllable(f"stray diaeresis in {syllable!r}")
            base[-1] = "v"
        else:
            base.append(ch)
    if digit is not None and tone is not None:
        raise UnknownSyllable(f"both digit and diacritic tone in {syllable!r}")
    return "".join(base), digit if digit is not None else tone


def _split_units(base: str) -> tuple[int, int]:
    """Decompose a toneless syllable into (initial index, final index)."""
    table = unit_tables()
    candidates = []
    if len(base) > 2 and base[:2] in table.initial_index:
        candidates.append((base[:2], base[2:]))
    if len(base) > 1 and base[:1] in table.initial_index:
        candidates.append((base[:1], base[1:]))
    candidates.append((ZERO_INITIAL, base))
    for ini, rest in candidates:
        if rest in table.final_index:
            return table.initial_index[ini], table.final_index[rest]
    raise UnknownSyllable(f"cannot decompose syllable {base!r}")


def parse_syllable(text: str) -> Syllable:
    base, tone = _strip_tone(text.strip().lower())
    if tone is None:
        raise UnknownSyllable(f"no tone mark on {text!r}")
    if not base:
        raise UnknownSyllable("empty syllable")
    initial, final = _split_units(base)
    if not is_valid_pair(initial, final):
        raise InvalidCombination(f"unpronounceable syllable: {text!r}")
    return Syllable(initial, final, tone)


def parse_pinyin(text: str) -> ChineseWord:
    """Parse whitespace-separated tone-marked pinyin into a word."""
    parts = text.split()
    if not parts:
        raise UnknownSyllable("empty pinyin text")
    return ChineseWord(tuple(parse_syllable(p) for p in parts))


# Tone mark goes on a/e if present, on the o of "ou", else on the last vowel.
_MARKS = {1: "̄", 2: "́", 3: "̌", 4: "̀"}


def _mark_tone(base: str, tone: int) -> str:
    pos = None
    for target in ("a", "e"):
        if target in base:
            pos = base.index(target)
            break
    if pos is None and "ou" in base:
        pos = base.index("o")
    if pos is None:
        for i in range(len(base) - 1, -1, -1):
            if base[i] in "aeiouü":
                pos = i
                break
    if pos is None:
        return base
    marked = base[:pos + 1] + _MARKS[tone] + base[pos + 1:]
    return unicodedata.normalize("NFC", marked)


def render_syllable(s: Syllable) -> str:
    table = unit_tables()
    ini = table.initial_by_index[s.initial]
    base = ("" if ini == ZERO_INITIAL else ini) + table.final_by_index[s.final]
    return _mark_tone(base.replace("v", "ü"), s.tone)


def render_word(word: ChineseWord) -> str:
    return " ".join(render_syllable(s) for s in word.syllables)
