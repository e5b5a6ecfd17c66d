import numpy as np
import pytest

from fakewake.embedding import embedding_table
from fakewake.errors import AllSpaces, InvalidCombination, LengthMismatch
from fakewake.genome import (ChineseGenome, EnglishGenome, VariationConfig,
                             crossover, decode_chinese, decode_english,
                             decode_text, encode_chinese, encode_english,
                             english_genome_length, mutate, random_genome,
                             repair_chinese, seed_genomes)
from fakewake.pinyin import parse_pinyin, render_word, unit_tables

T = unit_tables()
CFG = VariationConfig()


def test_decode_chinese_baidu():
    word = parse_pinyin("xiǎo dù xiǎo dù")
    genome = encode_chinese(word)
    assert len(genome) == 12
    assert render_word(decode_chinese(genome)) == "xiǎo dù xiǎo dù"


def test_chinese_roundtrip_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        g = random_genome(ChineseGenome, 12, rng)
        assert encode_chinese(decode_chinese(g)) == g


def test_decode_chinese_invalid_pair():
    bad = list(encode_chinese(parse_pinyin("xiǎo")))
    bad[1] = T.final_index["ang"]          # x + ang is unpronounceable
    with pytest.raises(InvalidCombination):
        decode_chinese(ChineseGenome(bad))


def test_decode_english_trims_and_collapses():
    g = encode_english("alexa", 7)
    assert decode_english(g).symbols == "alexa"
    spaced = EnglishGenome([27, 8, 5, 25, 27, 27, 19, 9, 18, 9, 27, 27])
    assert decode_english(spaced).symbols == "hey siri"


def test_decode_english_all_spaces():
    with pytest.raises(AllSpaces):
        decode_english(EnglishGenome([27] * 7))
    assert decode_text(EnglishGenome([27] * 7)) == ""


def test_english_genome_length_ratio():
    assert english_genome_length("alexa") == 7
    assert english_genome_length("hey google") == 15


def test_genome_range_validation():
    with pytest.raises(ValueError):
        EnglishGenome([0, 1, 2])
    with pytest.raises(ValueError):
        ChineseGenome([24, 1, 1])
    with pytest.raises(ValueError):
        ChineseGenome([1, 1])


def test_mutate_rate_zero_identity():
    rng = np.random.default_rng(0)
    g = encode_english("alexa", 7)
    assert mutate(g, VariationConfig(mutation_rate=0.0), rng) == g


def test_mutate_deterministic():
    g = encode_english("alexa", 7)
    a = mutate(g, CFG, np.random.default_rng(42))
    b = mutate(g, CFG, np.random.default_rng(42))
    assert a == b


def test_mutate_chinese_stays_valid():
    rng = np.random.default_rng(9)
    g = encode_chinese(parse_pinyin("xiǎo dù xiǎo dù"))
    for _ in range(50):
        g = mutate(g, VariationConfig(mutation_rate=1.0), rng)
        decode_chinese(g)   # raises if any pair invalid


def test_crossover_produces_known_recombinations():
    g1 = encode_english("alexa")
    g2 = encode_english("olive")
    children = set()
    for seed in range(40):
        c1, c2 = crossover(g1, g2, CFG, np.random.default_rng(seed))
        children.add(decode_english(c1).symbols)
        children.add(decode_english(c2).symbols)
        # per-position gene multisets preserved
        for i in range(len(g1)):
            assert {c1[i], c2[i]} == {g1[i], g2[i]}
    assert "alive" in children and "olexa" in children


def test_crossover_self_identity():
    g = encode_english("alexa")
    c1, c2 = crossover(g, g, CFG, np.random.default_rng(1))
    assert c1 == g and c2 == g


def test_crossover_length_mismatch():
    with pytest.raises(LengthMismatch):
        crossover(encode_english("ab"), encode_english("abc"), CFG,
                  np.random.default_rng(0))


def test_repair_valid_unchanged():
    g = encode_chinese(parse_pinyin("xiǎo dù xiǎo dù"))
    assert repair_chinese(g) == g


def test_repair_nearest_final_from_embedding():
    x = T.initial_index["x"]
    ang = T.final_index["ang"]
    genome = ChineseGenome([x, ang, 1, x, ang, 1, x, ang, 1, x, ang, 1])
    repaired = repair_chinese(genome)
    emb = embedding_table()
    target = emb.final_vec(ang)
    candidates = T.finals_for_initial[x]
    gaps = [float(np.linalg.norm(emb.final_vec(f) - target)) for f in candidates]
    expected = candidates[int(np.argmin(gaps))]
    assert repaired[1] == expected
    assert repair_chinese(repaired) == repaired   # idempotent
    decode_chinese(repaired)


def test_seed_genomes_partition():
    wake = encode_english("alexa", 7)
    rng = np.random.default_rng(7)
    pop = seed_genomes(wake, 3, CFG, rng)
    assert len(pop) == 3
    assert pop[0] == wake
    # second member: a perturbation within two genes
    assert sum(a != b for a, b in zip(pop[1], wake)) <= 2


def test_seed_genomes_perturbation_budget():
    wake = encode_chinese(parse_pinyin("xiǎo dù xiǎo dù"))
    rng = np.random.default_rng(3)
    pop = seed_genomes(wake, 21, CFG, rng)
    n_perturbed = 10   # ceil((21 - 1) / 2)
    for member in pop[1:1 + n_perturbed]:
        assert sum(a != b for a, b in zip(member, wake)) <= 2
        decode_chinese(member)


def test_seed_genomes_deterministic():
    wake = encode_english("alexa", 7)
    a = seed_genomes(wake, 12, CFG, np.random.default_rng(5))
    b = seed_genomes(wake, 12, CFG, np.random.default_rng(5))
    assert a == b


def test_seed_genomes_minimum():
    with pytest.raises(ValueError):
        seed_genomes(encode_english("alexa", 7), 2, CFG,
                     np.random.default_rng(0))
