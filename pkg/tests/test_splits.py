import pytest

from orthogate.corpus import (
    DiagnosisLabel,
    LanguageTag,
    SplitError,
    largest_remainder,
    load_split,
    make_controlled_split,
    make_natural_split,
    save_split,
)
from tests.conftest import LABELS, LANGS, make_cell_corpus, make_record


def ids(records):
    return {r.id for r in records}


def cell_counts(records):
    counts = {}
    for r in records:
        counts[(r.language, r.label)] = counts.get((r.language, r.label), 0) + 1
    return counts


def test_largest_remainder_exact():
    assert largest_remainder(10, (0.8, 0.1, 0.1)) == [8, 1, 1]
    assert largest_remainder(5, (0.8, 0.1, 0.1)) == [4, 1, 0]
    assert sum(largest_remainder(7, (0.6, 0.25, 0.15))) == 7


def test_controlled_split_counts_full_scale():
    # 1,000 per (language, label) cell -> 18,000 selected records
    records = make_cell_corpus(1050)
    split = make_controlled_split(records, per_class=1000, seed=3)
    total = len(split.train) + len(split.validation) + len(split.test)
    assert total == 18_000
    selected = cell_counts(split.train + split.validation + split.test)
    assert all(selected[(lang, label)] == 1000 for lang in LANGS for label in LABELS)


def test_controlled_split_partitions_disjoint_and_union():
    records = make_cell_corpus(12)
    split = make_controlled_split(records, per_class=10, seed=1)
    train, val, test = ids(split.train), ids(split.validation), ids(split.test)
    assert not (train & val) and not (train & test) and not (val & test)
    assert len(train | val | test) == 10 * 18


def test_controlled_split_insufficient_cell_is_named():
    records = make_cell_corpus(5)
    records = [r for r in records if not (r.language == LanguageTag.HI and r.label == DiagnosisLabel.BONE)]
    records += [make_record(9000 + i, LanguageTag.HI, DiagnosisLabel.BONE) for i in range(4)]
    with pytest.raises(SplitError) as err:
        make_controlled_split(records, per_class=5, seed=0)
    assert "(HI, bone)" in str(err.value)
    assert "short 1" in str(err.value)


def test_controlled_split_seed_stable():
    records = make_cell_corpus(8)
    a = make_controlled_split(records, per_class=6, seed=42)
    b = make_controlled_split(records, per_class=6, seed=42)
    assert [r.id for r in a.train] == [r.id for r in b.train]
    assert [r.id for r in a.validation] == [r.id for r in b.validation]
    assert [r.id for r in a.test] == [r.id for r in b.test]
    c = make_controlled_split(records, per_class=6, seed=43)
    assert [r.id for r in a.train] != [r.id for r in c.train]


def test_natural_split_ratio_arithmetic():
    # cell sizes 60/30/10 at ratios (0.8, 0.1, 0.1) -> train sizes 48/24/8
    records = []
    sizes = {DiagnosisLabel.SPINAL: 60, DiagnosisLabel.HIP: 30, DiagnosisLabel.OTHER: 10}
    i = 0
    for lang in LANGS:
        for label in LABELS:
            for _ in range(sizes.get(label, 20)):
                records.append(make_record(i, lang, label))
                i += 1
    split = make_natural_split(records, ratios=(0.8, 0.1, 0.1), seed=7)
    train_counts = cell_counts(split.train)
    for lang in LANGS:
        assert train_counts[(lang, DiagnosisLabel.SPINAL)] == 48
        assert train_counts[(lang, DiagnosisLabel.HIP)] == 24
        assert train_counts[(lang, DiagnosisLabel.OTHER)] == 8


def test_natural_split_partition_property():
    records = make_cell_corpus(9)
    split = make_natural_split(records, ratios=(0.5, 0.25, 0.25), seed=0)
    train, val, test = ids(split.train), ids(split.validation), ids(split.test)
    assert not (train & val) and not (train & test) and not (val & test)
    assert (train | val | test) == ids(records)


def test_natural_split_prevalence_recount():
    # per-partition cell share stays within one record of the exact quota
    records = []
    i = 0
    prevalence = [40, 25, 15, 10, 6, 4]
    for lang in LANGS:
        for label, n in zip(LABELS, prevalence):
            for _ in range(n):
                records.append(make_record(i, lang, label))
                i += 1
    ratios = (0.8, 0.1, 0.1)
    split = make_natural_split(records, ratios=ratios, seed=5)
    source_counts = cell_counts(records)
    for part, ratio in zip((split.train, split.validation, split.test), ratios):
        counts = cell_counts(part)
        for cell, n in source_counts.items():
            assert abs(counts.get(cell, 0) - n * ratio) <= 1.0


def test_natural_split_empty_cell_is_named():
    records = [r for r in make_cell_corpus(3) if not (r.language == LanguageTag.PA and r.label == DiagnosisLabel.UNKNOWN)]
    with pytest.raises(SplitError) as err:
        make_natural_split(records, ratios=(0.8, 0.1, 0.1), seed=0)
    assert "(PA, unknown)" in str(err.value)


def test_natural_split_rejects_bad_ratios():
    records = make_cell_corpus(3)
    with pytest.raises(SplitError):
        make_natural_split(records, ratios=(0.9, 0.2, 0.1), seed=0)
    with pytest.raises(SplitError):
        make_natural_split(records, ratios=(1.0, 0.0, 0.0), seed=0)


def test_split_round_trip(tmp_path):
    records = make_cell_corpus(6)
    split = make_controlled_split(records, per_class=5, seed=11)
    save_split(split, tmp_path / "out")
    loaded = load_split(tmp_path / "out")
    assert loaded.seed == 11 and loaded.mode == "controlled"
    assert [r.id for r in loaded.train] == [r.id for r in split.train]
    assert [r.id for r in loaded.test] == [r.id for r in split.test]
    manifest = (tmp_path / "out" / "manifest.json").read_text()
    assert "counts_per_cell" in manifest
