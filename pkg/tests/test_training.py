import json

import numpy as np
import pytest

from orthogate import ClinicalRecord, DiagnosisLabel, LanguageTag
from orthogate.corpus import NUM_CLASSES, SplitSet, make_controlled_split
from orthogate.embeddings import FileEmbedder
from orthogate.metrics import macro_f1
from orthogate.model import (
    VARIANT_NONE,
    VARIANT_PER_LANGUAGE,
    VARIANT_SHARED,
    AdapterClassifier,
    AdapterParams,
    TrainConfig,
    init_params,
    load_checkpoint,
    predict_record,
    predict_records,
    save_checkpoint,
    train_on_split,
)
from tests.conftest import cluster_embeddings


def split_from(records, seed=0):
    return make_controlled_split(records, per_class=min_cell(records), seed=seed)


def min_cell(records):
    counts = {}
    for r in records:
        counts[(r.language, r.label)] = counts.get((r.language, r.label), 0) + 1
    return min(counts.values())


def small_setup(seed=0, per_class=40, permuted=False):
    records, source = cluster_embeddings(seed, dim=16, per_class=per_class, permute_per_language=permuted)
    split = make_controlled_split(records, per_class=per_class, seed=seed)
    return split, source


def params_equal(a, b) -> bool:
    for (name_a, t_a), (name_b, t_b) in zip(a.tensors(), b.tensors()):
        if name_a != name_b or not np.array_equal(t_a, t_b):
            return False
    return True


def test_zero_epochs_returns_seeded_init_exactly():
    split, source = small_setup(per_class=10)
    config = TrainConfig(epochs=0, seed=77)
    clf, history = train_on_split(split, source, config, VARIANT_PER_LANGUAGE, bottleneck=6)
    expected = init_params(16, 6, VARIANT_PER_LANGUAGE, np.random.default_rng(77))
    assert params_equal(clf.params_, expected)
    assert history == []


def test_training_is_bit_reproducible():
    split, source = small_setup(per_class=15)
    config = TrainConfig(epochs=3, seed=5)
    a, history_a = train_on_split(split, source, config, VARIANT_PER_LANGUAGE, bottleneck=6)
    b, history_b = train_on_split(split, source, config, VARIANT_PER_LANGUAGE, bottleneck=6)
    assert params_equal(a.params_, b.params_)
    assert history_a == history_b


def test_checkpoints_byte_identical(tmp_path):
    split, source = small_setup(per_class=12)
    config = TrainConfig(epochs=2, seed=9)
    for name in ("a", "b"):
        clf, _ = train_on_split(split, source, config, VARIANT_PER_LANGUAGE, bottleneck=4)
        save_checkpoint(tmp_path / f"{name}.json", clf)
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_synthetic_separable_reaches_95_macro_f1():
    split, source = small_setup(per_class=50)
    config = TrainConfig(epochs=20, seed=1)
    clf, history = train_on_split(split, source, config, VARIANT_PER_LANGUAGE, bottleneck=8)
    assert clf.selection_["val_macro_f1"] >= 0.95
    preds = predict_records(clf, source, split.test)
    assert macro_f1(preds) >= 0.95


def test_selection_keeps_best_epoch():
    split, source = small_setup(per_class=15)
    clf, history = train_on_split(split, source, TrainConfig(epochs=5, seed=2), VARIANT_PER_LANGUAGE, bottleneck=6)
    best = clf.selection_
    assert best["val_macro_f1"] == max(h["val_macro_f1"] for h in history)
    candidates = [h for h in history if h["val_macro_f1"] == best["val_macro_f1"]]
    assert best["val_ece"] == min(h["val_ece"] for h in candidates)


def test_history_schema():
    split, source = small_setup(per_class=10)
    _, history = train_on_split(split, source, TrainConfig(epochs=2, seed=3), VARIANT_SHARED, bottleneck=4)
    assert [h["epoch"] for h in history] == [1, 2]
    for entry in history:
        assert set(entry) == {"epoch", "train_loss", "val_macro_f1", "val_ece"}


def test_routing_isolation_per_language():
    split, source = small_setup(per_class=12)
    clf, _ = train_on_split(split, source, TrainConfig(epochs=2, seed=4), VARIANT_PER_LANGUAGE, bottleneck=6)
    en_pa_records = [r for r in split.test if r.language != LanguageTag.HI]
    before = [predict_record(clf, source, r).probabilities for r in en_pa_records]
    clf.params_.adapters["HI"].W1 += 1.0
    clf.params_.adapters["HI"].b2 -= 0.5
    after = [predict_record(clf, source, r).probabilities for r in en_pa_records]
    for x, y in zip(before, after):
        assert np.array_equal(x, y)


def test_zero_adapter_equals_no_adapter():
    split, source = small_setup(per_class=10)
    none_clf, _ = train_on_split(split, source, TrainConfig(epochs=1, seed=6), VARIANT_NONE, bottleneck=4)
    zero_clf = AdapterClassifier(dim=16, bottleneck=4, variant=VARIANT_PER_LANGUAGE)
    zero_clf.params_ = init_params(16, 4, VARIANT_PER_LANGUAGE, np.random.default_rng(0))
    for route in zero_clf.params_.adapters:
        zero_clf.params_.adapters[route] = AdapterParams.zeros(16, 4)
    zero_clf.params_.classifier = none_clf.params_.classifier.copy()
    zero_clf.classes_ = np.arange(NUM_CLASSES)
    for record in split.test[:40]:
        p_zero = predict_record(zero_clf, source, record).probabilities
        p_none = predict_record(none_clf, source, record).probabilities
        assert np.max(np.abs(p_zero - p_none)) < 1e-12


def test_predict_matches_training_forward_replay():
    split, source = small_setup(per_class=12)
    clf, _ = train_on_split(split, source, TrainConfig(epochs=2, seed=8), VARIANT_PER_LANGUAGE, bottleneck=6)
    records = split.test[:50]
    preds = predict_records(clf, source, records)
    # replaying the same forward pass at the saved checkpoint is bitwise stable
    replay = predict_records(clf, source, records)
    for pred, again in zip(preds, replay):
        assert np.array_equal(again.probabilities, pred.probabilities)
        assert again.predicted == pred.predicted
        assert again.confidence == float(np.max(pred.probabilities))
    # single-record calls agree with the batch path to float roundoff
    for record, pred in zip(records, preds):
        single = predict_record(clf, source, record)
        assert np.max(np.abs(single.probabilities - pred.probabilities)) < 1e-12
        assert single.predicted == pred.predicted


def test_uniform_probs_tie_break_to_lowest_ordinal():
    clf = AdapterClassifier(dim=4, bottleneck=2, variant=VARIANT_NONE)
    clf.params_ = init_params(4, 2, VARIANT_NONE, np.random.default_rng(0))
    clf.params_.classifier.Wc[:] = 0.0
    clf.params_.classifier.bc[:] = 0.0
    clf.classes_ = np.arange(NUM_CLASSES)
    source = FileEmbedder({"a": np.ones(4)}, dim=4)
    pred = predict_record(clf, source, ClinicalRecord("a", "x", LanguageTag.EN))
    assert pred.predicted == DiagnosisLabel.SPINAL
    assert pred.confidence == pytest.approx(1.0 / 6.0, abs=1e-12)


def test_per_language_beats_shared_on_permuted_clusters():
    split, source = small_setup(per_class=40, permuted=True)
    config = TrainConfig(epochs=12, seed=10)
    per_lang, _ = train_on_split(split, source, config, VARIANT_PER_LANGUAGE, bottleneck=16)
    shared, _ = train_on_split(split, source, config, VARIANT_SHARED, bottleneck=16)
    f1_per_lang = macro_f1(predict_records(per_lang, source, split.test))
    f1_shared = macro_f1(predict_records(shared, source, split.test))
    assert f1_per_lang >= f1_shared


def test_checkpoint_round_trip(tmp_path):
    split, source = small_setup(per_class=10)
    clf, _ = train_on_split(split, source, TrainConfig(epochs=2, seed=12), VARIANT_PER_LANGUAGE, bottleneck=4)
    path = tmp_path / "model.json"
    save_checkpoint(path, clf)
    obj = json.loads(path.read_text())
    assert set(obj["adapters"]) == {"EN-common", "HI", "PA"}
    assert obj["config"]["epochs"] == 2
    loaded = load_checkpoint(path)
    for record in split.test[:10]:
        assert np.array_equal(
            predict_record(loaded, source, record).probabilities,
            predict_record(clf, source, record).probabilities,
        )


def test_missing_languages_rejected_for_per_language_variant():
    clf = AdapterClassifier(dim=4, bottleneck=2, variant=VARIANT_PER_LANGUAGE, epochs=1)
    X = np.zeros((4, 4))
    y = np.zeros(4, dtype=int)
    with pytest.raises(ValueError, match="languages"):
        clf.fit(X, y)


def test_empty_train_split_rejected():
    records, source = cluster_embeddings(0, dim=16, per_class=4)
    split = SplitSet(train=[], validation=records[:4], test=[], seed=0, mode="controlled",
                     ratios=(0.8, 0.1, 0.1))
    with pytest.raises(ValueError, match="empty"):
        train_on_split(split, source, TrainConfig(epochs=1), VARIANT_NONE)


def test_sklearn_get_params_clone():
    from sklearn.base import clone

    clf = AdapterClassifier(dim=32, bottleneck=8, variant=VARIANT_SHARED, epochs=3, seed=4)
    params = clf.get_params()
    assert params["bottleneck"] == 8 and params["variant"] == VARIANT_SHARED
    copy = clone(clf)
    assert copy.get_params() == params
