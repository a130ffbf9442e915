import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labelloop import core
from labelloop.core import (
    ABSTAIN,
    DataFormatError,
    Dataset,
    FastApplier,
    Instance,
    LabelFunction,
    apply_lf,
    apply_lf_column,
    build_label_matrix,
    lf_coverage,
    load_tabular_csv,
    load_text_jsonl,
    make_synthetic_tabular,
    make_synthetic_text,
    split_dataset,
)


def text_instance(i, tokens, label=None):
    return Instance(id=i, payload=tuple(tokens), true_label=label)


def tab_instance(i, values, label=None):
    return Instance(id=i, payload=np.asarray(values, dtype=float), true_label=label)


class TestLabelFunction:
    def test_keyword_fires_on_membership(self):
        lf = LabelFunction.keyword("spam", target=1)
        assert apply_lf(lf, text_instance(0, ["ham", "spam"])) == 1
        assert apply_lf(lf, text_instance(1, ["ham"])) == ABSTAIN

    def test_stump_boundaries_are_inclusive(self):
        le = LabelFunction.stump(0, 2.0, "<=", target=0)
        ge = LabelFunction.stump(0, 2.0, ">=", target=1)
        at = tab_instance(0, [2.0])
        assert apply_lf(le, at) == 0
        assert apply_lf(ge, at) == 1
        assert apply_lf(le, tab_instance(1, [2.5])) == ABSTAIN
        assert apply_lf(ge, tab_instance(2, [1.5])) == ABSTAIN

    def test_stump_rejects_bad_op(self):
        with pytest.raises(ValueError):
            LabelFunction.stump(0, 1.0, "<", target=0)

    def test_kind_mismatch_raises(self):
        with pytest.raises(ValueError):
            apply_lf(LabelFunction.keyword("x", 0), tab_instance(0, [1.0]))
        with pytest.raises(ValueError):
            apply_lf(LabelFunction.stump(0, 1.0, "<=", 0), text_instance(0, ["x"]))

    def test_identity_ignores_assigned_id(self):
        a = LabelFunction.keyword("cat", 1, lf_id=3)
        b = LabelFunction.keyword("cat", 1, lf_id=7)
        assert a.identity() == b.identity()
        assert a.identity() != LabelFunction.keyword("cat", 0).identity()

    def test_with_id(self):
        lf = LabelFunction.keyword("cat", 1).with_id(5)
        assert lf.lf_id == 5
        assert lf.word == "cat"


class TestDataset:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            Dataset(instances=[text_instance(0, ["a"]), text_instance(0, ["b"])], n_classes=2, kind="text")

    def test_label_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            Dataset(instances=[text_instance(0, ["a"], label=2)], n_classes=2, kind="text")

    def test_split_indices_requires_split(self):
        d = Dataset(instances=[text_instance(0, ["a"])], n_classes=2, kind="text")
        with pytest.raises(ValueError):
            d.split_indices("train")


class TestBuildLabelMatrix:
    def test_matrix_matches_per_instance_application(self):
        insts = [text_instance(i, toks) for i, toks in enumerate([["a", "b"], ["b"], ["c"]])]
        d = Dataset(instances=insts, n_classes=2, kind="text")
        lfs = [LabelFunction.keyword("b", 1, lf_id=0), LabelFunction.keyword("c", 0, lf_id=1)]
        W = build_label_matrix(lfs, d)
        expected = np.array([[1, ABSTAIN], [1, ABSTAIN], [ABSTAIN, 0]])
        np.testing.assert_array_equal(W.entries, expected)
        assert W.lf_ids == [0, 1]

    def test_zero_lfs_gives_n_by_zero(self):
        d = Dataset(instances=[text_instance(0, ["a"])], n_classes=2, kind="text")
        W = build_label_matrix([], d)
        assert W.shape == (1, 0)


class TestFastApplier:
    @settings(max_examples=40, deadline=None)
    @given(data=st.data())
    def test_text_columns_match_slow_path(self, data):
        tokens = st.lists(st.sampled_from(["aa", "bb", "cc", "dd"]), min_size=0, max_size=6)
        docs = data.draw(st.lists(tokens, min_size=1, max_size=15))
        insts = [text_instance(i, t) for i, t in enumerate(docs)]
        applier = FastApplier(insts, "text")
        for word in ["aa", "bb", "zz"]:
            for target in (0, 1):
                lf = LabelFunction.keyword(word, target)
                np.testing.assert_array_equal(applier.column(lf), apply_lf_column(lf, insts))

    @settings(max_examples=40, deadline=None)
    @given(data=st.data())
    def test_tabular_columns_match_slow_path(self, data):
        vals = st.floats(min_value=-5, max_value=5, allow_nan=False)
        rows = data.draw(st.lists(st.tuples(vals, vals), min_size=1, max_size=15))
        insts = [tab_instance(i, list(r)) for i, r in enumerate(rows)]
        applier = FastApplier(insts, "tabular")
        thr = data.draw(vals)
        for feat in (0, 1):
            for op in ("<=", ">="):
                lf = LabelFunction.stump(feat, thr, op, target=1)
                np.testing.assert_array_equal(applier.column(lf), apply_lf_column(lf, insts))

    def test_kind_mismatch(self):
        applier = FastApplier([text_instance(0, ["a"])], "text")
        with pytest.raises(ValueError):
            applier.column(LabelFunction.stump(0, 1.0, "<=", 0))


class TestSplitDataset:
    def make(self, n):
        return Dataset(
            instances=[text_instance(i, ["tok"], label=i % 2) for i in range(n)],
            n_classes=2,
            kind="text",
        )

    def test_counts_floor_with_remainder_to_train_first(self):
        d = split_dataset(self.make(11), ratios=(0.8, 0.1, 0.1), seed=0)
        # floors 8/1/1, remainder 1 -> train
        assert sorted((d.split.count(s) for s in ("train", "valid", "test")), reverse=True) == [9, 1, 1]
        assert d.split.count("train") == 9

    def test_every_instance_tagged_exactly_once(self):
        d = split_dataset(self.make(50), seed=3)
        assert len(d.split) == 50
        assert set(d.split) == {"train", "valid", "test"}
        pos = np.concatenate([d.split_indices(s) for s in ("train", "valid", "test")])
        assert sorted(pos.tolist()) == list(range(50))

    def test_same_seed_same_split(self):
        a = split_dataset(self.make(40), seed=7)
        b = split_dataset(self.make(40), seed=7)
        assert a.split == b.split

    def test_different_seed_usually_differs(self):
        a = split_dataset(self.make(40), seed=0)
        b = split_dataset(self.make(40), seed=1)
        assert a.split != b.split

    def test_bad_ratios(self):
        with pytest.raises(ValueError):
            split_dataset(self.make(10), ratios=(0.5, 0.2, 0.2))

    def test_too_small(self):
        with pytest.raises(ValueError):
            split_dataset(self.make(2))


class TestCoverage:
    def test_coverage_counts_train_only(self):
        insts = [text_instance(i, ["hit"] if i < 2 else ["miss"], label=0) for i in range(4)]
        d = Dataset(instances=insts, n_classes=2, kind="text", split=["train", "train", "train", "test"])
        assert lf_coverage(LabelFunction.keyword("hit", 0), d) == pytest.approx(2 / 3)


class TestLoaders:
    def test_text_jsonl_roundtrip(self, tmp_path):
        p = tmp_path / "d.jsonl"
        rows = [
            {"id": 0, "text": "Buy NOW, cheap!", "label": 1},
            {"id": 1, "text": "see you at lunch", "label": 0},
        ]
        p.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        d = load_text_jsonl(p)
        assert d.kind == "text"
        assert len(d) == 2
        assert d.instances[0].payload == ("buy", "now", "cheap")
        assert d.instances[0].raw_text == "Buy NOW, cheap!"
        assert d.instances[0].true_label == 1

    def test_text_jsonl_blank_lines_skipped(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"id": 0, "text": "hello there", "label": 0}\n\n')
        assert len(load_text_jsonl(p)) == 1

    @pytest.mark.parametrize(
        "line",
        [
            "not json",
            '{"text": "x", "label": 0}',
            '{"id": 1, "text": 5, "label": 0}',
            '{"id": 1, "text": "x", "label": 3}',
            '{"id": "b", "text": "x", "label": 0}',
        ],
    )
    def test_text_jsonl_errors_carry_line_number(self, tmp_path, line):
        p = tmp_path / "d.jsonl"
        p.write_text('{"id": 0, "text": "ok fine", "label": 1}\n' + line + "\n")
        with pytest.raises(DataFormatError, match="line 2"):
            load_text_jsonl(p)

    def test_text_jsonl_empty_file(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text("")
        with pytest.raises(DataFormatError):
            load_text_jsonl(p)

    def test_tabular_csv_roundtrip(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("f0,f1,label\n1.5,-2,0\n0,3.25,1\n")
        d = load_tabular_csv(p)
        assert d.kind == "tabular"
        assert d.m_feat == 2
        assert d.feature_names == ["f0", "f1"]
        np.testing.assert_allclose(d.instances[0].payload, [1.5, -2.0])
        assert [x.id for x in d.instances] == [0, 1]
        assert [x.true_label for x in d.instances] == [0, 1]

    @pytest.mark.parametrize(
        "body,match",
        [
            ("f0,f1\n1,2\n", "label"),
            ("f0,label\nx,0\n", "line 2"),
            ("f0,label\n1,5\n", "line 2"),
            ("f0,label\n1,0,9\n", "line 2"),
            ("label\n", "feature"),
        ],
    )
    def test_tabular_csv_errors(self, tmp_path, body, match):
        p = tmp_path / "d.csv"
        p.write_text(body)
        with pytest.raises(DataFormatError, match=match):
            load_tabular_csv(p)


class TestSyntheticText:
    def test_deterministic_and_balanced(self):
        a = make_synthetic_text(100, seed=4)
        b = make_synthetic_text(100, seed=4)
        assert [x.payload for x in a.instances] == [x.payload for x in b.instances]
        labels = [x.true_label for x in a.instances]
        assert labels.count(0) == labels.count(1) == 50

    def test_different_seeds_differ(self):
        a = make_synthetic_text(60, seed=0)
        b = make_synthetic_text(60, seed=1)
        assert [x.payload for x in a.instances] != [x.payload for x in b.instances]

    def test_doc_lengths_in_range(self):
        d = make_synthetic_text(80, seed=2, doc_len=(5, 9))
        lengths = [len(x.payload) for x in d.instances]
        assert min(lengths) >= 5 and max(lengths) <= 9

    def test_signal_words_beat_trap_words(self):
        """Planted word tiers must be separable by ground-truth accuracy."""
        d = make_synthetic_text(2000, seed=0)
        d = split_dataset(d, seed=0)
        train = d.subset("train")

        def acc(word, target):
            votes = [x.true_label for x in train if word in x.payload]
            return sum(v == target for v in votes) / len(votes)

        signal_accs = [acc(f"w{i:04d}", 0) for i in range(8)]
        trap_accs = [acc(f"w{i:04d}", 0) for i in range(16, 22)]
        assert min(signal_accs) > 0.85
        assert all(0.55 < a < 0.8 for a in trap_accs)

    def test_zero_flip_noise_makes_signal_words_pure(self):
        d = make_synthetic_text(200, flip_noise=0.0, seed=1)
        for x in d.instances:
            wrong = {f"w{i:04d}" for i in range(8, 16)} if x.true_label == 0 else {f"w{i:04d}" for i in range(8)}
            assert not wrong.intersection(x.payload)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 10},
            {"n": 100, "n_signal_words": 1},
            {"n": 100, "vocab_size": 20},
            {"n": 100, "flip_noise": 1.5},
            {"n": 100, "signal_rate": 0.9, "trap_rate": 0.2},
            {"n": 100, "n_trap_words": 0, "trap_rate": 0.1},
        ],
    )
    def test_parameter_validation(self, kwargs):
        with pytest.raises(ValueError):
            make_synthetic_text(**kwargs)


class TestSyntheticTabular:
    def test_shapes_and_balance(self):
        d = make_synthetic_tabular(100, m_feat=5, seed=0)
        assert d.m_feat == 5
        assert d.feature_names == [f"f{j}" for j in range(5)]
        labels = [x.true_label for x in d.instances]
        assert labels.count(0) == labels.count(1) == 50

    def test_clusters_are_separated(self):
        d = make_synthetic_tabular(400, m_feat=4, cluster_sep=2.0, seed=0)
        X = np.stack([x.payload for x in d.instances])
        y = np.array([x.true_label for x in d.instances])
        gap = X[y == 1].mean(axis=0) - X[y == 0].mean(axis=0)
        np.testing.assert_allclose(gap, 2.0, atol=0.4)

    def test_deterministic(self):
        a = make_synthetic_tabular(50, seed=9)
        b = make_synthetic_tabular(50, seed=9)
        np.testing.assert_array_equal(
            np.stack([x.payload for x in a.instances]),
            np.stack([x.payload for x in b.instances]),
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            make_synthetic_tabular(5)
        with pytest.raises(ValueError):
            make_synthetic_tabular(100, m_feat=0)


def test_module_exposes_abstain_constant():
    assert core.ABSTAIN == -1
