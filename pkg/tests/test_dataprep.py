import numpy as np
import pytest

from fedae import (
    EmptyDataError,
    InsufficientClassError,
    LabelColumnError,
    LabeledDataset,
    SplitSpec,
    SynthSpec,
    apply_scaler,
    fit_scaler,
    load_csv,
    partition,
    synth_generate,
    write_csv,
)
from fedae.dataprep import DatasetError


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_basic_three_rows(self, tmp_path):
        path = write(tmp_path, "a,b,label\n1,2,0\n3,4,1\n5,6,1\n")
        ds, report = load_csv(path)
        assert ds.features.shape == (3, 2)
        assert list(ds.labels) == [0, 1, 1]
        assert ds.k == 2
        assert ds.feature_names == ["a", "b"]
        assert report.rows_read == 3 and report.rows_dropped == 0

    def test_string_labels_first_appearance(self, tmp_path):
        path = write(tmp_path, "x,label\n1,benign\n2,attack\n3,benign\n")
        ds, _ = load_csv(path)
        assert list(ds.labels) == [0, 1, 0]
        assert ds.k == 2

    def test_first_appearance_order_not_value_order(self, tmp_path):
        path = write(tmp_path, "x,label\n1,5\n2,3\n3,5\n")
        ds, _ = load_csv(path)
        # raw "5" appears first so it becomes class 0
        assert list(ds.labels) == [0, 1, 0]

    def test_bad_rows_dropped_and_counted(self, tmp_path):
        path = write(tmp_path, "a,b,label\n1,2,0\n1,NaN,0\nx,2,1\n1,inf,1\n1,2,1\n1,2\n")
        ds, report = load_csv(path)
        assert ds.features.shape == (2, 2)
        assert report.rows_read == 6 and report.rows_dropped == 4
        assert np.all(np.isfinite(ds.features))

    def test_label_column_by_name_then_index(self, tmp_path):
        path = write(tmp_path, "a,2,c\n1,yes,3\n2,no,4\n")
        ds, _ = load_csv(path, "2")  # header name wins over index
        assert ds.feature_names == ["a", "c"]
        assert list(ds.labels) == [0, 1]
        path = write(tmp_path, "id,x,y\nfirst,1,2\nsecond,3,4\n", "byindex.csv")
        ds, _ = load_csv(path, 0)
        assert ds.feature_names == ["x", "y"]
        assert list(ds.labels) == [0, 1]

    def test_errors_are_distinct(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "absent.csv")
        path = write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(LabelColumnError, match="no column named"):
            load_csv(path, "label")
        with pytest.raises(LabelColumnError, match="out of range"):
            load_csv(path, 5)
        path = write(tmp_path, "a,label\nx,0\n", "allbad.csv")
        with pytest.raises(EmptyDataError, match="no usable data rows"):
            load_csv(path)
        path = write(tmp_path, "", "empty.csv")
        with pytest.raises(EmptyDataError, match="no header"):
            load_csv(path)


class TestScaler:
    def test_basic_column(self):
        scaler = fit_scaler(np.array([[0.0], [5.0], [10.0]]))
        out = apply_scaler(scaler, np.array([[0.0], [5.0], [10.0]]))
        assert np.allclose(out[:, 0], [0.0, 0.5, 1.0])

    def test_constant_column_maps_to_zero(self):
        scaler = fit_scaler(np.array([[7.0], [7.0], [7.0]]))
        out = apply_scaler(scaler, np.array([[7.0], [7.0]]))
        assert np.all(out == 0.0)

    def test_no_clamping(self):
        scaler = fit_scaler(np.array([[0.0], [10.0]]))
        assert apply_scaler(scaler, np.array([[20.0]]))[0, 0] == 2.0
        assert apply_scaler(scaler, np.array([[-10.0]]))[0, 0] == -1.0

    def test_fitting_data_lands_in_unit_interval(self):
        x = np.random.default_rng(0).normal(0, 50, size=(40, 6))
        out = apply_scaler(fit_scaler(x), x)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_errors(self):
        with pytest.raises(DatasetError, match="non-empty"):
            fit_scaler(np.zeros((0, 3)))
        scaler = fit_scaler(np.zeros((2, 3)))
        with pytest.raises(DatasetError, match="mismatch"):
            apply_scaler(scaler, np.zeros((2, 4)))


def indexed_dataset(per_class, k):
    """Column 0 is a unique row id so splits can be traced back."""
    n = per_class * k
    features = np.stack([np.arange(n, dtype=float), np.arange(n, dtype=float) * 2], axis=1)
    labels = np.repeat(np.arange(k), per_class)
    return LabeledDataset(features, labels, ["id", "v"], k)


class TestPartition:
    def test_sizes_from_spec_example(self):
        ds = indexed_dataset(100, 2)
        splits = partition(ds, SplitSpec(test_per_class=10, seed=0))
        assert splits.test.row_count == 20
        assert splits.train.row_count == 144
        assert splits.validation.row_count == 36

    def test_test_blocks_are_class_ordered_and_equal(self):
        ds = indexed_dataset(50, 3)
        splits = partition(ds, SplitSpec(test_per_class=7, seed=1))
        labels = splits.test.labels
        assert list(labels) == sorted(labels)
        assert all(np.sum(labels == c) == 7 for c in range(3))

    def test_disjoint_and_exhaustive(self):
        ds = indexed_dataset(30, 2)
        splits = partition(ds, SplitSpec(test_per_class=5, seed=2))
        ids = np.concatenate(
            [splits.train.features[:, 0], splits.validation.features[:, 0], splits.test.features[:, 0]]
        )
        assert len(set(ids)) == 60
        assert sorted(ids) == list(range(60))

    def test_deterministic_under_seed(self):
        ds = indexed_dataset(30, 2)
        a = partition(ds, SplitSpec(test_per_class=5, seed=3))
        b = partition(ds, SplitSpec(test_per_class=5, seed=3))
        c = partition(ds, SplitSpec(test_per_class=5, seed=4))
        assert np.array_equal(a.test.features, b.test.features)
        assert np.array_equal(a.train.features, b.train.features)
        assert not np.array_equal(a.train.features, c.train.features)

    def test_eleven_class_balanced_test(self):
        ds = indexed_dataset(1100, 11)
        splits = partition(ds, SplitSpec(test_per_class=1000, seed=5))
        assert splits.test.row_count == 11000

    def test_insufficient_class_names_it(self):
        ds = indexed_dataset(8, 2)
        with pytest.raises(InsufficientClassError, match="class 0 has 8 samples"):
            partition(ds, SplitSpec(test_per_class=9, seed=0))

    def test_spec_validation(self):
        with pytest.raises(DatasetError, match="test_per_class"):
            SplitSpec(test_per_class=0)
        with pytest.raises(DatasetError, match="train_fraction"):
            SplitSpec(test_per_class=1, train_fraction=1.0)


class TestSynth:
    def test_label_histogram_and_shapes(self):
        ds = synth_generate(SynthSpec(3, 4, 50, 10.0, 0.1, seed=0))
        assert ds.features.shape == (150, 4)
        assert all(np.sum(ds.labels == c) == 50 for c in range(3))
        assert ds.k == 3

    def test_separation_construction(self):
        ds = synth_generate(SynthSpec(2, 5, 200, 10.0, 0.1, seed=1))
        mean0 = ds.features[ds.labels == 0].mean(axis=0)
        mean1 = ds.features[ds.labels == 1].mean(axis=0)
        # class means sit 10 apart per coordinate with std 0.1
        assert np.all(np.abs(mean1 - mean0 - 10.0) < 0.1)

    def test_deterministic(self):
        a = synth_generate(SynthSpec(2, 3, 10, 5.0, 0.2, seed=7))
        b = synth_generate(SynthSpec(2, 3, 10, 5.0, 0.2, seed=7))
        c = synth_generate(SynthSpec(2, 3, 10, 5.0, 0.2, seed=8))
        assert np.array_equal(a.features, b.features)
        assert not np.array_equal(a.features, c.features)

    def test_invalid_specs(self):
        with pytest.raises(DatasetError, match="k"):
            SynthSpec(1, 3, 10, 5.0, 0.2, seed=0)
        with pytest.raises(DatasetError, match="noise_std"):
            SynthSpec(2, 3, 10, 5.0, 0.0, seed=0)
        with pytest.raises(DatasetError, match="class_mean_separation"):
            SynthSpec(2, 3, 10, -1.0, 0.2, seed=0)
        with pytest.raises(DatasetError, match="per_class_count"):
            SynthSpec(2, 3, 0, 5.0, 0.2, seed=0)


class TestRoundTrip:
    def test_write_then_load_preserves_everything(self, tmp_path):
        ds = synth_generate(SynthSpec(3, 4, 20, 5.0, 0.3, seed=11))
        path = tmp_path / "rt.csv"
        write_csv(ds, path)
        loaded, report = load_csv(path)
        assert report.rows_dropped == 0
        assert np.array_equal(loaded.features, ds.features)  # repr round-trips floats
        assert np.array_equal(loaded.labels, ds.labels)
        assert loaded.feature_names == ds.feature_names
        assert loaded.k == ds.k
