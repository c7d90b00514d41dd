import numpy as np
import pytest
from scipy import stats

from pigmm.data import (
    PRESETS,
    Dataset,
    Label,
    SchemaPreset,
    load_csv,
    split,
    split_indices,
    synth_classification,
    synth_generate,
    write_csv,
)
from pigmm.errors import (
    EmptyDatasetError,
    InvalidParameterError,
    LabelError,
    ParseError,
    SchemaError,
    SplitError,
)
from pigmm.features import ks_to_fitted_gaussian


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_presets_match_case_study_columns():
    assert [c for c, _ in PRESETS["lpbf"]] == [
        "laser_power", "scan_speed", "powder_size", "beam_diameter", "layer_thickness",
        "thermal_diffusivity"]
    assert [u for _, u in PRESETS["lpbf"]] == ["W", "mm/s", "µm", "mm", "mm", "m²/s"]
    assert [c for c, _ in PRESETS["ded"]] == [
        "laser_power", "scan_speed", "powder_flow", "powder_gas", "track_length", "track_height"]
    assert [u for _, u in PRESETS["ded"]] == ["W", "mm/s", "rpm", "lpm", "mm", "mm"]
    with pytest.raises(SchemaError):
        SchemaPreset.get("sla")


def test_load_lpbf_with_mapping_and_reordered_header(tmp_path):
    cols = [c for c, _ in PRESETS["lpbf"]]
    header = ["status"] + cols[::-1] + ["operator"]
    lines = [",".join(header),
             ",".join(["ok"] + [str(i) for i in range(6)] + ["ann"]),
             ",".join(["defect"] + [str(i + 10) for i in range(6)] + ["bob"])]
    p = write(tmp_path, "\n".join(lines) + "\n")
    ds = load_csv(p, "lpbf", "status", {"ok": "no_defect", "defect": "defect"})
    assert ds.rows.shape == (2, 6) and ds.names == tuple(cols)
    np.testing.assert_array_equal(ds.rows[0], [5, 4, 3, 2, 1, 0])
    assert list(ds.labels) == ["no_defect", "defect"]


def test_load_inconclusive_rows(tmp_path):
    rows = ["a,b,label"] + [f"{i},{i*2},inconclusive" for i in range(9)] + ["1,2,defect", "3,4,no_defect"]
    ds = load_csv(write(tmp_path, "\n".join(rows)))
    assert ds.label_counts() == {"defect": 1, "inconclusive": 9, "no_defect": 1}
    assert int(ds.trainable.sum()) == 2


def test_load_errors(tmp_path):
    with pytest.raises(EmptyDatasetError):
        load_csv(write(tmp_path, "a,b,label\n"))
    with pytest.raises(EmptyDatasetError):
        load_csv(write(tmp_path, ""))
    with pytest.raises(SchemaError, match="duplicate"):
        load_csv(write(tmp_path, "a,a,label\n1,2,defect\n"))
    with pytest.raises(SchemaError, match="missing"):
        load_csv(write(tmp_path, "laser_power,label\n1,defect\n"), "ded")
    with pytest.raises(ParseError, match="line 3"):
        load_csv(write(tmp_path, "a,label\n1,defect\nx,defect\n"))
    with pytest.raises(ParseError):
        load_csv(write(tmp_path, "a,label\n,defect\n"))
    with pytest.raises(LabelError, match=r"\['bad', 'meh'\]"):
        load_csv(write(tmp_path, "a,label\n1,bad\n2,meh\n3,defect\n"))
    with pytest.raises(SchemaError):
        load_csv(write(tmp_path, "a,b\n1,2\n"), require_labels=True)


def test_label_column_never_in_features(tmp_path):
    ds = load_csv(write(tmp_path, "label,a\ndefect,1\n"))
    assert ds.names == ("a",)


def test_csv_round_trip_bit_exact(tmp_path):
    ds = synth_classification("ded_like", 90, seed=5)
    write_csv(ds, tmp_path / "x.csv")
    back = load_csv(tmp_path / "x.csv", "ded")
    np.testing.assert_array_equal(back.rows, ds.rows)
    assert list(back.labels) == list(ds.labels)


def test_dataset_rejects_non_finite():
    with pytest.raises(ParseError):
        Dataset((("a", ""),), [[np.nan]], ["defect"])


def lpbf_60():
    labels = ["no_defect"] * 31 + ["defect"] * 29
    return Dataset((("a", ""),), np.arange(60.0)[:, None], labels)


def test_split_stratified_sizes():
    train, test = split(lpbf_60(), 0.2, seed=0, stratified=True)
    assert test.n == 12 and train.n == 48
    c = train.label_counts()
    assert abs(c["no_defect"] - 0.52 * 48) <= 1 and abs(c["defect"] - 0.48 * 48) <= 1


def test_split_deterministic_and_disjoint():
    ds = lpbf_60()
    a = split_indices(ds, 0.3, 7)
    b = split_indices(ds, 0.3, 7)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not set(a[0]) & set(a[1])
    assert len(a[0]) + len(a[1]) == ds.n
    c = split_indices(ds, 0.3, 8)
    assert not np.array_equal(a[1], c[1])


def test_split_inconclusive_only_in_test():
    ds = synth_classification("ded_like", 90, seed=0)
    train, test = split(ds, 0.2, seed=0)
    assert "inconclusive" not in train.label_counts()
    assert test.label_counts()["inconclusive"] == 9
    total = {k: train.label_counts().get(k, 0) + test.label_counts().get(k, 0) for k in ds.label_counts()}
    assert total == ds.label_counts()


def test_split_non_stratified():
    train, test = split(lpbf_60(), 0.25, seed=1, stratified=False)
    assert test.n == 15


def test_split_errors():
    with pytest.raises(SplitError):
        split(lpbf_60(), 0.0, 0)
    with pytest.raises(SplitError):
        split(lpbf_60(), 1.0, 0)
    tiny = Dataset((("a", ""),), np.arange(3.0)[:, None], ["no_defect", "no_defect", "defect"])
    with pytest.raises(SplitError, match="defect"):
        split(tiny, 0.5, 0)


def test_synth_shapes_deterministic():
    for shape in ("unimodal", "bimodal", "flattened", "heavy_tailed"):
        a = synth_generate(shape, 100, 2, seed=4)
        b = synth_generate(shape, 100, 2, seed=4)
        np.testing.assert_array_equal(a.rows, b.rows)
        assert a.rows.shape == (100, 2)


def test_unimodal_kurtosis():
    x = synth_generate("unimodal", 1000, 1, seed=0).rows[:, 0]
    assert abs(stats.kurtosis(x)) < 0.5


def test_heavy_tailed_kurtosis():
    x = synth_generate("heavy_tailed", 5000, 1, seed=0, dof=3).rows[:, 0]
    assert stats.kurtosis(x) > 2


def test_flattened_is_platykurtic():
    x = synth_generate("flattened", 5000, 1, seed=0, beta=4.0).rows[:, 0]
    # generalized Gaussian with beta=4: excess kurtosis = G(5/4)G(1/4)/G(3/4)^2 - 3 < 0
    from math import gamma
    expected = gamma(5 / 4) * gamma(1 / 4) / gamma(3 / 4) ** 2 - 3
    assert stats.kurtosis(x) == pytest.approx(expected, abs=0.1)


def test_bimodal_zero_separation_is_gaussian():
    x = synth_generate("bimodal", 20000, 1, seed=0, separation=0.0).rows[:, 0]
    assert ks_to_fitted_gaussian(x) < 0.02


def test_synth_errors():
    with pytest.raises(InvalidParameterError):
        synth_generate("bimodal", 0)
    with pytest.raises(InvalidParameterError):
        synth_generate("heavy_tailed", 10, dof=0)
    with pytest.raises(InvalidParameterError):
        synth_generate("flattened", 10, beta=2.0)
    with pytest.raises(InvalidParameterError):
        synth_generate("skewed", 10)
    with pytest.raises(InvalidParameterError):
        synth_classification("ded_like", 19)
    with pytest.raises(InvalidParameterError):
        synth_classification("sla_like", 100)
    with pytest.raises(InvalidParameterError):
        synth_classification("ded_like", 100, overlap=1.5)


def test_ded_like_counts():
    assert synth_classification("ded_like", 90, seed=1).label_counts() == {
        "no_defect": 45, "defect": 36, "inconclusive": 9}


def test_lpbf_like_counts():
    c = synth_classification("lpbf_like", 60, seed=1).label_counts()
    assert abs(c["no_defect"] - 31) <= 1 and abs(c["defect"] - 29) <= 1


def test_scenarios_use_preset_schemas():
    assert synth_classification("lpbf_like", 60).columns == PRESETS["lpbf"]
    assert synth_classification("ded_like", 90).columns == PRESETS["ded"]


def test_ded_speed_marginal_bimodal():
    ds = synth_classification("ded_like", 500, seed=0)
    assert ks_to_fitted_gaussian(ds.column("scan_speed")) > 0.08


def test_scenario_deterministic():
    a = synth_classification("lpbf_like", 60, seed=3, overlap=0.1)
    b = synth_classification("lpbf_like", 60, seed=3, overlap=0.1)
    np.testing.assert_array_equal(a.rows, b.rows)
    assert list(a.labels) == list(b.labels)


def test_label_enum_values():
    assert {l.value for l in Label} == {"defect", "no_defect", "inconclusive", "unlabeled"}
