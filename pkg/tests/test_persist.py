import json

import numpy as np
import pytest

from conftest import two_blob_classifier
from pigmm.classifier import ClassifierConfig, train_classifier
from pigmm.data import synth_classification
from pigmm.errors import ModelFormatError
from pigmm.features import EnergyFeatureConfig
from pigmm.persist import FORMAT_VERSION, classifier_to_dict, dumps, fingerprint, load_model, save_model


@pytest.fixture(scope="module")
def ded_clf():
    ds = synth_classification("ded_like", 90, seed=2, overlap=0.0)
    cfg = ClassifierConfig(energy=EnergyFeatureConfig("laser_power", "scan_speed", 410.0))
    return train_classifier(ds, cfg), ds


def test_round_trip_bitwise_posteriors(tmp_path, ded_clf):
    clf, ds = ded_clf
    save_model(clf, tmp_path / "m.json", {"seed": 2})
    back, prov = load_model(tmp_path / "m.json")
    rng = np.random.default_rng(0)
    probes = ds.rows[rng.integers(0, ds.n, 100)] * rng.uniform(0.9, 1.1, (100, ds.rows.shape[1]))
    a, la = clf.predict_proba(probes)
    b, lb = back.predict_proba(probes)
    assert np.array_equal(a, b) and np.array_equal(la, lb)
    assert prov["seed"] == 2 and set(prov["fit_reports"]) == set(clf.classes)
    assert back.pipeline == clf.pipeline
    np.testing.assert_array_equal(back.priors, clf.priors)


def test_dumps_is_stable(ded_clf):
    clf, _ = ded_clf
    text = dumps(clf, {"seed": 1})
    assert text == dumps(clf, {"seed": 1})
    assert text.endswith("\n")
    doc = json.loads(text)
    assert doc["format_version"] == FORMAT_VERSION
    assert "tool_version" in doc["provenance"]


def test_floats_use_round_trip_repr(tmp_path):
    clf = two_blob_classifier()
    save_model(clf, tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    mean = doc["classifier"]["models"][0]["components"][0]["mean"]
    np.testing.assert_array_equal(np.array(mean), clf.models[0].components[0].mean)


def test_rejects_newer_version(tmp_path):
    doc = classifier_to_dict(two_blob_classifier())
    doc["format_version"] = FORMAT_VERSION + 1
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="newer"):
        load_model(tmp_path / "m.json")


def test_rejects_malformed(tmp_path):
    (tmp_path / "a.json").write_text("{not json")
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "a.json")
    (tmp_path / "b.json").write_text(json.dumps({"format_version": 1}))
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "b.json")


def test_rejects_tampered_log_det(tmp_path):
    doc = classifier_to_dict(two_blob_classifier())
    doc["classifier"]["models"][0]["components"][0]["log_det"] += 1.0
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="log_det"):
        load_model(tmp_path / "m.json")


def test_fingerprint(tmp_path):
    p = tmp_path / "x"
    p.write_bytes(b"abc")
    assert fingerprint(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
