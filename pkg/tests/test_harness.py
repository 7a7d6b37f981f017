import numpy as np
import pytest

from coldstart.data import StreamSpec, build_stream, load_dataset
from coldstart.detectors import AdaptationMethod, TauPolicy, adapt
from coldstart.errors import ConfigError
from coldstart.harness import (DetectorSpec, ExperimentConfig, aggregate_bundles,
                               eval_steps, run_experiment, sweep)
from coldstart.metrics import auc_squared_curve
from coldstart.vectors import min_distances, nearest_indices

from reference_pipeline import ref_protocol_curves


def make_config(dataset_path, seed=3, r=5.0, length=60, detectors=None, stride=1):
    if detectors is None:
        detectors = (DetectorSpec(name="zs"), DetectorSpec(name="dn2"),
                     DetectorSpec.coldfusion())
    return ExperimentConfig(
        dataset_path=dataset_path,
        detectors=tuple(detectors),
        stream=StreamSpec(seed=seed, contamination_r=r, length=length),
        eval_stride=stride,
    )


def test_eval_steps():
    assert eval_steps(5, 1) == [1, 2, 3, 4, 5]
    assert eval_steps(10, 4) == [1, 5, 9, 10]
    assert eval_steps(9, 4) == [1, 5, 9]


def test_config_requires_detectors(small_dataset_path):
    with pytest.raises(ConfigError, match="at least one detector"):
        make_config(small_dataset_path, detectors=[])


def test_config_rejects_unknown_detector():
    with pytest.raises(ConfigError, match="unknown detector"):
        DetectorSpec(name="isolation_forest")


def test_config_from_dict_round_trip(small_dataset_path, tmp_path):
    raw = {
        "dataset": str(small_dataset_path),
        "stream": {"seed": 5, "contamination_r": 5.0, "length": 40},
        "detectors": [
            {"name": "zs"},
            {"name": "coldfusion", "tau": {"mode": "percentile", "percent": 75},
             "adaptation": {"kind": "mean"}, "label": "cf-mean75"},
        ],
        "eval_fractions": [0.5, 1.0],
        "eval_stride": 2,
        "output_dir": str(tmp_path / "out"),
    }
    config = ExperimentConfig.from_dict(raw)
    assert config.stream.seed == 5
    assert config.detectors[1].display_label() == "cf-mean75"
    assert config.detectors[1].tau == TauPolicy.percentile(75)
    assert config.detectors[1].adaptation.kind == "mean"
    assert config.eval_stride == 2


def test_zs_curve_is_exactly_constant(small_dataset_path):
    bundle = run_experiment(make_config(small_dataset_path,
                                        detectors=[DetectorSpec(name="zs")]))
    values = bundle.detectors[0].curve.values
    assert len(set(values)) == 1
    assert values[0] == bundle.zs_baseline
    for score in bundle.detectors[0].auc2.scores:
        assert score == pytest.approx(values[0], abs=1e-15)


def test_curves_share_length_and_summaries_recompute(small_dataset_path):
    bundle = run_experiment(make_config(small_dataset_path))
    lengths = {len(d.curve.values) for d in bundle.detectors}
    assert lengths == {bundle.stream_length}
    for det in bundle.detectors:
        recomputed = tuple(auc_squared_curve(det.curve, f)
                           for f in bundle.eval_fractions)
        assert recomputed == det.auc2.scores


def test_protocol_matches_reference(small_dataset_path):
    config = make_config(small_dataset_path, seed=9, length=50)
    bundle = run_experiment(config)

    ds = load_dataset(small_dataset_path)
    desc = np.stack([d.embedding for d in ds.descriptors])
    stream = build_stream(ds.items, config.stream)
    obs = stream.embeddings()
    test_items = ds.split("test")
    x_test = np.stack([it.embedding for it in test_items])
    y_test = np.array([it.is_oos for it in test_items])
    ref = ref_protocol_curves(desc, obs, x_test, y_test, tau_percent=90.0)

    by_label = {d.label: d.curve.values for d in bundle.detectors}
    for label in ("zs", "dn2", "coldfusion"):
        got = np.asarray(by_label[label])
        want = np.asarray(ref[label])
        assert np.abs(got - want).max() <= 1e-12


def test_dn2_incremental_equals_naive(small_dataset_path):
    config = make_config(small_dataset_path, seed=4, length=40,
                         detectors=[DetectorSpec(name="dn2")])
    bundle = run_experiment(config)
    ds = load_dataset(small_dataset_path)
    stream = build_stream(ds.items, config.stream)
    obs = stream.embeddings()
    test_items = ds.split("test")
    x_test = np.stack([it.embedding for it in test_items])
    y_test = np.array([it.is_oos for it in test_items])
    from coldstart.metrics import auroc_scores
    for t, value in zip(bundle.detectors[0].curve.ts,
                        bundle.detectors[0].curve.values):
        naive = auroc_scores(min_distances(x_test, obs[:t]), y_test)
        assert abs(naive - value) <= 1e-12


def test_coldfusion_cached_assignment_equals_fresh_adapt(small_dataset_path):
    ds = load_dataset(small_dataset_path)
    stream = build_stream(ds.items, StreamSpec(seed=2, contamination_r=5.0, length=30))
    obs = stream.embeddings()
    desc = np.stack([d.embedding for d in ds.descriptors])
    idx, dist = nearest_indices(obs, desc)
    for t in (1, 7, 30):
        fresh = adapt(ds.descriptors, obs[:t], tau=TauPolicy.percentile(90))
        cached = adapt(ds.descriptors, obs[:t], tau=TauPolicy.percentile(90),
                       precomputed=(idx[:t], dist[:t]))
        assert np.array_equal(fresh.centers, cached.centers)


def test_detector_independence(small_dataset_path):
    base = run_experiment(make_config(small_dataset_path, detectors=[
        DetectorSpec(name="zs"), DetectorSpec(name="dn2")]))
    extended = run_experiment(make_config(small_dataset_path, detectors=[
        DetectorSpec(name="zs"), DetectorSpec(name="dn2"),
        DetectorSpec.coldfusion()]))
    for a, b in zip(base.detectors, extended.detectors[:2]):
        assert a.curve == b.curve


def test_cold_start_anchor_single_observation(small_dataset_path):
    # after one observation only the assigned class center moves
    ds = load_dataset(small_dataset_path)
    stream = build_stream(ds.items, StreamSpec(seed=8, contamination_r=0.0, length=5))
    obs = stream.embeddings()
    desc = np.stack([d.embedding for d in ds.descriptors])
    model = adapt(ds.descriptors, obs[:1], tau=TauPolicy.percentile(90))
    assigned = int(model.assignments[0])
    for k in range(desc.shape[0]):
        if k == assigned:
            assert not np.array_equal(model.centers[k], desc[k])
        else:
            assert np.array_equal(model.centers[k], desc[k])


def test_strided_run(small_dataset_path):
    config = make_config(small_dataset_path, length=30, stride=7)
    bundle = run_experiment(config)
    assert bundle.detectors[0].curve.ts == (1, 8, 15, 22, 29, 30)
    assert bundle.eval_stride == 7


def test_multi_seed_aggregation(small_dataset_path):
    config = make_config(small_dataset_path, length=30)
    bundles = [run_experiment(config.with_seed(s)) for s in (1, 2, 3)]
    agg = aggregate_bundles(bundles)
    assert agg["seeds"] == [1, 2, 3]
    cf = agg["detectors"]["coldfusion"]
    assert len(cf["auc2_mean"]) == len(config.eval_fractions)
    per_seed = np.array(cf["auc2_per_seed"])
    assert np.allclose(per_seed.mean(axis=0), cf["auc2_mean"])


def test_sweep_isolates_failures(small_dataset_path, tmp_path):
    good = make_config(small_dataset_path, length=20,
                       detectors=[DetectorSpec(name="zs")])
    bad = make_config(tmp_path / "missing.jsonl", length=20,
                      detectors=[DetectorSpec(name="zs")])
    outcomes = sweep([good, bad, good], labels=["a", "bad", "b"])
    assert [oc.ok for oc in outcomes] == [True, False, True]
    assert "bad" == outcomes[1].label
    assert outcomes[1].error and "missing.jsonl" in outcomes[1].error


def test_sweep_grid_cardinality(small_dataset_path):
    configs = []
    labels = []
    for r in (2.5, 5.0, 7.5):
        for det in (DetectorSpec(name="zs"), DetectorSpec(name="dn2"),
                    DetectorSpec.coldfusion()):
            configs.append(make_config(small_dataset_path, r=r, length=40,
                                       detectors=[det]))
            labels.append(f"r{r}-{det.display_label()}")
    outcomes = sweep(configs, labels=labels, workers=4)
    assert len(outcomes) == 9
    assert all(oc.ok for oc in outcomes)
    assert len({oc.bundle.contamination_r for oc in outcomes}) == 3


def test_bundle_round_trip_equality(small_dataset_path):
    bundle = run_experiment(make_config(small_dataset_path, length=25))
    import json
    clone = type(bundle).from_dict(json.loads(json.dumps(bundle.to_dict())))
    assert clone == bundle
