import pytest

from coldstart.synthetic import SyntheticSpec, write_synthetic

# Small fixture: fast enough for per-test use, big enough for meaningful AUCs.
SMALL_SPEC = SyntheticSpec(classes=4, dim=8, seed=11, oos_classes=3,
                           train_per_class=20, test_per_class=10,
                           oos_pool_size=40, oos_test_size=30)

# Acceptance-scale fixture: the default generator settings.
ACCEPT_SPEC = SyntheticSpec()


@pytest.fixture(scope="session")
def small_dataset_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "small-synth.jsonl"
    write_synthetic(SMALL_SPEC, path)
    return path


@pytest.fixture(scope="session")
def accept_dataset_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "accept-synth.jsonl"
    write_synthetic(ACCEPT_SPEC, path)
    return path
