import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def shapes(tmp_path_factory):
    """The synthetic 3-class shape set (100 raw frames per class), preprocessed to 64x64."""
    from gesture_ensemble.dataset import ingest, load_images, preprocess_dataset, split
    from gesture_ensemble.synthetic import make_shapes_dataset

    base = tmp_path_factory.mktemp("shapes")
    raw = make_shapes_dataset(base / "raw", per_class=100, seed=0)
    manifest, skipped = preprocess_dataset(ingest(raw), base / "processed")
    assert not skipped
    images, labels = load_images(manifest)
    return {
        "raw": raw,
        "manifest": manifest,
        "split": split(manifest, seed=0),
        "data": (images, labels),
    }


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
