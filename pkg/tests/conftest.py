import numpy as np
import pytest

from hfcf import synth
from hfcf.pipeline import PipelineConfig, run_transform


@pytest.fixture(scope="session")
def face_corpus():
    return synth.face_corpus(6, seed=1000)


@pytest.fixture(scope="session")
def face_stages(face_corpus):
    """Full pipeline intermediates for each corpus face (concat-dlbp, no noise)."""
    config = PipelineConfig()
    return [run_transform(face, config) for face in face_corpus]


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
