"""Shared fixtures: trained bundles reused across test modules, plus the
acceptance-verdict summary section."""
import numpy as np
import pytest

from aurora.corpus import SynthSpec, center_by_speaker, synth_corpus
from aurora.regress import train_model

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL verdict line, echoed after the test run."""
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def noiseless_corpus():
    spec = SynthSpec(n_speakers=10, tokens_per_item=3, noise_sd_mm=0.0,
                     speaker_offset_sd_mm=4.0)
    return synth_corpus(spec, seed=5)


@pytest.fixture(scope="session")
def trained(noiseless_corpus):
    corp, truth = noiseless_corpus
    return corp, truth, train_model(corp)


@pytest.fixture(scope="session")
def trained_bundle(trained):
    return trained[2]


@pytest.fixture(scope="session")
def centered_corpus(noiseless_corpus):
    return center_by_speaker(noiseless_corpus[0])


@pytest.fixture(scope="session")
def formant_rng():
    def draw(rng, n):
        f1 = rng.uniform(320.0, 903.0, size=n)
        f2 = rng.uniform(828.0, 2616.0, size=n)
        return np.column_stack([f1, f2])

    return draw
