import numpy as np
import pytest

from mcwnnm import ImagePlanes

REPO_ROOT = __import__("pathlib").Path(__file__).resolve().parent.parent
CORPUS_DIR = REPO_ROOT / "corpus"

# verdict lines recorded by tests/test_acceptance.py, echoed after the run
ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


def natural_image(seed: int, size: int = 64) -> ImagePlanes:
    """Seeded smooth test image: shared luminance plus soft chroma offsets.

    Same construction as scripts/make_corpus.py so unit-test observations
    carry over to the shipped benchmark corpus.
    """
    rng = np.random.default_rng(seed)

    def smooth(scale):
        f = rng.normal(size=(size, size))
        ky = np.fft.fftfreq(size)[:, None]
        kx = np.fft.fftfreq(size)[None, :]
        g = np.exp(-2 * (np.pi * scale) ** 2 * (ky ** 2 + kx ** 2))
        out = np.real(np.fft.ifft2(np.fft.fft2(f) * g))
        return out / (np.abs(out).max() + 1e-12)

    L = 0.7 * smooth(6) + 0.3 * smooth(2)
    a = 0.3 * smooth(8)
    b = 0.3 * smooth(8)
    img = np.stack([L + a, L + b, L - 0.5 * (a + b)])
    img = (img - img.min()) / (img.max() - img.min()) * 220 + 15
    return ImagePlanes(img)


def flat_image(value: float = 128.0, size: int = 256) -> ImagePlanes:
    return ImagePlanes(np.full((3, size, size), value))


@pytest.fixture
def small_image():
    return natural_image(0, 32)


@pytest.fixture
def corpus_dir():
    assert CORPUS_DIR.is_dir(), "run scripts/make_corpus.py first"
    return CORPUS_DIR
