import numpy as np
import pytest
from PIL import Image

from dupdetect.image_core import RasterImage


def natural_image(name: str, size=(330, 200)) -> RasterImage:
    """A bundled scikit-image photo resized to ``size`` (width, height)."""
    from skimage import data

    arr = getattr(data, name)()
    if isinstance(arr, tuple):
        arr = arr[0]
    arr = np.asarray(Image.fromarray(arr[:, :, :3]).resize(size, Image.LANCZOS))
    return RasterImage.from_uint8(arr)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def coffee():
    return natural_image("coffee")


def random_image(rng, h, w) -> RasterImage:
    return RasterImage(rng.random((h, w, 3)))


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {name}"
    if detail:
        line += f" -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
