import numpy as np
import pytest

from moiresynth.imaging import save_image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def stripes(h, w, period=4, colors=((1.0, 0.1, 0.1), (0.1, 0.2, 1.0)), vertical=True):
    """High-contrast two-color stripes."""
    idx = np.arange(w if vertical else h) // (period // 2) % 2
    pal = np.asarray(colors, dtype=np.float64)
    row = pal[idx]
    if vertical:
        return np.broadcast_to(row[None, :, :], (h, w, 3)).copy()
    return np.broadcast_to(row[:, None, :], (h, w, 3)).copy()


def write_images(directory, images, prefix="img"):
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, img in enumerate(images):
        path = directory / f"{prefix}_{i:03d}.png"
        save_image(path, img)
        paths.append(path)
    return paths


@pytest.fixture
def small_corpus(tmp_path):
    """A few clean images, striped pattern frames and a reference pool."""
    gen = np.random.default_rng(7)
    clean = [gen.random((72, 80, 3)) * 0.6 + 0.2 for _ in range(3)]
    patterns = [
        stripes(96, 96, period=4),
        stripes(96, 96, period=6, colors=((0.9, 0.9, 0.2), (0.2, 0.8, 0.9)), vertical=False),
    ]
    refs = [gen.random((40, 40, 3)) for _ in range(2)]
    return {
        "clean": write_images(tmp_path / "clean", clean, "clean")[0].parent,
        "patterns": write_images(tmp_path / "patterns", patterns, "pat")[0].parent,
        "refs": write_images(tmp_path / "refs", refs, "ref")[0].parent,
        "root": tmp_path,
    }


_AC_RESULTS = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _AC_RESULTS[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.failed:
        _AC_RESULTS[report.nodeid.split("::")[-1]] = "error"


def pytest_terminal_summary(terminalreporter):
    if not _AC_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_AC_RESULTS, key=lambda n: int(n.split("_")[2])):
        status = "PASS" if _AC_RESULTS[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
