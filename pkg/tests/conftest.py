import pytest

from reinflect import glyphs, patches

LATIN_RANGES = ((0x0021, 0x007E), (0x00A1, 0x00FF))


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    verdict = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    print(f"[ACCEPTANCE] {verdict} {name}")


@pytest.fixture(scope="session")
def font_path() -> str:
    path = glyphs.find_default_font()
    if path is None:
        pytest.skip("no default monospace font available")
    return path


@pytest.fixture(scope="session")
def render_config(font_path) -> glyphs.RenderConfig:
    return glyphs.RenderConfig(font_path)


@pytest.fixture(scope="session")
def latin_table(render_config) -> patches.PatchTable:
    """Patch table over Basic Latin + Latin-1 Supplement."""
    return patches.prepopulate(LATIN_RANGES, render_config)


@pytest.fixture(scope="session")
def full_table(render_config) -> patches.PatchTable:
    """Patch table over the default prepopulation ranges."""
    return patches.prepopulate(patches.DEFAULT_RANGES, render_config)
