import pytest

ctdegrad_pipeline = pytest.importorskip(
    "ctdegrad.pipeline", reason="round-trip tests need the benchmark package"
)


@pytest.fixture(scope="session")
def bench_tree(tmp_path_factory):
    """Small generated benchmark tree to export from."""

    out = tmp_path_factory.mktemp("tree")
    cfg = ctdegrad_pipeline.GenerationConfig(
        num_slices=2,
        image_size=64,
        settings=("S1_noise", "M3_m+n"),
        levels=(0, 2),
    )
    result = ctdegrad_pipeline.generate(cfg, 9090, out)
    assert result.complete
    return out


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print the acceptance lines registered by the round-trip test."""

    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
