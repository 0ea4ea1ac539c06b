import subprocess

import pytest


def run_core(*args) -> None:
    """Drive the core pipeline CLI (external interface of the primary package)."""
    proc = subprocess.run(["ttclab", *[str(a) for a in args]], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """12 train / 6 val images at 64x64 via the core generator CLI."""
    root = tmp_path_factory.mktemp("dataset")
    run_core("gen-dataset", "--train", 12, "--val", 6, "--seed", 4, "--canvas", 64, 64, "--out", root)
    return root / "manifest.json"


@pytest.fixture(scope="session")
def tiny_scenarios(tmp_path_factory):
    """4 small matched pairs with rendered frames at 128x128."""
    root = tmp_path_factory.mktemp("scenarios")
    run_core(
        "gen-scenarios",
        "--pairs", 4,
        "--taus", "0.3,0.6",
        "--seed", 6,
        "--canvas", 128, 128,
        "--vertex-range", 5, 8,
        "--notch-width", 12,
        "--notch-depth", 14,
        "--patient-frac", 0.7,
        "--out", root,
    )
    return root
