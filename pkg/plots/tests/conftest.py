"""Session fixtures: real curve files produced through the regret CLI, so the
end-to-end tests consume the primary package only through its external
interface."""

import subprocess
import sys

import pytest

Q = "0.9"


def _run_cli(args, out):
    cmd = [sys.executable, "-m", "nvregret.cli"] + args + ["--out", str(out)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="session")
def cli_curves(tmp_path_factory):
    root = tmp_path_factory.mktemp("curves")
    erm = _run_cli(
        ["curve", "--q", Q, "--dissim", "const:0.1:10", "--policy", "erm",
         "--n", "1..10"],
        root / "erm.csv",
    )
    # k = 5 needs at least five samples, so this curve starts later.
    knn = _run_cli(
        ["curve", "--q", Q, "--dissim", "const:0.1:10", "--policy", "knn:k=5",
         "--n", "5..10"],
        root / "knn5.csv",
    )
    bound = _run_cli(
        ["bound", "--q", Q, "--dissim", "const:0.1:10", "--curve", "1..10"],
        root / "bound.csv",
    )
    return {"erm": erm, "knn": knn, "bound": bound}
