"""Session fixtures: real artifact sets produced through the solver CLI."""

import subprocess
import sys

import pytest


def _spfem(*args):
    cmd = [sys.executable, "-m", "spfem", *args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(cmd)} failed:\n{proc.stderr}")


@pytest.fixture(scope="session")
def run_artifacts(tmp_path_factory):
    """diagnostics.csv, summary.json, and snapshots at t=0 and t=1."""
    outdir = tmp_path_factory.mktemp("run")
    _spfem(
        "run",
        "--set", "mesh.nc=12",
        "--set", "fem.k=1",
        "--set", "time.tau=0.05",
        "--set", "time.T=1",
        "--set", "output.snapshots=[0,1]",
        "--set", f"output.dir={outdir}",
    )
    return outdir


@pytest.fixture(scope="session")
def compare_artifacts(tmp_path_factory):
    """Per-scheme diagnostics pair from one compare invocation."""
    outdir = tmp_path_factory.mktemp("compare")
    _spfem(
        "compare",
        "--set", "mesh.nc=8",
        "--set", "fem.k=1",
        "--set", "time.tau=0.05",
        "--set", "time.T=0.2",
        "--set", f"output.dir={outdir}",
    )
    return outdir


@pytest.fixture(scope="session")
def sweep_artifacts(tmp_path_factory):
    """convergence.csv from a short time-refinement sweep."""
    outdir = tmp_path_factory.mktemp("sweep")
    _spfem(
        "conv-time",
        "--set", "mesh.nc=8",
        "--set", "fem.k=1",
        "--set", "time.tau=0.05",
        "--set", "time.T=0.2",
        "--set", "time.taus=[0.05,0.025]",
        "--set", f"output.dir={outdir}",
    )
    return outdir
