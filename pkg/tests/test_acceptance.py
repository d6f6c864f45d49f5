"""Acceptance suite: every criterion at its stated tolerance.

Each experiment runs once through the CLI driver with its default config;
criterion 15 repeats every run into a second output root and compares
artifact bytes. One PASS/FAIL line is printed per criterion.

Run directly with ``python3 -m pytest -v tests/test_acceptance.py``.
"""

import pytest

from stochunify.cli.config import SUBCOMMANDS
from stochunify.cli.main import run_subcommand

TITLES = {
    1: "harmonic ensemble density vs |psi0|^2",
    2: "free-packet spreading",
    3: "continuity residual order",
    4: "Nelson-map round trip",
    5: "telegraph Monte Carlo vs PDE",
    6: "checkerboard vs Weyl-Dirac",
    7: "Dirac dispersion and norm",
    8: "RS photon matrices and massless ladder",
    9: "su(N) algebra",
    10: "non-Abelian RS reduction and residuals",
    11: "network relaxation",
    12: "equilibrium and global constraint",
    13: "foam amplitude",
    14: "chain network vs checkerboard",
    15: "byte-identical reruns",
}


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    out = {}
    for sub in SUBCOMMANDS:
        first = run_subcommand(sub, root / "first")
        second = run_subcommand(sub, root / "second")
        out[sub] = (first, second)
    return out


def _report(capsys, criterion, passed, detail):
    status = "PASS" if passed else "FAIL"
    with capsys.disabled():
        print(f"\n[{status}] criterion {criterion:2d} {TITLES[criterion]}: {detail}")


def _checks(runs, criterion):
    found = []
    for sub, ((code, _, manifest), _) in runs.items():
        assert manifest is not None, f"{sub} did not produce a manifest (exit {code})"
        found += [(sub, a) for a in manifest["assertions"] if a["criterion"] == criterion]
    return found


@pytest.mark.parametrize("criterion", range(1, 15))
def test_criterion(runs, capsys, criterion):
    checks = _checks(runs, criterion)
    assert checks, f"no assertions recorded for criterion {criterion}"
    failed = [f"{sub}.{a['name']}={a['value']!r} (target {a['target']})" for sub, a in checks if not a["passed"]]
    detail = "; ".join(failed) if failed else f"{len(checks)} checks"
    _report(capsys, criterion, not failed, detail)
    assert not failed, detail


def test_criterion_15_determinism(runs, capsys):
    mismatches = []
    n_files = 0
    for sub, ((_, dir_a, _), (_, dir_b, _)) in runs.items():
        names_a = sorted(p.name for p in dir_a.iterdir() if p.name != "manifest.json")
        names_b = sorted(p.name for p in dir_b.iterdir() if p.name != "manifest.json")
        if names_a != names_b:
            mismatches.append(f"{sub}: file lists differ")
            continue
        for name in names_a:
            n_files += 1
            if (dir_a / name).read_bytes() != (dir_b / name).read_bytes():
                mismatches.append(f"{sub}/{name}")
    detail = "; ".join(mismatches) if mismatches else f"{n_files} artifacts identical across {len(runs)} subcommands"
    _report(capsys, 15, not mismatches, detail)
    assert not mismatches, detail
