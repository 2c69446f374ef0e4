"""Acceptance checks at their stated tolerances, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line (outside pytest's capture) before
asserting, so a run of this module reads as a checklist.
"""

import subprocess
import sys
import time

import pytest

from privdiffuse.verify import (
    check_bessel_exponential_1d,
    check_coalition,
    check_complexity_scaling,
    check_gossip_equivalence,
    check_increment_independence,
    check_jump_poisson,
    check_jump_sizes_1d,
    check_marginal,
    check_no_jump,
    check_privacy_ratio_1d,
    check_resistance,
    check_variance_law,
)


@pytest.fixture
def verdict(capsys):
    def report(name, passed, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {name}: {'PASS' if passed else 'FAIL'} | {detail}")
        return passed

    return report


def test_variance_law(verdict):
    details, ok = [], True
    for n, eps in ((1, 1.0), (2, 2.0), (20, 1.0)):
        r = check_variance_law(n, eps, trials=1_000_000)
        ok &= r.passed and r.wall_time < 60
        details.append(f"n={n} eps={eps}: {r.statistics['mean_sq_norm']:.4f} vs {r.targets['mean_sq_norm']:.4f} ({r.wall_time:.1f}s)")
    assert verdict("variance law", ok, "; ".join(details))


def test_jump_statistics(verdict):
    details, ok = [], True
    for n, e1, e2 in ((1, 1.0, 2.0), (20, 1.0, 2.0), (2, 0.5, 15.0)):
        r = check_jump_poisson(n, e1, e2, trials=100_000)
        ok &= r.passed and r.wall_time < 60
        s = r.statistics
        details.append(f"n={n} [{e1},{e2}]: mean {s['mean']:.4f} var {s['variance']:.4f} target {r.targets['mean']:.4f} p={s['p_value']:.3f}")
    assert verdict("jump statistics", ok, "; ".join(details))


def test_zero_jump_probability(verdict):
    details, ok = [], True
    for e2 in (1.2, 2.718281828459045):
        r = check_no_jump(1, 1.0, e2, trials=100_000)
        ok &= r.passed
        details.append(f"[1,{e2:.4g}]: {r.statistics['zero_jump_freq']:.5f} vs {r.targets['zero_jump_freq']:.5f}")
    assert verdict("zero-jump probability", ok, "; ".join(details))


def test_marginal_law(verdict):
    details, ok = [], True
    for n in (1, 2):
        for eps in (0.5, 2.0, 15.0):
            r = check_marginal(n, eps, trials=100_000)
            ok &= r.statistics["ks_radius"] < r.tolerance["ks_critical"]
            details.append(f"n={n} eps={eps}: KS {r.statistics['ks_radius']:.5f}")
    crit = 1.628 / 100_000**0.5
    assert verdict("marginal law", ok, f"critical {crit:.5f}; " + "; ".join(details))


def test_increment_independence(verdict):
    details, ok = [], True
    for n, e1, e2 in ((1, 0.5, 15.0), (2, 1.0, 2.0)):
        r = check_increment_independence(n, e1, e2, trials=1_000_000)
        ok &= r.passed
        details.append(f"n={n} ({e1},{e2}): max |rho| {r.statistics['max_abs_corr']:.5f}")
    assert verdict("increment independence", ok, "; ".join(details))


def test_one_dimensional_oracle(verdict):
    jumps = check_jump_sizes_1d(trials=100_000)
    bessel = check_bessel_exponential_1d(trials=100_000)
    ok = jumps.passed and bessel.passed
    detail = (
        f"jump KS per level bin {[round(k, 5) for k in jumps.statistics['ks']]} over {jumps.statistics['jumps']} jumps; "
        f"Bessel n=1 KS {bessel.statistics['ks']:.5f}, density err {bessel.statistics['density_err']:.1e}"
    )
    assert verdict("n=1 closed-form oracle", ok, detail)


def test_two_level_privacy(verdict):
    details, ok = [], True
    for e2 in (1.2, 1.35):
        r = check_privacy_ratio_1d(1.0, e2)
        ok &= r.passed
        s = r.statistics
        details.append(f"(1,{e2}): excess atom {s['max_excess_atom']:.2e} continuous {s['max_excess_continuous']:.2e}")
    assert verdict("two-level privacy ratio", ok, "; ".join(details))


def test_coalition_resilience(verdict):
    r = check_coalition(trials=100_000)
    s = r.statistics
    detail = (
        f"coupled gain equal {s['coupled_equal_gain']:.4f} mixed {s['coupled_mixed_gain']:.4f} (max 1.0101); "
        f"independent 4-member reduction {s['independent_equal_weight_reduction']:.2f}x (min 3)"
    )
    assert verdict("coalition resilience", r.passed, detail)


def test_resistance_distance(verdict):
    r = check_resistance(random_graphs=20, max_nodes=50)
    s = r.statistics
    detail = (
        f"triangle {s['triangle']:.12f}, path ends {s['path3_ends']:.12f}, edge {s['single_edge']:.12f}, "
        f"grounded vs pinv max err {s['pinv_max_err']:.1e}"
    )
    assert verdict("resistance distance", r.passed, detail)


def test_gossip_equivalence(verdict):
    r = check_gossip_equivalence()
    detail = "; ".join(f"{k}: identical={v['identical']} messages={v['messages']}" for k, v in r.statistics.items())
    assert verdict("gossip equivalence", r.passed, detail)


def test_complexity(verdict):
    details, ok = [], True
    for n in (1, 2, 20):
        r = check_complexity_scaling(n, trials=100_000)
        ok &= r.passed
        details.append(f"n={n}: slope {r.statistics['slope']:.3f} (target {n + 1}) intercept {r.statistics['intercept']:.3f}")
    assert verdict("complexity scaling", ok, "; ".join(details))


def test_full_suite_cli(verdict, tmp_path):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "privdiffuse.cli", "verify", "--suite", "full", "--out", str(tmp_path / "r.jsonl")],
        capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - t0
    ok = proc.returncode == 0 and elapsed < 300
    tail = proc.stderr.strip().splitlines()[-1] if proc.stderr.strip() else ""
    assert verdict("full verification suite", ok, f"exit {proc.returncode} in {elapsed:.1f}s; {tail}")
