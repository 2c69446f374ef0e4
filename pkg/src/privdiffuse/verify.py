"""Statistical verification harness.

Each ``check_*`` function draws from its own seeded substream, compares
empirical statistics with their theoretical targets and returns a
:class:`VerificationReport`. Suites bundle the checks at fixed trial counts.
"""

from __future__ import annotations

import json
import math
import time
import zlib
from dataclasses import asdict, dataclass

import numpy as np
import scipy.integrate
import scipy.stats

from .distributions import (
    BesselParams,
    bessel_cdf,
    bessel_density,
    bessel_table,
    make_stream,
    sample_bessel,
    split,
)
from .errors import ParameterError
from .graph import (
    complete_graph,
    generate_geometric_network,
    is_connected,
    path_graph,
    resistance_distances,
    resistance_matrix_pinv,
)
from .process import simulate_batch

SHIPPED_SEED = 0
CONFIRM_SEED = 1

# asymptotic Kolmogorov-Smirnov critical constants c(alpha), used as c / sqrt(N)
KS_CRITICAL = {0.01: 1.628, 0.05: 1.358}
CHI2_ALPHA = 0.01
CHI2_MAX_COUNT = 15
CHI2_MIN_EXPECTED = 5.0


@dataclass
class VerificationReport:
    name: str
    params: dict
    statistics: dict
    targets: dict
    tolerance: dict
    passed: bool
    trials: int
    wall_time: float = 0.0
    notes: str = ""

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def summary(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name} {json.dumps(_plain(self.params))} ({self.wall_time:.1f}s)"


def _plain(obj):
    """Convert numpy scalars and arrays so ``json`` can write them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _stream(seed: int, name: str, params) -> np.random.Generator:
    # substream keyed by check identity so suites can be reordered freely
    key = zlib.crc32(f"{name}:{params!r}".encode())
    return split(make_stream(seed), key)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        rep = fn(*args, **kwargs)
        rep.wall_time = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    wrapper.__wrapped__ = fn
    return wrapper


# --------------------------------------------------------------------------
# goodness-of-fit primitives


def ks_statistic(samples, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance of ``samples`` from ``cdf``.

    ``cdf`` must accept an array. Samples need not be pre-sorted.
    """
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    N = x.size
    if N == 0:
        raise ParameterError("KS statistic needs at least one sample")
    F = np.clip(np.asarray(cdf(x), dtype=float), 0.0, 1.0)
    i = np.arange(1, N + 1)
    return float(max(np.max(i / N - F), np.max(F - (i - 1) / N)))


def ks_critical(N: int, alpha: float = 0.01) -> float:
    if alpha not in KS_CRITICAL:
        raise ParameterError(f"KS critical value only tabulated for alpha in {sorted(KS_CRITICAL)}")
    return KS_CRITICAL[alpha] / math.sqrt(N)


def poisson_chi_square(counts, mean: float) -> tuple[float, int, float]:
    """Chi-square of integer ``counts`` against Poisson(``mean``).

    Bins are 0..14 and a pooled ``>= 15``; adjacent bins are merged until each
    expects at least 5. Returns ``(statistic, dof, p_value)``.
    """
    counts = np.asarray(counts)
    N = counts.size
    obs = np.bincount(np.minimum(counts, CHI2_MAX_COUNT), minlength=CHI2_MAX_COUNT + 1).astype(float)
    p = scipy.stats.poisson.pmf(np.arange(CHI2_MAX_COUNT), mean)
    p = np.append(p, max(0.0, 1.0 - p.sum()))
    exp = N * p
    merged_o, merged_e = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= CHI2_MIN_EXPECTED:
            merged_o.append(acc_o)
            merged_e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if merged_e:
            merged_o[-1] += acc_o
            merged_e[-1] += acc_e
        else:
            merged_o.append(acc_o)
            merged_e.append(acc_e)
    o, e = np.array(merged_o), np.array(merged_e)
    dof = len(o) - 1
    if dof < 1:
        return 0.0, 0, 1.0
    stat = float(((o - e) ** 2 / e).sum())
    return stat, dof, float(scipy.stats.chi2.sf(stat, dof))


def _rel(a, b):
    return abs(a - b) / abs(b)


# --------------------------------------------------------------------------
# process checks


@_timed
def check_jump_poisson(n, eps1, eps2, trials=100_000, seed=SHIPPED_SEED, jump_bias=0.0) -> VerificationReport:
    """Jump count over ``[eps1, eps2]`` is Poisson((n + 1) ln(eps2 / eps1))."""
    if trials < 10_000:
        raise ParameterError("jump-count check needs at least 10^4 trials")
    params = dict(n=n, eps1=eps1, eps2=eps2)
    stream = _stream(seed, "jump_poisson", params)
    res = simulate_batch(n, eps1, eps2, trials, stream, jump_bias=jump_bias)
    k = res.jumps
    target = (n + 1) * math.log(eps2 / eps1)
    mean, var = float(k.mean()), float(k.var(ddof=1))
    chi2, dof, pval = poisson_chi_square(k, target)
    ok_mean = _rel(mean, target) <= 0.01 if target > 0 else mean == 0
    ok_var = _rel(var, target) <= 0.03 if target > 0 else var == 0
    return VerificationReport(
        "jump_poisson", params,
        dict(mean=mean, variance=var, chi2=chi2, dof=dof, p_value=pval),
        dict(mean=target, variance=target),
        dict(mean_rel=0.01, variance_rel=0.03, chi2_alpha=CHI2_ALPHA),
        bool(ok_mean and ok_var and pval >= CHI2_ALPHA), trials,
    )


def _marginal_domain(eps):
    return min(eps, 0.5), max(eps, 15.0)


@_timed
def check_marginal(n, eps, trials=100_000, seed=SHIPPED_SEED, jump_bias=0.0, domain=None) -> VerificationReport:
    """Radius of ``V_eps`` is Gamma(n, 1/eps); at n = 1 the signed value is Laplace.

    The trace is drawn on ``domain`` (default ``[0.5, 15]`` widened to contain
    ``eps``) and read at ``eps``, so jumps above ``eps`` are exercised.
    """
    lo, hi = domain or _marginal_domain(eps)
    params = dict(n=n, eps=eps, eps_lo=lo, eps_hi=hi)
    stream = _stream(seed, "marginal", params)
    v = simulate_batch(n, lo, hi, trials, stream, query=[eps], jump_bias=jump_bias).values[:, 0, :]
    r = np.linalg.norm(v, axis=1)
    crit = ks_critical(trials)
    ks_r = ks_statistic(r, scipy.stats.gamma(n, scale=1.0 / eps).cdf)
    msq = float((r**2).mean())
    target_msq = n * (n + 1) / eps**2
    stats = dict(ks_radius=ks_r, mean_sq_radius=msq)
    ok = ks_r < crit and _rel(msq, target_msq) <= 0.02
    if n == 1:
        ks_signed = ks_statistic(v[:, 0], scipy.stats.laplace(scale=1.0 / eps).cdf)
        stats["ks_signed_laplace"] = ks_signed
        ok = ok and ks_signed < crit
    return VerificationReport(
        "marginal", params, stats,
        dict(ks_radius=0.0, mean_sq_radius=target_msq),
        dict(ks_critical=crit, mean_sq_rel=0.02), bool(ok), trials,
    )


@_timed
def check_no_jump(n, eps1, eps2, trials=100_000, seed=SHIPPED_SEED, jump_bias=0.0) -> VerificationReport:
    """P(no jump in ``[eps1, eps2]``) = (eps1 / eps2)^(n + 1)."""
    params = dict(n=n, eps1=eps1, eps2=eps2)
    stream = _stream(seed, "no_jump", params)
    res = simulate_batch(n, eps1, eps2, trials, stream, jump_bias=jump_bias)
    freq = float((res.jumps == 0).mean())
    target = (eps1 / eps2) ** (n + 1)
    ok = freq == 1.0 if eps1 == eps2 else abs(freq - target) <= 0.005
    return VerificationReport(
        "no_jump", params, dict(zero_jump_freq=freq), dict(zero_jump_freq=target),
        dict(abs=0.005), bool(ok), trials,
    )


@_timed
def check_increment_independence(n, eps1, eps2, trials=1_000_000, seed=SHIPPED_SEED, jump_bias=0.0) -> VerificationReport:
    """``V_eps1 - V_eps2`` is uncorrelated with ``V_eps2`` componentwise."""
    params = dict(n=n, eps1=eps1, eps2=eps2)
    if eps1 == eps2:
        return VerificationReport(
            "increment_independence", params, dict(max_abs_corr=0.0), dict(max_abs_corr=0.0),
            dict(abs=0.01), True, trials, notes="degenerate interval: increment is identically 0",
        )
    stream = _stream(seed, "increment_independence", params)
    v = simulate_batch(n, eps1, eps2, trials, stream, query=[eps1, eps2], jump_bias=jump_bias).values
    z, top = v[:, 0, :] - v[:, 1, :], v[:, 1, :]
    corr = np.corrcoef(np.hstack([z, top]), rowvar=False)[:n, n:]
    worst = float(np.max(np.abs(corr)))
    return VerificationReport(
        "increment_independence", params,
        dict(correlations=corr.tolist(), max_abs_corr=worst), dict(max_abs_corr=0.0),
        dict(abs=0.01), worst < 0.01, trials,
    )


@_timed
def check_variance_law(n, eps, trials=1_000_000, seed=SHIPPED_SEED, jump_bias=0.0) -> VerificationReport:
    """Mean squared norm ``E|V_eps|^2 = n (n + 1) / eps^2``, read off a trace on ``[eps, 2 eps]``."""
    params = dict(n=n, eps=eps, eps_lo=eps, eps_hi=2 * eps)
    stream = _stream(seed, "variance_law", params)
    v = simulate_batch(n, eps, 2 * eps, trials, stream, query=[eps], jump_bias=jump_bias).values[:, 0, :]
    msq = float(np.einsum("ij,ij->i", v, v).mean())
    target = n * (n + 1) / eps**2
    return VerificationReport(
        "variance_law", params, dict(mean_sq_norm=msq), dict(mean_sq_norm=target),
        dict(rel=0.02), _rel(msq, target) <= 0.02, trials,
    )


@_timed
def check_complexity_scaling(n, ratios=(2, 4, 8, 16), trials=100_000, seed=SHIPPED_SEED, jump_bias=0.0) -> VerificationReport:
    """Mean loop iterations grow as ``(n + 1) ln(ratio) + 1``."""
    ratios = [float(r) for r in ratios]
    if len(ratios) < 3:
        raise ParameterError("complexity regression needs at least 3 ratios")
    if any(r < 1 for r in ratios):
        raise ParameterError("ratios must be at least 1")
    params = dict(n=n, ratios=ratios)
    stream = _stream(seed, "complexity_scaling", params)
    logs, means = [], []
    for r in ratios:
        res = simulate_batch(n, 1.0, r, trials, stream, jump_bias=jump_bias)
        logs.append(math.log(r))
        means.append(float(res.iterations.mean()))
    slope, intercept = np.polyfit(logs, means, 1)
    ok = _rel(slope, n + 1) <= 0.05 and abs(intercept - 1.0) <= 0.5
    return VerificationReport(
        "complexity_scaling", params,
        dict(slope=float(slope), intercept=float(intercept), mean_iterations=means),
        dict(slope=n + 1, intercept=1.0), dict(slope_rel=0.05, intercept_abs=0.5), bool(ok), trials,
    )


@_timed
def check_jump_sizes_1d(eps_lo=0.5, eps_hi=15.0, trials=100_000, bins=4, seed=SHIPPED_SEED, jump_bias=0.0) -> VerificationReport:
    """At n = 1 a jump at level ``e`` has Exponential(mean 1/e) magnitude.

    Jumps are grouped into ``bins`` level-quantile bins and ``e |jump|`` is
    tested against Exponential(1) in each, each bin at the alpha = 0.01 level.
    """
    params = dict(eps_lo=eps_lo, eps_hi=eps_hi, bins=bins)
    stream = _stream(seed, "jump_sizes_1d", params)
    res = simulate_batch(1, eps_lo, eps_hi, trials, stream, harvest=True, jump_bias=jump_bias)
    lev = res.harvest_levels
    scaled = lev * np.abs(res.harvest_steps[:, 0])
    edges = np.quantile(lev, np.linspace(0, 1, bins + 1))
    which = np.clip(np.searchsorted(edges, lev, side="right") - 1, 0, bins - 1)
    ks, crit = [], []
    for b in range(bins):
        s = scaled[which == b]
        ks.append(ks_statistic(s, scipy.stats.expon.cdf))
        crit.append(ks_critical(s.size))
    ok = all(k < c for k, c in zip(ks, crit))
    return VerificationReport(
        "jump_sizes_1d", params,
        dict(jumps=int(lev.size), level_edges=edges.tolist(), ks=ks),
        dict(ks=[0.0] * bins), dict(ks_critical=crit), bool(ok), trials,
    )


@_timed
def check_bessel_exponential_1d(beta=1.0, trials=100_000, seed=SHIPPED_SEED) -> VerificationReport:
    """At n = 1 the Bessel law is Exponential(mean beta): density, CDF and sampler."""
    params = dict(beta=beta)
    p = BesselParams(1, beta)
    x = np.linspace(0.01, 30 * beta, 2001)
    dens_err = float(np.max(np.abs(bessel_density(p, x) - np.exp(-x / beta) / beta) * beta))
    cdf_err = float(np.max(np.abs(bessel_cdf(p, x) + np.expm1(-x / beta))))
    stream = _stream(seed, "bessel_exponential_1d", params)
    s = sample_bessel(p, stream, trials)
    ks = ks_statistic(s, scipy.stats.expon(scale=beta).cdf)
    crit = ks_critical(trials)
    ok = dens_err < 1e-10 and cdf_err < 1e-10 and ks < crit
    return VerificationReport(
        "bessel_exponential_1d", params,
        dict(density_err=dens_err, cdf_err=cdf_err, ks=ks),
        dict(density_err=0.0, cdf_err=0.0, ks=0.0),
        dict(density_abs=1e-10, cdf_abs=1e-10, ks_critical=crit), bool(ok), trials,
    )


@_timed
def check_bessel_sampler(n, points=4001) -> VerificationReport:
    """Inverse-CDF table error against the closed-form Bessel CDF (unit scale)."""
    params = dict(n=n)
    table = bessel_table(n)
    x = np.linspace(0.0, table.x_max, points)[1:]
    err = float(np.max(np.abs(table.sampler_cdf(x) - bessel_cdf(BesselParams(n, 1.0), x))))
    return VerificationReport(
        "bessel_sampler", params, dict(max_cdf_err=err), dict(max_cdf_err=0.0),
        dict(abs=1e-6), err < 1e-6, points - 1,
    )


# --------------------------------------------------------------------------
# two-level privacy at n = 1


def two_level_joint_1d(eps1: float, eps2: float):
    """Joint law of ``(V_eps1, V_eps2)`` at n = 1.

    ``V_eps2`` is Laplace(1/eps2) and ``V_eps1 = V_eps2 + Z`` with ``Z``
    independent, P(Z = 0) = (eps1/eps2)^2 and continuous part
    ``(eps1/eps2)^2 (eps2^2 - eps1^2) / (2 eps1) e^{-eps1 |z|}``.
    Returns ``(atom_weight, continuous_density_of_z, density_of_y)``.
    """
    ratio = (eps1 / eps2) ** 2
    coef = ratio * (eps2**2 - eps1**2) / (2.0 * eps1)

    def phi_c(z):
        return coef * np.exp(-eps1 * np.abs(z))

    def top(y):
        return 0.5 * eps2 * np.exp(-eps2 * np.abs(y))

    return ratio, phi_c, top


@_timed
def check_privacy_ratio_1d(eps1, eps2, grid=400, half_width=10.0, shift_step=0.1, max_shift=1.0,
                           enforce_regime=True) -> VerificationReport:
    """Log-density shift of the n = 1 two-level release stays below ``eps2 |delta|``.

    Outputs ``(u + V_eps1, u + V_eps2)`` are compared for ``u = 0`` and
    ``u = delta`` on a ``grid x grid`` lattice. The diagonal atom and the
    continuous part are compared separately. The marginal of ``V_eps1`` is
    also checked against Laplace(1/eps1) by quadrature.
    """
    if not (0 < eps1 <= eps2):
        raise ParameterError("need 0 < eps1 <= eps2")
    if enforce_regime and not eps2 < math.sqrt(2.0) * eps1:
        raise ParameterError(
            f"eps2 = {eps2} is outside the construction regime eps1 <= eps2 < sqrt(2) eps1"
        )
    params = dict(eps1=eps1, eps2=eps2, grid=grid, half_width=half_width)
    atom, phi_c, top = two_level_joint_1d(eps1, eps2)
    g = np.linspace(-half_width, half_width, grid)
    a, b = np.meshgrid(g, g, indexing="ij")
    shifts = np.round(np.arange(-max_shift, max_shift + shift_step / 2, shift_step), 12)
    slack = 1e-6
    worst_cont = worst_atom = -np.inf
    for d in shifts:
        bound = eps2 * abs(d)
        # continuous part: density g(a - u, b - u) = top(b - u) phi_c(a - b)
        if atom < 1.0:
            l0 = np.log(top(b) * phi_c(a - b))
            l1 = np.log(top(b - d) * phi_c(a - b))
            worst_cont = max(worst_cont, float(np.max(np.abs(l0 - l1)) - bound))
        # atom on the diagonal: mass atom * top(y - u)
        la0 = np.log(atom * top(g))
        la1 = np.log(atom * top(g - d))
        worst_atom = max(worst_atom, float(np.max(np.abs(la0 - la1)) - bound))

    # marginal of V_eps1 recovered from the joint
    probe = np.array([0.0, 0.3, 1.0, 2.5, -4.0])
    marg_err = 0.0
    for x in probe:
        cont = 0.0
        if atom < 1.0:
            cont = sum(
                scipy.integrate.quad(lambda y: phi_c(x - y) * top(y), lo, hi, epsabs=1e-13, epsrel=1e-12)[0]
                for lo, hi in ((-np.inf, min(0.0, x)), (min(0.0, x), max(0.0, x)), (max(0.0, x), np.inf))
            )
        est = atom * top(x) + cont
        marg_err = max(marg_err, abs(est - 0.5 * eps1 * math.exp(-eps1 * abs(x))))
    stats = dict(
        max_excess_continuous=worst_cont if math.isfinite(worst_cont) else None,
        max_excess_atom=worst_atom, atom_weight=atom, marginal_err=marg_err,
    )
    ok = worst_atom <= slack and (worst_cont <= slack or atom == 1.0) and marg_err < 1e-8
    return VerificationReport(
        "privacy_ratio_1d", params, stats,
        dict(max_excess=0.0, atom_weight=(eps1 / eps2) ** 2, marginal_err=0.0),
        dict(slack=slack, marginal_abs=1e-8), bool(ok), grid * grid,
    )


# --------------------------------------------------------------------------
# graph and scenario checks


@_timed
def check_resistance(random_graphs=20, max_nodes=50, seed=SHIPPED_SEED) -> VerificationReport:
    """Known resistances plus grounded solve vs pseudo-inverse on random graphs."""
    known = {
        "triangle": (resistance_distances(complete_graph(3), 0)[1], 2.0 / 3.0),
        "path3_ends": (resistance_distances(path_graph(3), 0)[2], 2.0),
        "single_edge": (resistance_distances(path_graph(2), 0)[1], 1.0),
    }
    known_err = max(abs(v - t) for v, t in known.values())
    stream = _stream(seed, "resistance", (random_graphs, max_nodes))
    worst, made = 0.0, 0
    while made < random_graphs:
        N = int(stream.integers(2, max_nodes + 1))
        net = generate_geometric_network(N, float(stream.uniform(0.3, 0.8)), stream)
        if not is_connected(net):
            continue
        made += 1
        ref = resistance_matrix_pinv(net)
        src = int(stream.integers(N))
        worst = max(worst, float(np.max(np.abs(resistance_distances(net, src) - ref[src]))))
    ok = known_err <= 1e-9 and worst <= 1e-9
    return VerificationReport(
        "resistance", dict(random_graphs=random_graphs, max_nodes=max_nodes),
        dict({k: v for k, (v, _) in known.items()}, pinv_max_err=worst),
        dict({k: t for k, (_, t) in known.items()}, pinv_max_err=0.0),
        dict(abs=1e-9), bool(ok), random_graphs,
    )


@_timed
def check_gossip_equivalence(presets=("path", "star", "synthetic"), seed=SHIPPED_SEED) -> VerificationReport:
    """Gossip outputs equal centralized outputs bit for bit, with the predicted message count."""
    from .simulator import PRESETS, expected_message_count, run_diffusion, run_gossip

    stats, ok = {}, True
    for name in presets:
        cfg = PRESETS[name]()
        cfg.seed = seed
        net = cfg.build_network()
        central = run_diffusion(cfg, net)
        gossip = run_gossip(cfg, net)
        same = all(gossip.response(r.recipient).tobytes() == r.y.tobytes() for r in central.responses)
        same = same and set(gossip.held) - {gossip.owner} == {r.recipient for r in central.responses}
        caps = all(gossip.caps[r.recipient] == r.epsilon for r in central.responses)
        msgs = len(gossip.messages) == expected_message_count(net, central.setup.owner)
        stats[name] = dict(identical=bool(same), caps_exact=bool(caps), messages=len(gossip.messages))
        ok = ok and same and caps and msgs
    return VerificationReport(
        "gossip_equivalence", dict(presets=list(presets)), stats,
        dict(identical=True), dict(exact=True), bool(ok), len(presets),
    )


@_timed
def check_coalition(trials=100_000, seed=SHIPPED_SEED) -> VerificationReport:
    """On the synthetic preset, pooling gains nothing under coupled noise.

    Coupled: a 4-member equal-distance group and a mixed-distance group must
    not beat their best member by more than 1%. Independent control: the
    equal-distance group must gain at least 3x.
    """
    from .simulator import (
        COALITION_SLACK,
        PRESETS,
        equal_distance_group,
        prepare,
        run_coalition_experiment,
    )

    cfg = PRESETS["synthetic"]()
    cfg.seed = seed
    net = cfg.build_network()
    setup = prepare(cfg, net)
    equal = equal_distance_group(cfg, 4, net)
    by_d = {}
    for k in sorted(setup.recipients):
        by_d.setdefault(setup.recipients[k], k)
    mixed = [by_d[d] for d in sorted(by_d)[:4]]
    coupled_eq = run_coalition_experiment(cfg, equal, trials=trials, network=net)
    coupled_mx = run_coalition_experiment(cfg, mixed, trials=trials, network=net)
    indep = run_coalition_experiment(cfg, equal, mechanism="independent", trials=trials, network=net)
    eq_w = [np.full(4, 0.25)]
    indep_eq = run_coalition_experiment(cfg, equal, weights=eq_w, mechanism="independent", trials=trials, network=net)
    reduction = indep.best_single_mse / indep_eq.min_weighted_mse
    ok = coupled_eq.no_gain and coupled_mx.no_gain and reduction >= 3.0
    return VerificationReport(
        "coalition", dict(equal_group=equal, mixed_group=mixed),
        dict(
            coupled_equal_gain=coupled_eq.gain, coupled_mixed_gain=coupled_mx.gain,
            independent_equal_weight_reduction=reduction, independent_best_gain=indep.gain,
        ),
        dict(coupled_gain_max=1.0 / (1.0 - COALITION_SLACK), independent_reduction_min=3.0),
        dict(slack=COALITION_SLACK), bool(ok), trials,
    )


# --------------------------------------------------------------------------
# suites


def _suite_plan(suite: str):
    if suite not in ("default", "full"):
        raise ParameterError(f"unknown suite {suite!r}; use 'default' or 'full'")
    full = suite == "full"
    big = 1_000_000 if full else 200_000
    plan = []
    for n, e1, e2 in ((1, 1.0, 2.0), (20, 1.0, 2.0), (2, 0.5, 15.0)):
        plan.append((check_jump_poisson, dict(n=n, eps1=e1, eps2=e2, trials=100_000), True))
    for n, e1, e2 in ((1, 1.0, 1.2), (1, 1.0, math.e)):
        plan.append((check_no_jump, dict(n=n, eps1=e1, eps2=e2, trials=100_000), True))
    for n in (1, 2):
        for eps in (0.5, 2.0, 15.0):
            plan.append((check_marginal, dict(n=n, eps=eps, trials=100_000), True))
    for n, e1, e2 in ((1, 0.5, 15.0), (2, 1.0, 2.0)):
        plan.append((check_increment_independence, dict(n=n, eps1=e1, eps2=e2, trials=big), True))
    for n, eps in ((1, 1.0), (2, 2.0), (20, 1.0)):
        plan.append((check_variance_law, dict(n=n, eps=eps, trials=big), True))
    for n in (1, 2, 20):
        plan.append((check_complexity_scaling, dict(n=n, trials=100_000), True))
    plan.append((check_jump_sizes_1d, dict(trials=100_000), True))
    plan.append((check_bessel_exponential_1d, dict(trials=100_000), False))
    for e1, e2 in ((1.0, 1.2), (1.0, 1.35)):
        plan.append((check_privacy_ratio_1d, dict(eps1=e1, eps2=e2), None))
    if full:
        for n in (1, 2, 3, 20):
            plan.append((check_bessel_sampler, dict(n=n), None))
    plan.append((check_resistance, dict(), False))
    plan.append((check_gossip_equivalence, dict(), False))
    plan.append((check_coalition, dict(trials=100_000), False))
    return plan


def run_suite(suite="default", seed=SHIPPED_SEED, jump_bias=0.0, on_report=None) -> list[VerificationReport]:
    """Run every check of ``suite``; ``on_report`` is called after each one.

    ``jump_bias`` is forwarded to checks that simulate the process and exists
    as a negative control: any positive value should make the suite fail.
    """
    reports = []
    for fn, kwargs, takes_bias in _suite_plan(suite):
        kw = dict(kwargs)
        if takes_bias is not None:
            kw["seed"] = seed
        if takes_bias and jump_bias:
            kw["jump_bias"] = jump_bias
        rep = fn(**kw)
        reports.append(rep)
        if on_report is not None:
            on_report(rep)
    return reports


def write_report(reports, stream) -> None:
    """One JSON record per line."""
    for r in reports:
        stream.write(r.to_json() + "\n")
