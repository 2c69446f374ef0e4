import math

import numpy as np
import pytest
import scipy.stats

from privdiffuse.errors import ParameterError, ParseError
from privdiffuse.graph import Network, SYNTHETIC_SCHEDULE, path_graph
from privdiffuse.simulator import (
    PRESETS,
    ScenarioConfig,
    default_weight_grid,
    diffusion_mse,
    equal_distance_group,
    expected_message_count,
    parse_scenario,
    prepare,
    run_coalition_experiment,
    run_diffusion,
    run_gossip,
    run_independent_baseline,
)
from privdiffuse.verify import ks_critical, ks_statistic


@pytest.fixture(scope="module")
def synthetic():
    cfg = PRESETS["synthetic"]()
    return cfg, cfg.build_network()


# ---------------------------------------------------------------- config


def test_config_defaults_fill_u():
    assert ScenarioConfig(n=3).u == (0.0, 0.0, 0.0)


@pytest.mark.parametrize(
    "kw",
    [dict(n=2, u=(1.0,)), dict(trials=0), dict(metric="euclid"), dict(schedule_a=-1.0), dict(schedule="nope")],
)
def test_config_validation(kw):
    with pytest.raises(ParameterError):
        ScenarioConfig(**kw)


def test_owner_outside_network():
    with pytest.raises(ParameterError):
        ScenarioConfig(network="path", nodes=3, owner=5).build_network()


def test_scenario_text_round_trip():
    cfg = ScenarioConfig(network="star", nodes=6, owner=0, n=1, u=(0.25,), schedule_a=-1.0, schedule_b=2.0,
                         group=(1, 2), seed=4, trials=7)
    assert parse_scenario(cfg.to_text()) == cfg


def test_parse_scenario_comments_and_errors():
    cfg = parse_scenario("# star run\nnetwork = star  # six nodes\nnodes = 6\nowner = 0\n")
    assert cfg.network == "star" and cfg.nodes == 6
    with pytest.raises(ParseError) as info:
        parse_scenario("colour = blue\n")
    assert info.value.field == "colour"
    with pytest.raises(ParseError) as info:
        parse_scenario("nodes = many\n")
    assert info.value.field == "nodes"
    with pytest.raises(ParseError):
        parse_scenario("trials = 0\n")


def test_include_ego_appends_hub(tmp_path):
    f = tmp_path / "friends.edges"
    f.write_text("0 1\n2 3\n")
    cfg = ScenarioConfig(network=str(f), include_ego=True, n=1)
    net = cfg.build_network()
    assert net.node_count == 5 and cfg.owner_id(net) == 4
    setup = prepare(cfg, net)
    assert set(setup.recipients.values()) == {1.0}


def test_synthetic_preset_shape(synthetic):
    cfg, net = synthetic
    assert net.node_count == 150 and len(net.edges) == 1281
    setup = prepare(cfg, net)
    assert sorted(set(setup.recipients.values())) == [float(d) for d in range(1, 10)]
    assert setup.eps_lo < 0.5 and setup.eps_hi > 15


# ---------------------------------------------------------------- centralized


def test_single_edge_one_response():
    cfg = ScenarioConfig(network="path", nodes=2, owner=0, n=1)
    res = run_diffusion(cfg)
    assert len(res.responses) == 1
    r = res.responses.responses[0]
    assert r.recipient == 1 and r.epsilon == SYNTHETIC_SCHEDULE(1)


def test_isolated_owner_errors():
    with pytest.raises(ParameterError):
        run_diffusion(ScenarioConfig(network="path", nodes=1, owner=0, n=1))


def test_diffusion_deterministic_and_errors_csv(synthetic):
    cfg, net = synthetic
    a, b = run_diffusion(cfg, net), run_diffusion(cfg, net)
    assert a.responses.to_csv() == b.responses.to_csv()
    lines = a.errors_csv().splitlines()
    assert lines[0] == "node,distance,epsilon,abs_error" and len(lines) == 150
    for e, r in zip(a.errors, a.responses):
        assert e.abs_error == float(np.linalg.norm(r.y - np.array(cfg.u)))


def test_unreachable_nodes_get_nothing():
    cfg = ScenarioConfig(network="path", nodes=3, owner=0, n=1)
    net = Network.from_edges(4, [(0, 1), (1, 2)])
    res = run_diffusion(cfg, net)
    assert [r.recipient for r in res.responses] == [1, 2]


def test_resistance_metric_scenario():
    cfg = ScenarioConfig(network="path", nodes=3, owner=0, n=1, metric="resistance")
    res = run_diffusion(cfg)
    assert [r.distance for r in res.responses] == pytest.approx([1.0, 2.0], abs=1e-12)


def test_per_distance_mse_monotone_and_matches_theory(synthetic):
    cfg, net = synthetic
    table = diffusion_mse(cfg, net, trials=10_000)
    ds = sorted(table)
    mse = [table[d][2] for d in ds]
    assert all(mse[i] <= mse[i + 1] * 1.02 for i in range(len(mse) - 1))
    for d in ds:
        eps, _, emp, theory = table[d]
        assert theory == 2 * 3 / eps**2
        assert abs(emp - theory) / theory < 0.1


def test_mse_at_eps_two():
    # a schedule placing distance 1 exactly at eps = 2
    cfg = ScenarioConfig(network="path", nodes=3, owner=0, n=2, schedule_a=-1.0, schedule_b=1.0 + math.log(2))
    table = diffusion_mse(cfg, trials=10_000)
    eps, _, emp, _ = table[1.0]
    assert eps == pytest.approx(2.0, rel=1e-14)
    assert abs(emp - 1.5) / 1.5 < 0.03


# ---------------------------------------------------------------- gossip


def test_gossip_star_center():
    cfg = PRESETS["star"]()
    state = run_gossip(cfg)
    eps1 = SYNTHETIC_SCHEDULE(1)
    assert all(state.caps[k] == eps1 for k in range(1, 6))
    assert len(state.messages) == 5 and {m.sender for m in state.messages} == {0}


def test_gossip_path():
    state = run_gossip(PRESETS["path"]())
    assert state.caps[1] == SYNTHETIC_SCHEDULE(1) and state.caps[2] == SYNTHETIC_SCHEDULE(2)
    assert state.hops == {0: 0, 1: 1, 2: 2}


@pytest.mark.parametrize("preset", ["path", "star", "synthetic"])
@pytest.mark.parametrize("seed", [0, 5])
def test_gossip_equals_centralized(preset, seed):
    cfg = PRESETS[preset]()
    cfg.seed = seed
    net = cfg.build_network()
    central = run_diffusion(cfg, net)
    state = run_gossip(cfg, net)
    for r in central.responses:
        assert state.response(r.recipient).tobytes() == r.y.tobytes()
        assert state.caps[r.recipient] == r.epsilon
    assert len(state.messages) == expected_message_count(net, central.setup.owner)
    assert len(state.messages) <= 2 * len(net.edges)


def test_gossip_message_log_csv():
    state = run_gossip(PRESETS["path"]())
    assert state.messages_csv().splitlines()[0] == "round,sender,receiver,cap,accepted"


def test_gossip_rejects_resistance():
    with pytest.raises(ParameterError):
        run_gossip(ScenarioConfig(network="path", nodes=3, owner=0, metric="resistance"))


def test_gossip_ignores_other_components():
    cfg = ScenarioConfig(network="path", nodes=3, owner=0, n=1)
    net = Network.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    state = run_gossip(cfg, net)
    assert set(state.held) == {0, 1, 2}


# ---------------------------------------------------------------- baseline and coalitions


def test_weight_grid_shapes():
    assert len(default_weight_grid(2)) == 11
    assert all(abs(w.sum() - 1) < 1e-12 for w in default_weight_grid(4, 2))
    with pytest.raises(ParameterError):
        default_weight_grid(0)


def test_singleton_coalition(synthetic):
    cfg, net = synthetic
    rep = run_coalition_experiment(cfg, [5], trials=20_000, network=net)
    assert rep.member_mse == rep.weighted_mse == [rep.best_single_mse]
    assert rep.no_gain


def test_empty_and_foreign_coalition(synthetic):
    cfg, net = synthetic
    with pytest.raises(ParameterError):
        run_coalition_experiment(cfg, [], trials=10, network=net)
    with pytest.raises(ParameterError):
        run_coalition_experiment(cfg, [cfg.owner], trials=10, network=net)


def test_coupled_equal_distance_no_gain(synthetic):
    cfg, net = synthetic
    group = equal_distance_group(cfg, 4, net)
    rep = run_coalition_experiment(cfg, group, trials=100_000, network=net)
    assert len(set(rep.distances)) == 1
    assert rep.no_gain and rep.verdict == "no gain"


def test_independent_four_members_gain(synthetic):
    cfg, net = synthetic
    group = equal_distance_group(cfg, 4, net)
    rep = run_coalition_experiment(cfg, group, weights=[np.full(4, 0.25)], mechanism="independent",
                                   trials=100_000, network=net)
    ratio = rep.min_weighted_mse / rep.best_single_mse
    assert abs(ratio - 0.25) / 0.25 < 0.1


def test_coalition_report_json(synthetic):
    cfg, net = synthetic
    rep = run_coalition_experiment(cfg, [1, 2], trials=1000, network=net)
    text = rep.to_json()
    assert '"verdict"' in text and text.endswith("\n")


def test_unknown_mechanism(synthetic):
    cfg, net = synthetic
    with pytest.raises(ParameterError):
        run_coalition_experiment(cfg, [1], mechanism="magic", trials=10, network=net)


def test_baseline_marginals_match_theory():
    cfg = ScenarioConfig(network="path", nodes=3, owner=0, n=2, trials=100_000)
    rep = run_coalition_experiment(cfg, [1, 2], mechanism="independent", trials=100_000)
    for mse, eps in zip(rep.member_mse, rep.levels):
        assert abs(mse - 6 / eps**2) / (6 / eps**2) < 0.03


def test_baseline_response_set():
    cfg = PRESETS["star"]()
    rs = run_independent_baseline(cfg)
    assert [r.recipient for r in rs] == [1, 2, 3, 4, 5]
    # fresh noise per recipient, unlike the coupled mechanism
    assert len({r.y.tobytes() for r in rs}) == 5


def test_baseline_single_recipient_matches_diffuse_law():
    ys_base, ys_coupled = [], []
    for seed in range(20_000):
        cfg = ScenarioConfig(network="path", nodes=2, owner=0, n=1, seed=seed)
        ys_base.append(run_independent_baseline(cfg).responses[0].y[0])
        ys_coupled.append(run_diffusion(cfg).responses.responses[0].y[0])
    assert scipy.stats.ks_2samp(ys_base, ys_coupled).pvalue > 0.01
    eps = SYNTHETIC_SCHEDULE(1)
    assert ks_statistic(ys_base, scipy.stats.laplace(scale=1 / eps).cdf) < ks_critical(len(ys_base))


def test_equal_distance_group_missing():
    with pytest.raises(ParameterError):
        equal_distance_group(PRESETS["path"](), 4)
