import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from privdiffuse.distributions import make_stream
from privdiffuse.errors import DisconnectedGraphError, ParameterError, ParseError
from privdiffuse.graph import (
    FACEBOOK_SCHEDULE,
    SYNTHETIC_EDGES,
    SYNTHETIC_RADIUS,
    SYNTHETIC_SCHEDULE,
    Network,
    PrivacySchedule,
    complete_graph,
    distances,
    expected_geometric_edges,
    fit_schedule,
    generate_geometric_network,
    is_connected,
    load_edge_list,
    path_graph,
    resistance_distances,
    resistance_matrix_pinv,
    schedule_eval,
    shortest_path_distances,
    star_graph,
)


@st.composite
def connected_graphs(draw, max_nodes=8):
    n = draw(st.integers(2, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    # a random spanning tree keeps it connected
    order = draw(st.permutations(range(n)))
    tree = [(order[k], order[draw(st.integers(0, k - 1))]) for k in range(1, n)]
    return Network.from_edges(n, chosen + tree)


# ---------------------------------------------------------------- Network


def test_network_normalises_and_dedups():
    net = Network.from_edges(3, [(1, 0), (0, 1), (2, 1)])
    assert net.sorted_edges() == [(0, 1), (1, 2)]


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 3)], [(-1, 0)]])
def test_network_rejects_bad_edges(edges):
    with pytest.raises(ParameterError):
        Network.from_edges(3, edges)


def test_edge_list_round_trip():
    net = generate_geometric_network(30, 0.3, make_stream(1))
    back = load_edge_list(net.to_edge_list())
    assert back.node_count == 30 and back.edges == net.edges


def test_positions_csv():
    net = generate_geometric_network(3, 0.5, make_stream(2))
    lines = net.positions_csv().splitlines()
    assert lines[0] == "node,x,y" and len(lines) == 4
    x = float(lines[1].split(",")[1])
    assert x == net.positions[0, 0]
    with pytest.raises(ParameterError):
        path_graph(3).positions_csv()


# ---------------------------------------------------------------- shortest paths


def test_hops_examples():
    assert shortest_path_distances(path_graph(3), 0).tolist() == [0, 1, 2]
    assert shortest_path_distances(complete_graph(3), 0).tolist() == [0, 1, 1]
    d = shortest_path_distances(Network(2, frozenset()), 0)
    assert d[0] == 0 and math.isinf(d[1])


def test_hops_bad_source():
    with pytest.raises(ParameterError):
        shortest_path_distances(path_graph(3), 3)


# ---------------------------------------------------------------- resistance


def test_resistance_examples():
    assert resistance_distances(path_graph(2), 0)[1] == 1.0
    assert abs(resistance_distances(path_graph(3), 0)[2] - 2.0) < 1e-9
    assert abs(resistance_distances(complete_graph(3), 0)[1] - 2 / 3) < 1e-9


def test_resistance_star_leaves():
    d = resistance_distances(star_graph(5), 1)
    assert abs(d[0] - 1.0) < 1e-12 and abs(d[2] - 2.0) < 1e-12


def test_resistance_disconnected_raises():
    net = Network.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedGraphError, match="disconnected"):
        resistance_distances(net, 0)
    with pytest.raises(DisconnectedGraphError):
        resistance_matrix_pinv(net)


def test_resistance_single_node():
    assert resistance_distances(Network(1, frozenset()), 0).tolist() == [0.0]


def test_grounded_matches_pinv_on_random_graphs():
    stream = make_stream(3)
    done = 0
    while done < 20:
        N = int(stream.integers(2, 51))
        net = generate_geometric_network(N, float(stream.uniform(0.3, 0.8)), stream)
        if not is_connected(net):
            continue
        done += 1
        ref = resistance_matrix_pinv(net)
        for s in {0, N - 1, N // 2}:
            assert np.max(np.abs(resistance_distances(net, s) - ref[s])) < 1e-9


@given(connected_graphs())
@settings(max_examples=200, deadline=None)
def test_resistance_symmetric_and_bounded_by_hops(net):
    ref = resistance_matrix_pinv(net)
    N = net.node_count
    rows = np.array([resistance_distances(net, s) for s in range(N)])
    assert np.max(np.abs(rows - rows.T)) < 1e-9
    assert np.max(np.abs(rows - ref)) < 1e-9
    hops = np.array([shortest_path_distances(net, s) for s in range(N)])
    assert np.all(rows <= hops + 1e-9)


@given(connected_graphs())
@settings(max_examples=200, deadline=None)
def test_resistance_triangle_inequality_random(net):
    R = resistance_matrix_pinv(net)
    # R[i, k] <= R[i, j] + R[j, k] for all i, j, k
    assert np.all(R[:, None, :] <= R[:, :, None] + R[None, :, :] + 1e-9)


def test_resistance_triangle_inequality_exhaustive_small():
    # every connected graph on up to 5 labelled nodes
    for n in range(2, 6):
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for mask in range(1, 1 << len(pairs)):
            net = Network.from_edges(n, [p for b, p in enumerate(pairs) if mask >> b & 1])
            if not is_connected(net):
                continue
            R = resistance_matrix_pinv(net)
            assert np.all(R[:, None, :] <= R[:, :, None] + R[None, :, :] + 1e-9)


def test_distances_dispatch():
    assert distances(path_graph(3), 0, "hops").tolist() == [0, 1, 2]
    with pytest.raises(ParameterError):
        distances(path_graph(3), 0, "euclid")


# ---------------------------------------------------------------- schedules


def test_facebook_schedule_values():
    assert abs(schedule_eval(FACEBOOK_SCHEDULE, 0) - math.exp(4)) < 1e-12
    assert abs(schedule_eval(FACEBOOK_SCHEDULE, 1) - 2.0137527074704766) < 1e-12


def test_synthetic_schedule_endpoints():
    assert abs(SYNTHETIC_SCHEDULE(1) - 15) < 1e-9
    assert abs(SYNTHETIC_SCHEDULE(9) - 0.5) < 1e-9


def test_fit_schedule_coefficients():
    s = fit_schedule(1, 15, 9, 0.5)
    assert s.a == pytest.approx(math.log(0.5 / 15) / 8, rel=1e-15)
    assert abs(s.a - (-0.4251497)) < 1e-7
    assert abs(s.b - 3.1331999) < 1e-7
    assert abs(schedule_eval(s, 1) - 15) < 1e-12


@pytest.mark.parametrize("args", [(2, 5, 2, 1), (3, 5, 1, 1), (1, 1, 2, 2), (1, 1, 2, 3), (1, 5, 2, 0)])
def test_fit_schedule_degenerate(args):
    with pytest.raises(ParameterError):
        fit_schedule(*args)


def test_schedule_rejects_non_negative_slope():
    with pytest.raises(ParameterError):
        PrivacySchedule(0.0, 1.0)


def test_schedule_unreachable_maps_to_floor():
    assert schedule_eval(FACEBOOK_SCHEDULE, math.inf) == FACEBOOK_SCHEDULE.floor


def test_schedule_negative_distance():
    with pytest.raises(ParameterError):
        schedule_eval(FACEBOOK_SCHEDULE, -1)


@given(st.floats(-5, -0.01), st.floats(-5, 5), st.floats(0, 20), st.floats(0.001, 5))
def test_schedule_strictly_decreasing(a, b, d, gap):
    s = PrivacySchedule(a, b)
    e1, e2 = schedule_eval(s, d), schedule_eval(s, d + gap)
    assume(e1 > 1e-300)
    assert e1 > e2 >= 0
    assert e1 > 0


# ---------------------------------------------------------------- generation


def test_geometric_examples():
    assert len(generate_geometric_network(2, math.sqrt(2), make_stream(0)).edges) == 1
    assert len(generate_geometric_network(1, 0.3, make_stream(0)).edges) == 0


@pytest.mark.parametrize("r", [0.0, -0.1, 1.5])
def test_geometric_radius_validation(r):
    with pytest.raises(ParameterError):
        generate_geometric_network(10, r, make_stream(0))


def test_calibrated_radius_matches_edge_count():
    counts = [len(generate_geometric_network(150, SYNTHETIC_RADIUS, make_stream(s)).edges) for s in range(100)]
    assert abs(np.mean(counts) - SYNTHETIC_EDGES) / SYNTHETIC_EDGES < 0.15
    assert abs(expected_geometric_edges(150, SYNTHETIC_RADIUS) - SYNTHETIC_EDGES) / SYNTHETIC_EDGES < 0.01


def test_expected_edges_formula_against_monte_carlo():
    counts = [len(generate_geometric_network(150, 0.18, make_stream(s)).edges) for s in range(100)]
    assert abs(np.mean(counts) - expected_geometric_edges(150, 0.18)) / np.mean(counts) < 0.01


def test_geometric_deterministic():
    a = generate_geometric_network(50, 0.3, make_stream(9))
    b = generate_geometric_network(50, 0.3, make_stream(9))
    assert a.edges == b.edges and np.array_equal(a.positions, b.positions)


# ---------------------------------------------------------------- edge lists


def test_load_path():
    net = load_edge_list("0 1\n1 2")
    assert net.node_count == 3 and net.sorted_edges() == [(0, 1), (1, 2)]


def test_load_dedup_and_comments():
    net = load_edge_list("# friends\n0 1\n1 0  # again\n\n")
    assert net.sorted_edges() == [(0, 1)]


def test_load_header_sets_node_count():
    assert load_edge_list("# nodes 5\n0 1\n").node_count == 5


@pytest.mark.parametrize(
    "text,line",
    [("0 0", 1), ("0 1\n1 x", 2), ("0 1\n1 2 3", 2), ("0 1\n-1 2", 2)],
)
def test_load_errors_report_line(text, line):
    with pytest.raises(ParseError, match=f"line {line}"):
        load_edge_list(text)


def test_load_id_beyond_header():
    with pytest.raises(ParseError):
        load_edge_list("# nodes 2\n0 5\n")


def test_load_empty():
    with pytest.raises(ParseError):
        load_edge_list("# nothing\n")
