"""End-to-end diffusion scenarios on networks.

Covers centralized release, trim-and-forward gossip among honest-but-curious
neighbours, coalition pooling experiments and the independent-noise baseline.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import make_stream, sample_laplace_nd, split
from .errors import ParameterError, ParseError
from .graph import (
    SCHEDULES,
    SYNTHETIC_NODES,
    SYNTHETIC_RADIUS,
    Network,
    PrivacySchedule,
    distances,
    generate_geometric_network,
    load_edge_list,
    path_graph,
    schedule_eval,
    star_graph,
)
from .mechanism import PrivateDatum, Response, ResponseSet, diffuse, response_mse_theoretical
from .process import ProcessTrace, evaluate, sample_trace, shifted, simulate_batch, trim

# connected at SYNTHETIC_RADIUS with 1281 edges; node 49 is nearest the
# origin corner and sees hop distances 1..9
SYNTHETIC_NETWORK_SEED = 10
SYNTHETIC_OWNER = 49
DOMAIN_PAD = 1.01
COALITION_SLACK = 0.01

# substream indices under the scenario seed
_TRACE_STREAM = 0
_MC_STREAM = 1
_BASELINE_STREAM = 2


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one diffusion run.

    ``network`` is ``"generated"``, ``"path"``, ``"star"`` or a path to an edge
    list. ``schedule`` names a preset unless ``schedule_a``/``schedule_b`` are
    given. With ``include_ego`` an extra node joined to every listed node is
    appended and becomes the owner (ego-network files omit the ego).
    """

    network: str = "generated"
    nodes: int = SYNTHETIC_NODES
    radius: float = SYNTHETIC_RADIUS
    network_seed: int = SYNTHETIC_NETWORK_SEED
    owner: int = SYNTHETIC_OWNER
    n: int = 2
    u: tuple = ()
    metric: str = "hops"
    schedule: str = "synthetic"
    schedule_a: float | None = None
    schedule_b: float | None = None
    seed: int = 0
    trials: int = 1
    group: tuple = ()
    include_ego: bool = False

    def __post_init__(self):
        self.u = tuple(float(x) for x in self.u) if self.u else (0.0,) * self.n
        self.group = tuple(int(g) for g in self.group)
        if len(self.u) != self.n:
            raise ParameterError(f"u has {len(self.u)} components but n = {self.n}")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if self.metric not in ("hops", "resistance"):
            raise ParameterError(f"unknown metric {self.metric!r}")
        if (self.schedule_a is None) != (self.schedule_b is None):
            raise ParameterError("give both schedule_a and schedule_b or neither")
        if self.schedule_a is None and self.schedule not in SCHEDULES:
            raise ParameterError(f"unknown schedule preset {self.schedule!r}")

    def privacy_schedule(self) -> PrivacySchedule:
        if self.schedule_a is not None:
            return PrivacySchedule(float(self.schedule_a), float(self.schedule_b))
        return SCHEDULES[self.schedule]

    def build_network(self) -> Network:
        if self.network == "generated":
            net = generate_geometric_network(self.nodes, self.radius, make_stream(self.network_seed))
        elif self.network == "path":
            net = path_graph(self.nodes)
        elif self.network == "star":
            net = star_graph(self.nodes - 1)
        else:
            net = load_edge_list(Path(self.network).read_text())
        if self.include_ego:
            ego = net.node_count
            net = Network.from_edges(ego + 1, list(net.edges) + [(k, ego) for k in range(ego)])
        if not (0 <= self.owner_id(net) < net.node_count):
            raise ParameterError(f"owner {self.owner} is not a node of the network")
        return net

    def owner_id(self, net: Network) -> int:
        return net.node_count - 1 if self.include_ego else self.owner

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {
    "nodes": int, "network_seed": int, "owner": int, "n": int, "seed": int, "trials": int,
    "radius": float, "schedule_a": float, "schedule_b": float,
}


def parse_scenario(text: str) -> ScenarioConfig:
    """Read flat ``key = value`` lines (``#`` comments) into a config."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string("[scenario]\n" + text)
    except configparser.Error as exc:
        raise ParseError(f"malformed scenario document: {exc}") from exc
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    kwargs = {}
    for key, raw in cp["scenario"].items():
        if key not in known:
            raise ParseError(f"unknown scenario field {key!r}", field=key)
        raw = raw.strip()
        try:
            if key in ("u", "group"):
                conv = float if key == "u" else int
                kwargs[key] = tuple(conv(x) for x in raw.split(",") if x.strip())
            elif key == "include_ego":
                kwargs[key] = cp["scenario"].getboolean(key)
            elif key in _FIELD_TYPES:
                kwargs[key] = _FIELD_TYPES[key](raw)
            else:
                kwargs[key] = raw
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {raw!r}", field=key) from exc
    if "u" not in kwargs and "n" in kwargs:
        kwargs["u"] = ()
    try:
        return ScenarioConfig(**kwargs)
    except ParameterError as exc:
        raise ParseError(str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text())


PRESETS = {
    "path": lambda: ScenarioConfig(network="path", nodes=3, owner=0, n=2),
    "star": lambda: ScenarioConfig(network="star", nodes=6, owner=0, n=2),
    "synthetic": lambda: ScenarioConfig(),
}


# --------------------------------------------------------------------------
# setup shared by all modes


@dataclass
class Setup:
    config: ScenarioConfig
    network: Network
    owner: int
    distances: np.ndarray  # per node, inf when unreachable
    schedule: PrivacySchedule
    recipients: dict  # node -> distance, reachable nodes other than the owner
    eps_lo: float
    eps_hi: float

    def level(self, node) -> float:
        return schedule_eval(self.schedule, self.recipients[node])


def prepare(config: ScenarioConfig, network: Network | None = None) -> Setup:
    net = network if network is not None else config.build_network()
    owner = config.owner_id(net)
    if config.metric == "resistance":
        # resistance needs a connected graph; restrict to the owner's component
        hops = distances(net, owner, "hops")
        comp = [k for k in range(net.node_count) if np.isfinite(hops[k])]
        remap = {k: i for i, k in enumerate(comp)}
        sub = Network.from_edges(
            len(comp), [(remap[a], remap[b]) for a, b in net.edges if a in remap and b in remap]
        )
        d_sub = distances(sub, remap[owner], "resistance")
        d = np.full(net.node_count, np.inf)
        d[comp] = d_sub
    else:
        d = distances(net, owner, "hops")
    recipients = {k: float(d[k]) for k in range(net.node_count) if k != owner and np.isfinite(d[k])}
    if not recipients:
        raise ParameterError(f"owner {owner} has no reachable recipients")
    sched = config.privacy_schedule()
    levels = schedule_eval(sched, np.array(list(recipients.values())))
    return Setup(
        config, net, owner, d, sched, recipients,
        float(levels.min()) / DOMAIN_PAD, float(levels.max()) * DOMAIN_PAD,
    )


def _trace_for(setup: Setup) -> ProcessTrace:
    stream = split(make_stream(setup.config.seed), _TRACE_STREAM)
    return sample_trace(setup.config.n, setup.eps_lo, setup.eps_hi, stream)


# --------------------------------------------------------------------------
# centralized diffusion


@dataclass
class NodeError:
    node: int
    distance: float
    epsilon: float
    abs_error: float


@dataclass
class DiffusionResult:
    setup: Setup
    trace: ProcessTrace
    responses: ResponseSet
    errors: list[NodeError]

    def errors_csv(self) -> str:
        rows = ["node,distance,epsilon,abs_error"]
        rows += [f"{e.node},{e.distance!r},{e.epsilon!r},{e.abs_error!r}" for e in self.errors]
        return "\n".join(rows) + "\n"


def run_diffusion(config: ScenarioConfig, network: Network | None = None) -> DiffusionResult:
    """Sample one trace and hand every reachable node its response."""
    setup = prepare(config, network)
    trace = _trace_for(setup)
    datum = PrivateDatum(setup.owner, np.array(config.u))
    responses = diffuse(datum, trace, setup.schedule, setup.recipients)
    errors = [
        NodeError(r.recipient, r.distance, r.epsilon, float(np.linalg.norm(r.y - datum.value)))
        for r in responses
    ]
    return DiffusionResult(setup, trace, responses, errors)


def diffusion_mse(config: ScenarioConfig, network: Network | None = None, trials=None) -> dict:
    """Monte Carlo squared error per distinct distance over fresh traces.

    Returns ``{distance: (epsilon, node_count, empirical_mse, theoretical_mse)}``.
    """
    setup = prepare(config, network)
    trials = trials or config.trials
    dists = sorted(set(setup.recipients.values()))
    levels = [schedule_eval(setup.schedule, d) for d in dists]
    stream = split(make_stream(config.seed), _MC_STREAM)
    res = simulate_batch(config.n, setup.eps_lo, setup.eps_hi, trials, stream, query=levels)
    sq = (res.values**2).sum(axis=-1).mean(axis=0)
    counts = defaultdict(int)
    for d in setup.recipients.values():
        counts[d] += 1
    return {
        d: (e, counts[d], float(m), response_mse_theoretical(config.n, e))
        for d, e, m in zip(dists, levels, sq)
    }


# --------------------------------------------------------------------------
# gossip


@dataclass(frozen=True)
class Message:
    round: int
    sender: int
    receiver: int
    cap: float
    accepted: bool


@dataclass
class GossipState:
    """Per-node held (value-shifted) trace and the level it may read at."""

    owner: int
    held: dict = field(default_factory=dict)
    caps: dict = field(default_factory=dict)
    hops: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)

    def response(self, node) -> np.ndarray:
        return evaluate(self.held[node], self.caps[node])

    def messages_csv(self) -> str:
        rows = ["round,sender,receiver,cap,accepted"]
        rows += [
            f"{m.round},{m.sender},{m.receiver},{m.cap!r},{int(m.accepted)}" for m in self.messages
        ]
        return "\n".join(rows) + "\n"


def run_gossip(config: ScenarioConfig, network: Network | None = None) -> GossipState:
    """Flood the owner's trace by trim-and-forward in synchronous rounds.

    A node at hop ``d`` keeps the trace it received (capped at ``eps(d)``) and
    sends neighbours that have not sent to it a copy trimmed to
    ``eps(d + 1)``, clipped at the trace's lower end. A received trace
    replaces the held one only if its cap is strictly higher.
    """
    if config.metric != "hops":
        raise ParameterError("gossip's trim rule is hop based; metric must be 'hops'")
    setup = prepare(config, network)
    trace = _trace_for(setup)
    adj = setup.network.neighbors()
    owner = setup.owner
    state = GossipState(owner)
    full = shifted(trace, np.array(config.u))
    state.held[owner] = full
    state.caps[owner] = full.eps_hi
    state.hops[owner] = 0
    heard_from = defaultdict(set)
    frontier = [owner]
    rnd = 0
    while frontier:
        rnd += 1
        outgoing = []
        for s in frontier:
            nxt = schedule_eval(setup.schedule, state.hops[s] + 1)
            held = state.held[s]
            payload = trim(held, max(nxt, held.eps_lo)) if nxt < held.eps_hi else held
            for r in adj[s]:
                if r not in heard_from[s]:
                    outgoing.append((s, r, payload))
        improved = set()
        for s, r, payload in outgoing:
            heard_from[r].add(s)
            ok = r != owner and payload.eps_hi > state.caps.get(r, 0.0)
            if ok:
                state.held[r] = payload
                state.caps[r] = payload.eps_hi
                state.hops[r] = state.hops[s] + 1
                improved.add(r)
            state.messages.append(Message(rnd, s, r, payload.eps_hi, ok))
        frontier = sorted(improved)
    return state


def expected_message_count(network: Network, owner: int) -> int:
    """Messages the gossip protocol sends: two per edge inside a hop layer, one across layers."""
    d = distances(network, owner, "hops")
    total = 0
    for a, b in network.edges:
        if np.isfinite(d[a]):
            total += 2 if d[a] == d[b] else 1
    return total


# --------------------------------------------------------------------------
# independent-noise baseline and coalitions


def run_independent_baseline(config: ScenarioConfig, network: Network | None = None) -> ResponseSet:
    """Fresh Laplace noise per recipient (the pooling-vulnerable control)."""
    setup = prepare(config, network)
    stream = split(make_stream(config.seed), _BASELINE_STREAM)
    u = np.array(config.u)
    out = []
    for j in sorted(setup.recipients):
        e = setup.level(j)
        out.append(Response(j, u + sample_laplace_nd(config.n, e, stream), e, setup.recipients[j]))
    return ResponseSet(setup.owner, out)


def default_weight_grid(m: int, closest: int = 0) -> list[np.ndarray]:
    """Weight vectors tried by a pooling coalition of size ``m``.

    Two members: 11 evenly spaced splits. Larger groups: each singleton, the
    uniform average, and blends of uniform with the closest member.
    """
    if m < 1:
        raise ParameterError("coalition is empty")
    if m == 1:
        return [np.ones(1)]
    if m == 2:
        w = np.linspace(0.0, 1.0, 11)
        return [np.array([x, 1.0 - x]) for x in w]
    grid = [np.eye(m)[k] for k in range(m)]
    uni = np.full(m, 1.0 / m)
    for lam in np.linspace(0.0, 0.9, 10):
        grid.append(lam * np.eye(m)[closest] + (1.0 - lam) * uni)
    return grid


@dataclass
class CoalitionReport:
    mechanism: str
    group: list
    distances: list
    levels: list
    trials: int
    member_mse: list
    weights: list
    weighted_mse: list
    best_single_mse: float
    min_weighted_mse: float
    slack: float = COALITION_SLACK

    @property
    def gain(self) -> float:
        """How many times lower the best pooled MSE is than the best single one."""
        return self.best_single_mse / self.min_weighted_mse

    @property
    def no_gain(self) -> bool:
        return self.min_weighted_mse >= self.best_single_mse * (1.0 - self.slack)

    @property
    def verdict(self) -> str:
        if self.no_gain:
            return "no gain"
        return f"gain {self.gain:.2f}x"

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["weights"] = [list(map(float, w)) for w in self.weights]
        d.update(gain=self.gain, no_gain=self.no_gain, verdict=self.verdict)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def run_coalition_experiment(
    config: ScenarioConfig,
    group=None,
    weights=None,
    mechanism: str = "coupled",
    trials: int | None = None,
    network: Network | None = None,
) -> CoalitionReport:
    """Empirical MSE of pooled estimates for ``group`` under either mechanism.

    ``mechanism="coupled"`` reads all members from one trace per trial;
    ``"independent"`` gives each member fresh Laplace noise.
    """
    setup = prepare(config, network)
    group = list(group if group is not None else config.group)
    if not group:
        raise ParameterError("coalition is empty")
    for g in group:
        if g not in setup.recipients:
            raise ParameterError(f"member {g} is not a reachable recipient of owner {setup.owner}")
    trials = trials or config.trials
    n = config.n
    d = [setup.recipients[g] for g in group]
    levels = [setup.level(g) for g in group]
    closest = min(range(len(group)), key=lambda k: (d[k], group[k]))
    grid = weights if weights is not None else default_weight_grid(len(group), closest)
    grid = [np.asarray(w, dtype=float) for w in grid]
    for w in grid:
        if len(w) != len(group) or abs(w.sum() - 1.0) > 1e-9:
            raise ParameterError("each weight vector needs one entry per member and must sum to 1")

    if mechanism == "coupled":
        stream = split(make_stream(config.seed), _MC_STREAM)
        res = simulate_batch(n, setup.eps_lo, setup.eps_hi, trials, stream, query=levels)
        noise = res.values  # (trials, members, n)
    elif mechanism == "independent":
        stream = split(make_stream(config.seed), _BASELINE_STREAM)
        noise = np.stack([sample_laplace_nd(n, e, stream, trials) for e in levels], axis=1)
    else:
        raise ParameterError(f"unknown mechanism {mechanism!r}")

    member_mse = [float(x) for x in (noise**2).sum(-1).mean(0)]
    weighted = [float((np.einsum("m,tmk->tk", w, noise) ** 2).sum(-1).mean()) for w in grid]
    return CoalitionReport(
        mechanism=mechanism,
        group=group,
        distances=d,
        levels=levels,
        trials=trials,
        member_mse=member_mse,
        weights=grid,
        weighted_mse=weighted,
        best_single_mse=min(member_mse),
        min_weighted_mse=min(weighted),
    )


def equal_distance_group(config: ScenarioConfig, size: int = 4, network: Network | None = None) -> list[int]:
    """``size`` members sharing the largest distance that has that many nodes."""
    setup = prepare(config, network)
    by_d = defaultdict(list)
    for k, dist in setup.recipients.items():
        by_d[dist].append(k)
    for dist in sorted(by_d, reverse=True):
        if len(by_d[dist]) >= size:
            return sorted(by_d[dist])[:size]
    raise ParameterError(f"no distance is shared by {size} recipients")
