"""Sampling and manipulation of the private jump process over privacy levels.

A trace is a piecewise-constant vector-valued function of the privacy level
``eps`` on ``[eps_lo, eps_hi]``. It is drawn backwards from ``eps_hi``: the
value there is n-dimensional Laplace with scale ``1/eps_hi``; log-level gaps
between jumps are Exponential(n + 1); a jump at level ``e`` has a Bessel(n,
1/e) radius in a uniform direction.

Segment ``i`` holds value ``values[i]`` on ``(levels[i+1], levels[i]]``; the
last segment extends down to ``eps_lo``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    sample_bessel_scaled,
    sample_gamma_integer,
    sample_unit_direction,
)
from .errors import DomainError, ParameterError, ParseError

# traces simulated per vectorised pass; bounds memory for 10^6-trial runs
CHUNK = 1 << 17


@dataclass(frozen=True, eq=False)
class ProcessTrace:
    n: int
    eps_lo: float
    eps_hi: float
    levels: np.ndarray  # (k,), strictly decreasing, levels[0] == eps_hi
    values: np.ndarray  # (k, n)

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(len(levels), -1)
        levels.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "values", values)
        _check_trace(self)

    def __eq__(self, other):
        if not isinstance(other, ProcessTrace):
            return NotImplemented
        return (
            self.n == other.n
            and self.eps_lo == other.eps_lo
            and self.eps_hi == other.eps_hi
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @property
    def num_jumps(self) -> int:
        return len(self.levels) - 1

    def jumps(self) -> list[JumpRecord]:
        """Jump records in sampling order (decreasing level)."""
        return [
            JumpRecord(float(self.levels[i + 1]), self.values[i], self.values[i + 1])
            for i in range(self.num_jumps)
        ]

    def __call__(self, eps):
        return evaluate(self, eps)


@dataclass(frozen=True)
class JumpRecord:
    """A single jump. ``pre`` is the value just above ``level``, ``post`` at and below it."""

    level: float
    pre: np.ndarray
    post: np.ndarray

    @property
    def size(self) -> float:
        return float(np.linalg.norm(self.post - self.pre))


def _check_trace(t: ProcessTrace):
    if int(t.n) != t.n or t.n < 1:
        raise ParameterError(f"dimension must be a positive integer, got {t.n}")
    if not (0 < t.eps_lo <= t.eps_hi) or not math.isfinite(t.eps_hi):
        raise ParameterError(f"invalid domain [{t.eps_lo}, {t.eps_hi}]")
    if len(t.levels) == 0:
        raise ParameterError("a trace needs at least the anchor segment")
    if t.values.shape[1] != t.n:
        raise ParameterError(f"values must have length {t.n}")
    if t.levels[0] != t.eps_hi:
        raise ParameterError("first level must equal eps_hi")
    if np.any(np.diff(t.levels) >= 0):
        raise ParameterError("levels must be strictly decreasing")
    if t.levels[-1] < t.eps_lo:
        raise ParameterError("levels must not fall below eps_lo")
    if not np.all(np.isfinite(t.values)):
        raise ParameterError("values must be finite")


def _check_interval(eps_lo, eps_hi):
    if not eps_lo > 0:
        raise ParameterError(f"eps_lo must be positive, got {eps_lo}")
    if eps_lo > eps_hi:
        raise ParameterError(f"eps_lo={eps_lo} exceeds eps_hi={eps_hi}")
    if not math.isfinite(eps_hi):
        raise ParameterError("eps_hi must be finite")


# --------------------------------------------------------------------------
# sampling


@dataclass
class BatchResult:
    """Summary of a batch of independently sampled traces.

    ``values[t, q]`` is trace ``t`` evaluated at ``query[q]``. ``iterations``
    counts exponential gap draws, i.e. loop passes including the terminating
    one. ``interval_counts[t, j]`` is the number of jump levels in
    ``(a_j, b_j]``.
    """

    n: int
    eps_lo: float
    eps_hi: float
    query: np.ndarray
    values: np.ndarray
    jumps: np.ndarray
    iterations: np.ndarray
    interval_counts: np.ndarray
    harvest_levels: np.ndarray | None = None
    harvest_steps: np.ndarray | None = None
    harvest_pre: np.ndarray | None = None
    traces: list = field(default_factory=list)


def _simulate_chunk(n, eps_lo, eps_hi, m, stream, query, intervals, harvest, record, jump_bias):
    value = sample_gamma_integer(n, 1.0 / eps_hi, stream, m)[:, None] * sample_unit_direction(
        n, stream, m
    )
    nq = len(query)
    out = np.zeros((m, nq, n))
    jumps = np.zeros(m, dtype=np.int64)
    iters = np.zeros(m, dtype=np.int64)
    counts = np.zeros((m, len(intervals)), dtype=np.int64)
    h_levels, h_steps, h_pre = [], [], []
    rec_levels = [[eps_hi] for _ in range(m)] if record else None
    rec_values = [[value[i].copy()] for i in range(m)] if record else None

    if eps_lo == eps_hi:
        out[:] = value[:, None, :]
        idx = np.arange(0)
    else:
        idx = np.arange(m)
    # state of still-running traces, kept compacted
    level = np.full(idx.size, float(eps_hi))
    cur = value[idx]
    pending = np.ones((idx.size, nq), dtype=bool)
    local_counts = np.zeros((idx.size, len(intervals)), dtype=np.int64)
    local_jumps = np.zeros(idx.size, dtype=np.int64)
    rounds = 0
    while idx.size:
        rounds += 1
        new = level * np.exp(-stream.exponential(1.0 / (n + 1), idx.size))
        for qi, q in enumerate(query):
            hit = pending[:, qi] & (new < q)
            if np.any(hit):
                out[idx[hit], qi] = cur[hit]
                pending[hit, qi] = False
        inside = new >= eps_lo
        if not inside.all():
            done = ~inside
            rows = idx[done]
            iters[rows] = rounds
            jumps[rows] = local_jumps[done]
            counts[rows] = local_counts[done]
            value[rows] = cur[done]
            idx, new, cur = idx[inside], new[inside], cur[inside]
            pending, local_counts, local_jumps = pending[inside], local_counts[inside], local_jumps[inside]
        if not idx.size:
            break
        for j, (a, b) in enumerate(intervals):
            local_counts[:, j] += (new > a) & (new <= b)
        radius = sample_bessel_scaled(n, 1.0 / new, stream)
        if jump_bias:
            radius = radius + jump_bias
        step = sample_unit_direction(n, stream, idx.size)
        step *= radius[:, None]
        if harvest:
            h_levels.append(new)
            h_steps.append(step)
            h_pre.append(cur.copy())
        cur = cur + step
        level = new
        local_jumps += 1
        if record:
            for k, i in enumerate(idx):
                rec_levels[i].append(float(new[k]))
                rec_values[i].append(cur[k].copy())

    traces = []
    if record:
        traces = [
            ProcessTrace(n, float(eps_lo), float(eps_hi), np.array(lv), np.array(vv))
            for lv, vv in zip(rec_levels, rec_values)
        ]
    harvested = None
    if harvest:
        harvested = (
            np.concatenate(h_levels) if h_levels else np.zeros(0),
            np.concatenate(h_steps) if h_steps else np.zeros((0, n)),
            np.concatenate(h_pre) if h_pre else np.zeros((0, n)),
        )
    return out, jumps, iters, counts, harvested, traces


def simulate_batch(
    n: int,
    eps_lo: float,
    eps_hi: float,
    size: int,
    stream: np.random.Generator,
    query=(),
    intervals=(),
    harvest: bool = False,
    record: bool = False,
    jump_bias: float = 0.0,
) -> BatchResult:
    """Sample ``size`` independent traces and summarise them.

    Vectorised across traces; exactly the same draws as calling
    :func:`sample_trace` repeatedly is *not* guaranteed, only the same law.
    ``jump_bias`` adds a constant to every jump radius and exists only as a
    negative control for the verification suite.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"dimension must be a positive integer, got {n}")
    _check_interval(eps_lo, eps_hi)
    if size < 1:
        raise ParameterError("size must be at least 1")
    query = np.asarray(query, dtype=float).reshape(-1)
    if np.any((query < eps_lo) | (query > eps_hi)):
        raise DomainError(f"query levels must lie in [{eps_lo}, {eps_hi}]")
    intervals = [(float(a), float(b)) for a, b in intervals]
    for a, b in intervals:
        if not (eps_lo <= a <= b <= eps_hi):
            raise ParameterError(f"interval [{a}, {b}] not inside [{eps_lo}, {eps_hi}]")

    parts = []
    for start in range(0, size, CHUNK):
        m = min(CHUNK, size - start)
        parts.append(
            _simulate_chunk(n, eps_lo, eps_hi, m, stream, query, intervals, harvest, record, jump_bias)
        )
    res = BatchResult(
        n=int(n),
        eps_lo=float(eps_lo),
        eps_hi=float(eps_hi),
        query=query,
        values=np.concatenate([p[0] for p in parts]),
        jumps=np.concatenate([p[1] for p in parts]),
        iterations=np.concatenate([p[2] for p in parts]),
        interval_counts=np.concatenate([p[3] for p in parts]),
        traces=[t for p in parts for t in p[5]],
    )
    if harvest:
        res.harvest_levels = np.concatenate([p[4][0] for p in parts])
        res.harvest_steps = np.concatenate([p[4][1] for p in parts])
        res.harvest_pre = np.concatenate([p[4][2] for p in parts])
    return res


def sample_trace(n: int, eps_lo: float, eps_hi: float, stream: np.random.Generator) -> ProcessTrace:
    """Draw one exact trace of the process on ``[eps_lo, eps_hi]``."""
    return simulate_batch(n, eps_lo, eps_hi, 1, stream, record=True).traces[0]


def sample_traces(n, eps_lo, eps_hi, size, stream) -> list[ProcessTrace]:
    return simulate_batch(n, eps_lo, eps_hi, size, stream, record=True).traces


# --------------------------------------------------------------------------
# queries and transformations


def _segment_index(trace: ProcessTrace, eps):
    # number of levels >= eps, minus one
    return np.searchsorted(-trace.levels, -np.asarray(eps, dtype=float), side="right") - 1


def evaluate(trace: ProcessTrace, eps):
    """Value of the trace at level(s) ``eps``; raises outside the domain."""
    e = np.asarray(eps, dtype=float)
    if np.any(~((e >= trace.eps_lo) & (e <= trace.eps_hi))):
        raise DomainError(
            f"level {eps} outside trace domain [{trace.eps_lo}, {trace.eps_hi}]"
        )
    return trace.values[_segment_index(trace, e)]


def trim(trace: ProcessTrace, eps_cap: float) -> ProcessTrace:
    """Restrict the trace to ``[eps_lo, eps_cap]``, re-anchoring at ``eps_cap``."""
    if not (trace.eps_lo <= eps_cap <= trace.eps_hi):
        raise ParameterError(
            f"cap {eps_cap} outside trace domain [{trace.eps_lo}, {trace.eps_hi}]"
        )
    i = int(_segment_index(trace, eps_cap))
    levels = np.concatenate([[eps_cap], trace.levels[i + 1 :]])
    return ProcessTrace(trace.n, trace.eps_lo, float(eps_cap), levels, trace.values[i:])


def shifted(trace: ProcessTrace, offset) -> ProcessTrace:
    """Trace with ``offset`` added to every value (``offset + v`` in that order)."""
    offset = np.asarray(offset, dtype=float)
    return ProcessTrace(trace.n, trace.eps_lo, trace.eps_hi, trace.levels, offset + trace.values)


def jump_count(trace: ProcessTrace, a: float, b: float) -> int:
    """Number of jump levels in ``(a, b]``."""
    if not (trace.eps_lo <= a <= b <= trace.eps_hi):
        raise ParameterError(f"interval [{a}, {b}] not inside [{trace.eps_lo}, {trace.eps_hi}]")
    jl = trace.levels[1:]
    return int(np.count_nonzero((jl > a) & (jl <= b)))


# --------------------------------------------------------------------------
# text documents


def to_document(trace: ProcessTrace) -> dict:
    return {
        "n": trace.n,
        "eps_lo": trace.eps_lo,
        "eps_hi": trace.eps_hi,
        "segments": [
            {"eps": float(e), "v": [float(x) for x in v]}
            for e, v in zip(trace.levels, trace.values)
        ],
    }


def serialize(trace: ProcessTrace) -> bytes:
    """JSON document; Python float repr makes every value round-trip exactly."""
    return (json.dumps(to_document(trace), indent=1) + "\n").encode("utf-8")


def _number(obj, key, where):
    if key not in obj:
        raise ParseError(f"missing field {where}{key!r}", field=key)
    x = obj[key]
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"field {where}{key!r} must be a number", field=key)
    return x


def deserialize(data: bytes | str) -> ProcessTrace:
    """Parse and validate a trace document."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"not a JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    n = _number(doc, "n", "")
    if int(n) != n or n < 1:
        raise ParseError("field 'n' must be a positive integer", field="n")
    eps_lo = float(_number(doc, "eps_lo", ""))
    eps_hi = float(_number(doc, "eps_hi", ""))
    segs = doc.get("segments")
    if not isinstance(segs, list) or not segs:
        raise ParseError("field 'segments' must be a non-empty list", field="segments")
    levels, values = [], []
    for i, seg in enumerate(segs):
        where = f"segments[{i}]."
        if not isinstance(seg, dict):
            raise ParseError(f"segments[{i}] must be an object", field=f"segments[{i}]")
        levels.append(float(_number(seg, "eps", where)))
        v = seg.get("v")
        if not isinstance(v, list) or len(v) != n or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in v
        ):
            raise ParseError(f"field {where}'v' must be a list of {n} numbers", field=f"{where}v")
        values.append([float(x) for x in v])
    try:
        return ProcessTrace(int(n), eps_lo, eps_hi, np.array(levels), np.array(values))
    except ParameterError as exc:
        raise ParseError(f"invariant violated: {exc}", field="segments") from exc
