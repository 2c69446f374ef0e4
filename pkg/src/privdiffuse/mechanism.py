"""The distance-graded release mechanism built on a single process trace.

Every recipient's response is read off the *same* trace, at the level its
distance maps to. Responses for farther recipients are the nearer response
plus independent noise, which is what removes any gain from pooling.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .graph import PrivacySchedule, schedule_eval
from .process import ProcessTrace, evaluate


@dataclass(frozen=True)
class PrivateDatum:
    owner: int
    value: np.ndarray
    alpha: float = 1.0  # adjacency radius; noise scales linearly with it

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.value, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ParameterError("private value must be finite")
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")
        object.__setattr__(self, "value", v)

    @property
    def n(self) -> int:
        return self.value.shape[0]


@dataclass(frozen=True)
class Response:
    recipient: int
    y: np.ndarray
    epsilon: float
    distance: float


@dataclass
class ResponseSet:
    owner: int
    responses: list[Response] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for r in self.responses:
            if r.recipient in seen:
                raise ParameterError(f"duplicate response for recipient {r.recipient}")
            seen.add(r.recipient)

    def __len__(self):
        return len(self.responses)

    def __iter__(self):
        return iter(self.responses)

    def by_recipient(self) -> dict[int, Response]:
        return {r.recipient: r for r in self.responses}

    def restrict(self, group) -> ResponseSet:
        group = set(group)
        return ResponseSet(self.owner, [r for r in self.responses if r.recipient in group])

    def to_csv(self) -> str:
        """``recipient,distance,epsilon,y_0,...`` with round-trip float text."""
        buf = io.StringIO()
        n = len(self.responses[0].y) if self.responses else 0
        buf.write(",".join(["recipient", "distance", "epsilon"] + [f"y_{k}" for k in range(n)]) + "\n")
        for r in self.responses:
            cells = [str(r.recipient), repr(float(r.distance)), repr(float(r.epsilon))]
            cells += [repr(float(x)) for x in r.y]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def diffuse(
    datum: PrivateDatum,
    trace: ProcessTrace,
    schedule: PrivacySchedule,
    distances: dict[int, float],
) -> ResponseSet:
    """One response per recipient: ``u + alpha * V(eps(d_j))`` from one trace.

    ``distances`` maps recipient id to its distance from the owner.
    """
    if trace.n != datum.n:
        raise ParameterError(f"trace dimension {trace.n} != datum dimension {datum.n}")
    recipients = sorted(distances)
    levels = {j: schedule_eval(schedule, distances[j]) for j in recipients}
    bad = [j for j in recipients if not (trace.eps_lo <= levels[j] <= trace.eps_hi)]
    if bad:
        raise DomainError(
            f"levels of recipients {bad} fall outside trace domain [{trace.eps_lo}, {trace.eps_hi}]"
        )
    out = []
    for j in recipients:
        noise = evaluate(trace, levels[j])
        if datum.alpha != 1.0:
            noise = datum.alpha * noise
        out.append(Response(j, datum.value + noise, levels[j], float(distances[j])))
    return ResponseSet(datum.owner, out)


def response_mse_theoretical(n: int, eps: float) -> float:
    """Expected squared error ``n (n + 1) / eps^2`` of a response at level ``eps``."""
    if n < 1 or not eps > 0:
        raise ParameterError("need n >= 1 and eps > 0")
    return n * (n + 1) / eps**2


def project_binary(y: float) -> int:
    """Nearest point of {0, 1}; a tie at 0.5 goes to 1."""
    y = float(y)
    if not math.isfinite(y):
        raise DomainError("cannot project a non-finite value")
    return 1 if y >= 0.5 else 0


def coalition_best_estimate(responses: ResponseSet) -> Response:
    """The response of the closest member (smallest id on ties)."""
    if not len(responses):
        raise ParameterError("coalition is empty")
    return min(responses, key=lambda r: (r.distance, r.recipient))


def coalition_average(responses, weights) -> np.ndarray:
    """Weighted pooling of response vectors, the attack a coalition would try."""
    ys = [np.asarray(r.y if isinstance(r, Response) else r, dtype=float) for r in responses]
    w = np.asarray(weights, dtype=float)
    if len(ys) != len(w) or not ys:
        raise ParameterError("need one weight per response")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ParameterError(f"weights must sum to 1, got {w.sum()}")
    return np.tensordot(w, np.stack(ys), axes=1)
