"""Samplers and densities for the elementary distributions used by the process.

All samplers take an explicit ``numpy.random.Generator``. Use :func:`make_stream`
to build one from a seed and :func:`split` to derive independent substreams.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

EULER_GAMMA = 0.57721566490153286061

# quantile table layout for the Bessel sampler
_BULK_KNOTS = 2**14
_HEAD_P_MIN = 1e-10
_TAIL_MASS = 1e-12
_EDGE_KNOTS = 512
_EDGE_CELLS = 64  # uniform cells replaced by log-spaced knots at each end


# --------------------------------------------------------------------------
# random streams


def make_stream(seed: int = 0) -> np.random.Generator:
    """Return a PCG64 generator seeded from a 64-bit unsigned integer."""
    if seed < 0 or seed >= 2**64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def split(stream: np.random.Generator | int, index: int) -> np.random.Generator:
    """Derive the ``index``-th child stream.

    The child depends only on the parent's seed sequence and ``index``, not on
    how many numbers the parent has already produced, so substreams can be
    handed to workers in any order.
    """
    if isinstance(stream, (int, np.integer)):
        stream = make_stream(int(stream))
    if index < 0:
        raise ParameterError("substream index must be non-negative")
    seq = stream.bit_generator.seed_seq
    child = np.random.SeedSequence(
        entropy=seq.entropy, spawn_key=tuple(seq.spawn_key) + (int(index),)
    )
    return np.random.Generator(np.random.PCG64(child))


# --------------------------------------------------------------------------
# elementary samplers


def sample_exponential(rate: float, stream: np.random.Generator, size=None):
    """Exponential variate(s) with density ``rate * exp(-rate * x)``."""
    if not rate > 0:
        raise ParameterError(f"exponential rate must be positive, got {rate}")
    return stream.exponential(1.0 / rate, size)


def sample_gamma_integer(shape: int, scale: float, stream: np.random.Generator, size=None):
    """Gamma(shape, scale) for integer ``shape`` as a sum of exponentials."""
    if int(shape) != shape or shape < 1:
        raise ParameterError(f"gamma shape must be a positive integer, got {shape}")
    if not scale > 0:
        raise ParameterError(f"gamma scale must be positive, got {scale}")
    shape = int(shape)
    if size is None:
        return float(stream.exponential(scale, shape).sum())
    size = (size,) if np.isscalar(size) else tuple(size)
    return stream.exponential(scale, size + (shape,)).sum(axis=-1)


def sample_unit_direction(n: int, stream: np.random.Generator, size=None) -> np.ndarray:
    """Uniform point(s) on the unit sphere in R^n.

    Normalised standard Gaussians; for ``n == 1`` this is a fair random sign.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"dimension must be a positive integer, got {n}")
    shape = (int(n),) if size is None else ((size,) if np.isscalar(size) else tuple(size)) + (int(n),)
    g = stream.standard_normal(shape)
    norm = np.sqrt(np.einsum("...i,...i->...", g, g))[..., None]
    # a zero draw has probability zero; guard anyway
    while np.any(norm == 0):
        bad = (norm == 0)[..., 0]
        g[bad] = stream.standard_normal(g[bad].shape)
        norm = np.sqrt(np.einsum("...i,...i->...", g, g))[..., None]
    g /= norm
    return g


# --------------------------------------------------------------------------
# modified Bessel function of the second kind


def _k01_series(x):
    """K0, K1 by their power series; accurate for 0 < x <= 2."""
    t = x * x / 4.0
    log_half = np.log(x / 2.0)
    k0 = np.zeros_like(x)
    k1 = np.zeros_like(x)
    term0 = np.ones_like(x)  # t^k / (k!)^2
    term1 = np.ones_like(x)  # t^k / (k! (k+1)!)
    psi_k1 = -EULER_GAMMA  # psi(k + 1)
    for k in range(40):
        psi_k2 = psi_k1 + 1.0 / (k + 1)  # psi(k + 2)
        k0 += (psi_k1 - log_half) * term0
        k1 += (log_half - 0.5 * (psi_k1 + psi_k2)) * term1
        term0 = term0 * t / ((k + 1) ** 2)
        term1 = term1 * t / ((k + 1) * (k + 2))
        psi_k1 = psi_k2
    k1 = 1.0 / x + 0.5 * x * k1
    return k0, k1


def _k01_continued_fraction(x):
    """K0, K1 by Steed's continued fraction; accurate for x >= 2."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 2000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < 1e-17 * np.abs(s)):
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def bessel_k(order: float, x):
    """Modified Bessel function of the second kind K_order(x).

    ``order`` must be an integer or half-integer (negative orders use
    K_{-v} = K_v). Half-integer orders start from the closed form of K_{1/2};
    integer orders start from K0 and K1 (power series for x <= 2, Steed's
    continued fraction above). Both climb with the upward recurrence
    K_{v+1} = K_{v-1} + (2v/x) K_v. Relative accuracy is about 1e-13.

    Returns a float for scalar ``x`` and an array otherwise.
    """
    twice = 2.0 * abs(order)
    if abs(twice - round(twice)) > 1e-12:
        raise ParameterError(f"order must be an integer or half-integer, got {order}")
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(xa > 0)):
        raise DomainError("bessel_k requires x > 0")
    twice = int(round(twice))

    if twice % 2 == 1:
        nu = 0.5
        k_prev = np.sqrt(np.pi / (2.0 * xa)) * np.exp(-xa)  # K_{-1/2}
        k_cur = k_prev.copy()  # K_{1/2}
    else:
        nu = 0.0
        k_prev = np.empty_like(xa)
        k_cur = np.empty_like(xa)
        small = xa <= 2.0
        if np.any(small):
            k_prev[small], k_cur[small] = _k01_series(xa[small])
        if np.any(~small):
            k_prev[~small], k_cur[~small] = _k01_continued_fraction(xa[~small])
        nu = 1.0
        if twice == 0:
            k_cur = k_prev
            nu = 0.0
    target = twice / 2.0
    while nu < target:
        k_prev, k_cur = k_cur, k_prev + (2.0 * nu / xa) * k_cur
        nu += 1.0
    return float(k_cur[0]) if scalar else k_cur


# --------------------------------------------------------------------------
# Bessel radius distribution


@dataclass(frozen=True)
class BesselParams:
    """Radius law of a single jump: dimension ``n`` and scale ``beta``."""

    n: int
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.n}")
        if not self.beta > 0:
            raise ParameterError(f"scale must be positive, got {self.beta}")

    @property
    def order(self) -> float:
        return self.n / 2.0 - 1.0


def _bessel_norm(n: int) -> float:
    return 4.0 / (math.gamma(n / 2.0) * 2.0 ** (n / 2.0 + 1.0))


def bessel_density(params: BesselParams, x):
    """Density ``4 / (G(n/2) (2b)^(n/2+1)) x^(n/2) K_{n/2-1}(x/b)`` on x > 0."""
    n, beta = params.n, params.beta
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("bessel_density requires x > 0")
    t = xa / beta
    out = (_bessel_norm(n) / beta) * t ** (n / 2.0) * bessel_k(n / 2.0 - 1.0, t)
    return float(out) if np.ndim(x) == 0 else out


def _bessel_survival_std(n: int, t):
    """P(R > t) for the unit-scale law, via d/dt[t^v K_v(t)] = -t^v K_{v-1}(t)."""
    t = np.asarray(t, dtype=float)
    out = np.ones_like(t)
    pos = t > 0
    if np.any(pos):
        tp = t[pos]
        nu = n / 2.0
        out[pos] = _bessel_norm(n) * tp**nu * bessel_k(nu, tp)
    return np.clip(out, 0.0, 1.0)


def bessel_cdf(params: BesselParams, x):
    """Exact CDF of the Bessel radius law (closed form, no quadrature)."""
    xa = np.asarray(x, dtype=float)
    out = 1.0 - _bessel_survival_std(params.n, np.maximum(xa, 0.0) / params.beta)
    return float(out) if np.ndim(x) == 0 else out


def _solve_survival(n: int, q: np.ndarray, hi: float) -> np.ndarray:
    """Bisection for t with S(t) = q, vectorised over q."""
    lo_t = np.zeros_like(q)
    hi_t = np.full_like(q, hi)
    for _ in range(80):
        mid = 0.5 * (lo_t + hi_t)
        above = _bessel_survival_std(n, mid) > q
        lo_t = np.where(above, mid, lo_t)
        hi_t = np.where(above, hi_t, mid)
    return 0.5 * (lo_t + hi_t)


class BesselQuantileTable:
    """Inverse-CDF table for the unit-scale Bessel law of dimension ``n``.

    The bulk uses ``2**14`` uniformly spaced probability cells with linear
    interpolation of the quantile. The outermost 64 cells at each end are
    replaced by log-spaced knots (log-log in the head, x against log survival
    in the tail); linear interpolation there has CDF error up to ~1e-5. Support is
    truncated at ``x_max`` where the exact tail mass falls below 1e-12.
    """

    def __init__(self, n: int):
        self.n = n
        hi = 1.0
        while _bessel_survival_std(n, np.array([hi]))[0] > _TAIL_MASS:
            hi *= 2.0
        self.x_max = float(_solve_survival(n, np.array([_TAIL_MASS]), hi)[0])

        dp = 1.0 / _BULK_KNOTS
        edge = _EDGE_CELLS * dp
        self.edge = edge
        self.p_bulk = np.arange(_EDGE_CELLS, _BULK_KNOTS - _EDGE_CELLS + 1) * dp
        self.x_bulk = _solve_survival(n, 1.0 - self.p_bulk, self.x_max)

        self.log_p_head = np.linspace(math.log(_HEAD_P_MIN), math.log(edge), _EDGE_KNOTS)
        x_head = _solve_survival(n, 1.0 - np.exp(self.log_p_head), self.x_max)
        self.log_x_head = np.log(x_head)
        self.log_x_head[-1] = math.log(self.x_bulk[0])

        self.log_q_tail = np.linspace(math.log(edge), math.log(_TAIL_MASS), _EDGE_KNOTS)
        self.x_tail = _solve_survival(n, np.exp(self.log_q_tail), self.x_max)
        self.x_tail[0] = self.x_bulk[-1]
        self.x_tail[-1] = self.x_max

    def quantile(self, u):
        """Map uniforms in [0, 1) to unit-scale radii."""
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        head = u < self.edge
        tail = u >= 1.0 - self.edge
        bulk = ~(head | tail)
        if np.any(bulk):
            # uniform knots: locate the cell arithmetically
            pos = (u[bulk] - self.p_bulk[0]) * _BULK_KNOTS
            i = np.minimum(pos.astype(np.intp), len(self.x_bulk) - 2)
            frac = pos - i
            out[bulk] = self.x_bulk[i] + frac * (self.x_bulk[i + 1] - self.x_bulk[i])
        if np.any(head):
            uh = u[head]
            tiny = uh < _HEAD_P_MIN
            lp = np.log(np.maximum(uh, _HEAD_P_MIN))
            lx = np.interp(lp, self.log_p_head, self.log_x_head)
            x0 = math.exp(self.log_x_head[0])
            out[head] = np.where(tiny, x0 * uh / _HEAD_P_MIN, np.exp(lx))
        if np.any(tail):
            lq = np.log(np.maximum(1.0 - u[tail], _TAIL_MASS))
            # np.interp wants increasing abscissae
            out[tail] = np.interp(lq, self.log_q_tail[::-1], self.x_tail[::-1])
        return out

    def sampler_cdf(self, x):
        """CDF of the distribution that :meth:`quantile` actually samples."""
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        x_lo, x_hi = self.x_bulk[0], self.x_bulk[-1]
        head = x < x_lo
        tail = x >= x_hi
        bulk = ~(head | tail)
        out[bulk] = np.interp(x[bulk], self.x_bulk, self.p_bulk)
        if np.any(head):
            xh = np.maximum(x[head], 0.0)
            x0 = math.exp(self.log_x_head[0])
            lin = xh / x0 * _HEAD_P_MIN
            with np.errstate(divide="ignore"):
                lp = np.interp(np.log(np.maximum(xh, 1e-300)), self.log_x_head, self.log_p_head)
            out[head] = np.where(xh < x0, lin, np.exp(lp))
        if np.any(tail):
            lq = np.interp(x[tail], self.x_tail, self.log_q_tail)
            out[tail] = np.where(x[tail] >= self.x_max, 1.0, 1.0 - np.exp(lq))
        return out


@functools.lru_cache(maxsize=None)
def bessel_table(n: int) -> BesselQuantileTable:
    """Cached unit-scale quantile table for dimension ``n``."""
    return BesselQuantileTable(int(n))


def sample_bessel(params: BesselParams, stream: np.random.Generator, size=None):
    """Inverse-CDF sample(s) of the Bessel radius law."""
    table = bessel_table(params.n)
    u = stream.random(size)
    r = params.beta * table.quantile(np.atleast_1d(u))
    return float(r[0]) if size is None else r.reshape(np.shape(u))


def sample_bessel_scaled(n: int, beta: np.ndarray, stream: np.random.Generator) -> np.ndarray:
    """One Bessel radius per entry of ``beta`` (vectorised over scales)."""
    u = stream.random(np.shape(beta))
    return beta * bessel_table(n).quantile(u)


# --------------------------------------------------------------------------
# n-dimensional Laplace


def laplace_norm_constant(n: int) -> float:
    """G(n/2 + 1) / (pi^(n/2) G(n + 1)), the unit-rate normaliser."""
    return math.exp(
        math.lgamma(n / 2.0 + 1.0) - (n / 2.0) * math.log(math.pi) - math.lgamma(n + 1.0)
    )


def laplace_density_nd(n: int, eps: float, x) -> float:
    """Density ``eps^n C1 exp(-eps ||x||)`` of the n-dimensional Laplace law."""
    if not eps > 0:
        raise ParameterError(f"privacy level must be positive, got {eps}")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise ParameterError(f"expected vectors of length {n}, got shape {x.shape}")
    r = np.linalg.norm(x, axis=-1)
    out = eps**n * laplace_norm_constant(n) * np.exp(-eps * r)
    return float(out) if out.ndim == 0 else out


def sample_laplace_nd(n: int, eps: float, stream: np.random.Generator, size=None) -> np.ndarray:
    """Vector(s) with density proportional to ``exp(-eps ||v||_2)``.

    Radius Gamma(n, 1/eps) times a uniform direction.
    """
    if not eps > 0:
        raise ParameterError(f"privacy level must be positive, got {eps}")
    r = sample_gamma_integer(n, 1.0 / eps, stream, size)
    direction = sample_unit_direction(n, stream, size)
    return np.asarray(r)[..., None] * direction if size is not None else r * direction
