"""One-dimensional restrictions of the bucket-filtered signal.

For a bucket ``j`` and coordinate ``l``, freeze the other ``d-1`` lattice
coordinates at random values ``X_l`` and let coordinate ``l`` run over
``floor(tF)/F``. The filtered hashed signal is read at the dehashed point
``(h^-1)^* y`` and demodulated there, which for a tone isolated in
bucket ``j`` leaves ``a theta exp(2 pi i w_l floor(tF)/F)`` with a
unit-modulus nuisance phase ``theta`` set by the frozen coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bucketfilter import ImportanceSampleSet, direct_kernel, sampled_kernel
from .errors import InvalidArgument
from .hashing import HashDraw, apply_h_inv_star
from .model import AlgorithmParams, SignalOracle

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LineContext:
    l: int
    X: tuple[int, ...]
    hash: HashDraw | None = None
    j: int | None = None
    samples: ImportanceSampleSet | None = None

    def attach(self, hd: HashDraw, j: int, samples: ImportanceSampleSet | None) -> LineContext:
        return LineContext(self.l, self.X, hd, j, samples)


def draw_line(rng, l: int, params: AlgorithmParams, hd: HashDraw | None = None, j: int | None = None,
              samples: ImportanceSampleSet | None = None) -> LineContext:
    if not 1 <= l <= params.d:
        raise InvalidArgument(f"coordinate index l={l} outside 1..{params.d}")
    half = params.TF // 2
    X = rng.integers(-half, half, size=params.d - 1)
    return LineContext(l, tuple(int(v) for v in X), hd, j, samples)


def line_points(ctx: LineContext, t, params: AlgorithmParams) -> np.ndarray:
    """Lattice points ``x_{l,t}``: coordinate ``l`` is ``floor(tF)/F``, the rest ``X_l / F``."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    d = params.d
    frozen = np.asarray(ctx.X, dtype=np.float64) / params.F
    y = np.empty((t.size, d))
    others = [m for m in range(d) if m != ctx.l - 1]
    y[:, others] = frozen
    y[:, ctx.l - 1] = np.floor(t * params.F) / params.F
    return y


def nuisance_phase(ctx: LineContext, w, params: AlgorithmParams) -> complex:
    """``theta = exp(2 pi i sum_{m != l} w_m X_m / F)`` for a tone at ``w``."""
    w = np.asarray(w, dtype=np.float64)
    others = [m for m in range(params.d) if m != ctx.l - 1]
    return complex(np.exp(1j * TWO_PI * np.dot(w[others], np.asarray(ctx.X, dtype=np.float64)) / params.F))


class LineSampler:
    """Callable ``t -> g_{j,l}(t)`` bound to one line, one bucket and one signal.

    The bucket kernel (direct or sampled shifts and weights) is built once
    per line. With ``exact=True`` the direct ``TF``-term sum replaces the
    importance-sampled one.
    """

    concurrency_safe = True

    def __init__(self, ctx: LineContext, signal, params: AlgorithmParams, exact: bool = False, kernel=None):
        if ctx.hash is None or ctx.j is None:
            raise InvalidArgument("line context needs a hash draw and a bucket")
        if not exact and ctx.samples is None and kernel is None:
            raise InvalidArgument("sampled line needs an importance sample set")
        self.ctx = ctx
        self.oracle = SignalOracle.wrap(signal)
        self.params = params
        if kernel is None:
            kernel = direct_kernel(ctx.j, params) if exact else sampled_kernel(ctx.j, params, ctx.samples)
        z, w = kernel
        hd = ctx.hash
        self._rate = hd.sigma_b * hd.b / params.T
        self._plan = self.oracle.conv_plan(hd.hv, self._rate, params.T,
                                           np.asarray(z, dtype=np.float64) / params.F, w)

    def __call__(self, t) -> np.ndarray:
        rate = self._rate
        x = apply_h_inv_star(self.ctx.hash, line_points(self.ctx, t, self.params))
        vals = self._plan(x)
        # undo the hashing modulation at the dehashed last coordinate
        return vals * np.exp(-1j * TWO_PI * rate * x[:, -1])


def g_sample(ctx: LineContext, t, signal, params: AlgorithmParams, exact: bool = False):
    """``g_{j,l}(t)`` for scalar or array ``t`` in ``[-T/2, T/2)``."""
    vals = LineSampler(ctx, signal, params, exact=exact)(t)
    return complex(vals[0]) if np.ndim(t) == 0 else vals
