"""Bucket-restricted convolution of the hashed signal at arbitrary points.

Filtering the hashed signal to bucket ``j`` on the time grid is a 1-D
circular convolution along the last coordinate with the kernel ``v2_j(z)``,
``z`` in ``[-TF/2, TF/2)`` (shift ``z/F``, wrapped mod ``T``). The direct
sum costs ``TF`` signal samples per point. The production path replaces it
by an importance-sampled average over log-spaced shifts: a uniform
``t in (-1/2, 1/2)`` maps to ``z(t) = floor(sgn(t) (B^{2|t|} - 1))`` with
``B = TF/2 + 1``. The set of ``t`` mapping to one ``z`` has
``integral 2 ln(B) B^{2|t|} dt = 1``, so the weight ``v(t)`` makes the
estimator unbiased for the direct sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hashing import HashDraw, apply_h_star
from .model import AlgorithmParams, SignalOracle

TWO_PI = 2.0 * math.pi


def fH_eval(signal, hd: HashDraw, params: AlgorithmParams, x) -> complex | np.ndarray:
    """Hashed signal ``f(h^* x) exp(2 pi i sigma_b x_d b / T)``; x may be off the grid."""
    oracle = SignalOracle.wrap(signal)
    x = np.asarray(x, dtype=np.float64)
    flat = x.reshape(-1, hd.d)
    pts = apply_h_star(hd, flat)
    mod = np.exp(1j * TWO_PI * hd.sigma_b * hd.b * flat[:, -1] / params.T)
    vals = oracle(pts) * mod
    return complex(vals[0]) if x.ndim == 1 else vals.reshape(x.shape[:-1])


def v2_weight(y, j: int, params: AlgorithmParams, sign: int = 1):
    """Closed-form bucket kernel ``v2_j(y)``; ``y = 0`` returns ``1/s``.

    ``sign`` exists only as a mutation hook for the verification suite;
    any value other than 1 produces a deliberately wrong kernel.
    """
    y = np.asarray(y, dtype=np.float64)
    TF = params.TF
    s = params.s
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    out = np.full(y.shape, 1.0 / s, dtype=np.complex128)
    nz = y != 0
    yn = y[nz]
    denom = TF * (1.0 - np.exp(sign * 2j * math.pi * yn / TF))
    if np.any(np.abs(denom) < 1e-300):
        raise ArithmeticError("v2 denominator vanished at a nonzero in-range argument")
    num = np.exp(-1j * math.pi * yn) * (np.exp(2j * math.pi * yn * (j - 1) / s)
                                          - np.exp(2j * math.pi * yn * j / s))
    out[nz] = num / denom
    return complex(out[0]) if scalar else out


def v2_geometric(y, j: int, params: AlgorithmParams) -> np.ndarray:
    """Oracle for :func:`v2_weight`: ``(1/TF) sum_{n in bucket j} exp(2 pi i y n / TF)`` summed term by term."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    TF = params.TF
    width = TF // params.s
    n = np.arange(width * (j - 1) - TF // 2, width * j - TF // 2)
    # reduce y*n mod TF in exact integer arithmetic before the exponential
    phase = np.mod(np.outer(y.astype(np.int64), n), TF) / TF
    return np.exp(2j * math.pi * phase).sum(axis=1) / TF


def z_of_t(t, params: AlgorithmParams):
    """Log-scale shift index for ``t in (-1/2, 1/2)``; ``sgn(0) = +1``.

    Mathematically the result lies in ``[-TF/2, TF/2)``; a rounding spill to
    ``+TF/2`` is wrapped to ``-TF/2`` (mod ``TF``).
    """
    t = np.asarray(t, dtype=np.float64)
    half = params.TF // 2
    base = half + 1.0
    sgn = np.where(t >= 0, 1.0, -1.0)
    z = np.floor(sgn * (base ** (2.0 * np.abs(t)) - 1.0)).astype(np.int64)
    z = np.where(z >= half, z - 2 * half, z)
    z = np.maximum(z, -half)
    return int(z) if z.ndim == 0 else z


def importance_weight(t, j: int, params: AlgorithmParams, sign: int = 1):
    """``v(t) = 2 ln(B) B^{2|t|} v2_j(z(t))`` with ``B = TF/2 + 1``."""
    t = np.asarray(t, dtype=np.float64)
    base = params.TF / 2 + 1.0
    w = 2.0 * math.log(base) * base ** (2.0 * np.abs(t)) * v2_weight(z_of_t(t, params), j, params, sign)
    return complex(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class ImportanceSampleSet:
    """The shared set of uniform draws on (-1/2, 1/2) for one recovery run."""

    t_points: np.ndarray
    seed: int | None = None

    @property
    def N(self) -> int:
        return len(self.t_points)

    @classmethod
    def draw(cls, N: int, seed=None) -> ImportanceSampleSet:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        t = rng.uniform(-0.5, 0.5, size=int(N))
        # uniform() is half-open on the left; exclude the endpoint -1/2 itself
        t[t == -0.5] = 0.0
        return cls(t, seed if isinstance(seed, (int, np.integer)) else None)

    def shift_table(self, params: AlgorithmParams) -> tuple[np.ndarray, np.ndarray]:
        """Distinct shift indices and the per-shift sum of ``2 ln(B) B^{2|t|} / N``.

        Multiplying the second array by ``v2_j(z)`` gives the per-shift
        weights of the sampled estimator for bucket ``j``. Grouping draws that
        hit the same ``z`` evaluates the identical estimator with one signal
        query per distinct shift.
        """
        base = params.TF / 2 + 1.0
        z = z_of_t(self.t_points, params)
        jac = 2.0 * math.log(base) * base ** (2.0 * np.abs(self.t_points)) / self.N
        uniq, inv = np.unique(z, return_inverse=True)
        mass = np.bincount(inv, weights=jac, minlength=len(uniq))
        return uniq, mass


def _conv(signal, hd: HashDraw, params: AlgorithmParams, x, shifts, weights):
    oracle = SignalOracle.wrap(signal)
    x = np.asarray(x, dtype=np.float64)
    xs = x.reshape(-1, hd.d)
    rate = hd.sigma_b * hd.b / params.T
    vals = oracle.hashed_conv(xs, hd.hv, rate, params.T, np.asarray(shifts, dtype=np.float64) / params.F, weights)
    return complex(vals[0]) if x.ndim == 1 else vals.reshape(x.shape[:-1])


def direct_kernel(j: int, params: AlgorithmParams) -> tuple[np.ndarray, np.ndarray]:
    z = np.arange(-(params.TF // 2), params.TF // 2, dtype=np.int64)
    return z, v2_weight(z, j, params)


def sampled_kernel(j: int, params: AlgorithmParams, samples: ImportanceSampleSet) -> tuple[np.ndarray, np.ndarray]:
    z, mass = samples.shift_table(params)
    return z, mass * v2_weight(z, j, params)


def conv_direct(x, j: int, signal, hd: HashDraw, params: AlgorithmParams):
    """Exact bucket filter: ``sum_z f_H(x - e_d z/F) v2_j(z)`` over all ``TF`` shifts."""
    z, w = direct_kernel(j, params)
    return _conv(signal, hd, params, x, z, w)


def conv_sampled(x, j: int, signal, hd: HashDraw, params: AlgorithmParams, samples: ImportanceSampleSet):
    """``(1/N) sum_i f_H(x - e_d z(t_i)/F) v(t_i)`` over the shared sample set."""
    z, w = sampled_kernel(j, params, samples)
    return _conv(signal, hd, params, x, z, w)


def conv_sampled_naive(x, j: int, signal, hd: HashDraw, params: AlgorithmParams, samples: ImportanceSampleSet):
    """Same estimator without grouping repeated shifts; one query per draw. Reference only."""
    z = z_of_t(samples.t_points, params)
    w = importance_weight(samples.t_points, j, params) / samples.N
    return _conv(signal, hd, params, x, z, w)
