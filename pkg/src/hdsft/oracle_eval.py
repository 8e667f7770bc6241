"""Brute-force oracles and statistical probes.

Dense transforms use the grids ``Gamma1 = {n/F}`` (time) and
``Gamma2 = {m/T}`` (frequency) with ``n, m`` in ``[-TF/2, TF/2)`` per axis.
Arrays are stored in natural order: array index ``i`` holds grid index
``i - TF/2``. Normalizations::

    forward  G(m/T) = (sqrt(T) F)^-d  sum_n g(n/F) exp(-2 pi i n.m / TF)
    inverse  g(n/F) = sqrt(T)^-d      sum_m G(m/T) exp(+2 pi i n.m / TF)
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooLarge, InvalidArgument
from .hashing import (HashDraw, apply_h_star, bucket_of, draw_hash, fold, grid_index,
                      hashed_frequency, min_last_coord_gap)
from .model import AlgorithmParams, SignalOracle, SignalSpec, random_spec
from .pipeline import desk_params, recover_all

MAX_DENSE_CELLS = 1 << 22


def check_grid(TF: int, d: int) -> None:
    cells = TF ** d
    if cells > MAX_DENSE_CELLS:
        raise GridTooLarge(
            f"dense grid (TF)^d = {TF}^{d} = {cells} cells exceeds the guard of {MAX_DENSE_CELLS} (2^22)")


@dataclass(frozen=True)
class DenseSpectrum:
    values: np.ndarray
    T: float
    F: float

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def TF(self) -> int:
        return self.values.shape[0]

    def axis(self) -> np.ndarray:
        """Frequencies ``m/T`` along one axis, natural order."""
        return (np.arange(self.TF) - self.TF // 2) / self.T


def grid_axis(T: float, F: float) -> np.ndarray:
    TF = int(round(T * F))
    return (np.arange(TF) - TF // 2) / F


def grid_points(T: float, F: float, d: int) -> np.ndarray:
    """All of Gamma1 as a ``(TF^d, d)`` array, C order matching ``values.reshape(-1)``."""
    TF = int(round(T * F))
    check_grid(TF, d)
    ax = grid_axis(T, F)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def dense_dft(values, T: float, F: float) -> DenseSpectrum:
    values = np.asarray(values, dtype=np.complex128)
    TF = int(round(T * F))
    d = values.ndim
    if any(n != TF for n in values.shape):
        raise InvalidArgument(f"expected a ({TF},)*{d} grid, got shape {values.shape}")
    check_grid(TF, d)
    out = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(values)))
    return DenseSpectrum(out / (math.sqrt(T) * F) ** d, float(T), float(F))


def dense_idft(spec: DenseSpectrum) -> np.ndarray:
    T, TF, d = spec.T, spec.TF, spec.d
    out = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(spec.values)))
    return out * TF ** d / math.sqrt(T) ** d


def dft_definition(values, T: float, F: float) -> np.ndarray:
    """Definitional O((TF)^{2d}) double sum. Tiny grids only."""
    values = np.asarray(values, dtype=np.complex128)
    d = values.ndim
    x = grid_points(T, F, d)
    xi = grid_points(F, T, d)  # spacing 1/T, extent F
    kernel = np.exp(-2j * math.pi * (xi @ x.T))
    return (kernel @ values.reshape(-1)).reshape(values.shape) / (math.sqrt(T) * F) ** d


def fH_grid(signal, hd: HashDraw, params: AlgorithmParams) -> np.ndarray:
    """The hashed signal sampled on all of Gamma1."""
    oracle = SignalOracle.wrap(signal)
    x = grid_points(params.T, params.F, hd.d)
    vals = oracle(apply_h_star(hd, x)) * np.exp(2j * math.pi * hd.sigma_b * hd.b * x[:, -1] / params.T)
    return vals.reshape((params.TF,) * hd.d)


def bucket_mask(j: int, params: AlgorithmParams, d: int) -> np.ndarray:
    idx = np.arange(params.TF) - params.TF // 2
    last = bucket_of(idx, params) == j
    shape = (1,) * (d - 1) + (params.TF,)
    return np.broadcast_to(last.reshape(shape), (params.TF,) * d)


def filtered_grid(values, j: int, params: AlgorithmParams) -> np.ndarray:
    """``F^-1[X_j . F[values]]`` on Gamma1 via the dense transforms."""
    spec = dense_dft(values, params.T, params.F)
    masked = DenseSpectrum(spec.values * bucket_mask(j, params, spec.d), spec.T, spec.F)
    return dense_idft(masked)


# ---------------------------------------------------------------------------
# spectral concentration of a single tone

def concentration_probe(spec: SignalSpec, params: AlgorithmParams, beta: float | None = None) -> float:
    """Fraction of a single tone's dense-grid spectral energy outside the ball of radius ``beta/2``.

    The ball is centred on the grid frequency nearest the tone; distances are
    periodic with period ``F`` per axis.
    """
    if spec.k != 1:
        raise InvalidArgument(f"concentration_probe needs a single tone, got k={spec.k}")
    beta = params.beta if beta is None else float(beta)
    d = spec.d
    values = SignalOracle(spec)(grid_points(params.T, params.F, d)).reshape((params.TF,) * d)
    energy = np.abs(dense_dft(values, params.T, params.F).values) ** 2
    centre = np.round(fold(spec.freqs[0], params.F) * params.T) / params.T
    ax = grid_axis(params.F, params.T)  # frequency axis, spacing 1/T
    dist2 = np.zeros(energy.shape)
    for i in range(d):
        off = fold(ax - centre[i], params.F) ** 2
        dist2 = dist2 + off.reshape((1,) * i + (-1,) + (1,) * (d - i - 1))
    total = energy.sum()
    if total == 0:
        return 0.0
    return float(energy[dist2 > (beta / 2) ** 2].sum() / total)


# ---------------------------------------------------------------------------
# collision and isolation under random hashing

@dataclass(frozen=True)
class IsolationStats:
    trials: int
    collisions: int
    boundary: int
    isolated: int

    @property
    def p_collision(self) -> float:
        return self.collisions / self.trials

    @property
    def p_boundary(self) -> float:
        return self.boundary / self.trials

    @property
    def p_isolated(self) -> float:
        return self.isolated / self.trials

    def as_tuple(self) -> tuple[float, float, float]:
        return self.p_collision, self.p_boundary, self.p_isolated


def ball_buckets(hd: HashDraw, spec: SignalSpec, params: AlgorithmParams, beta: float) -> list[tuple[int, int, bool]]:
    """For each tone, ``(first bucket, last bucket, straddles)`` over the ``1/T`` cells its hashed ball touches.

    The ball of radius ``beta/2`` around ``w`` maps to an interval of
    half-width ``|h| beta/2`` on the hashed last coordinate. Computed from the
    end cells only, so huge ``TF`` is fine.
    """
    if spec.k == 0:
        return []
    centre = hashed_frequency(hd, params, spec.freqs)[..., -1]
    half = float(np.linalg.norm(hd.hv)) * beta / 2
    lo = np.atleast_1d(grid_index(centre - half, params))
    hi = np.atleast_1d(grid_index(centre + half, params))
    TF = params.TF
    width = TF // params.s
    out = []
    for a, b in zip(lo, hi):
        span = (int(b) - int(a)) % TF + 1
        ba, bb = bucket_of(int(a), params), bucket_of(int(b), params)
        out.append((ba, bb, ba != bb or span > width))
    return out


def isolation_probe(spec: SignalSpec, params: AlgorithmParams, trials: int, seed=0,
                    beta: float | None = None) -> IsolationStats:
    """Monte-Carlo rates of hash collisions, straddled bucket edges and full isolation.

    collision: some pair of hashed last coordinates within ``2F/s`` (folded);
    boundary: some tone's hashed ball touches cells of two buckets;
    isolated: every ball sits inside one bucket and the buckets are distinct.
    """
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    beta = params.beta if beta is None else float(beta)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    coll = bnd = iso = 0
    thresh = 2 * params.F / params.s
    for _ in range(int(trials)):
        hd = draw_hash(rng, params)
        c = min_last_coord_gap(hd, spec, params) <= thresh
        sets = ball_buckets(hd, spec, params, beta)
        b = any(x[2] for x in sets)
        i = not b and len({x[0] for x in sets}) == spec.k
        coll += c
        bnd += b
        iso += i
    return IsolationStats(int(trials), coll, bnd, iso)


# ---------------------------------------------------------------------------
# scoring and sweeps

@dataclass(frozen=True)
class MatchReport:
    pairs: tuple[tuple[int, int], ...]
    recall: float
    max_freq_error: float
    max_amp_error: float


def match_score(truth: SignalSpec, result, threshold: float) -> MatchReport:
    """Greedy nearest matching of recovered tones to true tones within ``threshold``.

    ``result`` is a RecoveryResult or a sequence of Tone. Pairs are taken in
    order of increasing distance, each side used at most once.
    """
    tones = list(getattr(result, "recovered", result))
    k = truth.k
    if k == 0:
        return MatchReport((), 1.0, 0.0, 0.0)
    if not tones:
        return MatchReport((), 0.0, 0.0, 0.0)
    rw = np.array([t.w for t in tones])
    dist = np.linalg.norm(truth.freqs[:, None, :] - rw[None, :, :], axis=-1)
    order = np.argsort(dist, axis=None, kind="stable")
    used_t, used_r, pairs = set(), set(), []
    for flat in order:
        i, j = np.unravel_index(flat, dist.shape)
        if dist[i, j] > threshold:
            break
        if i in used_t or j in used_r:
            continue
        used_t.add(int(i))
        used_r.add(int(j))
        pairs.append((int(i), int(j)))
    f_err = max((float(dist[i, j]) for i, j in pairs), default=0.0)
    a_err = max((abs(complex(truth.tones[i].amplitude) - complex(tones[j].amplitude)) for i, j in pairs), default=0.0)
    return MatchReport(tuple(pairs), len(pairs) / k, f_err, a_err)


CSV_HEADER = ("d", "k", "seed", "samples", "wall_time_ms", "recall", "max_freq_error", "failed")


@dataclass(frozen=True)
class SweepRow:
    d: int
    k: int
    seed: int
    samples: int
    wall_time_ms: float
    recall: float
    max_freq_error: float
    failed: bool
    result: object = field(default=None, repr=False, compare=False)

    def as_csv(self) -> list:
        return [self.d, self.k, self.seed, self.samples, f"{self.wall_time_ms:.3f}", f"{self.recall:.6g}",
                f"{self.max_freq_error:.6g}", int(self.failed)]


@dataclass(frozen=True)
class SweepPolicy:
    """Instance and parameter policy held fixed while ``d`` varies."""

    k: int = 2
    M: float = 8.0
    eta: float = 1.0
    A: float = 1.0
    Aprime: float = 0.5
    epsilon: float = 0.1
    delta: float = 0.1
    restarts: int = 3
    overrides: dict = field(default_factory=dict)


def instance_seed(seed: int, d: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(d, k)))


def sweep(dims, seeds, policy: SweepPolicy | None = None) -> list[SweepRow]:
    """One recovery per ``(d, seed)`` under ``policy``; failures become rows with ``failed`` set."""
    policy = policy or SweepPolicy()
    rows = []
    for d in dims:
        for seed in seeds:
            start = time.perf_counter()
            try:
                spec = random_spec(policy.k, int(d), policy.M, policy.eta, policy.A, policy.Aprime,
                                   instance_seed(int(seed), int(d), policy.k))
                params = desk_params(spec, policy.epsilon, policy.delta, **policy.overrides)
                res = recover_all(spec, params, int(seed), policy.restarts)
            except (ValueError, RuntimeError):
                rows.append(SweepRow(int(d), policy.k, int(seed), 0, (time.perf_counter() - start) * 1e3,
                                     0.0, math.inf, True))
                continue
            rep = match_score(spec, res, policy.eta / 4)
            rows.append(SweepRow(int(d), policy.k, int(seed), res.total_signal_samples, res.wall_time * 1e3,
                                 rep.recall, rep.max_freq_error, rep.recall < 1.0, res))
    return rows


def write_csv(rows, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.as_csv())


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``log x``, using per-``x`` medians."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    ux = np.unique(xs)
    if len(ux) < 2:
        raise InvalidArgument("slope fit needs at least two distinct x values")
    med = np.array([np.median(ys[xs == x]) for x in ux])
    return float(np.polyfit(np.log(ux), np.log(med), 1)[0])
