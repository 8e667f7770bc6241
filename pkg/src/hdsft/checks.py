"""Self-verification suite behind ``hdsft verify``.

Each check measures one quantity and compares it against a fixed
threshold. ``level="fast"`` shrinks trial counts; ``"full"`` uses the
acceptance-suite sizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bucketfilter import ImportanceSampleSet, conv_direct, conv_sampled, v2_geometric, v2_weight
from .hashing import draw_hash, hashed_frequency
from .model import AlgorithmParams, SignalSpec, derive_params, random_spec
from .oracle_eval import (check_grid, concentration_probe, dense_dft, dense_idft, dft_definition, fH_grid,
                          filtered_grid, grid_points, isolation_probe)
from .pipeline import CALIBRATED_C_N
from .toneest import estimate_tone


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<28} measured={self.measured:.4g}  threshold={self.threshold:.4g}  {self.detail}"


def _le(name, measured, threshold, detail=""):
    return CheckResult(name, float(measured), float(threshold), bool(measured <= threshold), detail)


def _ge(name, measured, threshold, detail=""):
    return CheckResult(name, float(measured), float(threshold), bool(measured >= threshold), detail)


def small_params(T: float, F: float, s: int, d: int = 2, eta: float = 1.0, N: int = 1) -> AlgorithmParams:
    return AlgorithmParams(float(T), float(F), int(s), 1.0, int(N), 0.1, 0.1, d, eta).validate()


def check_dft(tfs=(8, 16, 32), seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for TF in tfs:
        T, F = 2.0, TF / 2.0
        g = rng.normal(size=(TF, TF)) + 1j * rng.normal(size=(TF, TF))
        spec = dense_dft(g, T, F)
        inv = np.abs(dense_idft(spec) - g).max()
        lhs = np.sum(np.abs(g) ** 2) / TF ** 2
        rhs = np.sum(np.abs(spec.values) ** 2) / T ** 2
        worst = max(worst, inv, abs(lhs - rhs) / lhs)
    return _le("dft_inversion_parseval", worst, 1e-9, f"TF in {list(tfs)}, d=2")


def check_dft_definition(seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    err = np.abs(dense_dft(g, 2.0, 4.0).values - dft_definition(g, 2.0, 4.0)).max()
    return _le("dft_vs_definition", err, 1e-12, "TF=8, d=2")


def check_v2(tfs=(16, 64, 256), ss=(2, 8), sign: int = 1) -> CheckResult:
    worst = 0.0
    for TF in tfs:
        for s in ss:
            p = small_params(1.0, float(TF), s, eta=2.0)
            y = np.arange(-(TF // 2), TF // 2)
            for j in range(1, s + 1):
                worst = max(worst, np.abs(v2_weight(y, j, p, sign) - v2_geometric(y, j, p)).max())
    return _le("v2_closed_form_vs_sum", worst, 1e-12, f"TF in {list(tfs)}, s in {list(ss)}")


def _two_tone(rng, M=4.0) -> SignalSpec:
    return random_spec(2, 2, M, 1.0, 1.0, 1.0, rng)


def check_conv_dense(seed=0, TF: int = 64) -> CheckResult:
    rng = np.random.default_rng(seed)
    check_grid(TF, 2)
    spec = _two_tone(rng)
    p = small_params(4.0, TF / 4.0, 4)
    hd = draw_hash(rng, p)
    x = grid_points(p.T, p.F, 2)
    worst = 0.0
    for j in range(1, p.s + 1):
        dense = filtered_grid(fH_grid(spec, hd, p), j, p).reshape(-1)
        worst = max(worst, np.abs(conv_direct(x, j, spec, hd, p) - dense).max())
    return _le("conv_direct_vs_dense", worst, 1e-10, f"d=2, TF={TF}")


def check_hash_pin(seeds=100) -> CheckResult:
    hits = 0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        spec = random_spec(1, 2, 4.0, 1.0, 1.0, 1.0, rng)
        p = small_params(4.0, 16.0, 4)
        hd = draw_hash(rng, p)
        energy = np.abs(dense_dft(fH_grid(spec, hd, p), p.T, p.F).values)
        peak = (np.array(np.unravel_index(energy.argmax(), energy.shape)) - p.TF // 2) / p.T
        nu = hashed_frequency(hd, p, spec.freqs[0])
        gap = np.abs((peak - nu + p.F / 2) % p.F - p.F / 2).max()
        hits += gap <= 1.0 / p.T
    return _ge("hash_convention_argmax", hits / seeds, 1.0, f"{hits}/{seeds} within one cell")


def check_concentration(tones=50, seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    f1 = f2 = 0.0
    for _ in range(tones):
        spec = random_spec(1, 2, 4.0, 1.0, 1.0, 1.0, rng)
        f1 += concentration_probe(spec, small_params(16.0, 32.0, 4), 1.0)
        f2 += concentration_probe(spec, small_params(32.0, 32.0, 4), 1.0)
    ratio = f2 / f1
    return CheckResult("concentration_1_over_T", ratio, 2 / 3, 1 / 3 <= ratio <= 2 / 3,
                       f"mean out-of-ball fraction ratio at 2T vs T over {tones} tones, want [1/3, 2/3]")


def isolation_params():
    spec = random_spec(3, 3, 4.0, 0.5, 1.0, 1.0, np.random.default_rng(1))
    return spec, derive_params(spec, 0.1, 0.2)


def check_isolation(trials=2000, seed=0) -> list[CheckResult]:
    spec, p = isolation_params()
    stats = isolation_probe(spec, p, trials, seed)
    delta = p.delta
    sigma = math.sqrt(delta * (1 - delta) / trials)
    return [_le("isolation_p_collision", stats.p_collision, delta + 3 * sigma, f"{trials} hash draws"),
            _ge("isolation_p_isolated", stats.p_isolated, 1 - delta - 3 * sigma, f"{trials} hash draws")]


def sampler_setup():
    """The importance-sampler calibration instance: k=2, A=1, TF=64, d=2, eps=delta=0.1."""
    spec = random_spec(2, 2, 4.0, 1.0, 1.0, 1.0, np.random.default_rng(7))
    p = derive_params(spec, 0.1, 0.1, {"T": 4.0, "F": 16.0, "s": 4, "c_N": CALIBRATED_C_N})
    return spec, p


def sampler_sup_error(seed: int, N: int | None = None, points: int = 64) -> float:
    spec, p = sampler_setup()
    rng = np.random.default_rng(seed)
    hd = draw_hash(rng, p)
    samples = ImportanceSampleSet.draw(p.N if N is None else N, rng)
    x = rng.uniform(-p.T / 2, p.T / 2, size=(points, 2))
    return max(float(np.abs(conv_sampled(x, j, spec, hd, p, samples) - conv_direct(x, j, spec, hd, p)).max())
               for j in range(1, p.s + 1))


def check_sampler(seeds=100) -> CheckResult:
    errs = np.array([sampler_sup_error(seed) for seed in range(seeds)])
    rate = float(np.mean(errs <= 0.1))
    return _ge("importance_sampler_sup", rate, 0.95, f"fraction of {seeds} seeds with sup error <= 0.1")


def check_tone_exact() -> CheckResult:
    est = estimate_tone(lambda t: 2.0 * np.exp(2j * math.pi * 3.0 * t), 16.0, 64.0, 8, np.random.default_rng(0))
    err = max(abs(est.frequency - 3.0) * 16 * 64, abs(est.amplitude - 2.0) * 1e6)
    return _le("tone_exact", err, 1.0, "frequency in units of 1/(TF), amplitude in units of 1e-6")


def run_checks(level: str = "fast", v2_sign: int = 1, dense_tf: int | None = None) -> list[CheckResult]:
    """Run the suite; raises :class:`GridTooLarge` if ``dense_tf`` breaks the grid guard."""
    full = level == "full"
    if dense_tf is not None:
        check_grid(int(dense_tf), 2)
    out = [check_dft(), check_dft_definition(), check_v2(sign=v2_sign),
           check_conv_dense(TF=dense_tf or 64), check_hash_pin(100 if full else 20),
           check_concentration(50 if full else 8)]
    out += check_isolation(2000 if full else 500)
    out += [check_sampler(100 if full else 10), check_tone_exact()]
    return out

