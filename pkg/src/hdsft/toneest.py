"""Single-tone frequency and amplitude estimation from black-box samples.

The sampled function lives on ``[-T/2, T/2)`` and is piecewise constant on
cells of width ``1/F``. Frequency comes from a ladder of lag correlations:
at lag ``tau_m = 2^m / F`` the phase of ``mean g(t + tau) conj(g(t))`` is
``2 pi w tau_m`` modulo ``2 pi``. The first lag determines ``w`` in
``[-F/2, F/2)`` without ambiguity; each doubling of the lag halves the
uncertainty and is unwrapped against the running estimate. Everything is
invariant to a constant unit-modulus factor on ``g``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ToneEstimate:
    frequency: float
    amplitude: complex
    active: bool
    samples_used: int
    truncated: bool = False
    screened: bool = False
    widths: tuple[float, ...] = field(default=(), repr=False)


def n_stages(T: float, F: float) -> int:
    """Number of lag stages ``m = 0 .. ceil(log2(TF)) - 2``."""
    return max(1, int(math.ceil(math.log2(T * F))) - 1)


def reps_per_stage(c_R: float, d: int, s: int, delta: float, rel_perturbation: float) -> int:
    """Correlation pairs per stage so every line succeeds w.p. >= 1 - delta/(4ds)."""
    margin = max(0.01, (1.0 - 2.0 * rel_perturbation) ** 2)
    return max(1, int(math.ceil(c_R * math.log(d * s / delta) / margin)))


def detect_active(est: ToneEstimate | complex, Aprime: float) -> bool:
    amp = est.amplitude if isinstance(est, ToneEstimate) else est
    return bool(abs(amp) >= Aprime / 2.0)


def _fold(x: float, period: float) -> float:
    return x - period * math.floor((x + 0.5 * period) / period)


def estimate_tone(sampler, T: float, F: float, reps: int, rng, gate: float | None = None,
                  budget: int | None = None) -> ToneEstimate:
    """Estimate ``(w, a)`` of ``g(t) ~ a exp(2 pi i w t)`` on ``[-T/2, T/2)``.

    Args:
        sampler: vectorized callable mapping an array of times to complex values.
        T, F: time span and inverse cell width; lags are multiples of ``1/F``.
        reps: correlation pairs per stage (the base points are shared).
        rng: numpy Generator for the base points.
        gate: activity threshold on ``|amplitude|``. When given, a bucket whose
            base samples have RMS below it is screened out before any lag is
            sampled; the amplitude estimate is bounded by that RMS anyway.
        budget: maximum number of sampler evaluations. Running out before the
            last stage returns ``active=False, truncated=True``.

    The base points are lattice times ``n/F`` with ``n`` uniform on
    ``[-TF/2, TF/4)`` so that every lag up to ``T/4`` stays inside the span.
    """
    TF = int(round(T * F))
    stages = n_stages(T, F)
    top_lag = 2 ** (stages - 1)
    n = rng.integers(-(TF // 2), TF // 2 - top_lag, size=reps)
    t0 = n / F
    used = 0

    def take(times):
        nonlocal used
        used += len(times)
        return np.asarray(sampler(times), dtype=np.complex128)

    if budget is not None and budget < reps:
        return ToneEstimate(0.0, 0j, False, 0, truncated=True)
    g0 = take(t0)
    rms = float(np.sqrt(np.mean(np.abs(g0) ** 2)))
    if gate is not None and rms < gate:
        return ToneEstimate(0.0, complex(rms), False, used, screened=True)

    w_hat = 0.0
    widths = [float(F)]
    for m in range(stages):
        if budget is not None and used + reps > budget:
            return ToneEstimate(_fold(w_hat, F), 0j, False, used, truncated=True, widths=tuple(widths))
        lag = 2 ** m / F
        corr = np.mean(take(t0 + lag) * np.conj(g0))
        phase_cycles = math.atan2(corr.imag, corr.real) / TWO_PI
        if m == 0:
            w_hat = phase_cycles / lag
        else:
            # nearest alias of phase/lag to the running estimate; ties go to the lower alias
            n_wrap = math.ceil(w_hat * lag - phase_cycles - 0.5)
            w_hat = (phase_cycles + n_wrap) / lag
        widths.append(1.0 / (2.0 * lag))

    amp = complex(np.mean(g0 * np.exp(-1j * TWO_PI * w_hat * t0)))
    active = abs(amp) >= gate if gate is not None else abs(amp) > 0.0
    return ToneEstimate(_fold(w_hat, F), amp, active, used, widths=tuple(widths))
