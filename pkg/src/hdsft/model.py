"""Signal model, discretization parameters and the black-box signal oracle.

A signal is a finite sum of tones ``a_j exp(2 pi i w_j . t)`` on R^d with
frequencies in ``[-M, M]^d``, pairwise Euclidean separation above ``eta``
and amplitudes ``A' <= |a_j| <= A``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InfeasibleInstance, InfeasibleParameters, InvalidArgument


@dataclass(frozen=True)
class Tone:
    amplitude: complex
    frequency: tuple[float, ...]

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.frequency, dtype=np.float64)


@dataclass(frozen=True)
class SignalSpec:
    """Ground-truth tones plus the model constants the algorithm is told."""

    tones: tuple[Tone, ...]
    d: int
    M: float
    eta: float
    A: float
    Aprime: float

    def __post_init__(self):
        object.__setattr__(self, "tones", tuple(self.tones))

    @property
    def k(self) -> int:
        return len(self.tones)

    @property
    def freqs(self) -> np.ndarray:
        if not self.tones:
            return np.zeros((0, self.d))
        return np.array([t.frequency for t in self.tones], dtype=np.float64)

    @property
    def amps(self) -> np.ndarray:
        return np.array([t.amplitude for t in self.tones], dtype=np.complex128)

    def validate(self, require_tones: bool = False) -> SignalSpec:
        """Check every model invariant; raise ``InvalidArgument`` on the first violation."""
        if int(self.d) != self.d or self.d < 2:
            raise InvalidArgument(f"d must be an integer >= 2, got {self.d}")
        if not (self.M > 0 and self.eta > 0 and self.A > 0 and self.Aprime > 0):
            raise InvalidArgument("M, eta, A, Aprime must all be positive")
        if self.Aprime > self.A:
            raise InvalidArgument(f"Aprime={self.Aprime} exceeds A={self.A}")
        if require_tones and self.k < 1:
            raise InvalidArgument("signal needs at least one tone")
        tol = 1e-12
        for i, tone in enumerate(self.tones):
            if len(tone.frequency) != self.d:
                raise InvalidArgument(f"tone {i} has {len(tone.frequency)} coordinates, expected {self.d}")
            if np.any(np.abs(tone.w) > self.M * (1 + tol)):
                raise InvalidArgument(f"tone {i} frequency leaves [-M, M]^d")
            mag = abs(tone.amplitude)
            if not (self.Aprime * (1 - tol) <= mag <= self.A * (1 + tol)):
                raise InvalidArgument(f"tone {i} amplitude |a|={mag:.6g} outside [A', A]")
        if self.k >= 2:
            gap = min_pairwise_distance(self.freqs)
            if not gap > self.eta:
                raise InvalidArgument(f"frequency gap {gap:.6g} does not exceed eta={self.eta}")
        return self

    # serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "d": int(self.d),
            "M": float(self.M),
            "eta": float(self.eta),
            "A": float(self.A),
            "Aprime": float(self.Aprime),
            "tones": [
                {"re": float(complex(t.amplitude).real), "im": float(complex(t.amplitude).imag),
                 "w": [float(x) for x in t.frequency]}
                for t in self.tones
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> SignalSpec:
        expected = {"d", "M", "eta", "A", "Aprime", "tones"}
        missing = expected - set(doc)
        if missing:
            raise InvalidArgument(f"signal document missing keys: {sorted(missing)}")
        unknown = set(doc) - expected
        if unknown:
            raise InvalidArgument(f"signal document has unknown keys: {sorted(unknown)}")
        tones = tuple(
            Tone(complex(t["re"], t["im"]), tuple(float(x) for x in t["w"])) for t in doc["tones"]
        )
        return cls(tones, int(doc["d"]), float(doc["M"]), float(doc["eta"]),
                   float(doc["A"]), float(doc["Aprime"]))

    def dumps(self) -> str:
        # repr-based float formatting keeps full double precision
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> SignalSpec:
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> SignalSpec:
        return cls.loads(Path(path).read_text())


def min_pairwise_distance(freqs: np.ndarray) -> float:
    freqs = np.asarray(freqs, dtype=np.float64)
    if len(freqs) < 2:
        return math.inf
    diff = freqs[:, None, :] - freqs[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    iu = np.triu_indices(len(freqs), 1)
    return float(dist[iu].min())


def eval_signal(spec: SignalSpec, t) -> complex | np.ndarray:
    """Evaluate the signal at one point (length-d vector) or at rows of an array."""
    t = np.asarray(t, dtype=np.float64)
    if t.shape[-1] != spec.d:
        raise InvalidArgument(f"point has {t.shape[-1]} coordinates, signal is {spec.d}-dimensional")
    vals = kernels.tone_sum(spec.freqs, spec.amps, t.reshape(-1, spec.d))
    if t.ndim == 1:
        return complex(vals[0])
    return vals.reshape(t.shape[:-1])


class SignalOracle:
    """Black-box access to a signal with exact sample accounting.

    The algorithm reads signal values only through this object. ``samples``
    counts every point at which the signal was evaluated. Not thread-safe;
    the pipeline evaluates buckets sequentially so the count is
    schedule-independent.
    """

    def __init__(self, spec: SignalSpec):
        self.d = spec.d
        self._freqs = np.ascontiguousarray(spec.freqs)
        self._amps = np.ascontiguousarray(spec.amps)
        self.samples = 0

    @classmethod
    def wrap(cls, source) -> SignalOracle:
        return source if isinstance(source, SignalOracle) else cls(source)

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[-1] != self.d:
            raise InvalidArgument(f"points have {points.shape[-1]} coordinates, signal is {self.d}-dimensional")
        self.samples += points.shape[0]
        return kernels.tone_sum(self._freqs, self._amps, points)

    def hashed_conv(self, xs, h, rate, T, shifts, weights) -> np.ndarray:
        """Batched query: see :func:`hdsft.kernels.hashed_conv`. Counts ``len(xs) * len(shifts)`` samples."""
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        self.samples += xs.shape[0] * len(shifts)
        return kernels.hashed_conv(self._freqs, self._amps, xs, h, rate, T, shifts, weights)

    def conv_plan(self, h, rate, T, shifts, weights) -> ConvPlan:
        """Bind a fixed shift kernel for repeated :meth:`hashed_conv`-style queries."""
        return ConvPlan(self, kernels.ShiftSumPlan(self._freqs, self._amps, h, rate, T, shifts, weights))


class ConvPlan:
    """Repeated batched queries against one kernel; counts ``len(xs) * U`` samples per call like
    :meth:`SignalOracle.hashed_conv`, but evaluates through prefix sums."""

    def __init__(self, oracle: SignalOracle, plan):
        self.oracle = oracle
        self._plan = plan

    def __call__(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        if xs.shape[-1] != self.oracle.d:
            raise InvalidArgument(f"points have {xs.shape[-1]} coordinates, signal is {self.oracle.d}-dimensional")
        self.oracle.samples += xs.shape[0] * self._plan.U
        return self._plan(xs)


# ---------------------------------------------------------------------------
# discretization parameters

_OVERRIDABLE = ("T", "F", "s", "N", "beta")
_CONSTANTS = ("c_s", "c_T", "c_F", "c_N", "c_R", "c_a")


@dataclass(frozen=True)
class AlgorithmParams:
    T: float
    F: float
    s: int
    beta: float
    N: int
    epsilon: float
    delta: float
    d: int
    eta: float
    c_s: float = 1.0
    c_T: float = 1.0
    c_F: float = 1.0
    c_N: float = 1.0
    c_R: float = 1.0
    c_a: float = 1.0
    overridden: tuple[str, ...] = field(default=(), compare=False)

    @property
    def TF(self) -> int:
        return int(round(self.T * self.F))

    @property
    def bucket_width(self) -> int:
        """Number of frequency-grid indices per bucket, ``TF / s``."""
        return self.TF // self.s

    def validate(self) -> AlgorithmParams:
        for name in ("T", "F"):
            if not is_pow2(getattr(self, name)):
                raise InfeasibleParameters(f"{name}={getattr(self, name)} is not a power of two")
        if not is_pow2(self.s) or int(self.s) != self.s:
            raise InfeasibleParameters(f"s={self.s} is not an integer power of two")
        if not 1 < self.s < self.F:
            raise InfeasibleParameters(f"need 1 < s < F, got s={self.s}, F={self.F}")
        if not self.T > 1.0 / self.eta:
            raise InfeasibleParameters(f"need T > 1/eta, got T={self.T}, eta={self.eta}")
        if self.T * self.F < self.s:
            raise InfeasibleParameters(f"TF={self.T * self.F} is smaller than s={self.s}")
        if self.N < 1 or self.beta <= 0:
            raise InfeasibleParameters("N and beta must be positive")
        if math.floor(self.F / self.eta) < 1:
            raise InfeasibleParameters(f"F/eta={self.F / self.eta:.4g} leaves no odd hash multiplier")
        return self

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["overridden"] = list(self.overridden)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> AlgorithmParams:
        names = {f.name for f in fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise InvalidArgument(f"unknown parameter keys: {sorted(unknown)}")
        doc = dict(doc)
        doc["overridden"] = tuple(doc.get("overridden", ()))
        return cls(**doc)


def is_pow2(x) -> bool:
    if x <= 0:
        return False
    m, _ = math.frexp(x)
    return m == 0.5


def next_pow2(x: float) -> float:
    """Smallest power of two >= x (a float, so values below 1 are allowed)."""
    if x <= 0:
        raise InvalidArgument(f"next_pow2 needs a positive value, got {x}")
    m, e = math.frexp(x)
    return math.ldexp(1.0, e - 1) if m == 0.5 else math.ldexp(1.0, e)


def epsilon_ceiling(spec: SignalSpec) -> float:
    return min(1.0, spec.eta, spec.Aprime / 4.0, 1.0 / (4.0 * spec.A ** 2))


def importance_sample_count(k, A, TF, epsilon, delta, c_N=1.0) -> int:
    return int(math.ceil(c_N * k ** 2 * A ** 2 * math.log(TF) ** 2 * math.log(1.0 / delta) ** 2 / epsilon ** 2))


def derive_params(spec: SignalSpec, epsilon: float, delta: float, overrides: dict | None = None,
                  **constants) -> AlgorithmParams:
    """Discretization from the analytic formulas, every big-O constant set by a ``c_*`` multiplier.

    ``overrides`` may replace any of ``T, F, s, N, beta`` (and the ``c_*``
    constants can also be given there). Derived quantities are recomputed
    from whatever was overridden: N uses the final ``TF`` and beta the final
    ``s``.
    """
    overrides = dict(overrides or {})
    for key in list(overrides):
        if key in _CONSTANTS:
            constants[key] = overrides.pop(key)
    unknown = set(overrides) - set(_OVERRIDABLE)
    unknown |= set(constants) - set(_CONSTANTS)
    if unknown:
        raise InvalidArgument(f"unknown override keys: {sorted(unknown)}")
    c = {name: float(constants.get(name, 1.0)) for name in _CONSTANTS}

    if not 0 < delta < 0.5:
        raise InvalidArgument(f"delta must lie in (0, 1/2), got {delta}")
    ceiling = epsilon_ceiling(spec)
    if not 0 < epsilon < ceiling:
        raise InvalidArgument(f"epsilon must lie in (0, {ceiling:.6g}), got {epsilon}")

    k = max(spec.k, 1)
    d = spec.d
    if "s" in overrides:
        s = int(overrides["s"])
    else:
        s = int(next_pow2(c["c_s"] * math.sqrt(d) * k ** 2 / delta))
    if "F" in overrides:
        F = float(overrides["F"])
    else:
        F = next_pow2(c["c_F"] * max(k ** 2 * spec.M / delta, math.sqrt(d) * spec.M / epsilon))
    if "T" in overrides:
        T = float(overrides["T"])
    else:
        raw = c["c_T"] * k ** 4 * d ** 2.5 * (d * s / (epsilon * delta)) ** 2 / (spec.eta * delta ** 2)
        T = next_pow2(raw)
        if T <= 1.0 / spec.eta:
            T = next_pow2(1.0 / spec.eta) * 2.0
    if "N" in overrides:
        N = int(overrides["N"])
    else:
        N = importance_sample_count(k, spec.A, T * F, epsilon, delta, c["c_N"])
    if "beta" in overrides:
        beta = float(overrides["beta"])
    else:
        beta = spec.eta * delta / (math.sqrt(d) * k * s)

    params = AlgorithmParams(T=T, F=F, s=s, beta=beta, N=N, epsilon=float(epsilon), delta=float(delta),
                             d=d, eta=float(spec.eta), overridden=tuple(sorted(overrides)), **c)
    return params.validate()


def with_overrides(params: AlgorithmParams, **changes) -> AlgorithmParams:
    return replace(params, **changes).validate()


# ---------------------------------------------------------------------------
# random instances

def random_spec(k: int, d: int, M: float, eta: float, A: float, Aprime: float, rng,
                max_attempts: int = 10_000) -> SignalSpec:
    """Uniform frequencies in [-M, M]^d, rejection-sampled to pairwise distance > eta.

    Amplitude magnitudes are uniform on [A', A] with uniform phase.
    """
    if k < 0:
        raise InvalidArgument("k must be non-negative")
    diameter = 2 * M * math.sqrt(d)
    if k >= 2 and eta >= diameter:
        raise InfeasibleInstance(
            f"cannot place {k} tones: eta={eta} >= cube diameter 2M*sqrt(d)={diameter:.4g}")
    placed: list[np.ndarray] = []
    attempts = 0
    while len(placed) < k:
        if attempts >= max_attempts:
            raise InfeasibleInstance(
                f"placed {len(placed)} of {k} tones after {max_attempts} draws "
                f"(eta={eta}, cube [-{M}, {M}]^{d}); lower k or eta")
        attempts += 1
        w = rng.uniform(-M, M, size=d)
        if all(np.linalg.norm(w - v) > eta for v in placed):
            placed.append(w)
    mags = rng.uniform(Aprime, A, size=k)
    phases = rng.uniform(0.0, 2 * math.pi, size=k)
    tones = tuple(Tone(complex(m * np.exp(1j * p)), tuple(float(x) for x in w))
                  for m, p, w in zip(mags, phases, placed))
    return SignalSpec(tones, d, float(M), float(eta), float(A), float(Aprime)).validate()
