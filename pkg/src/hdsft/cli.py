"""Command-line interface: ``hdsft {gen, run, verify, sweep}``.

Configuration is one JSON document; command-line flags override its keys
and both override the defaults. Exit codes: 0 success, 1 a check or
assertion failed, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields

from .checks import run_checks
from .errors import GridTooLarge, InfeasibleInstance, InvalidArgument
from .model import SignalSpec, derive_params, random_spec
from .oracle_eval import SweepPolicy, instance_seed, loglog_slope, match_score, sweep, write_csv
from .pipeline import CALIBRATED_C_N, DESK_OVERRIDES, recover_all

OVERRIDE_KEYS = ("T", "F", "s", "N", "beta", "c_s", "c_T", "c_F", "c_N", "c_a", "c_R")
MAX_SLOPE = 6.0


def default_overrides() -> dict:
    return {**DESK_OVERRIDES, "c_N": CALIBRATED_C_N}


@dataclass
class RunConfig:
    spec: str | None = None
    k: int = 2
    d: int = 2
    M: float = 8.0
    eta: float = 1.0
    A: float = 1.0
    Aprime: float = 0.5
    epsilon: float = 0.1
    delta: float = 0.1
    seed: int = 0
    restarts: int = 3
    overrides: dict = field(default_factory=default_overrides)
    out: str | None = None
    trials: int = 3
    dims: list = field(default_factory=lambda: [2, 4, 8, 16])
    level: str = "fast"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> RunConfig:
        cfg = cls()
        cfg.update(doc)
        return cfg

    def update(self, doc: dict) -> None:
        known = {f.name for f in fields(self)}
        unknown = set(doc) - known
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        for key, value in doc.items():
            if key == "overrides":
                value = dict(value or {})
                bad = set(value) - set(OVERRIDE_KEYS)
                if bad:
                    raise InvalidArgument(f"unknown override keys: {sorted(bad)}")
            setattr(self, key, value)
        if self.level not in ("fast", "full"):
            raise InvalidArgument(f"level must be 'fast' or 'full', got {self.level!r}")


class UsageError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from None


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg.update(_read_json(args.config))
    flags = {}
    for key in ("spec", "k", "d", "M", "eta", "A", "Aprime", "epsilon", "delta", "seed", "restarts", "out",
                "trials", "level"):
        value = getattr(args, key, None)
        if value is not None:
            flags[key] = value
    if getattr(args, "dims", None):
        flags["dims"] = [int(x) for x in args.dims.split(",") if x.strip()]
    if getattr(args, "override", None):
        merged = dict(cfg.overrides)
        for item in args.override:
            key, _, value = item.partition("=")
            merged[key] = float(value)
        flags["overrides"] = merged
    cfg.update(flags)
    return cfg


def cmd_gen(cfg: RunConfig) -> int:
    spec = random_spec(cfg.k, cfg.d, cfg.M, cfg.eta, cfg.A, cfg.Aprime, instance_seed(cfg.seed, cfg.d, cfg.k))
    _emit(spec.dumps() + "\n", cfg.out)
    return 0


def cmd_run(cfg: RunConfig) -> int:
    if not cfg.spec:
        raise UsageError("run needs a signal spec (--spec PATH or 'spec' in the config)")
    spec = SignalSpec.from_dict(_read_json(cfg.spec))
    params = derive_params(spec, cfg.epsilon, cfg.delta, cfg.overrides)
    res = recover_all(spec, params, cfg.seed, cfg.restarts)
    _emit(_dumps(res.to_document()), cfg.out)
    summary = f"recovered {len(res.recovered)} tone(s) with {res.total_signal_samples} signal samples"
    if spec.k:
        rep = match_score(spec, res, spec.eta / 4)
        summary += f"; recall {rep.recall:.3f}, max freq error {rep.max_freq_error:.3g}"
    print(summary, file=sys.stderr)
    return 0


def cmd_verify(cfg: RunConfig, v2_sign: int = 1, dense_tf: int | None = None) -> int:
    results = run_checks(cfg.level, v2_sign=v2_sign, dense_tf=dense_tf)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0 if ok else 1


def cmd_sweep(cfg: RunConfig, assert_poly: bool = False) -> int:
    policy = SweepPolicy(cfg.k, cfg.M, cfg.eta, cfg.A, cfg.Aprime, cfg.epsilon, cfg.delta, cfg.restarts,
                         dict(cfg.overrides))
    seeds = range(cfg.seed, cfg.seed + cfg.trials)
    rows = sweep(cfg.dims, seeds, policy)
    if cfg.out is None:
        write_csv(rows, sys.stdout)
    else:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                write_csv(rows, fh)
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.out}: {exc.strerror}") from None
    good = [r for r in rows if not r.failed]
    if len({r.d for r in good}) >= 2:
        slope = loglog_slope([r.d for r in good], [r.samples for r in good])
        print(f"log-log slope of samples vs d: {slope:.3f}", file=sys.stderr)
        if assert_poly and slope > MAX_SLOPE:
            print(f"slope {slope:.3f} exceeds {MAX_SLOPE}", file=sys.stderr)
            return 1
    elif assert_poly:
        print("slope assertion needs at least two dimensions with successful runs", file=sys.stderr)
        return 1
    return 0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config document")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--override", action="append", metavar="KEY=VALUE",
                        help=f"parameter override, KEY in {', '.join(OVERRIDE_KEYS)}")

    gen_opts = argparse.ArgumentParser(add_help=False)
    for name, typ in (("k", int), ("d", int), ("M", float), ("eta", float), ("A", float), ("Aprime", float)):
        gen_opts.add_argument(f"--{name}", type=typ)

    ap = argparse.ArgumentParser(prog="hdsft", description="Sparse Fourier recovery of off-grid tones in d dimensions.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common, gen_opts], help="generate a random signal spec")
    run = sub.add_parser("run", parents=[common], help="recover the tones of a signal spec")
    run.add_argument("--spec", help="signal spec JSON")
    run.add_argument("--restarts", type=int)
    ver = sub.add_parser("verify", parents=[common], help="run the self-verification checks")
    ver.add_argument("--level", choices=("fast", "full"))
    ver.add_argument("--inject-v2-sign", type=int, default=1, help=argparse.SUPPRESS)
    ver.add_argument("--dense-tf", type=int, default=None, help="grid size per axis for the dense oracle check")
    sw = sub.add_parser("sweep", parents=[common, gen_opts], help="scaling sweep over dimensions, CSV output")
    sw.add_argument("--dims", help="comma-separated list of d values")
    sw.add_argument("--trials", type=int, help="seeds per dimension")
    sw.add_argument("--restarts", type=int)
    sw.add_argument("--assert-poly", action="store_true", help=f"exit 1 if the fitted slope exceeds {MAX_SLOPE}")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "gen":
            return cmd_gen(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.inject_v2_sign, args.dense_tf)
        return cmd_sweep(cfg, args.assert_poly)
    except (UsageError, GridTooLarge, InfeasibleInstance, InvalidArgument, ValueError) as exc:
        print(f"hdsft {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
