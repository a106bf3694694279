"""Simulation configuration read from JSON.

Unknown keys are rejected so that a typo cannot silently change the physics.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .lattice import build_box
from .mhd import CLOSURE_KINDS, Closure, InitOptions


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending field."""


_BOX_KEYS = {"n", "dims", "lengths", "metric"}
_CLOSURE_KEYS = {"kind", "rho0", "c", "K", "gamma", "mu0"}
_INIT_KEYS = {f.name for f in fields(InitOptions)} - {"symmetric_axis", "euler_only", "incompressible"}
_OUTPUT_KEYS = {"csv", "snapshot_dir"}
_TOP_KEYS = {
    "box", "closure", "mode", "incompressible", "symmetric_axis", "seed", "init",
    "dt", "t_end", "report_every", "snapshot_every", "output",
}


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(extra)}")


def _number(d, key, where, default=None, positive=False):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}: required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{where}.{key}: must be positive")
    return float(v)


def _integer(d, key, where, default=None, minimum=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}: required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}.{key}: must be >= {minimum}")
    return v


@dataclass
class SimConfig:
    n: int
    dims: list
    lengths: list
    metric: list
    closure: Closure
    mode: str = "mhd"
    incompressible: bool = False
    symmetric_axis: int | None = None
    seed: int = 0
    init: dict = field(default_factory=dict)
    dt: float = 2e-3
    t_end: float = 0.5
    report_every: int = 1
    snapshot_every: int = 0
    csv: str = "invariants.csv"
    snapshot_dir: str | None = None

    def build_box(self):
        return build_box(self.n, self.dims, self.lengths, self.metric)

    def init_options(self) -> InitOptions:
        return InitOptions(
            symmetric_axis=self.symmetric_axis,
            euler_only=self.mode == "euler",
            incompressible=self.incompressible,
            **self.init,
        )

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        _reject_unknown(raw, _TOP_KEYS, "config")
        if "box" not in raw:
            raise ConfigError("config.box: required")
        box = raw["box"]
        _reject_unknown(box, _BOX_KEYS, "box")
        n = _integer(box, "n", "box", minimum=2)
        dims = box.get("dims")
        if not isinstance(dims, list) or len(dims) != n or not all(isinstance(x, int) and not isinstance(x, bool) for x in dims):
            raise ConfigError(f"box.dims: expected a list of {n} integers")
        lengths = box.get("lengths", [2 * math.pi] * n)
        metric = box.get("metric", [1.0] * n)
        for key, val in (("lengths", lengths), ("metric", metric)):
            if not isinstance(val, list) or len(val) != n:
                raise ConfigError(f"box.{key}: expected a list of {n} numbers")
        try:
            build_box(n, dims, lengths, metric)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"box: {exc}") from None

        cl = raw.get("closure", {"kind": "isothermal"})
        _reject_unknown(cl, _CLOSURE_KEYS, "closure")
        kind = cl.get("kind", "isothermal")
        if kind not in CLOSURE_KINDS:
            raise ConfigError(f"closure.kind: expected one of {CLOSURE_KINDS}, got {kind!r}")
        try:
            closure = Closure(
                kind=kind,
                rho0=_number(cl, "rho0", "closure", 1.0, positive=True),
                c=_number(cl, "c", "closure", 1.0, positive=True),
                K=_number(cl, "K", "closure", 1.0, positive=True),
                gamma=_number(cl, "gamma", "closure", 5.0 / 3.0),
                mu0=_number(cl, "mu0", "closure", 1.0, positive=True),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"closure: {exc}") from None

        mode = raw.get("mode", "mhd")
        if mode not in ("mhd", "euler"):
            raise ConfigError(f"mode: expected 'mhd' or 'euler', got {mode!r}")
        incompressible = raw.get("incompressible", False)
        if not isinstance(incompressible, bool):
            raise ConfigError("incompressible: expected true/false")
        if incompressible != closure.incompressible:
            raise ConfigError("incompressible: must be true exactly when closure.kind is 'incompressible'")

        sym = raw.get("symmetric_axis")
        if sym is not None:
            if isinstance(sym, bool) or not isinstance(sym, int) or not 0 <= sym < n:
                raise ConfigError(f"symmetric_axis: expected an integer in [0, {n - 1}] or null")

        init = raw.get("init", {})
        _reject_unknown(init, _INIT_KEYS, "init")
        init = dict(init)
        for key in ("u_amp", "B_amp", "rho_mean", "rho_eps", "k_decay"):
            if key in init:
                init[key] = _number(init, key, "init")
        if "kmax" in init and init["kmax"] is not None:
            init["kmax"] = _integer(init, "kmax", "init", minimum=0)
        if not 0 <= init.get("rho_eps", 0.1) <= 0.2:
            raise ConfigError("init.rho_eps: must lie in [0, 0.2]")

        out = raw.get("output", {})
        _reject_unknown(out, _OUTPUT_KEYS, "output")

        cfg = cls(
            n=n,
            dims=list(dims),
            lengths=[float(x) for x in lengths],
            metric=[float(x) for x in metric],
            closure=closure,
            mode=mode,
            incompressible=incompressible,
            symmetric_axis=sym,
            seed=_integer(raw, "seed", "config", 0, minimum=0),
            init=init,
            dt=_number(raw, "dt", "config", 2e-3, positive=True),
            t_end=_number(raw, "t_end", "config", 0.5),
            report_every=_integer(raw, "report_every", "config", 1, minimum=1),
            snapshot_every=_integer(raw, "snapshot_every", "config", 0, minimum=0),
            csv=out.get("csv", "invariants.csv"),
            snapshot_dir=out.get("snapshot_dir"),
        )
        if cfg.t_end < 0:
            raise ConfigError("config.t_end: must be >= 0")
        return cfg

    @classmethod
    def load(cls, path) -> "SimConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(raw)
