"""YAML run configuration with field-level validation."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError
from .manybody import MEMORY_CAP_ENV, DEFAULT_MEMORY_CAP, ModelParams

log = logging.getLogger(__name__)

NORM_EXACT = 1e-9
NORM_REPAIRABLE = 1e-6


@dataclass
class InitialState:
    kind: str  # "gutzwiller" | "perturbed_gutzwiller" | "fock_tuple"
    # gutzwiller with amplitudes None draws a random site state from the run seed
    amplitudes: np.ndarray | None = None
    perp_amplitudes: np.ndarray | None = None
    num_perturbed_sites: int = 0
    occupations: tuple | None = None


@dataclass
class RunConfig:
    params: ModelParams
    L: int
    d: int
    M: int
    t_final: float
    dt: float = 1e-3
    n_samples: int = 21
    krylov_tol: float = 1e-10
    initial: InitialState = field(default_factory=lambda: InitialState("gutzwiller", np.array([1.0 + 0j])))
    c_constant_C: float = 1.0
    k_moments: tuple = (1, 2)
    d_list: tuple | None = None
    seeds: tuple = (0,)
    M_by_d: dict = field(default_factory=dict)
    output: str = "out"
    seed: int = 0
    memory_cap_bytes: int = DEFAULT_MEMORY_CAP

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_samples)


def _complex_list(value, name):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(name, "expected a nonempty list of amplitudes")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, (list, tuple)) and len(v) == 2:
            out.append(complex(float(v[0]), float(v[1])))
        elif isinstance(v, (int, float)):
            out.append(complex(v))
        elif isinstance(v, str):
            try:
                out.append(complex(v.replace(" ", "")))
            except ValueError:
                raise ConfigError(f"{name}[{i}]", f"cannot parse amplitude {v!r}") from None
        else:
            raise ConfigError(f"{name}[{i}]", f"cannot parse amplitude {v!r}")
    return np.array(out, dtype=complex)


def _normalized(vec, name):
    norm = np.linalg.norm(vec)
    err = abs(norm - 1.0)
    if err <= NORM_EXACT:
        return vec
    if err <= NORM_REPAIRABLE:
        log.warning("%s has norm %.12g; renormalizing", name, norm)
        return vec / norm
    raise ConfigError(name, f"amplitudes have norm {norm:.6g}, expected 1")


def _section(raw, name):
    value = raw.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, "expected a mapping")
    return value


def _number(section, key, prefix, kind=float, default=None):
    name = f"{prefix}.{key}"
    if key not in section:
        if default is None:
            raise ConfigError(name, "missing")
        return default
    try:
        value = kind(section[key])
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected {kind.__name__}, got {section[key]!r}") from None
    if kind is int and float(section[key]) != value:
        raise ConfigError(name, f"expected an integer, got {section[key]!r}")
    return value


def _initial(raw, M):
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError("initial", "expected exactly one of gutzwiller, perturbed_gutzwiller, fock_tuple")
    (kind, body), = raw.items()
    if kind == "gutzwiller":
        if body == "random":
            return InitialState(kind)
        amps = _normalized(_complex_list(body, "initial.gutzwiller"), "initial.gutzwiller")
        _fits(amps, M, "initial.gutzwiller")
        return InitialState(kind, amplitudes=amps)
    if kind == "perturbed_gutzwiller":
        if not isinstance(body, dict):
            raise ConfigError("initial.perturbed_gutzwiller", "expected a mapping")
        amps = _normalized(_complex_list(body.get("amplitudes"), "initial.perturbed_gutzwiller.amplitudes"),
                           "initial.perturbed_gutzwiller.amplitudes")
        perp = _normalized(_complex_list(body.get("perp_amplitudes"), "initial.perturbed_gutzwiller.perp_amplitudes"),
                           "initial.perturbed_gutzwiller.perp_amplitudes")
        _fits(amps, M, "initial.perturbed_gutzwiller.amplitudes")
        _fits(perp, M, "initial.perturbed_gutzwiller.perp_amplitudes")
        size = max(amps.size, perp.size)
        a = np.pad(amps, (0, size - amps.size))
        b = np.pad(perp, (0, size - perp.size))
        if abs(np.vdot(a, b)) > NORM_EXACT:
            raise ConfigError("initial.perturbed_gutzwiller.perp_amplitudes", "must be orthogonal to amplitudes")
        k = _number(body, "num_perturbed_sites", "initial.perturbed_gutzwiller", int)
        if k < 0:
            raise ConfigError("initial.perturbed_gutzwiller.num_perturbed_sites", "must be >= 0")
        return InitialState(kind, amplitudes=amps, perp_amplitudes=perp, num_perturbed_sites=k)
    if kind == "fock_tuple":
        if not isinstance(body, (list, tuple)) or not body:
            raise ConfigError("initial.fock_tuple", "expected a list of occupations")
        occ = tuple(int(n) for n in body)
        if any(n < 0 or n > M for n in occ):
            raise ConfigError("initial.fock_tuple", f"occupations must lie in 0..{M}")
        return InitialState(kind, occupations=occ)
    raise ConfigError("initial", f"unknown initial state kind {kind!r}")


def _fits(amps, M, name):
    if amps.size > M + 1:
        raise ConfigError(name, f"{amps.size} amplitudes exceed the cutoff M={M}")


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a mapping")
    model = _section(raw, "model")
    lattice = _section(raw, "lattice")
    cutoff = _section(raw, "cutoff")
    time = _section(raw, "time")
    diag = _section(raw, "diagnostics")
    sweep = _section(raw, "sweep")
    output = _section(raw, "output")

    values = [_number(model, k, "model") for k in ("J", "mu", "U")]
    try:
        params = ModelParams(*values)
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None
    L = _number(lattice, "L", "lattice", int)
    d = _number(lattice, "d", "lattice", int)
    if L < 2:
        raise ConfigError("lattice.L", "must be >= 2")
    if d < 1:
        raise ConfigError("lattice.d", "must be >= 1")
    M = _number(cutoff, "M", "cutoff", int)
    if M < 0:
        raise ConfigError("cutoff.M", "must be >= 0")
    t_final = _number(time, "t_final", "time")
    dt = _number(time, "dt", "time", default=1e-3)
    n_samples = _number(time, "n_samples", "time", int, default=21)
    tol = _number(time, "krylov_tol", "time", default=1e-10)
    if t_final <= 0:
        raise ConfigError("time.t_final", "must be > 0")
    if not 0 < dt <= 1e-2:
        raise ConfigError("time.dt", "must lie in (0, 1e-2]")
    if n_samples < 2:
        raise ConfigError("time.n_samples", "must be >= 2")
    if not 1e-14 <= tol <= 1e-6:
        raise ConfigError("time.krylov_tol", "must lie in [1e-14, 1e-6]")
    if "initial" not in raw:
        raise ConfigError("initial", "missing")
    initial = _initial(raw["initial"], M)
    if initial.kind == "fock_tuple" and len(initial.occupations) != L**d:
        raise ConfigError("initial.fock_tuple", f"expected {L**d} occupations")
    if initial.kind == "perturbed_gutzwiller" and initial.num_perturbed_sites > L**d:
        raise ConfigError("initial.perturbed_gutzwiller.num_perturbed_sites", "exceeds the number of sites")

    k_moments = tuple(float(k) if float(k) != int(float(k)) else int(k) for k in diag.get("k_moments", (1, 2)))
    d_list = sweep.get("d_list")
    M_by_d = {int(k): int(v) for k, v in (sweep.get("M_by_d") or {}).items()}
    cap = raw.get("memory_cap_bytes", DEFAULT_MEMORY_CAP)
    if os.environ.get(MEMORY_CAP_ENV):
        cap = os.environ[MEMORY_CAP_ENV]
    try:
        cap = int(float(cap))
    except (TypeError, ValueError):
        raise ConfigError("memory_cap_bytes", f"expected an integer, got {cap!r}") from None
    return RunConfig(
        params=params, L=L, d=d, M=M, t_final=t_final, dt=dt, n_samples=n_samples,
        krylov_tol=tol, initial=initial,
        c_constant_C=_number(diag, "c_constant_C", "diagnostics", default=1.0),
        k_moments=k_moments,
        d_list=tuple(int(x) for x in d_list) if d_list is not None else None,
        seeds=tuple(int(s) for s in sweep.get("seeds", (0,))),
        M_by_d=M_by_d,
        output=str(output.get("directory", "out")),
        seed=int(raw.get("seed", 0)),
        memory_cap_bytes=cap,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"invalid YAML: {exc}") from None
    return parse_config(raw)
