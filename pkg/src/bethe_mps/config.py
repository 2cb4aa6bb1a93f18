"""Job configuration: JSON schema, validation and defaults.

Complex numbers are two-element arrays ``[re, im]``; a bare real number is
also accepted. Unknown keys are rejected so typos surface as config errors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

from .bethe import SolverConfig
from .exceptions import ConfigError, PreconditionError
from .kernel import KernelKind, ModelKernel, make_kernel
from .lieb_liniger import LLParams

SCHEMA_VERSION = "1.0"
MODELS = ("xxz", "xxx", "lieb_liniger")
TASK_ORDER = ("solve", "build-mps", "verify-ed", "oracle-check", "algebra-check")

_KNOWN = {
    "schema_version", "model", "delta", "eta", "kappa", "a", "N", "L", "n",
    "initial_guesses", "solver", "tasks", "seed", "output_path", "local_dim", "samples",
    "tolerance", "max_iterations", "fd_step", "damping", "polish_digits",
}
_SOLVER_KEYS = ("tolerance", "max_iterations", "fd_step", "damping", "polish_digits")


@dataclass(frozen=True)
class JobConfig:
    model: str
    chain_length: int
    excitations: int
    tasks: tuple[str, ...]
    delta: float | None = None
    eta: complex | None = None
    kappa: float | None = None
    spacing: float | None = None
    initial_guesses: tuple[complex, ...] = ()
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(tolerance=1e-12))
    seed: int = 42
    output_path: str | None = None
    local_dim: int | None = None
    samples: int = 10
    schema_version: str = SCHEMA_VERSION

    @property
    def is_lieb_liniger(self) -> bool:
        return self.model == "lieb_liniger"

    def kernel(self) -> ModelKernel:
        if self.model == "xxx":
            return make_kernel(KernelKind.RATIONAL)
        return make_kernel(KernelKind.TRIGONOMETRIC, self.delta, eta=self.eta)

    def ll_params(self) -> LLParams:
        return LLParams(self.kappa, self.spacing, self.chain_length)

    def with_seed(self, seed: int) -> "JobConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema_version": self.schema_version,
            "model": self.model,
            "n": self.excitations,
            "tasks": list(self.tasks),
            "seed": self.seed,
            "samples": self.samples,
            "initial_guesses": [[g.real, g.imag] for g in self.initial_guesses],
            "solver": {
                "tolerance": self.solver.tolerance,
                "max_iterations": self.solver.max_iterations,
                "fd_step": self.solver.fd_step,
                "damping": self.solver.damping,
                "polish_digits": self.solver.polish_digits,
            },
        }
        if self.is_lieb_liniger:
            out.update(kappa=self.kappa, a=self.spacing, N=self.chain_length, local_dim=self.local_dim)
        else:
            out["L"] = self.chain_length
            if self.model == "xxz":
                out["delta"] = self.delta
                if self.eta is not None:
                    out["eta"] = [self.eta.real, self.eta.imag]
        return out


def parse_complex(value: Any, name: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError("expected a number or [re, im]", name)
    if isinstance(value, (int, float)):
        z = complex(value)
    elif isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        z = complex(value[0], value[1])
    else:
        raise ConfigError(f"expected a number or [re, im], got {value!r}", name)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError("must be finite", name)
    return z


def _real(raw: dict, key: str, positive: bool = False) -> float | None:
    if key not in raw:
        return None
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"expected a finite real number, got {v!r}", key)
    if positive and not v > 0:
        raise ConfigError(f"must be positive, got {v}", key)
    return float(v)


def _int(raw: dict, key: str, minimum: int, default: int | None = None) -> int | None:
    if key not in raw:
        return default
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"expected an integer, got {v!r}", key)
    if v < minimum:
        raise ConfigError(f"must be >= {minimum}, got {v}", key)
    return v


def _solver(raw: dict) -> SolverConfig:
    nested = raw.get("solver", {})
    if not isinstance(nested, dict):
        raise ConfigError("expected an object", "solver")
    unknown = set(nested) - set(_SOLVER_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "solver")
    merged = {k: raw[k] for k in _SOLVER_KEYS if k in raw}
    both = set(merged) & set(nested)
    if both:
        raise ConfigError(f"given both at top level and in 'solver': {sorted(both)}", "solver")
    merged.update(nested)
    kwargs: dict[str, Any] = {}
    for key in ("tolerance", "fd_step", "damping"):
        if key in merged:
            kwargs[key] = _real(merged, key, positive=True)
    if "max_iterations" in merged:
        kwargs["max_iterations"] = _int(merged, "max_iterations", 1)
    if "polish_digits" in merged:
        kwargs["polish_digits"] = _int(merged, "polish_digits", 0)
    try:
        return SolverConfig(**kwargs)
    except PreconditionError as exc:
        raise ConfigError(str(exc), "solver") from exc


def parse_config(text: str | bytes) -> JobConfig:
    """Parse and validate a UTF-8 JSON job description.

    Raises:
        ConfigError: malformed JSON, schema violation, or inconsistent model
            parameters. ``field`` names the offending key.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError(f"not valid UTF-8: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top-level value must be an object")
    unknown = set(raw) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", sorted(unknown)[0])

    version = raw.get("schema_version", SCHEMA_VERSION)
    if not isinstance(version, str) or version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise ConfigError(f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})", "schema_version")

    model = raw.get("model")
    if model not in MODELS:
        raise ConfigError(f"must be one of {MODELS}, got {model!r}", "model")

    n = _int(raw, "n", 0)
    if n is None:
        raise ConfigError("required", "n")

    tasks = raw.get("tasks", ["build-mps"])
    if not isinstance(tasks, list) or not tasks or not all(isinstance(t, str) for t in tasks):
        raise ConfigError("expected a non-empty list of task names", "tasks")
    bad = [t for t in tasks if t not in TASK_ORDER]
    if bad:
        raise ConfigError(f"unknown tasks {bad}; choose from {TASK_ORDER}", "tasks")
    tasks_t = tuple(t for t in TASK_ORDER if t in tasks)

    guesses_raw = raw.get("initial_guesses", [])
    if not isinstance(guesses_raw, list):
        raise ConfigError("expected a list", "initial_guesses")
    guesses = tuple(parse_complex(g, f"initial_guesses[{i}]") for i, g in enumerate(guesses_raw))
    if guesses and len(guesses) != n:
        raise ConfigError(f"{len(guesses)} guesses for n={n}", "initial_guesses")

    common = dict(
        excitations=n,
        tasks=tasks_t,
        initial_guesses=guesses,
        solver=_solver(raw),
        seed=_int(raw, "seed", 0, 42),
        samples=_int(raw, "samples", 1, 10),
        schema_version=version,
    )
    out_path = raw.get("output_path")
    if out_path is not None and not isinstance(out_path, str):
        raise ConfigError("expected a string", "output_path")
    common["output_path"] = out_path

    if model == "lieb_liniger":
        for key in ("delta", "eta", "L"):
            if key in raw:
                raise ConfigError("not a Lieb-Liniger parameter", key)
        kappa = _real(raw, "kappa", positive=True)
        a = _real(raw, "a", positive=True)
        N = _int(raw, "N", 1)
        for key, v in (("kappa", kappa), ("a", a), ("N", N)):
            if v is None:
                raise ConfigError("required for lieb_liniger", key)
        local_dim = _int(raw, "local_dim", 1, 2 * n + 1)
        if local_dim < 2 * n + 1:
            raise ConfigError(f"must be >= 2n+1 = {2 * n + 1} for an exact truncation", "local_dim")
        if "verify-ed" in tasks_t:
            raise ConfigError("verify-ed is only available for the spin chains", "tasks")
        if any(abs(g.imag) > 1e-9 for g in guesses):
            raise ConfigError("Lieb-Liniger rapidities must be real", "initial_guesses")
        cfg = JobConfig(model, N, kappa=kappa, spacing=a, local_dim=local_dim, **common)
        try:
            cfg.ll_params()
        except PreconditionError as exc:
            raise ConfigError(str(exc), "kappa") from exc
        return cfg

    for key in ("kappa", "a", "N", "local_dim"):
        if key in raw:
            raise ConfigError("only valid for lieb_liniger", key)
    L = _int(raw, "L", 2)
    if L is None:
        raise ConfigError("required", "L")
    if n > L:
        raise ConfigError(f"n={n} exceeds L={L}", "n")
    if "solve" in tasks_t and len(guesses) != n:
        raise ConfigError(f"solve needs {n} initial guesses", "initial_guesses")
    needs_roots = {"build-mps", "verify-ed", "oracle-check"} & set(tasks_t)
    if needs_roots and len(guesses) != n:
        raise ConfigError(f"tasks {sorted(needs_roots)} need {n} rapidities", "initial_guesses")

    delta = _real(raw, "delta")
    eta = parse_complex(raw["eta"], "eta") if "eta" in raw else None
    if model == "xxx":
        if eta is not None:
            raise ConfigError("xxx fixes eta = i", "eta")
        if delta is not None and delta != 1.0:
            raise ConfigError("xxx implies Delta = 1", "delta")
        delta = 1.0
    cfg = JobConfig(model, L, delta=delta, eta=eta, **common)
    try:
        k = cfg.kernel()
    except PreconditionError as exc:
        raise ConfigError(str(exc), "delta" if eta is None else "eta") from exc
    if model == "xxz" and delta is None:
        cfg = replace(cfg, delta=k.delta)
    return cfg
