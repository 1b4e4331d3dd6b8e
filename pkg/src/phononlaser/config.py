"""Run configuration: strict YAML schema, unit conversion, serialization.

Configs are written in the units experimentalists quote (couplings as
frequencies in kHz, repumper quantities in 1/us and MHz, decay rates in
1/ms) and converted once, at parse time, into the internal rad/ms
convention.  Unknown keys anywhere in the file are rejected.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, asdict

import yaml

from .decay import omega1_from_tau1, omega2_from_tau2
from .model import FourLevelParams, SpecError, SystemSpec, TickleParams

__all__ = [
    "ConfigError",
    "RunConfig",
    "SolverOptions",
    "SweepOptions",
    "parse_config",
    "load_config",
    "dump_config",
    "spec_to_dict",
    "TASKS",
]

SCHEMA_VERSION = 1
TASKS = ("steady", "evolve", "sweep", "charfun", "diffusion", "calibrate-decay", "carrier")

KHZ_TO_RAD_MS = 2.0 * math.pi  # g/2pi [kHz] -> g [rad/ms]
MHZ_TO_RAD_US = 2.0 * math.pi  # f [MHz] -> omega [rad/us]


class ConfigError(ValueError):
    """Raised for malformed or invalid run configuration."""


@dataclass(frozen=True)
class SolverOptions:
    steady_residual_tol: float = 1e-8
    evolve_rtol: float = 1e-8
    evolve_atol: float = 1e-10
    check_unique: bool | None = None


@dataclass(frozen=True)
class SweepOptions:
    inv_kappa_c_ms: tuple[float, ...]
    inv_gamma_c_us: tuple[float, ...]
    checkpoint_every: int = 1
    growth_time_ms: float = 2.0


@dataclass(frozen=True)
class EvolveOptions:
    t_max_ms: float = 2.0
    points: int = 41
    initial: str = "ground"  # ground | coherent
    initial_nbar: float = 0.0


@dataclass(frozen=True)
class CharfunOptions:
    axes_deg: tuple[float, ...] = (0.0, 90.0)
    beta_max: float = 0.7
    beta_step: float = 0.02
    pad_to: float = 1.0
    marginal_x_max: float = 12.0


@dataclass(frozen=True)
class DiffusionOptions:
    nbar0: float = 4.4
    t_max_ms: float = 1.5
    points: int = 16


@dataclass(frozen=True)
class CarrierOptions:
    omega0_khz: float = 100.0
    durations_ms: tuple[float, ...] = (0.5, 1.0, 2.0)
    rabi_t_max_ms: float = 0.15
    rabi_points: int = 151


@dataclass(frozen=True)
class RunConfig:
    task: str
    system: SystemSpec
    solver: SolverOptions = field(default_factory=SolverOptions)
    sweep: SweepOptions | None = None
    evolve: EvolveOptions = field(default_factory=EvolveOptions)
    charfun: CharfunOptions = field(default_factory=CharfunOptions)
    diffusion: DiffusionOptions = field(default_factory=DiffusionOptions)
    carrier: CarrierOptions = field(default_factory=CarrierOptions)
    output: str = "out/run"
    workers: int = 1
    raw: dict = field(default_factory=dict, repr=False)


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ConfigError(f"missing required key '{path}.{key}'" if path else f"missing required key '{key}'")
    return mapping[key]


def _check_keys(mapping: dict, allowed: set[str], path: str):
    unknown = set(mapping) - allowed
    if unknown:
        name = sorted(unknown)[0]
        where = f"{path}.{name}" if path else name
        raise ConfigError(f"unknown key '{where}' (strict mode)")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    return float(value)


def _bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"'{path}' must be a boolean, got {value!r}")
    return value


def _parse_heating(block: dict) -> tuple[float, float, int, FourLevelParams | None]:
    _check_keys(
        block,
        {
            "levels", "gamma_h_per_ms", "gamma_e_per_ms",
            "tau1_us", "tau2_us", "omega1_rad_per_us", "omega2_rad_per_us",
            "delta1_mhz", "gamma0_per_us", "gamma1_per_us", "gamma2_per_us",
            "stark_compensated",
        },
        "system.heating_ion",
    )
    levels = _require(block, "levels", "system.heating_ion")
    if levels not in (2, 4):
        raise ConfigError(f"system.heating_ion.levels must be 2 or 4, got {levels!r}")
    gamma_h = _number(block.get("gamma_h_per_ms", 0.0), "system.heating_ion.gamma_h_per_ms")
    gamma_e = _number(block.get("gamma_e_per_ms", 0.0), "system.heating_ion.gamma_e_per_ms")
    if levels == 2:
        if "gamma_h_per_ms" not in block:
            raise ConfigError("system.heating_ion.gamma_h_per_ms is required for levels=2")
        return gamma_h, gamma_e, 2, None

    g0 = _number(_require(block, "gamma0_per_us", "system.heating_ion"), "system.heating_ion.gamma0_per_us")
    g1 = _number(_require(block, "gamma1_per_us", "system.heating_ion"), "system.heating_ion.gamma1_per_us")
    g2 = _number(_require(block, "gamma2_per_us", "system.heating_ion"), "system.heating_ion.gamma2_per_us")
    delta1 = MHZ_TO_RAD_US * _number(
        _require(block, "delta1_mhz", "system.heating_ion"), "system.heating_ion.delta1_mhz"
    )
    if ("tau1_us" in block) == ("omega1_rad_per_us" in block):
        raise ConfigError("system.heating_ion: give exactly one of tau1_us / omega1_rad_per_us")
    if ("tau2_us" in block) == ("omega2_rad_per_us" in block):
        raise ConfigError("system.heating_ion: give exactly one of tau2_us / omega2_rad_per_us")
    if "tau1_us" in block:
        om1 = omega1_from_tau1(_number(block["tau1_us"], "system.heating_ion.tau1_us"), delta1, g0, g1, g2)
    else:
        om1 = _number(block["omega1_rad_per_us"], "system.heating_ion.omega1_rad_per_us")
    if "tau2_us" in block:
        om2 = omega2_from_tau2(_number(block["tau2_us"], "system.heating_ion.tau2_us"), g0, g1, g2)
    else:
        om2 = _number(block["omega2_rad_per_us"], "system.heating_ion.omega2_rad_per_us")
    fl = FourLevelParams(
        Omega1=float(om1), Omega2=float(om2), Delta1=delta1,
        gamma0=g0, gamma1=g1, gamma2=g2,
        stark_compensated=_bool(block.get("stark_compensated", True), "system.heating_ion.stark_compensated"),
    )
    return 0.0, gamma_e, 4, fl


def _parse_system(block: dict) -> SystemSpec:
    _check_keys(
        block,
        {
            "g_h_khz", "g_c_khz", "gamma_c_per_ms", "heating_ion", "tickle",
            "eta_h", "eta_c", "nonlinear_lamb_dicke", "fock_cutoff", "omega_m_mhz",
        },
        "system",
    )
    g_h = KHZ_TO_RAD_MS * _number(_require(block, "g_h_khz", "system"), "system.g_h_khz")
    g_c = KHZ_TO_RAD_MS * _number(block.get("g_c_khz", 0.0), "system.g_c_khz")
    gamma_c = _number(block.get("gamma_c_per_ms", 0.0), "system.gamma_c_per_ms")
    heating = _require(block, "heating_ion", "system")
    if not isinstance(heating, dict):
        raise ConfigError("system.heating_ion must be a mapping")
    gamma_h, gamma_e, levels, fl = _parse_heating(heating)

    tickle = TickleParams()
    if "tickle" in block:
        tb = block["tickle"]
        _check_keys(tb, {"enabled", "g_t_khz", "phase_rad"}, "system.tickle")
        tickle = TickleParams(
            enabled=_bool(tb.get("enabled", False), "system.tickle.enabled"),
            g_t=KHZ_TO_RAD_MS * _number(tb.get("g_t_khz", 0.0), "system.tickle.g_t_khz"),
            phase=_number(tb.get("phase_rad", 0.0), "system.tickle.phase_rad"),
        )

    if "fock_cutoff" not in block:
        raise ConfigError("missing required key 'system.fock_cutoff'")
    N = block["fock_cutoff"]
    if not isinstance(N, int) or isinstance(N, bool):
        raise ConfigError("system.fock_cutoff must be an integer")
    try:
        return SystemSpec(
            g_h=g_h,
            g_c=g_c,
            gamma_h=gamma_h,
            gamma_c=gamma_c,
            gamma_e=gamma_e,
            be_levels=levels,
            four_level=fl,
            tickle=tickle,
            eta_h=_number(block.get("eta_h", 0.15), "system.eta_h"),
            eta_c=_number(block.get("eta_c", 0.05), "system.eta_c"),
            nonlinear_ld=_bool(block.get("nonlinear_lamb_dicke", True), "system.nonlinear_lamb_dicke"),
            fock_cutoff=N,
            omega_m=KHZ_TO_RAD_MS * 1e3 * _number(block.get("omega_m_mhz", 0.0), "system.omega_m_mhz"),
        )
    except SpecError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_float_list(value, path: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"'{path}' must be a nonempty list of numbers")
    return tuple(_number(v, path) for v in value)


def parse_config(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"config parse error{loc}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    _check_keys(
        data,
        {
            "schema_version", "task", "system", "solver", "sweep", "evolve",
            "charfun", "diffusion", "carrier", "output", "workers",
        },
        "",
    )
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    task = _require(data, "task", "")
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {TASKS}")
    system = _parse_system(_require(data, "system", ""))

    solver = SolverOptions()
    if "solver" in data:
        sb = data["solver"]
        _check_keys(sb, {"steady_residual_tol", "evolve_rtol", "evolve_atol", "check_unique"}, "solver")
        solver = SolverOptions(
            steady_residual_tol=_number(sb.get("steady_residual_tol", 1e-8), "solver.steady_residual_tol"),
            evolve_rtol=_number(sb.get("evolve_rtol", 1e-8), "solver.evolve_rtol"),
            evolve_atol=_number(sb.get("evolve_atol", 1e-10), "solver.evolve_atol"),
            check_unique=sb.get("check_unique"),
        )

    sweep = None
    if "sweep" in data:
        sb = data["sweep"]
        _check_keys(sb, {"inv_kappa_c_ms", "inv_gamma_c_us", "checkpoint_every", "growth_time_ms"}, "sweep")
        sweep = SweepOptions(
            inv_kappa_c_ms=_parse_float_list(_require(sb, "inv_kappa_c_ms", "sweep"), "sweep.inv_kappa_c_ms"),
            inv_gamma_c_us=_parse_float_list(_require(sb, "inv_gamma_c_us", "sweep"), "sweep.inv_gamma_c_us"),
            checkpoint_every=int(sb.get("checkpoint_every", 1)),
            growth_time_ms=_number(sb.get("growth_time_ms", 2.0), "sweep.growth_time_ms"),
        )
    if task == "sweep" and sweep is None:
        raise ConfigError("task 'sweep' requires a sweep block")

    evolve = EvolveOptions()
    if "evolve" in data:
        eb = data["evolve"]
        _check_keys(eb, {"t_max_ms", "points", "initial", "initial_nbar"}, "evolve")
        initial = eb.get("initial", "ground")
        if initial not in ("ground", "coherent"):
            raise ConfigError("evolve.initial must be 'ground' or 'coherent'")
        evolve = EvolveOptions(
            t_max_ms=_number(eb.get("t_max_ms", 2.0), "evolve.t_max_ms"),
            points=int(eb.get("points", 41)),
            initial=initial,
            initial_nbar=_number(eb.get("initial_nbar", 0.0), "evolve.initial_nbar"),
        )

    charfun = CharfunOptions()
    if "charfun" in data:
        cb = data["charfun"]
        _check_keys(cb, {"axes_deg", "beta_max", "beta_step", "pad_to", "marginal_x_max"}, "charfun")
        charfun = CharfunOptions(
            axes_deg=_parse_float_list(cb.get("axes_deg", [0.0, 90.0]), "charfun.axes_deg"),
            beta_max=_number(cb.get("beta_max", 0.7), "charfun.beta_max"),
            beta_step=_number(cb.get("beta_step", 0.02), "charfun.beta_step"),
            pad_to=_number(cb.get("pad_to", 1.0), "charfun.pad_to"),
            marginal_x_max=_number(cb.get("marginal_x_max", 12.0), "charfun.marginal_x_max"),
        )
        if charfun.pad_to < charfun.beta_max:
            raise ConfigError("charfun.pad_to must be >= charfun.beta_max")

    diffusion = DiffusionOptions()
    if "diffusion" in data:
        db = data["diffusion"]
        _check_keys(db, {"nbar0", "t_max_ms", "points"}, "diffusion")
        diffusion = DiffusionOptions(
            nbar0=_number(db.get("nbar0", 4.4), "diffusion.nbar0"),
            t_max_ms=_number(db.get("t_max_ms", 1.5), "diffusion.t_max_ms"),
            points=int(db.get("points", 16)),
        )

    carrier = CarrierOptions()
    if "carrier" in data:
        cb = data["carrier"]
        _check_keys(cb, {"omega0_khz", "durations_ms", "rabi_t_max_ms", "rabi_points"}, "carrier")
        carrier = CarrierOptions(
            omega0_khz=_number(cb.get("omega0_khz", 100.0), "carrier.omega0_khz"),
            durations_ms=_parse_float_list(cb.get("durations_ms", [0.5, 1.0, 2.0]), "carrier.durations_ms"),
            rabi_t_max_ms=_number(cb.get("rabi_t_max_ms", 0.15), "carrier.rabi_t_max_ms"),
            rabi_points=int(cb.get("rabi_points", 151)),
        )

    output = data.get("output", "out/run")
    if isinstance(output, dict):
        _check_keys(output, {"path"}, "output")
        output = _require(output, "path", "output")
    if not isinstance(output, str):
        raise ConfigError("output must be a path string (or a mapping with 'path')")
    workers = data.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise ConfigError("workers must be a positive integer")

    return RunConfig(
        task=task, system=system, solver=solver, sweep=sweep, evolve=evolve,
        charfun=charfun, diffusion=diffusion, carrier=carrier,
        output=output, workers=workers, raw=data,
    )


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def spec_to_dict(spec: SystemSpec) -> dict:
    """Fully resolved SystemSpec (internal rad/ms units) for export provenance."""
    d = asdict(spec)
    d["units"] = {"couplings": "rad/ms", "rates": "1/ms", "four_level": "rad/us, 1/us"}
    return d


def dump_config(cfg: RunConfig) -> str:
    """Serialize the resolved config back to YAML (internal-unit system block).

    The dump uses the same experimental-unit keys as the input so a parsed
    config round-trips: parse(dump(parse(text))) == parse(text).
    """
    spec = cfg.system
    heating: dict = {"levels": spec.be_levels}
    if spec.be_levels == 2:
        heating["gamma_h_per_ms"] = spec.gamma_h
        if spec.gamma_e:
            heating["gamma_e_per_ms"] = spec.gamma_e
    else:
        fl = spec.four_level
        heating.update(
            omega1_rad_per_us=fl.Omega1, omega2_rad_per_us=fl.Omega2,
            delta1_mhz=fl.Delta1 / MHZ_TO_RAD_US,
            gamma0_per_us=fl.gamma0, gamma1_per_us=fl.gamma1, gamma2_per_us=fl.gamma2,
            stark_compensated=fl.stark_compensated,
        )
    data = {
        "schema_version": SCHEMA_VERSION,
        "task": cfg.task,
        "system": {
            "g_h_khz": spec.g_h / KHZ_TO_RAD_MS,
            "g_c_khz": spec.g_c / KHZ_TO_RAD_MS,
            "gamma_c_per_ms": spec.gamma_c,
            "heating_ion": heating,
            "tickle": {
                "enabled": spec.tickle.enabled,
                "g_t_khz": spec.tickle.g_t / KHZ_TO_RAD_MS,
                "phase_rad": spec.tickle.phase,
            },
            "eta_h": spec.eta_h,
            "eta_c": spec.eta_c,
            "nonlinear_lamb_dicke": spec.nonlinear_ld,
            "fock_cutoff": spec.fock_cutoff,
            "omega_m_mhz": spec.omega_m / (KHZ_TO_RAD_MS * 1e3),
        },
        "solver": {
            "steady_residual_tol": cfg.solver.steady_residual_tol,
            "evolve_rtol": cfg.solver.evolve_rtol,
            "evolve_atol": cfg.solver.evolve_atol,
        },
        "output": cfg.output,
        "workers": cfg.workers,
    }
    if cfg.sweep is not None:
        data["sweep"] = {
            "inv_kappa_c_ms": list(cfg.sweep.inv_kappa_c_ms),
            "inv_gamma_c_us": list(cfg.sweep.inv_gamma_c_us),
            "checkpoint_every": cfg.sweep.checkpoint_every,
            "growth_time_ms": cfg.sweep.growth_time_ms,
        }
    return yaml.safe_dump(data, sort_keys=False)
