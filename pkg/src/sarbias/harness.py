"""Scenario configuration, seeded sweeps, and CSV emission.

A scenario bundles a unit configuration, a testing policy, a study-design
filter, and replication settings. Scenarios come from flat ``key = value``
text files with dotted section names, chosen over nested formats because
they diff cleanly and pin the seed explicitly (wall-clock seeding is
rejected so every output is reproducible byte for byte).

Replication is deterministic and thread-count independent: every task
(sweep row, or fixed-size chunk of units) draws from its own RNG stream
spawned from ``(seed, task key)``, and results are reduced in task order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Optional

import numpy as np

from . import estimands
from .infer import (PRESET_FILTERS, StudyDesignFilter, UnitAnalysis,
                    WindowAnchor, analyze_unit, estimate_ve_sar)
from .mc import McRatio, mc_infrequent_observed, mc_symptom_prompted_ve
from .observe import PolicyKind, TestingPolicy, apply_policy
from .params import DurationModelParams, SymptomModelParams
from .simcore import EstimationError, TransmissionMode, UnitConfig, simulate_unit

CHUNK_UNITS = 5000  # fixed chunking keeps results independent of thread count


class ConfigError(ValueError):
    """A scenario config file failed validation."""


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic per-task stream: same (seed, key) -> same stream."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=tuple(key)))


def fmt12(x: float) -> str:
    """Fixed CSV float formatting: 12 significant digits, '.' separator."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{float(x):.12g}"


def _parallel_map(fn: Callable, args: list, threads: int) -> list:
    if threads <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, a) for a in args]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment: generative model, observation, analysis, replication."""

    scenario_id: str = "scenario"
    unit: UnitConfig = field(default_factory=UnitConfig)
    policy: TestingPolicy = field(default_factory=TestingPolicy.symptom_prompted)
    design: StudyDesignFilter = field(default_factory=StudyDesignFilter.maximal)
    units_per_arm: int = 10_000
    seed: int = 0
    index_rule: str = "earliest_positive"  # or "true_primary"
    sweep_axis: Optional[str] = None
    sweep_grid: tuple[float, ...] = ()
    out_path: Optional[str] = None
    threads: int = 1

    def __post_init__(self) -> None:
        if self.units_per_arm < 0:
            raise ConfigError(f"units_per_arm must be >= 0, got {self.units_per_arm}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.index_rule not in ("earliest_positive", "true_primary"):
            raise ConfigError(f"unknown index_rule {self.index_rule!r}")
        if self.sweep_axis is not None and not self.sweep_grid:
            raise ConfigError("sweep.axis given but sweep.grid is empty")


def apply_axis(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    """Return a copy of ``cfg`` with the dotted ``axis`` field replaced.

    ``symptom.*`` and ``duration.*`` are aliases into ``unit.symptom`` and
    ``unit.duration``.
    """
    path = axis.split(".")
    if path[0] in ("symptom", "duration"):
        path = ["unit"] + path
    obj_chain = [cfg]
    for name in path[:-1]:
        parent = obj_chain[-1]
        if not any(f.name == name for f in fields(parent)):
            raise ConfigError(f"unknown sweep axis {axis!r}")
        obj_chain.append(getattr(parent, name))
    leaf_parent = obj_chain[-1]
    leaf = path[-1]
    if not any(f.name == leaf for f in fields(leaf_parent)):
        raise ConfigError(f"unknown sweep axis {axis!r}")
    updated = replace(leaf_parent, **{leaf: value})
    for name, parent in zip(reversed(path[:-1]), reversed(obj_chain[:-1])):
        updated = replace(parent, **{name: updated})
    return updated


# --- config file parsing ---------------------------------------------------

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


def _cast(key: str, raw: str, kind: str):
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            return _BOOL[raw.lower()]
        if kind == "floats":
            return tuple(float(v.strip()) for v in raw.split(",") if v.strip())
        return raw
    except (ValueError, KeyError):
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None


_KEY_KINDS = {
    "scenario.id": "str", "scenario.seed": "int",
    "scenario.units_per_arm": "int", "scenario.threads": "int",
    "scenario.out": "str", "scenario.index_rule": "str",
    "unit.size": "int", "unit.p_primary_vaccinated": "float",
    "unit.contacts_vaccinated": "bool", "unit.incubation_mean_days": "float",
    "unit.incubation_log_sd": "float", "unit.community_daily_hazard": "float",
    "unit.contact_to_contact": "bool", "unit.transmission_mode": "str",
    "unit.followup_days": "float",
    "symptom.lambda_symptom": "float", "symptom.delta": "float",
    "symptom.nu": "float", "symptom.rho_symptom": "float", "symptom.tau": "float",
    "duration.rho0": "float", "duration.rho1": "float", "duration.c": "float",
    "duration.nu_daily": "float", "duration.tau0": "float",
    "policy.kind": "str", "policy.delay_days": "float",
    "policy.interval_days": "float", "policy.participation": "float",
    "policy.shared_phase": "bool", "policy.horizon_days": "float",
    "filter.preset": "str", "filter.window_lo": "float",
    "filter.window_hi": "float", "filter.coprimary_days": "float",
    "filter.require_contact_tested": "bool", "filter.anchor": "str",
    "sweep.axis": "str", "sweep.grid": "floats",
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse a flat ``key = value`` scenario file. ``scenario.seed`` is
    mandatory; every other key has a default. Raises :class:`ConfigError`
    naming the offending key or line."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()

    unknown = sorted(set(raw) - set(_KEY_KINDS))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}")
    vals = {k: _cast(k, v, _KEY_KINDS[k]) for k, v in raw.items()}

    if "scenario.seed" not in vals:
        raise ConfigError("scenario.seed is required (wall-clock seeding is "
                          "not supported)")

    def section(prefix: str) -> dict:
        return {k.split(".", 1)[1]: v for k, v in vals.items()
                if k.startswith(prefix + ".")}

    try:
        symptom = SymptomModelParams(**section("symptom"))
        duration = DurationModelParams(**section("duration"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    unit_kwargs = section("unit")
    if "size" in unit_kwargs:
        unit_kwargs["unit_size"] = unit_kwargs.pop("size")
    if "transmission_mode" in unit_kwargs:
        try:
            unit_kwargs["transmission_mode"] = TransmissionMode(
                unit_kwargs["transmission_mode"])
        except ValueError:
            raise ConfigError("unit.transmission_mode: unknown mode "
                              f"{unit_kwargs['transmission_mode']!r}") from None
    try:
        unit = UnitConfig(symptom=symptom, duration=duration, **unit_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"unit: {exc}") from None

    policy_kwargs = section("policy")
    kind_raw = policy_kwargs.pop("kind", "symptom_prompted")
    try:
        kind = PolicyKind(kind_raw)
    except ValueError:
        raise ConfigError(f"policy.kind: unknown kind {kind_raw!r}") from None
    try:
        policy = TestingPolicy(kind=kind, **policy_kwargs)
    except ValueError as exc:
        raise ConfigError(f"policy: {exc}") from None

    filter_kwargs = section("filter")
    preset = filter_kwargs.pop("preset", None)
    if preset is not None:
        if filter_kwargs:
            raise ConfigError("filter.preset cannot be combined with other "
                              "filter.* keys")
        if preset not in PRESET_FILTERS:
            raise ConfigError(f"filter.preset: unknown preset {preset!r}; "
                              f"choose from {sorted(PRESET_FILTERS)}")
        design = PRESET_FILTERS[preset]()
    else:
        lo = filter_kwargs.pop("window_lo", -60.0)
        hi = filter_kwargs.pop("window_hi", 60.0)
        anchor_raw = filter_kwargs.pop("anchor", "test_time")
        try:
            anchor = WindowAnchor(anchor_raw)
        except ValueError:
            raise ConfigError(f"filter.anchor: unknown anchor {anchor_raw!r}") from None
        coprimary = filter_kwargs.pop("coprimary_days", None)
        try:
            design = StudyDesignFilter(attribution_window=(lo, hi),
                                       coprimary_exclusion_days=coprimary,
                                       anchor=anchor, **filter_kwargs)
        except ValueError as exc:
            raise ConfigError(f"filter: {exc}") from None

    try:
        return ScenarioConfig(
            scenario_id=vals.get("scenario.id", "scenario"),
            unit=unit, policy=policy, design=design,
            units_per_arm=vals.get("scenario.units_per_arm", 10_000),
            seed=vals["scenario.seed"],
            index_rule=vals.get("scenario.index_rule", "earliest_positive"),
            sweep_axis=vals.get("sweep.axis"),
            sweep_grid=vals.get("sweep.grid", ()),
            out_path=vals.get("scenario.out"),
            threads=vals.get("scenario.threads", 1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# --- result rows and CSV ----------------------------------------------------

CSV_COLUMNS = (
    "scenario_id", "sweep_param", "sweep_value", "interval_k", "delta",
    "one_minus_delta", "target_ve", "actual_ve_analytic", "actual_ve_mc",
    "mc_se", "n_units", "n_excluded_no_index", "n_excluded_coprimary",
    "feasible",
)


@dataclass(frozen=True)
class ResultRow:
    """One CSV record; column order is :data:`CSV_COLUMNS`."""

    scenario_id: str
    sweep_param: str = ""
    sweep_value: float = math.nan
    interval_k: float = math.nan
    delta: float = math.nan
    one_minus_delta: float = math.nan
    target_ve: float = math.nan
    actual_ve_analytic: float = math.nan
    actual_ve_mc: float = math.nan
    mc_se: float = math.nan
    n_units: int = 0
    n_excluded_no_index: int = 0
    n_excluded_coprimary: int = 0
    feasible: int = 1

    def to_csv_fields(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if isinstance(value, str):
                out.append(value)
            elif isinstance(value, int):
                out.append(str(value))
            else:
                out.append(fmt12(value))
        return out


def rows_to_csv(rows: list[ResultRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(r.to_csv_fields()) for r in rows)
    return "\n".join(lines) + "\n"


def write_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


# --- object-pipeline scenario runner ----------------------------------------

def _analytic_columns(cfg: ScenarioConfig) -> tuple[float, float]:
    """(target VE, analytic observed VE) when the scenario matches one of
    the closed-form regimes, else NaNs."""
    s, d = cfg.unit.symptom, cfg.unit.duration
    mode = cfg.unit.transmission_mode
    if (cfg.policy.kind is PolicyKind.SYMPTOM_PROMPTED
            and mode is TransmissionMode.PER_UNIT_BERNOULLI):
        return (1.0 - estimands.symptom_prompted_target_mu(s),
                1.0 - estimands.symptom_prompted_actual_mu(s))
    if (cfg.policy.kind is PolicyKind.SCHEDULED
            and mode is TransmissionMode.PER_DAY_HAZARD):
        k = cfg.policy.interval_days
        return (1.0 - estimands.infrequent_target_mu(d),
                1.0 - estimands.infrequent_observed_mu(k, d))
    return math.nan, math.nan


def _chunk_sizes(total: int) -> list[int]:
    return [min(CHUNK_UNITS, total - start)
            for start in range(0, total, CHUNK_UNITS)]


def _run_chunk(args) -> list[UnitAnalysis]:
    cfg, arm_vaccinated, row_index, arm_index, chunk_index, n = args
    rng = spawn_rng(cfg.seed, row_index, arm_index, chunk_index)
    unit_cfg = replace(cfg.unit,
                       p_primary_vaccinated=1.0 if arm_vaccinated else 0.0)
    analyses = []
    for _ in range(n):
        truth = simulate_unit(unit_cfg, rng)
        obs = apply_policy(truth, cfg.policy, rng)
        override = truth.primary_id if cfg.index_rule == "true_primary" else None
        analyses.append(analyze_unit(obs, cfg.design, index_id=override))
    return analyses


def run_scenario(cfg: ScenarioConfig) -> list[ResultRow]:
    """Run one scenario (optionally swept) through the object pipeline.

    Deterministic in ``(config, seed)``: re-running writes byte-identical
    CSV regardless of thread count. ``units_per_arm = 0`` produces no rows
    (header-only CSV).
    """
    if cfg.units_per_arm == 0:
        return []
    grid = list(cfg.sweep_grid) if cfg.sweep_axis else [None]
    rows: list[ResultRow] = []
    for row_index, value in enumerate(grid):
        cfg_i = cfg if value is None else apply_axis(cfg, cfg.sweep_axis, value)
        tasks = []
        for arm_index, arm in enumerate((True, False)):
            for chunk_index, n in enumerate(_chunk_sizes(cfg.units_per_arm)):
                tasks.append((cfg_i, arm, row_index, arm_index, chunk_index, n))
        chunks = _parallel_map(_run_chunk, tasks, cfg.threads)
        analyses = [a for chunk in chunks for a in chunk]
        excluded = {}
        for a in analyses:
            if a.excluded:
                excluded[a.exclusion_reason] = excluded.get(a.exclusion_reason, 0) + 1
        try:
            estimate = estimate_ve_sar(analyses)
            ve_mc, se = estimate.ve, estimate.se
        except EstimationError:
            ve_mc, se = math.nan, math.nan
        target, actual = _analytic_columns(cfg_i)
        rows.append(ResultRow(
            scenario_id=cfg.scenario_id,
            sweep_param=cfg.sweep_axis or "",
            sweep_value=math.nan if value is None else float(value),
            interval_k=(cfg_i.policy.interval_days
                        if cfg_i.policy.interval_days is not None else math.nan),
            delta=cfg_i.unit.symptom.delta,
            one_minus_delta=1.0 - cfg_i.unit.symptom.delta,
            target_ve=target, actual_ve_analytic=actual,
            actual_ve_mc=ve_mc, mc_se=se,
            n_units=cfg.units_per_arm,
            n_excluded_no_index=excluded.get("no_index", 0),
            n_excluded_coprimary=excluded.get("coprimary", 0),
        ))
    return rows


# --- fast Monte Carlo oracle -------------------------------------------------

def mc_oracle(cfg: ScenarioConfig, n_reps: int, seed: int,
              rng_key: tuple[int, ...] = ()) -> McRatio:
    """Vectorized simulate-observe-infer oracle for one scenario.

    Runs the reference-anchored cohort pipeline matching the scenario's
    policy and transmission mode. Degenerate arms raise with a message
    rather than returning NaN.
    """
    if n_reps < 10_000:
        raise ValueError(f"n_reps must be >= 10000 for a usable oracle, "
                         f"got {n_reps}")
    rng = spawn_rng(seed, *rng_key)
    s, d = cfg.unit.symptom, cfg.unit.duration
    contacts = cfg.unit.unit_size - 1
    mode = cfg.unit.transmission_mode
    if cfg.unit.community_daily_hazard > 0 or cfg.unit.contact_to_contact:
        raise ValueError("fast oracle covers within-unit primary transmission "
                         "only; use run_scenario for community or "
                         "contact-to-contact scenarios")
    if (cfg.policy.kind is PolicyKind.SCHEDULED
            and mode in (TransmissionMode.PER_DAY_HAZARD,
                         TransmissionMode.PER_DAY_HAZARD_EXACT)):
        transmission = ("linear" if mode is TransmissionMode.PER_DAY_HAZARD
                        else "exact")
        return mc_infrequent_observed(d, cfg.policy.interval_days, n_reps, rng,
                                      contacts_per_unit=contacts,
                                      transmission=transmission)
    if (cfg.policy.kind is PolicyKind.SYMPTOM_PROMPTED
            and mode is TransmissionMode.PER_UNIT_BERNOULLI):
        lo, hi = cfg.design.attribution_window
        window = None if (lo <= -cfg.policy.horizon_days
                          and hi >= cfg.policy.horizon_days) else (lo, hi)
        return mc_symptom_prompted_ve(
            s, d, n_reps, rng, contacts_per_unit=contacts,
            incubation_mean_days=cfg.unit.incubation_mean_days,
            incubation_log_sd=cfg.unit.incubation_log_sd, window=window)
    raise ValueError("fast oracle supports scheduled testing with a "
                     "per-day-hazard mode or symptom-prompted testing with "
                     "per-unit Bernoulli transmission")


# --- figure sweeps -----------------------------------------------------------

DEFAULT_FIG1A_DELTAS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_FIG1A_TARGETS = tuple(round(0.02 * i, 2) for i in range(51))
DEFAULT_FIG1B_KS = tuple(float(k) for k in range(1, 15))
DEFAULT_FIGA1_KS = tuple(float(k) for k in range(1, 31))
DEFAULT_FIG_TARGETS_DURATION = (0.5, 0.6, 0.7, 0.8, 0.9)


def sweep_figure_1a(symptom_base: SymptomModelParams | None = None,
                    deltas: tuple[float, ...] = DEFAULT_FIG1A_DELTAS,
                    target_ves: tuple[float, ...] = DEFAULT_FIG1A_TARGETS,
                    units_per_arm: int = 0, seed: int = 0,
                    threads: int = 1) -> list[ResultRow]:
    """Target vs observed VE under symptom-prompted testing.

    One row per (delta, target VE). The observed analytic VE is
    ``1 - nu`` with ``nu`` solved from the target; combinations needing
    ``nu > 1`` are emitted as flagged infeasible rows, not dropped. Rows
    carry both the target VE and ``1 - delta`` so either can serve as the
    plotting axis. ``units_per_arm > 0`` adds Monte Carlo columns.
    """
    base = symptom_base or SymptomModelParams()
    tasks = [(i, delta, target)
             for i, (delta, target) in enumerate(
                 (d, t) for d in deltas for t in target_ves)]

    def run_row(args) -> ResultRow:
        row_index, delta, target = args
        common = dict(scenario_id="figure_1a", sweep_param="target_ve",
                      sweep_value=target, delta=delta,
                      one_minus_delta=1.0 - delta, target_ve=target)
        try:
            nu = estimands.invert_target_to_nu(target, base.lambda_symptom,
                                               delta, base.rho_symptom)
        except estimands.InfeasibleTargetError:
            return ResultRow(feasible=0, **common)
        actual = 1.0 - nu
        if units_per_arm <= 0:
            return ResultRow(actual_ve_analytic=actual, **common)
        params = replace(base, delta=delta, nu=nu)
        rng = spawn_rng(seed, row_index)
        mc = mc_symptom_prompted_ve(params, DurationModelParams(),
                                    units_per_arm, rng)
        return ResultRow(actual_ve_analytic=actual, actual_ve_mc=mc.ve,
                         mc_se=mc.se, n_units=units_per_arm, **common)

    return _parallel_map(run_row, tasks, threads)


def sweep_figure_1b_a1(duration_base: DurationModelParams | None = None,
                       ks: tuple[float, ...] | None = None,
                       target_ves: tuple[float, ...] = DEFAULT_FIG_TARGETS_DURATION,
                       units_per_arm: int = 0, seed: int = 0, threads: int = 1,
                       restrict_to_short_intervals: bool = False) -> list[ResultRow]:
    """Observed VE as a function of the testing interval.

    One row per (target VE, k). ``restrict_to_short_intervals`` keeps only
    intervals below the maximum vaccinated-arm duration, the range where
    the interval still changes the observed estimand. The daily hazard
    ratio is solved from the target VE; targets below ``1 - rho1/rho0``
    are emitted as flagged infeasible rows.
    """
    base = duration_base or DurationModelParams()
    if ks is None:
        ks = DEFAULT_FIG1B_KS if restrict_to_short_intervals else DEFAULT_FIGA1_KS
    if restrict_to_short_intervals:
        ks = tuple(k for k in ks if k < base.rho1 + base.c)
    scenario_id = "figure_1b" if restrict_to_short_intervals else "figure_a1"
    tasks = [(i, target, k)
             for i, (target, k) in enumerate(
                 (t, k) for t in target_ves for k in ks)]

    def run_row(args) -> ResultRow:
        row_index, target, k = args
        common = dict(scenario_id=scenario_id, sweep_param="interval_k",
                      sweep_value=k, interval_k=k, target_ve=target)
        nu_daily = (1.0 - target) / base.duration_ratio
        if nu_daily > 1.0:
            return ResultRow(feasible=0, **common)
        d = replace(base, nu_daily=nu_daily)
        actual = 1.0 - estimands.infrequent_observed_mu(k, d)
        if units_per_arm <= 0:
            return ResultRow(actual_ve_analytic=actual, **common)
        rng = spawn_rng(seed, row_index)
        mc = mc_infrequent_observed(d, k, units_per_arm, rng)
        return ResultRow(actual_ve_analytic=actual, actual_ve_mc=mc.ve,
                         mc_se=mc.se, n_units=units_per_arm, **common)

    return _parallel_map(run_row, tasks, threads)
