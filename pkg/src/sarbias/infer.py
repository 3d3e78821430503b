"""Replay what a retrospective analysis would conclude from test records.

Given only :class:`~sarbias.observe.ObservedUnit` data, the naive analysis
(1) picks the index case as the first detected positive, (2) applies a
study-design filter that decides which contact positives count as
transmission events, and (3) pools secondary attack rates by the index
case's vaccination status. Each step can diverge from the truth: the index
may not be the true primary, in-window community infections inflate the
SAR, and out-of-window true transmissions are dropped.

Filters replicate the attribution-window and co-primary exclusion rules of
published household and contact-tracing studies; see the preset
constructors on :class:`StudyDesignFilter`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .observe import ObservedUnit
from .simcore import EstimationError


class WindowAnchor(Enum):
    """What the attribution window is measured from.

    TEST_TIME anchors on first positive test dates for both index and
    contacts. ONSET_TIME anchors on reported symptom-onset dates where the
    database has them (symptom-prompted tests), falling back to test dates
    otherwise. Published designs vary on this point, so both exist.
    """

    TEST_TIME = "test_time"
    ONSET_TIME = "onset_time"


@dataclass(frozen=True)
class StudyDesignFilter:
    """Attribution window plus exclusion rules of one study design.

    Attributes:
        attribution_window: ``(lo, hi)`` in days; a contact's positive
            counts as a transmission event when its anchor time falls
            between ``lo`` and ``hi`` days (inclusive) after the index
            anchor. ``lo`` may be negative for maximal windows.
        coprimary_exclusion_days: drop the whole unit when two or more
            persons have first-positive dates within this many days of
            each other (0 means same calendar day). ``None`` disables the
            rule. Dates are whole days (floor of the test time), matching
            how registries record them.
        require_contact_tested: contact-tracing style keeps only tested
            contacts in the denominator; registry style counts untested
            contacts as negative.
        anchor: see :class:`WindowAnchor`.
        note: human-readable description of the rule set.
    """

    attribution_window: tuple[float, float] = (-60.0, 60.0)
    coprimary_exclusion_days: Optional[float] = None
    require_contact_tested: bool = False
    anchor: WindowAnchor = WindowAnchor.TEST_TIME
    note: str = ""

    def __post_init__(self) -> None:
        lo, hi = self.attribution_window
        if lo > hi:
            raise ValueError(f"attribution window lo must be <= hi, got ({lo}, {hi})")
        if (self.coprimary_exclusion_days is not None
                and self.coprimary_exclusion_days < 0):
            raise ValueError("coprimary_exclusion_days must be >= 0 or None, "
                             f"got {self.coprimary_exclusion_days}")

    @classmethod
    def maximal(cls, horizon_days: float = 60.0) -> "StudyDesignFilter":
        """No exclusions; every contact positive counts regardless of lag."""
        return cls(attribution_window=(-horizon_days, horizon_days),
                   note="maximal window, no exclusions")

    @classmethod
    def harris(cls) -> "StudyDesignFilter":
        """Household registry design: window 2-14 days after the index,
        dropping units with two positives within two days of each other."""
        return cls(attribution_window=(2.0, 14.0), coprimary_exclusion_days=2.0,
                   require_contact_tested=False,
                   note="registry; contact positives 2-14 days after index; "
                        "drop units with >1 positive within 2 days")

    @classmethod
    def eyre(cls) -> "StudyDesignFilter":
        """Contact-tracing design: window 1-10 days, tested contacts only."""
        return cls(attribution_window=(1.0, 10.0), coprimary_exclusion_days=None,
                   require_contact_tested=True,
                   note="contact tracing; contact positives 1-10 days after "
                        "index; denominator restricted to tested contacts")

    @classmethod
    def gier(cls) -> "StudyDesignFilter":
        """Contact-tracing design: window 1-14 days, tested contacts only."""
        return cls(attribution_window=(1.0, 14.0), coprimary_exclusion_days=None,
                   require_contact_tested=True,
                   note="contact tracing; contact positives 1-14 days after "
                        "index; denominator restricted to tested contacts")

    @classmethod
    def lyngse(cls) -> "StudyDesignFilter":
        """Household registry design: window 1-7 days, dropping units with
        more than one person first testing positive on the same day."""
        return cls(attribution_window=(1.0, 7.0), coprimary_exclusion_days=0.0,
                   require_contact_tested=False,
                   note="registry; contact positives 1-7 days after index; "
                        "drop units with >1 positive on the same day")


PRESET_FILTERS = {
    "maximal": StudyDesignFilter.maximal,
    "harris": StudyDesignFilter.harris,
    "eyre": StudyDesignFilter.eyre,
    "gier": StudyDesignFilter.gier,
    "lyngse": StudyDesignFilter.lyngse,
}


@dataclass(frozen=True)
class UnitAnalysis:
    """Outcome of analyzing one observed unit under one design."""

    index_id: Optional[int]
    index_vaccinated: Optional[bool]
    n_at_risk_contacts: int
    n_attributed_transmissions: int
    excluded: bool
    exclusion_reason: Optional[str] = None


def identify_index(obs: ObservedUnit) -> Optional[int]:
    """The index case: earliest positive test, ties broken by lowest id.

    Returns ``None`` when the unit has no positive test at all.
    """
    best: Optional[tuple[float, int]] = None
    for person in obs.persons:
        t = obs.first_positive_time(person.id)
        if t is None:
            continue
        cand = (t, person.id)
        if best is None or cand < best:
            best = cand
    return best[1] if best is not None else None


def _coprimary_excluded(obs: ObservedUnit, within_days: float) -> bool:
    dates = sorted(math.floor(t) for t in
                   (obs.first_positive_time(p.id) for p in obs.persons)
                   if t is not None)
    return any(b - a <= within_days for a, b in zip(dates, dates[1:]))


def _anchor_time(obs: ObservedUnit, person_id: int,
                 anchor: WindowAnchor) -> Optional[float]:
    if anchor is WindowAnchor.ONSET_TIME and person_id in obs.reported_onsets:
        return obs.reported_onsets[person_id]
    return obs.first_positive_time(person_id)


def analyze_unit(obs: ObservedUnit, design: StudyDesignFilter,
                 index_id: Optional[int] = None) -> UnitAnalysis:
    """Classify one unit's transmission events under a study design.

    Co-primary exclusion is applied first. Then contacts (every person but
    the index) with a positive anchor time inside the attribution window
    are counted as attributed transmissions; the denominator is all
    contacts (registry) or tested contacts only (contact tracing).

    ``index_id`` overrides index identification, for prospective-style
    analyses that anchor on a known primary case; the unit is then treated
    as unsampled (excluded, reason ``"no_index"``) unless that person has
    a positive test.
    """
    if index_id is None:
        index_id = identify_index(obs)
    elif obs.first_positive_time(index_id) is None:
        index_id = None
    if index_id is None:
        return UnitAnalysis(index_id=None, index_vaccinated=None,
                            n_at_risk_contacts=0, n_attributed_transmissions=0,
                            excluded=True, exclusion_reason="no_index")

    if (design.coprimary_exclusion_days is not None
            and _coprimary_excluded(obs, design.coprimary_exclusion_days)):
        return UnitAnalysis(index_id=index_id, index_vaccinated=None,
                            n_at_risk_contacts=0, n_attributed_transmissions=0,
                            excluded=True, exclusion_reason="coprimary")

    anchor = _anchor_time(obs, index_id, design.anchor)
    lo, hi = design.attribution_window
    tested = obs.tested_ids()
    index_vaccinated = obs.persons[index_id].vaccinated

    n_at_risk = 0
    n_attributed = 0
    for person in obs.persons:
        if person.id == index_id:
            continue
        if design.require_contact_tested and person.id not in tested:
            continue
        n_at_risk += 1
        event = _anchor_time(obs, person.id, design.anchor)
        if event is None:  # never tested positive
            continue
        if lo <= event - anchor <= hi:
            n_attributed += 1

    return UnitAnalysis(index_id=index_id, index_vaccinated=index_vaccinated,
                        n_at_risk_contacts=n_at_risk,
                        n_attributed_transmissions=n_attributed,
                        excluded=False)


@dataclass(frozen=True)
class VESarEstimate:
    """Pooled VE-SAR estimate with its delta-method standard error."""

    sar_v: float
    sar_u: float
    ve: float
    se: float
    counts: dict


def _arm_totals(analyses: list[UnitAnalysis], arm: bool,
                per_unit_average: bool) -> tuple[float, float, float, int]:
    """Returns (sar, variance of sar, at-risk total, unit count) for one arm."""
    rows = [a for a in analyses
            if not a.excluded and a.index_vaccinated is arm
            and a.n_at_risk_contacts > 0]
    n_units = len(rows)
    if n_units == 0:
        return math.nan, math.nan, 0.0, 0
    if per_unit_average:
        rates = [a.n_attributed_transmissions / a.n_at_risk_contacts for a in rows]
        sar = sum(rates) / n_units
        var = (sum((r - sar) ** 2 for r in rates) / (n_units - 1) / n_units
               if n_units > 1 else math.nan)
        return sar, var, float(n_units), n_units
    at_risk = sum(a.n_at_risk_contacts for a in rows)
    attributed = sum(a.n_attributed_transmissions for a in rows)
    sar = attributed / at_risk
    # Cluster-robust ratio-estimator variance; equals the binomial
    # variance when every unit contributes exactly one contact.
    ss = sum((a.n_attributed_transmissions - sar * a.n_at_risk_contacts) ** 2
             for a in rows)
    return sar, ss / at_risk ** 2, float(at_risk), n_units


def ratio_standard_error(num: float, num_var: float,
                         den: float, den_var: float) -> float:
    """Delta-method standard error of ``num / den`` from arm variances."""
    if den <= 0.0 or not math.isfinite(num_var) or not math.isfinite(den_var):
        return math.nan
    return math.sqrt(num_var / den ** 2 + num ** 2 * den_var / den ** 4)


def estimate_ve_sar(analyses: list[UnitAnalysis],
                    per_unit_average: bool = False) -> VESarEstimate:
    """Pooled naive VE-SAR from per-unit analyses.

    Arms are formed by the *index* case's vaccination status, which is all
    a retrospective analysis can see. ``per_unit_average`` switches the
    pooled (aggregate-count) SAR for the mean of per-unit attack rates.

    Raises:
        EstimationError: if either arm has no analyzable units
            ("insufficient data") or the unvaccinated SAR is zero
            ("undefined VE").
    """
    excluded_counts: dict[str, int] = {}
    for a in analyses:
        if a.excluded:
            reason = a.exclusion_reason or "other"
            excluded_counts[reason] = excluded_counts.get(reason, 0) + 1

    sar_v, var_v, atrisk_v, units_v = _arm_totals(analyses, True, per_unit_average)
    sar_u, var_u, atrisk_u, units_u = _arm_totals(analyses, False, per_unit_average)
    counts = {
        "n_analyses": len(analyses),
        "n_units_v": units_v,
        "n_units_u": units_u,
        "at_risk_v": atrisk_v,
        "at_risk_u": atrisk_u,
        "excluded": excluded_counts,
    }
    if units_v == 0 or units_u == 0:
        arm = "vaccinated" if units_v == 0 else "unvaccinated"
        raise EstimationError(f"insufficient data: no analyzable units with "
                              f"{arm} index")
    if sar_u == 0.0:
        raise EstimationError("undefined VE: unvaccinated-arm SAR is zero")
    ratio = sar_v / sar_u
    se = ratio_standard_error(sar_v, var_v, sar_u, var_u)
    return VESarEstimate(sar_v=sar_v, sar_u=sar_u, ve=1.0 - ratio, se=se,
                         counts=counts)


def bootstrap_ve_se(analyses: list[UnitAnalysis], n_resamples: int = 500,
                    seed: int = 0, per_unit_average: bool = False) -> float:
    """Unit-resampling bootstrap standard error of the VE estimate.

    Validation alternative to the delta-method SE reported by
    :func:`estimate_ve_sar`; resamples whole units so within-unit
    clustering is preserved. Resamples that leave an arm empty or the
    unvaccinated SAR at zero are skipped.
    """
    rng = np.random.default_rng(seed)
    rows = [a for a in analyses if not a.excluded and a.n_at_risk_contacts > 0]
    n = len(rows)
    if n < 2:
        return math.nan
    ves = []
    for _ in range(n_resamples):
        draw = rng.integers(0, n, n)
        try:
            ves.append(estimate_ve_sar([rows[i] for i in draw],
                                       per_unit_average).ve)
        except EstimationError:
            continue
    if len(ves) < 2:
        return math.nan
    return float(np.std(ves, ddof=1))
