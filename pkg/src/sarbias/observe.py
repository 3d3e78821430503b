"""Degrade unit truth into the test records a retrospective database holds.

The observed layer is deliberately poorer than the truth: a database row
is a person, a test time, and a positive/negative result. Who infected
whom, asymptomatic infections that never prompted a test, and infections
that fell between scheduled tests are all invisible. Untested persons
carry no records at all; downstream analyses choose whether absence means
"negative" (registry convention) or "unknown" (contact-tracing
convention).

Tests report the truth at the moment of testing: a test at time ``t`` is
positive exactly when ``t`` falls inside the person's test-positivity
window ``[acquisition, acquisition + duration)``. Assay error is out of
scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .params import ParameterError
from .simcore import UnitTruth


class PolicyKind(Enum):
    NO_TESTING = "no_testing"
    SYMPTOM_PROMPTED = "symptom_prompted"
    SCHEDULED = "scheduled"
    SYMPTOM_PLUS_SCHEDULED = "symptom_plus_scheduled"


@dataclass(frozen=True)
class TestingPolicy:
    """How and when the members of a unit get tested.

    Attributes:
        kind: which trigger generates tests.
        delay_days: days between symptom onset and the symptom-prompted
            test.
        interval_days: spacing of scheduled tests; required for scheduled
            kinds.
        participation: per-person probability of ever testing. Opt-outs
            are drawn once per person and suppress all of that person's
            records.
        shared_phase: scheduled tests use one random phase for the whole
            unit (synchronized household testing) instead of independent
            per-person phases.
        fixed_phase: overrides the random phase with a constant, for
            deterministic schedules.
        horizon_days: tests are generated from the unit's time origin up
            to this horizon.
    """

    __test__ = False  # name starts with "Test"; keep pytest collection away

    kind: PolicyKind
    delay_days: float = 0.0
    interval_days: Optional[float] = None
    participation: float = 1.0
    shared_phase: bool = False
    fixed_phase: Optional[float] = None
    horizon_days: float = 60.0

    def __post_init__(self) -> None:
        if self.delay_days < 0.0:
            raise ParameterError(f"delay_days must be >= 0, got {self.delay_days}")
        if not 0.0 <= self.participation <= 1.0:
            raise ParameterError(f"participation must be in [0, 1], "
                                 f"got {self.participation}")
        if self.horizon_days <= 0.0:
            raise ParameterError(f"horizon_days must be > 0, got {self.horizon_days}")
        scheduled = self.kind in (PolicyKind.SCHEDULED,
                                  PolicyKind.SYMPTOM_PLUS_SCHEDULED)
        if scheduled:
            if self.interval_days is None or self.interval_days <= 0.0:
                raise ParameterError("interval_days must be > 0 for scheduled "
                                     f"testing, got {self.interval_days}")
            if self.fixed_phase is not None and not (
                    0.0 <= self.fixed_phase < self.interval_days):
                raise ParameterError("fixed_phase must lie in [0, interval_days), "
                                     f"got {self.fixed_phase}")

    @classmethod
    def none(cls) -> "TestingPolicy":
        return cls(kind=PolicyKind.NO_TESTING)

    @classmethod
    def symptom_prompted(cls, delay_days: float = 0.0,
                         participation: float = 1.0,
                         horizon_days: float = 60.0) -> "TestingPolicy":
        return cls(kind=PolicyKind.SYMPTOM_PROMPTED, delay_days=delay_days,
                   participation=participation, horizon_days=horizon_days)

    @classmethod
    def scheduled(cls, interval_days: float, participation: float = 1.0,
                  shared_phase: bool = False, fixed_phase: Optional[float] = None,
                  horizon_days: float = 60.0) -> "TestingPolicy":
        return cls(kind=PolicyKind.SCHEDULED, interval_days=interval_days,
                   participation=participation, shared_phase=shared_phase,
                   fixed_phase=fixed_phase, horizon_days=horizon_days)

    @classmethod
    def symptom_plus_scheduled(cls, interval_days: float, delay_days: float = 0.0,
                               participation: float = 1.0,
                               shared_phase: bool = False,
                               horizon_days: float = 60.0) -> "TestingPolicy":
        return cls(kind=PolicyKind.SYMPTOM_PLUS_SCHEDULED, delay_days=delay_days,
                   interval_days=interval_days, participation=participation,
                   shared_phase=shared_phase, horizon_days=horizon_days)


@dataclass(frozen=True, slots=True)
class TestRecord:
    __test__ = False

    person_id: int
    test_time: float
    positive: bool


@dataclass
class ObservedUnit:
    """What the retrospective database sees of one unit.

    ``reported_onsets`` maps person id to the symptom-onset date reported
    with a symptom-prompted test; scheduled tests report no onset.
    """

    persons: list  # list[Person], shared with the source truth
    tests: list[TestRecord]
    reported_onsets: dict[int, float] = field(default_factory=dict)

    def tests_of(self, person_id: int) -> list[TestRecord]:
        return [t for t in self.tests if t.person_id == person_id]

    def tested_ids(self) -> set[int]:
        return {t.person_id for t in self.tests}

    def first_positive_time(self, person_id: int) -> Optional[float]:
        times = [t.test_time for t in self.tests
                 if t.person_id == person_id and t.positive]
        return min(times) if times else None


def _positive_at(truth: UnitTruth, person_id: int, t: float) -> bool:
    inf = truth.infection_of(person_id)
    if inf is None:
        return False
    return inf.acquisition_time <= t < inf.acquisition_time + inf.duration_days


def apply_policy(truth: UnitTruth, policy: TestingPolicy,
                 rng: np.random.Generator) -> ObservedUnit:
    """Generate the test records the policy would produce for one unit.

    Participation is drawn per person before any test is generated; a
    non-participant produces no records regardless of infection or
    symptoms. Symptom-prompted tests occur once per symptomatic infected
    person at onset plus delay. Scheduled tests occur at ``phase + j * k``
    for every participant, infected or not, up to the horizon, with the
    phase uniform on ``[0, k)``.
    """
    tests: list[TestRecord] = []
    onsets: dict[int, float] = {}
    if policy.kind is PolicyKind.NO_TESTING:
        return ObservedUnit(persons=truth.persons, tests=tests)

    participates = {
        p.id: policy.participation >= 1.0 or bool(rng.random() < policy.participation)
        for p in truth.persons
    }

    symptomatic_kinds = (PolicyKind.SYMPTOM_PROMPTED,
                         PolicyKind.SYMPTOM_PLUS_SCHEDULED)
    if policy.kind in symptomatic_kinds:
        for inf in truth.infections:
            if not inf.symptomatic or not participates[inf.person_id]:
                continue
            t = inf.symptom_onset_time + policy.delay_days
            if t > policy.horizon_days:
                continue
            tests.append(TestRecord(person_id=inf.person_id, test_time=t,
                                    positive=_positive_at(truth, inf.person_id, t)))
            onsets[inf.person_id] = inf.symptom_onset_time

    scheduled_kinds = (PolicyKind.SCHEDULED, PolicyKind.SYMPTOM_PLUS_SCHEDULED)
    if policy.kind in scheduled_kinds:
        k = policy.interval_days
        shared = (float(rng.uniform(0.0, k))
                  if policy.shared_phase and policy.fixed_phase is None else None)
        for person in truth.persons:
            if not participates[person.id]:
                continue
            if policy.fixed_phase is not None:
                phase = policy.fixed_phase
            elif shared is not None:
                phase = shared
            else:
                phase = float(rng.uniform(0.0, k))
            n_tests = int(math.floor((policy.horizon_days - phase) / k)) + 1
            for j in range(max(n_tests, 0)):
                t = phase + j * k
                tests.append(TestRecord(person_id=person.id, test_time=t,
                                        positive=_positive_at(truth, person.id, t)))

    tests.sort(key=lambda r: (r.test_time, r.person_id))
    return ObservedUnit(persons=truth.persons, tests=tests, reported_onsets=onsets)
