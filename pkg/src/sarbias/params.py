"""Validated parameter bundles for the transmission and testing models.

Two scalar bundles drive everything downstream:

* :class:`SymptomModelParams` describes vaccine effects mediated through
  symptom status, ignoring time: how much vaccination suppresses symptoms,
  how much less asymptomatic infections transmit, and the residual
  transmission reduction for vaccinated infections.
* :class:`DurationModelParams` describes vaccine effects mediated through
  infection duration: uniformly distributed test-positivity windows with a
  vaccination-dependent mean, paired with a constant daily transmission
  hazard.

Each bundle checks its constraints at construction, so code consuming a
bundle can assume a coherent parameter set.
"""

from __future__ import annotations

from dataclasses import dataclass


class ParameterError(ValueError):
    """A parameter bundle violates one of its constraints."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterError(message)


@dataclass(frozen=True)
class SymptomModelParams:
    """Vaccine effects mediated through symptom presentation.

    Attributes:
        lambda_symptom: ratio in [0, 1] of symptomatic fractions,
            P(symptomatic | vaccinated) / P(symptomatic | unvaccinated).
        delta: ratio in [0, 1], transmission of an asymptomatic relative to
            a symptomatic infection at fixed vaccination status.
        nu: ratio in [0, 1], transmission of a vaccinated relative to an
            unvaccinated infection at fixed symptom status.
        rho_symptom: probability in [0, 1] that an unvaccinated infection
            is symptomatic.
        tau: per-contact transmission probability in (0, 1] for a
            symptomatic unvaccinated infection.

    Defaults put the symptomatic fraction at 0.5 for the unvaccinated and
    at 0.1 for the vaccinated (lambda_symptom = 0.2).
    """

    lambda_symptom: float = 0.2
    delta: float = 0.5
    nu: float = 0.6
    rho_symptom: float = 0.5
    tau: float = 0.3

    def __post_init__(self) -> None:
        _require(0.0 <= self.lambda_symptom <= 1.0,
                 f"lambda_symptom must be in [0, 1], got {self.lambda_symptom}")
        _require(0.0 <= self.delta <= 1.0,
                 f"delta must be in [0, 1], got {self.delta}")
        _require(0.0 <= self.nu <= 1.0,
                 f"nu must be in [0, 1], got {self.nu}")
        _require(0.0 <= self.rho_symptom <= 1.0,
                 f"rho_symptom must be in [0, 1], got {self.rho_symptom}")
        _require(0.0 < self.tau <= 1.0,
                 f"tau must be in (0, 1], got {self.tau}")

    def symptomatic_probability(self, vaccinated: bool) -> float:
        """P(symptomatic | infected, vaccination status)."""
        if vaccinated:
            return self.lambda_symptom * self.rho_symptom
        return self.rho_symptom

    def per_contact_transmission(self, vaccinated: bool, symptomatic: bool) -> float:
        """Per-contact transmission probability for one infectious person."""
        p = self.tau
        if not symptomatic:
            p *= self.delta
        if vaccinated:
            p *= self.nu
        return p


@dataclass(frozen=True)
class DurationModelParams:
    """Vaccine effects mediated through infection duration.

    Durations (days of diagnostic test positivity) are uniform on
    ``[rho_v - c, rho_v + c]`` where ``rho_v`` is ``rho0`` for unvaccinated
    and ``rho1`` for vaccinated infections. Transmission accrues at a
    constant daily hazard ``tau0`` (unvaccinated) or ``tau0 * nu_daily``
    (vaccinated).

    Attributes:
        rho0: mean duration in days for unvaccinated infections, > c.
        rho1: mean duration in days for vaccinated infections, > c and
            at most rho0.
        c: half-width in days of the uniform duration distribution, > 0.
        nu_daily: daily transmission hazard ratio vaccinated/unvaccinated,
            in [0, 1].
        tau0: daily transmission hazard for unvaccinated infections. Must
            be small enough that tau0 * (rho0 + c) <= 1, keeping the
            linear hazard-times-duration transmission probability a valid
            probability for every possible duration.
    """

    rho0: float = 14.0
    rho1: float = 8.0
    c: float = 7.0
    nu_daily: float = 0.7
    tau0: float = 0.01

    def __post_init__(self) -> None:
        _require(self.c > 0.0, f"c must be > 0, got {self.c}")
        _require(self.rho0 > 0.0, f"rho0 must be > 0, got {self.rho0}")
        _require(self.rho1 > 0.0, f"rho1 must be > 0, got {self.rho1}")
        _require(self.rho1 <= self.rho0,
                 f"rho1 must be <= rho0, got rho1={self.rho1} > rho0={self.rho0}")
        # Both arms need strictly positive minimum durations. rho1 > c is
        # equivalent to duration_ratio > c / rho0.
        _require(self.rho0 - self.c > 0.0,
                 f"rho0 - c must be > 0, got {self.rho0 - self.c}")
        _require(self.rho1 - self.c > 0.0,
                 f"rho1 - c must be > 0, got {self.rho1 - self.c}")
        _require(0.0 <= self.nu_daily <= 1.0,
                 f"nu_daily must be in [0, 1], got {self.nu_daily}")
        _require(self.tau0 > 0.0, f"tau0 must be > 0, got {self.tau0}")
        _require(self.tau0 * (self.rho0 + self.c) <= 1.0,
                 "tau0 too large: tau0 * (rho0 + c) must be <= 1, got "
                 f"{self.tau0 * (self.rho0 + self.c)}")

    @property
    def duration_ratio(self) -> float:
        """Mean duration ratio vaccinated/unvaccinated, rho1 / rho0."""
        return self.rho1 / self.rho0

    @property
    def tau1(self) -> float:
        """Daily transmission hazard for vaccinated infections."""
        return self.tau0 * self.nu_daily

    def mean_duration(self, vaccinated: bool) -> float:
        return self.rho1 if vaccinated else self.rho0

    def daily_hazard(self, vaccinated: bool) -> float:
        return self.tau1 if vaccinated else self.tau0
