"""Closed-form outcome model for the qubit-controlled voltage switch.

The nonlinear coupling shifts the detected voltage by eps_gamma times the
state-averaged switch voltage. With readout fidelity f, an open-switch cycle
reads vs + eps_gamma * v1 * (f - 1/2); a closed-switch cycle reads v1.
Under a collapse (Copenhagen-style) interpretation the nonlinear term is
identically zero. All functions here are pure and thread-safe.
"""

from dataclasses import dataclass
from enum import Enum
import math

from scipy.optimize import brentq
from scipy.stats import binom


class Interpretation(str, Enum):
    EVERETT = "everett"
    COPENHAGEN = "copenhagen"


@dataclass(frozen=True)
class NonlinearParams:
    """Physics constants of the outcome model. Voltages in volts."""

    eps_gamma: float = 0.0
    v0: float = 0.0
    v1: float = 3.0
    vs: float = 0.0
    interpretation: Interpretation = Interpretation.EVERETT

    def __post_init__(self):
        if not self.v1 > self.v0:
            raise ValueError(f"v1 ({self.v1}) must exceed v0 ({self.v0})")
        if not abs(self.vs) < self.v1 / 10:
            raise ValueError(f"|vs| ({abs(self.vs)}) must be < v1/10 ({self.v1 / 10})")


@dataclass(frozen=True)
class FidelityModel:
    """Net readout fidelity achieved by n majority-voted repetitions."""

    net_fidelity: float
    n_repetitions: int
    per_cycle_fidelity: float

    def __post_init__(self):
        if not 0.5 <= self.net_fidelity <= 1.0:
            raise ValueError(f"net_fidelity {self.net_fidelity} outside [1/2, 1]")
        if not 0.5 <= self.per_cycle_fidelity <= 1.0:
            raise ValueError(f"per_cycle_fidelity {self.per_cycle_fidelity} outside [1/2, 1]")
        if self.n_repetitions < 1:
            raise ValueError(f"n_repetitions {self.n_repetitions} < 1")
        if self.n_repetitions == 1 and self.net_fidelity != self.per_cycle_fidelity:
            raise ValueError("direct readout (n=1) requires net == per-cycle fidelity")

    @classmethod
    def from_per_cycle(cls, per_cycle_fidelity: float, n_repetitions: int) -> "FidelityModel":
        return cls(
            net_fidelity=net_fidelity_majority(per_cycle_fidelity, n_repetitions),
            n_repetitions=n_repetitions,
            per_cycle_fidelity=per_cycle_fidelity,
        )

    @classmethod
    def from_net(cls, net_fidelity: float, n_repetitions: int) -> "FidelityModel":
        return cls(
            net_fidelity=net_fidelity,
            n_repetitions=n_repetitions,
            per_cycle_fidelity=per_cycle_from_net(net_fidelity, n_repetitions),
        )


def state_expectation_shift(p1: float, params: NonlinearParams) -> float:
    """Nonlinear voltage shift eps_gamma * <V> for branch weight p1 on the bit-1 level.

    Equal superposition (p1 = 1/2) with v0 = 0 gives eps_gamma * v1 / 2.
    Zero under the Copenhagen interpretation.
    """
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 {p1} outside [0, 1]")
    if params.interpretation is Interpretation.COPENHAGEN:
        return 0.0
    return params.eps_gamma * (p1 * params.v1 + (1.0 - p1) * params.v0)


def expected_reading(bit: int, fidelity: float, params: NonlinearParams) -> float:
    """Expected reduced voltage for one switch cycle controlled by `bit`.

    bit 1 closes the switch: the full v1 level. bit 0 leaves it open: leakage
    vs plus the fidelity-weighted nonlinear shift eps_gamma * v1 * (f - 1/2).
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if not 0.5 <= fidelity <= 1.0:
        raise ValueError(f"fidelity {fidelity} outside [1/2, 1]")
    if bit == 1:
        return params.v1
    if params.interpretation is Interpretation.COPENHAGEN:
        return params.vs
    return params.vs + params.eps_gamma * params.v1 * (fidelity - 0.5)


def net_fidelity_majority(per_cycle_fidelity: float, n: int) -> float:
    """Net fidelity of a majority vote over n readout repetitions.

    P(majority correct) with a fair coin flip on even-n ties. Uses the exact
    binomial tail; the test suite cross-checks against term-by-term enumeration.
    """
    p = per_cycle_fidelity
    if not 0.5 <= p <= 1.0:
        raise ValueError(f"per-cycle fidelity {p} outside [1/2, 1]")
    if n < 1:
        raise ValueError(f"n {n} < 1")
    if n == 1:
        return p
    result = float(binom.sf(n // 2, n, p))
    if n % 2 == 0:
        result += 0.5 * float(binom.pmf(n // 2, n, p))
    # the exact value lies in [1/2, 1]; clip roundoff at the endpoints
    return min(max(result, 0.5), 1.0)


def per_cycle_from_net(net_target: float, n: int) -> float:
    """Per-repetition fidelity whose n-vote majority achieves `net_target`.

    Inverts the monotone map net_fidelity_majority(., n) by root bracketing;
    round-trip residual below 1e-12.
    """
    if not 0.5 <= net_target <= 1.0:
        raise ValueError(f"net target {net_target} outside [1/2, 1]")
    if n < 1:
        raise ValueError(f"n {n} < 1")
    if net_target == 0.5:
        return 0.5
    if net_target == 1.0:
        return 1.0
    p = brentq(
        lambda q: net_fidelity_majority(q, n) - net_target,
        0.5,
        1.0,
        xtol=1e-15,
        rtol=8.9e-16,
    )
    assert math.isfinite(p)
    return float(p)
