"""Network-level death chain over the dead-node count.

The network is modeled as a birth-death chain on i = 0..M, where i counts
dead nodes and M = round(4N/5) is the death threshold for N deployed
nodes. Both boundaries are absorbing; absorption at M is network death.
One chain step is one death/recovery event opportunity (the mapping to
simulator ticks is a calibration constant owned by the detector).

Transition probabilities are symmetric:

    up(i) = down(i) = ((M - i) / M) * (i / M)
    stay(i) = ((M - i) / M)^2 + (i / M)^2

which makes every down/up ratio equal to 1 and collapses the absorption
probability into i / M. The closed forms below (``death_probability``,
``expected_visits_closed``, ``expected_death_time``) are all checked
against the fundamental-matrix oracle in :mod:`sleepwatch.chain`;
``death_probability`` deliberately evaluates the general ratio-sum
formula rather than the i / M shortcut, so the collapse is a tested
consequence instead of an assumption.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import TransitionMatrix, validate
from .errors import ConfigInvalid, OutOfRange, TooFewNodes

#: Dead-node fraction at which the network is declared dead.
DEATH_FRACTION = 4, 5

#: Rounding rule used to turn (4/5) * N into an integer threshold.
THRESHOLD_ROUNDING = "half-up"


def threshold_from_deployed(n: int) -> int:
    """Death threshold M = round(4n/5), rounded half-up.

    Uses exact integer arithmetic: (8n + 5) // 10. Raises TooFewNodes for
    n < 2 or whenever the threshold would land below 2 (a chain with
    M < 2 has no transient state to analyze).
    """
    if n < 2:
        raise TooFewNodes(f"need at least 2 deployed nodes, got {n}")
    num, den = DEATH_FRACTION
    m = (2 * num * n + den) // (2 * den)
    if m < 2:
        raise TooFewNodes(f"threshold {m} below 2 for {n} deployed nodes")
    return m


@dataclass(frozen=True)
class NetworkChainParams:
    """Deployed count N, death threshold M, and starting dead count i.

    M is always derived from N with half-up rounding; passing an explicit
    ``m_threshold`` that disagrees with the derived value is rejected.
    """

    n_deployed: int
    initial_dead: int = 1
    m_threshold: int | None = None

    def __post_init__(self) -> None:
        derived = threshold_from_deployed(self.n_deployed)
        if self.m_threshold is None:
            object.__setattr__(self, "m_threshold", derived)
        elif self.m_threshold != derived:
            raise ConfigInvalid(
                f"m_threshold {self.m_threshold} inconsistent with "
                f"round(4*{self.n_deployed}/5) = {derived}"
            )
        if not 0 <= self.initial_dead <= self.m_threshold:
            raise OutOfRange(
                f"initial_dead {self.initial_dead} outside [0, {self.m_threshold}]"
            )

    @classmethod
    def with_threshold(cls, m: int, initial_dead: int = 1) -> "NetworkChainParams":
        """Params for a desired threshold M, back-solving a compatible N."""
        if m < 2:
            raise OutOfRange(f"threshold must be at least 2, got {m}")
        n = (2 * 5 * m + 4) // (2 * 4)  # round(5m/4) half-up
        return cls(n_deployed=n, initial_dead=initial_dead)


@dataclass(frozen=True)
class ChainStep:
    """One-step move probabilities at a chain state: up (+1), down (-1), stay."""

    up: float
    down: float
    stay: float


def _check_state(i: int, m: int) -> None:
    if m < 2:
        raise OutOfRange(f"threshold must be at least 2, got {m}")
    if not 0 <= i <= m:
        raise OutOfRange(f"state {i} outside [0, {m}]")


def step_probs(i: int, m: int) -> ChainStep:
    """Transition probabilities out of dead-count state i for threshold m.

    up = down = ((m-i)/m) * (i/m), stay = ((m-i)/m)^2 + (i/m)^2; every
    other destination has probability 0. Both boundaries are absorbing:
    at i = 0 and i = m the move terms vanish and stay = 1.
    """
    _check_state(i, m)
    healthy = (m - i) / m
    dead = i / m
    move = healthy * dead
    return ChainStep(up=move, down=move, stay=healthy * healthy + dead * dead)


def beta(i: int, m: int) -> float:
    """Down/up probability ratio at state i, with the convention beta(0) = 1.

    For this symmetric chain the ratio is identically 1; it is still
    computed from the step probabilities so the closed forms downstream
    rest on the definition, not on the simplification.
    """
    _check_state(i, m)
    if i == m:
        raise OutOfRange(f"beta undefined at the absorbing boundary i = m = {m}")
    if i == 0:
        return 1.0
    step = step_probs(i, m)
    return step.down / step.up


def death_probability(i: int, m: int) -> float:
    """Probability of absorption at m (network death) starting from i dead.

    Evaluates sum(beta(k) for k < i) / sum(beta(k) for k < m), which
    collapses to i / m because every ratio is 1. Returns 0 at i = 0 and
    1 at i = m.
    """
    _check_state(i, m)
    betas = [beta(k, m) for k in range(m)]
    return float(sum(betas[:i]) / sum(betas))


def expected_visits_closed(i: int, j: int, m: int) -> float:
    """Closed-form expected visits to state j before absorption, from i.

    Equals m*(m-i)/(m-j) for j <= i and m*i/j for j > i; matches the
    fundamental-matrix entry of the assembled chain. Both states must be
    transient (1 <= i, j <= m-1).
    """
    if m < 2:
        raise OutOfRange(f"threshold must be at least 2, got {m}")
    for s in (i, j):
        if not 1 <= s <= m - 1:
            raise OutOfRange(f"state {s} outside the transient range [1, {m - 1}]")
    if j <= i:
        return m * (m - i) / (m - j)
    return m * i / j


def expected_death_time(i: int, m: int) -> float:
    """Expected chain steps to absorption starting from i dead nodes.

    Closed form: m*(m-i) * sum(1/(m-j) for j in 1..i)
               + m*i * sum(1/j for j in i+1..m-1).
    Zero at both absorbing boundaries. Agrees with the expected-steps
    vector of the fundamental matrix to relative 1e-9 over the tested
    threshold range.
    """
    _check_state(i, m)
    if i == 0 or i == m:
        return 0.0
    below = sum(1.0 / (m - j) for j in range(1, i + 1))
    above = sum(1.0 / j for j in range(i + 1, m))
    return m * (m - i) * below + m * i * above


def build_matrix(params: NetworkChainParams) -> TransitionMatrix:
    """Assemble the (M+1)-state tridiagonal chain for oracle cross-checks.

    States 0 and M are absorbing; interior rows come from ``step_probs``.
    The result passes :func:`sleepwatch.chain.validate`.
    """
    m = params.m_threshold
    probs = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        step = step_probs(i, m)
        probs[i, i] = step.stay
        if i > 0:
            probs[i, i - 1] = step.down
        if i < m:
            probs[i, i + 1] = step.up
    return validate(TransitionMatrix(probs, frozenset({0, m})))
