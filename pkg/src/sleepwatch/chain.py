"""Generic absorbing Markov chain engine.

Validates discrete-time chains, extracts the canonical [Q R; 0 I] form,
and computes the standard absorption quantities from the fundamental
matrix N = (I - Q)^-1:

- N[i, j] is the expected number of visits to transient state j before
  absorption, starting from transient state i;
- N @ R gives the absorption probabilities into each absorbing state;
- N @ 1 gives the expected number of steps to absorption.

The fundamental matrix is computed with a direct dense solve (LAPACK
partial-pivot factorization). Chains in this toolkit have at most a few
hundred states, so exactness and simplicity beat sparse machinery.

This module is the brute-force oracle against which the closed forms in
:mod:`sleepwatch.network` are checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadAbsorbingRow,
    NoAbsorptionPath,
    NotStochastic,
    NotTransient,
    SingularSystem,
)

ROW_SUM_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic transition matrix with declared absorbing states.

    ``probs[i, j]`` is the one-step probability of moving from state i to
    state j. States listed in ``absorbing`` must carry identity rows.
    """

    probs: np.ndarray
    absorbing: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", _readonly(self.probs))
        object.__setattr__(self, "absorbing", frozenset(int(a) for a in self.absorbing))

    @property
    def n_states(self) -> int:
        return self.probs.shape[0]

    @property
    def transient(self) -> list[int]:
        return [s for s in range(self.n_states) if s not in self.absorbing]


@dataclass(frozen=True)
class CanonicalDecomposition:
    """Transient/absorbing split of a validated chain.

    Reassembling ``[q r; 0 I]`` under ``transient_order`` and
    ``absorbing_order`` reproduces the original matrix exactly. Both
    orderings are ascending original state index, for reproducibility.
    """

    transient_order: tuple[int, ...]
    absorbing_order: tuple[int, ...]
    q: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", _readonly(self.q))
        object.__setattr__(self, "r", _readonly(self.r))


@dataclass(frozen=True)
class AbsorptionAnalysis:
    """Fundamental-matrix quantities of an absorbing chain.

    ``fundamental[i, j]`` is the expected visit count to transient state
    ``transient_order[j]`` starting from ``transient_order[i]``;
    ``absorb_prob`` rows are distributions over ``absorbing_order``;
    ``expected_steps`` is the expected time to absorption per start state.
    """

    transient_order: tuple[int, ...]
    absorbing_order: tuple[int, ...]
    fundamental: np.ndarray
    absorb_prob: np.ndarray
    expected_steps: np.ndarray

    def __post_init__(self) -> None:
        for name in ("fundamental", "absorb_prob", "expected_steps"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))


def validate(matrix: TransitionMatrix) -> TransitionMatrix:
    """Check stochasticity, absorbing rows, and absorption reachability.

    Returns the matrix unchanged when every row sums to 1 within
    ``ROW_SUM_TOL``, every declared absorbing state has an identity row,
    and every transient state can reach some absorbing state through
    nonzero entries (structural graph search, independent of
    conditioning).

    Raises:
        NotStochastic: a row sum deviates by more than ``ROW_SUM_TOL``,
            or an entry lies outside [0, 1].
        BadAbsorbingRow: an absorbing state's row is not the identity row.
        NoAbsorptionPath: some transient state cannot reach absorption,
            so the fundamental matrix would diverge.
    """
    p = matrix.probs
    n = matrix.n_states
    if p.ndim != 2 or p.shape[0] != p.shape[1] or n < 1:
        raise NotStochastic(f"transition matrix must be square and non-empty, got shape {p.shape}")
    if np.any(p < 0.0) or np.any(p > 1.0 + ROW_SUM_TOL):
        raise NotStochastic("transition probabilities must lie in [0, 1]")
    row_sums = p.sum(axis=1)
    bad = np.flatnonzero(np.abs(row_sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        raise NotStochastic(f"row {bad[0]} sums to {row_sums[bad[0]]!r}, expected 1 within {ROW_SUM_TOL}")
    for a in sorted(matrix.absorbing):
        if a < 0 or a >= n:
            raise BadAbsorbingRow(f"absorbing state {a} out of range for {n} states")
        expected = np.zeros(n)
        expected[a] = 1.0
        if np.max(np.abs(p[a] - expected)) > ROW_SUM_TOL:
            raise BadAbsorbingRow(f"state {a} declared absorbing but its row is not the identity row")

    # Backward reachability from the absorbing set over nonzero entries.
    reached = set(matrix.absorbing)
    frontier = list(matrix.absorbing)
    incoming = [np.flatnonzero(p[:, j] > 0.0) for j in range(n)]
    while frontier:
        j = frontier.pop()
        for i in incoming[j]:
            i = int(i)
            if i not in reached:
                reached.add(i)
                frontier.append(i)
    stranded = [s for s in matrix.transient if s not in reached]
    if stranded:
        raise NoAbsorptionPath(f"transient state(s) {stranded} cannot reach any absorbing state")
    return matrix


def canonicalize(matrix: TransitionMatrix) -> CanonicalDecomposition:
    """Extract Q (transient to transient) and R (transient to absorbing).

    State ordering is ascending original index in both blocks, so repeated
    calls produce identical matrices.
    """
    transient = matrix.transient
    absorbing = sorted(matrix.absorbing)
    q = matrix.probs[np.ix_(transient, transient)] if transient else np.zeros((0, 0))
    r = matrix.probs[np.ix_(transient, absorbing)] if transient else np.zeros((0, len(absorbing)))
    return CanonicalDecomposition(tuple(transient), tuple(absorbing), q, r)


def analyze(decomp: CanonicalDecomposition) -> AbsorptionAnalysis:
    """Compute the fundamental matrix and the absorption quantities.

    Solves (I - Q) N = I directly; ``absorb_prob = N @ R`` and
    ``expected_steps = N @ 1``.

    Raises:
        SingularSystem: I - Q is numerically singular. This signals a
            chain that defeats the reachability check within the row-sum
            tolerance (e.g. an escape probability that underflows).
    """
    t = len(decomp.transient_order)
    if t == 0:
        empty = np.zeros((0, 0))
        return AbsorptionAnalysis(
            decomp.transient_order,
            decomp.absorbing_order,
            empty,
            np.zeros((0, len(decomp.absorbing_order))),
            np.zeros(0),
        )
    system = np.eye(t) - decomp.q
    try:
        fundamental = np.linalg.solve(system, np.eye(t))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"I - Q is singular for transient states {decomp.transient_order}") from exc
    return AbsorptionAnalysis(
        decomp.transient_order,
        decomp.absorbing_order,
        fundamental,
        fundamental @ decomp.r,
        fundamental.sum(axis=1),
    )


def n_step_matrix(matrix: TransitionMatrix, n: int) -> np.ndarray:
    """Return the n-step transition matrix P^n (identity for n = 0).

    Entry [s, d] is P(X_n = d | X_0 = s). Uses exponentiation by
    squaring, which keeps the large-n decay checks cheap.
    """
    if n < 0:
        raise ValueError("step count must be non-negative")
    return np.linalg.matrix_power(matrix.probs, n)


def expected_visits(analysis: AbsorptionAnalysis, from_state: int, to_state: int) -> float:
    """Expected visits to ``to_state`` before absorption, starting at ``from_state``.

    Both states must be transient; indices are original chain states.
    """
    order = analysis.transient_order
    for s in (from_state, to_state):
        if s not in order:
            raise NotTransient(f"state {s} is not transient (transient states: {order})")
    return float(analysis.fundamental[order.index(from_state), order.index(to_state)])


def absorption(matrix: TransitionMatrix) -> AbsorptionAnalysis:
    """Validate, canonicalize and analyze in one call."""
    return analyze(canonicalize(validate(matrix)))
