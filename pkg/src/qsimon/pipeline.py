"""End-to-end hidden-shift runs and experiment batches.

One run executes, in order: zero state, transform on register 1, oracle,
measurement of register 2, transform on register 1 again, measurement of
register 1.  Measuring the ancilla before the second transform (rather
than deferring it) leaves identical register-1 statistics and keeps the
intermediate states small to interpret, so that order is used throughout.

The transform depends on the oracle family.  Native cyclic oracles get
the d-dimensional Fourier kernel; the geometric-sum cancellation then
confines outcomes exactly to S-perp = {y : y . s = 0 mod d}.  Layered
oracles (d = 2^l built from a binary oracle) get the layerwise Hadamard
instead, which is the transform their qubit-native construction actually
implements: each of the l binary layers runs an independent qubit Simon
circuit, so every unpacked layer of every sample is orthogonal to the
binary shift mod 2.  Applying the true Fourier kernel to a layered oracle
would NOT confine samples to the layer-orthogonal set (digit carries
break the cancellation), so that combination is deliberately not used.

Shift recovery is exact linear algebra: samples accumulate until they
generate the full orthogonal subgroup (size d^(n-1), the precise meaning
of "n-1 independent constraints" for composite d), then the annihilator
of the samples is reduced to a canonical generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analytics
from .errors import (
    IncompleteConstraintsError,
    InconsistentConstraintsError,
    TrivialSubgroupError,
)
from .oracle import LayeredStructure, PromiseOracle, unpack
from .statevector import (
    PureState,
    apply_layered_hadamard_register,
    apply_oracle,
    apply_qft_register,
    measure_register,
    zero_state,
)
from .zmod import (
    ConstraintSet,
    NotCyclicReport,
    ZVec,
    annihilator,
    canonical_generator,
    extend_constraints,
    inner_product,
    order_of,
)


@dataclass(frozen=True)
class RunResult:
    """One circuit execution: the register-1 sample and the ancilla outcome.

    ``in_orthogonal`` validates the sample against the oracle's hidden
    metadata (y . s = 0 mod d for cyclic oracles, all layers orthogonal
    mod 2 for layered ones); it exists for validation only.
    """

    sample: ZVec
    ancilla: ZVec
    in_orthogonal: bool


@dataclass(frozen=True)
class CollectionOutcome:
    constraints: ConstraintSet
    runs_used: int
    samples: tuple[ZVec, ...]


@dataclass(frozen=True)
class ExperimentSummary:
    trials: int
    histogram: dict[ZVec, int]
    support_fraction: float
    runs_used: int | None
    recovered: ZVec | None
    failure: str | None


class PreparedCircuit:
    """The deterministic prefix of a run, computed once per oracle.

    State preparation, the first register transform, and the oracle call
    do not depend on any randomness, so repeated trials reuse the
    resulting pre-measurement state.
    """

    def __init__(self, f: PromiseOracle, max_amplitudes: int | None = None):
        self.oracle = f
        self.layered = isinstance(f.structure, LayeredStructure)
        transform = apply_layered_hadamard_register if self.layered else apply_qft_register
        state = zero_state(f.d, f.n, max_amplitudes)
        state = transform(state, 1)
        self.pre_measurement = apply_oracle(state, f)
        self._transform = transform

    def trial(self, rng: np.random.Generator) -> RunResult:
        anc, state = measure_register(self.pre_measurement, 2, rng)
        state = self._transform(state, 1)
        rec, _ = measure_register(state, 1, rng)
        return RunResult(rec.outcome, anc.outcome,
                         sample_is_orthogonal(self.oracle, rec.outcome))

    def final_state(self, rng: np.random.Generator) -> PureState:
        """State just before the register-1 measurement (ancilla collapsed)."""
        _, state = measure_register(self.pre_measurement, 2, rng)
        return self._transform(state, 1)


def sample_is_orthogonal(f: PromiseOracle, y: ZVec) -> bool:
    """Check a sample against the oracle's hidden structure."""
    s = f.structure.s
    if isinstance(f.structure, LayeredStructure):
        return all(
            inner_product(layer, s) == 0
            for layer in unpack(y, f.structure.layers)
        )
    return inner_product(y, s) == 0


def run_once(f: PromiseOracle, rng: np.random.Generator,
             max_amplitudes: int | None = None) -> RunResult:
    """Execute the full five-step circuit once and return the sample."""
    return PreparedCircuit(f, max_amplitudes).trial(rng)


def constraint_target_size(f: PromiseOracle) -> tuple[int, int, int]:
    """(modulus, length, target subgroup size) for the oracle's constraint ring.

    Cyclic oracles accumulate d-ary constraints until they span S-perp of
    size d^(n-1).  Layered oracles pool unpacked binary layers, so the
    ring is Z_2 and the target is 2^(n-1).
    """
    if isinstance(f.structure, LayeredStructure):
        return 2, f.n, 2 ** (f.n - 1)
    return f.d, f.n, f.d ** (f.n - 1)


def default_max_runs(d: int, n: int, eps: float = 1e-3) -> int:
    """Generous run budget: 10 * (n + repetitions needed for failure eps)."""
    return 10 * (n + analytics.k_required(d, eps, n=max(n, 2)))


def _constraint_vectors(f: PromiseOracle, result: RunResult) -> list[ZVec]:
    if isinstance(f.structure, LayeredStructure):
        return unpack(result.sample, f.structure.layers)
    return [result.sample]


def collect_until_constraints(
    f: PromiseOracle,
    rng: np.random.Generator,
    max_runs: int | None = None,
    max_amplitudes: int | None = None,
) -> CollectionOutcome:
    """Repeat runs until the constraints generate the full orthogonal subgroup.

    Returns the constraint set, the number of runs consumed, and the raw
    register-1 samples.  Raises IncompleteConstraintsError carrying the
    partial collection if max_runs is exhausted first.
    """
    if max_runs is None:
        max_runs = default_max_runs(f.d, f.n)
    if max_runs < 1:
        raise ValueError(f"max_runs must be >= 1, got {max_runs}")
    ring_d, n, target = constraint_target_size(f)
    cs = ConstraintSet.empty(ring_d, n)
    samples: list[ZVec] = []
    if cs.submodule_size >= target:  # n = 1 needs zero constraints
        return CollectionOutcome(cs, 0, ())
    prepared = PreparedCircuit(f, max_amplitudes)
    for run in range(1, max_runs + 1):
        result = prepared.trial(rng)
        samples.append(result.sample)
        for vec in _constraint_vectors(f, result):
            cs, _ = extend_constraints(cs, vec)
        if cs.submodule_size >= target:
            return CollectionOutcome(cs, run, tuple(samples))
    partial = CollectionOutcome(cs, max_runs, tuple(samples))
    raise IncompleteConstraintsError(
        f"constraints span {cs.submodule_size} of {target} after {max_runs} runs",
        partial=partial,
        runs_used=max_runs,
    )


def recover_shift_native(cs: ConstraintSet) -> ZVec:
    """Reduce a complete constraint set to the canonical hidden shift.

    The annihilator of samples spanning S-perp is the cyclic group
    generated by the shift; the returned vector generates that group.
    """
    target = cs.d ** (cs.n - 1)
    if cs.submodule_size != target:
        raise IncompleteConstraintsError(
            f"constraints span {cs.submodule_size} of {target}",
            partial=CollectionOutcome(cs, 0, cs.samples),
        )
    gens = annihilator(cs.samples, d=cs.d, n=cs.n)
    try:
        result = canonical_generator(gens)
    except TrivialSubgroupError as exc:
        raise InconsistentConstraintsError(
            "annihilator of the constraints is trivial; no shift is consistent with them"
        ) from exc
    if isinstance(result, NotCyclicReport):
        raise InconsistentConstraintsError(
            f"annihilator is not cyclic (invariant factors {result.invariant_factors})"
        )
    if order_of(result) != cs.d:
        raise InconsistentConstraintsError(
            f"annihilator generator has order {order_of(result)}, expected {cs.d}"
        )
    return result


def recover_shift_lifted(samples, layers: int) -> ZVec:
    """Recover the binary shift from samples taken on a layered oracle.

    Every sample unpacks into l binary layers, each orthogonal to the
    shift mod 2; pooling all layers gives a binary constraint system whose
    annihilator is {0, s}.
    """
    samples = list(samples)
    if not samples:
        raise IncompleteConstraintsError("no samples supplied", partial=None)
    n = len(samples[0])
    cs = ConstraintSet.empty(2, n)
    for y in samples:
        for layer in unpack(y, layers):
            cs, _ = extend_constraints(cs, layer)
    if cs.submodule_size != 2 ** (n - 1):
        raise IncompleteConstraintsError(
            f"pooled binary constraints span {cs.submodule_size} of {2 ** (n - 1)}",
            partial=CollectionOutcome(cs, len(samples), tuple(samples)),
        )
    return recover_shift_native(cs)


def recover_shift(f: PromiseOracle, outcome: CollectionOutcome) -> ZVec:
    """Dispatch recovery on the oracle family."""
    if isinstance(f.structure, LayeredStructure):
        return recover_shift_lifted(outcome.samples, f.structure.layers)
    return recover_shift_native(outcome.constraints)


def run_experiment(
    f: PromiseOracle,
    trials: int,
    rng: np.random.Generator,
    solve: bool = True,
    max_runs: int | None = None,
    max_amplitudes: int | None = None,
) -> ExperimentSummary:
    """Histogram register-1 samples over independent trials, then solve once.

    Each trial owns a deterministically derived child stream (stream index
    = trial index), so results are identical whether trials run
    sequentially or in parallel.  The support fraction counts samples
    orthogonal to the hidden shift; for valid oracles it is exactly 1.0.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    prepared = PreparedCircuit(f, max_amplitudes)
    streams = rng.spawn(trials + 1)
    histogram: dict[ZVec, int] = {}
    orthogonal = 0
    for t in range(trials):
        result = prepared.trial(streams[t])
        histogram[result.sample] = histogram.get(result.sample, 0) + 1
        orthogonal += int(result.in_orthogonal)

    runs_used = None
    recovered = None
    failure = None
    if solve:
        try:
            outcome = collect_until_constraints(f, streams[trials], max_runs, max_amplitudes)
            runs_used = outcome.runs_used
            recovered = recover_shift(f, outcome)
        except IncompleteConstraintsError as exc:
            runs_used = exc.runs_used or None
            failure = str(exc)
    return ExperimentSummary(
        trials=trials,
        histogram=histogram,
        support_fraction=orthogonal / trials,
        runs_used=runs_used,
        recovered=recovered,
        failure=failure,
    )


def classical_collision_search(
    f: PromiseOracle,
    rng: np.random.Generator,
    max_queries: int,
) -> tuple[ZVec | None, int]:
    """Query distinct random inputs until two share an output.

    Returns (difference of the colliding inputs, query count); for a
    native oracle the difference is a nonzero multiple of the shift.
    Exists only to exhibit the d^(n/2)-scale classical query cost next to
    the quantum pipeline's Theta(n) runs.
    """
    if max_queries < 2:
        raise ValueError(f"max_queries must be >= 2, got {max_queries}")
    size = f.d**f.n
    order = rng.permutation(size)
    seen: dict[int, int] = {}
    queries = 0
    for x_flat in order[:max_queries]:
        x_flat = int(x_flat)
        queries += 1
        out = int(f.table[x_flat])
        if out in seen:
            x = ZVec.from_index(seen[out], f.d, f.n)
            y = ZVec.from_index(x_flat, f.d, f.n)
            return y.sub(x), queries
        seen[out] = x_flat
    return None, max_queries
