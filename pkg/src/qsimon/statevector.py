"""Dense statevector simulation of two n-site, d-dimensional registers.

States live in C^(d^2n).  The flattened index is the base-d number whose
most significant digit is site 0; register 1 occupies sites 0..n-1 and
register 2 (the oracle target) sites n..2n-1.  Fixing this convention makes
amplitude dumps directly comparable across runs.

Gates are applied as d x d kernels over strided tensor slices rather than
by building the full d^2n x d^2n matrix, so one site application costs
O(d^2n * d) work.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .encoding import digit_matrix, digits_to_text, flat_powers
from .errors import CapacityError, NormalizationError
from .zmod import ZVec

if TYPE_CHECKING:  # pragma: no cover
    from .oracle import PromiseOracle

DEFAULT_MAX_AMPLITUDES = 1 << 26
MAX_AMPLITUDES_ENV = "QSIMON_MAX_AMPLITUDES"

NORM_TOLERANCE = 1e-6
PRUNE_TOLERANCE = 1e-12


def resolve_amplitude_budget(max_amplitudes: int | None = None) -> int:
    """Explicit argument wins, then the QSIMON_MAX_AMPLITUDES env var, then 2^26."""
    if max_amplitudes is not None:
        return int(max_amplitudes)
    env = os.environ.get(MAX_AMPLITUDES_ENV)
    if env:
        return int(env)
    return DEFAULT_MAX_AMPLITUDES


@dataclass
class PureState:
    """Normalized amplitudes over two n-site qudit registers."""

    d: int
    n: int
    amps: np.ndarray  # complex128, length d**(2n)

    @property
    def num_sites(self) -> int:
        return 2 * self.n

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((self.d,) * self.num_sites)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


@dataclass(frozen=True)
class MeasurementRecord:
    register_index: int  # 1 or 2
    outcome: ZVec
    probability: float


def zero_state(d: int, n: int, max_amplitudes: int | None = None) -> PureState:
    """|0...0>|0...0> on two n-site registers, subject to the memory budget."""
    if d < 2 or n < 1:
        raise ValueError(f"need d >= 2 and n >= 1, got d={d}, n={n}")
    size = d ** (2 * n)
    budget = resolve_amplitude_budget(max_amplitudes)
    if size > budget:
        raise CapacityError(
            f"statevector needs d^(2n) = {size} amplitudes, budget is {budget}",
            requested=size,
            budget=budget,
        )
    amps = np.zeros(size, dtype=np.complex128)
    amps[0] = 1.0
    return PureState(d, n, amps)


def qft_matrix(d: int, inverse: bool = False) -> np.ndarray:
    """The d x d Fourier kernel with entries omega^(jk)/sqrt(d), omega = e^(2 pi i / d)."""
    j = np.arange(d)
    mat = np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)
    return mat.conj() if inverse else mat


def _check_site(state: PureState, site_index: int) -> None:
    if not (0 <= site_index < state.num_sites):
        raise IndexError(f"site index {site_index} out of range [0, {state.num_sites})")


def _register_sites(state: PureState, register_index: int) -> range:
    if register_index == 1:
        return range(0, state.n)
    if register_index == 2:
        return range(state.n, 2 * state.n)
    raise IndexError(f"register index must be 1 or 2, got {register_index}")


def apply_x_site(state: PureState, site_index: int) -> PureState:
    """Generalized shift |i> -> |i + 1 mod d> on one site (a cyclic relabeling)."""
    _check_site(state, site_index)
    rolled = np.roll(state.tensor(), 1, axis=site_index)
    return PureState(state.d, state.n, np.ascontiguousarray(rolled).reshape(-1))


def _apply_site_kernel(state: PureState, kernel: np.ndarray, site_index: int) -> PureState:
    moved = np.tensordot(kernel, state.tensor(), axes=([1], [site_index]))
    moved = np.moveaxis(moved, 0, site_index)
    return PureState(state.d, state.n, np.ascontiguousarray(moved).reshape(-1))


def apply_qft_site(state: PureState, site_index: int, inverse: bool = False) -> PureState:
    """Fourier kernel on one site; at d = 2 this is the Hadamard."""
    _check_site(state, site_index)
    return _apply_site_kernel(state, qft_matrix(state.d, inverse), site_index)


def apply_qft_register(state: PureState, register_index: int, inverse: bool = False) -> PureState:
    """Sitewise Fourier transform over all n sites of one register."""
    kernel = qft_matrix(state.d, inverse)
    for site in _register_sites(state, register_index):
        state = _apply_site_kernel(state, kernel, site)
    return state


def layered_hadamard_matrix(d: int) -> np.ndarray:
    """Hadamard on each of the l packed qubits of a 2^l-dimensional site.

    Entries are (-1)^popcount(j & k) / sqrt(d): the character matrix of
    (Z_2)^l under the binary-digit packing.  This is the transform the
    qubit-native layered construction applies in place of the Fourier
    kernel (it is H itself at d = 2).
    """
    if d & (d - 1):
        raise ValueError(f"layered Hadamard needs d a power of two, got {d}")
    kernel = np.empty((d, d), dtype=np.complex128)
    for j in range(d):
        for k in range(d):
            kernel[j, k] = -1.0 if bin(j & k).count("1") % 2 else 1.0
    return kernel / np.sqrt(d)


def apply_layered_hadamard_site(state: PureState, site_index: int) -> PureState:
    _check_site(state, site_index)
    return _apply_site_kernel(state, layered_hadamard_matrix(state.d), site_index)


def apply_layered_hadamard_register(state: PureState, register_index: int) -> PureState:
    kernel = layered_hadamard_matrix(state.d)
    for site in _register_sites(state, register_index):
        state = _apply_site_kernel(state, kernel, site)
    return state


def apply_oracle(state: PureState, f: "PromiseOracle") -> PureState:
    """Basis permutation |x>|a> -> |x>|a + f(x)> with componentwise addition mod d.

    On a zero ancilla this is |x>|0> -> |x>|f(x)>; modular addition into
    the target register is the standard unitary extension and reduces to
    XOR at d = 2.
    """
    if f.d != state.d or f.n != state.n:
        raise ValueError(
            f"oracle over Z_{f.d}^{f.n} does not match state with d={state.d}, n={state.n}"
        )
    d, n = state.d, state.n
    reg_size = d**n
    psi = state.amps.reshape(reg_size, reg_size)
    digits = digit_matrix(d, n)
    powers = flat_powers(d, n)
    f_digits = digits[np.asarray(f.table)]
    out = np.empty_like(psi)
    for x in range(reg_size):
        cols = ((digits + f_digits[x]) % d) @ powers
        out[x, cols] = psi[x]
    return PureState(d, n, out.reshape(-1))


def _marginal_probabilities(state: PureState, register_index: int) -> np.ndarray:
    reg_size = state.d**state.n
    probs = np.abs(state.amps.reshape(reg_size, reg_size)) ** 2
    axis = 1 if register_index == 1 else 0
    _register_sites(state, register_index)  # validates the index
    return probs.sum(axis=axis)


def measure_register(
    state: PureState, register_index: int, rng: np.random.Generator
) -> tuple[MeasurementRecord, PureState]:
    """Projective measurement of one register in the computational basis.

    Samples an outcome with its Born probability from the supplied random
    source and returns the renormalized post-measurement state.
    """
    marg = _marginal_probabilities(state, register_index)
    total = marg.sum()
    if abs(total - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(f"state norm^2 = {total:.3e} deviates from 1 beyond {NORM_TOLERANCE}")
    outcome = int(rng.choice(marg.size, p=marg / total))
    prob = float(marg[outcome])

    d, n = state.d, state.n
    reg_size = d**n
    psi = state.amps.reshape(reg_size, reg_size)
    collapsed = np.zeros_like(psi)
    if register_index == 1:
        collapsed[outcome, :] = psi[outcome, :] / np.sqrt(prob)
    else:
        collapsed[:, outcome] = psi[:, outcome] / np.sqrt(prob)
    record = MeasurementRecord(register_index, ZVec.from_index(outcome, d, n), prob)
    return record, PureState(d, n, collapsed.reshape(-1))


def exact_distribution(
    state: PureState, register_index: int, prune: float = PRUNE_TOLERANCE
) -> dict[ZVec, float]:
    """Marginal Born distribution of one register, pruning probabilities below 1e-12."""
    marg = _marginal_probabilities(state, register_index)
    d, n = state.d, state.n
    return {
        ZVec.from_index(i, d, n): float(p)
        for i, p in enumerate(marg)
        if p > prune
    }


# -- debug dumps --------------------------------------------------------------


def state_to_json(state: PureState) -> str:
    payload = {
        "d": state.d,
        "n": state.n,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amps],
    }
    return json.dumps(payload)


def write_distribution_csv(dist: dict[ZVec, float], path) -> None:
    rows = sorted(dist.items(), key=lambda kv: kv[0].to_index())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["outcome_base_d", "probability"])
        for outcome, prob in rows:
            writer.writerow([digits_to_text(outcome.entries, outcome.d), repr(prob)])
