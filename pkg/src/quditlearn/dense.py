"""Dense state-vector engine over registers of equal prime dimension q.

States are complex amplitude vectors of length q**m for m registers, built
directly from their basis expansion (no gate synthesis).  Register 0 is the
most significant index of the flat vector, matching numpy's C order, so
``np.unravel_index`` yields register values in register order.

Operations are functional: each returns a fresh state and re-checks the
norm, so a drifting amplitude vector is caught at the operation where it
appears.  Measurements sample an outcome but do not produce a collapsed
residual state; every consumer here discards a sample after its final
measurement.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .field import FieldParams

MAX_AMPLITUDES = 2**22
NORM_TOL = 1e-9


class StateError(ValueError):
    """Ill-formed state or unsupported state operation."""


_qft_cache: dict[int, np.ndarray] = {}


def qft_matrix(q: int) -> np.ndarray:
    """The q x q unitary with entries omega^(j*k) / sqrt(q)."""
    mat = _qft_cache.get(q)
    if mat is None:
        idx = np.arange(q, dtype=np.int64)
        jk = np.multiply.outer(idx, idx) % q  # reduce before exponentiating
        mat = np.exp(2j * np.pi * jk / q) / np.sqrt(q)
        _qft_cache[q] = mat
    return mat


class DenseState:
    """Unit vector over m registers of dimension q each."""

    __slots__ = ("fp", "num_registers", "amps")

    def __init__(self, fp: FieldParams, num_registers: int, amps: np.ndarray):
        if num_registers < 1:
            raise StateError("at least one register required")
        size = fp.q**num_registers
        if size > MAX_AMPLITUDES:
            raise StateError(
                f"dense state of {size} amplitudes exceeds the 2**22 cap; use the analytic engine"
            )
        amps = np.ascontiguousarray(amps, dtype=np.complex128).reshape(-1)
        if amps.size != size:
            raise StateError(f"expected {size} amplitudes, got {amps.size}")
        self.fp = fp
        self.num_registers = num_registers
        self.amps = amps
        self._require_normalized()

    def _require_normalized(self) -> None:
        norm2 = float(np.vdot(self.amps, self.amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise StateError(f"norm not preserved: sum |amp|^2 = {norm2!r}")

    def _check_register(self, register: int) -> None:
        if not 0 <= register < self.num_registers:
            raise StateError(f"register index {register} out of range [0, {self.num_registers})")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.fp.q,) * self.num_registers

    def _grid(self) -> np.ndarray:
        return self.amps.reshape(self.shape)

    @classmethod
    def from_basis_terms(
        cls,
        terms: Iterable[tuple[Sequence[int], complex]],
        fp: FieldParams,
    ) -> "DenseState":
        """Normalized superposition of the given (register values, amplitude) terms."""
        terms = list(terms)
        if not terms:
            raise StateError("at least one basis term required")
        m = len(terms[0][0])
        shape = (fp.q,) * m
        amps = np.zeros(fp.q**m, dtype=np.complex128)
        seen: set[tuple[int, ...]] = set()
        for values, amplitude in terms:
            if len(values) != m:
                raise StateError("all basis terms must address the same registers")
            key = tuple(int(x) % fp.q for x in values)
            if key in seen:
                raise StateError(f"duplicate basis term {key}")
            seen.add(key)
            amps[np.ravel_multi_index(key, shape)] = amplitude
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise StateError("amplitudes must not all be zero")
        return cls(fp, m, amps / norm)

    def probabilities(self) -> np.ndarray:
        return self.amps.real**2 + self.amps.imag**2

    def apply_qft(self, register: int) -> "DenseState":
        """|j> -> (1/sqrt(q)) sum_k omega^(jk) |k> on one register."""
        self._check_register(register)
        out = np.tensordot(qft_matrix(self.fp.q), self._grid(), axes=([1], [register]))
        out = np.moveaxis(out, 0, register)
        return DenseState(self.fp, self.num_registers, out)

    def apply_inverse_qft(self, register: int) -> "DenseState":
        self._check_register(register)
        out = np.tensordot(qft_matrix(self.fp.q).conj(), self._grid(), axes=([1], [register]))
        out = np.moveaxis(out, 0, register)
        return DenseState(self.fp, self.num_registers, out)

    def apply_qft_all(self) -> "DenseState":
        """QFT on every register, as one composite operation.

        Each pass transforms the leading register and cycles it to the last
        axis, so after num_registers passes all registers are transformed
        and the ordering is restored.
        """
        q = self.fp.q
        f = qft_matrix(q)
        amps = self.amps
        rest = amps.size // q
        for _ in range(self.num_registers):
            amps = np.ascontiguousarray((f @ amps.reshape(q, rest)).T)
        return DenseState(self.fp, self.num_registers, amps)

    def apply_add_multiple(self, source: int, target: int, factor: int) -> "DenseState":
        """Basis permutation |.., a_src, .., y_tgt, ..> -> |.., a_src, .., y + factor*a_src, ..>."""
        self._check_register(source)
        self._check_register(target)
        if source == target:
            raise StateError("source and target registers must differ")
        q = self.fp.q
        factor %= q
        grid = np.moveaxis(self._grid(), (source, target), (0, 1)).reshape(q, q, -1)
        out = np.empty_like(grid)
        for a in range(q):
            out[a] = np.roll(grid[a], (factor * a) % q, axis=0)
        out = np.moveaxis(out.reshape((q, q) + self.shape[2:]), (0, 1), (source, target))
        return DenseState(self.fp, self.num_registers, out)

    def register_marginal(self, register: int) -> np.ndarray:
        """Exact outcome distribution of one register."""
        self._check_register(register)
        marginal = self.probabilities().reshape(self.shape)
        axes = tuple(i for i in range(self.num_registers) if i != register)
        if axes:
            marginal = marginal.sum(axis=axes)
        return marginal

    def measure_register(self, register: int, rng: np.random.Generator) -> int:
        """Sample one register's outcome from its marginal; the state is then discarded."""
        marginal = self.register_marginal(register)
        return _sample_index(marginal, rng)

    def measure_all(self, rng: np.random.Generator) -> tuple[int, ...]:
        """Sample a full computational-basis outcome from |amplitude|^2."""
        idx = _sample_index(self.probabilities(), rng)
        return tuple(int(x) for x in np.unravel_index(idx, self.shape))


def _sample_index(weights: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, weights.size - 1)
