"""Noise models, sample specifications and the closed-form outcome engine.

A sample over F_q^n is the superposition (1/sqrt(v)) sum_{a in V} |a>|a.s + e_a>
on n+1 registers.  After a QFT on every register, the probability of landing on
a "good" outcome (-j*s mod q, j*) depends on the realized errors only through
their value histogram:

    P(good at j*) = |sum_b c_b omega^(b j*)|^2 / (q^(n+1) v),

where c_b counts the elements of V with error b.  ``outcome_distribution``
evaluates this in O(q * support) time without touching the q^(n+1) amplitude
vector; the dense engine provides the independent cross-check at small sizes.

The abstention probability (last register measuring 0) is 1/q exactly, by
Parseval over the j* = 0 slice, for any subset and any error assignment.

Sample specs serialize to JSON with the documented keys
q, n, s, subset, v, noise, errors, seed (see ``spec_to_json``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .dense import DenseState, StateError
from .field import FieldParams, ParameterError

EXPLICIT_ERROR_LIMIT = 10**6  # above this, errors are stored as a histogram
ENUMERABLE_LIMIT = 10**6  # largest q^n for which index space is materialized

_NOISE_KINDS = ("none", "bounded-uniform", "gaussian", "bernoulli", "global-shift")


@dataclass(frozen=True)
class NoiseModel:
    """Error distribution attached to a sample.

    Values are centered representatives in [-k, k] (bits {0,1} for the q=2
    Bernoulli flip).  A global shift draws one value shared by every element
    of the superposition; all other kinds are i.i.d. per element.
    """

    kind: str
    k: int = 0
    sigma: float = 0.0
    eta: float = 0.0
    inner: "NoiseModel | None" = None

    def __post_init__(self) -> None:
        if self.kind not in _NOISE_KINDS:
            raise ParameterError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("bounded-uniform", "gaussian") and self.k < 0:
            raise ParameterError("noise magnitude bound k must be >= 0")
        if self.kind == "gaussian" and not self.sigma > 0.0:
            raise ParameterError("gaussian noise needs sigma > 0")
        if self.kind == "bernoulli" and not 0.0 <= self.eta < 0.5:
            raise ParameterError(f"flip probability must lie in [0, 1/2), got {self.eta}")
        if self.kind == "global-shift":
            if self.inner is None or self.inner.kind not in ("none", "bounded-uniform", "gaussian"):
                raise ParameterError("global shift needs an inner centered distribution")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls("none")

    @classmethod
    def bounded_uniform(cls, k: int) -> "NoiseModel":
        return cls("bounded-uniform", k=int(k))

    @classmethod
    def gaussian(cls, sigma: float, k: int) -> "NoiseModel":
        return cls("gaussian", k=int(k), sigma=float(sigma))

    @classmethod
    def bernoulli(cls, eta: float) -> "NoiseModel":
        return cls("bernoulli", eta=float(eta))

    @classmethod
    def global_shift(cls, inner: "NoiseModel") -> "NoiseModel":
        return cls("global-shift", inner=inner)

    @property
    def is_global(self) -> bool:
        return self.kind == "global-shift"

    def magnitude_bound(self) -> int:
        """Largest centered magnitude the model can emit."""
        if self.kind == "none":
            return 0
        if self.kind == "bernoulli":
            return 1
        if self.kind == "global-shift":
            return self.inner.magnitude_bound()
        return self.k

    def validate_for(self, q: int) -> None:
        if self.kind in ("bounded-uniform", "gaussian") and 2 * self.k + 1 > q:
            raise ParameterError(f"noise support 2k+1 = {2 * self.k + 1} exceeds q = {q}")
        if self.kind == "bernoulli" and q != 2:
            raise ParameterError("Bernoulli flip noise is defined only for q = 2")
        if self.kind == "global-shift":
            self.inner.validate_for(q)

    def distribution(self, q: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
        """Support values and probabilities of a single error draw."""
        return _distribution(self, q)[:2]

    def __str__(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "bounded-uniform":
            return f"bounded-uniform(k={self.k})"
        if self.kind == "gaussian":
            return f"gaussian(sigma={self.sigma:g},k={self.k})"
        if self.kind == "bernoulli":
            return f"bernoulli(eta={self.eta:g})"
        return f"global-shift({self.inner})"


@lru_cache(maxsize=256)
def _distribution(noise: NoiseModel, q: int) -> tuple[tuple[int, ...], tuple[float, ...], np.ndarray, np.ndarray]:
    """(values, weights, values array, cdf) for a noise model at modulus q."""
    noise.validate_for(q)
    if noise.kind == "none":
        values, weights = (0,), (1.0,)
    elif noise.kind == "bounded-uniform":
        values = tuple(range(-noise.k, noise.k + 1))
        weights = (1.0 / len(values),) * len(values)
    elif noise.kind == "gaussian":
        values = tuple(range(-noise.k, noise.k + 1))
        raw = [math.exp(-(b * b) / (2.0 * noise.sigma * noise.sigma)) for b in values]
        total = math.fsum(raw)
        weights = tuple(w / total for w in raw)
        assert abs(math.fsum(weights) - 1.0) <= 1e-12
    elif noise.kind == "bernoulli":
        values, weights = (0, 1), (1.0 - noise.eta, noise.eta)
    else:
        values, weights = _distribution(noise.inner, q)[:2]
    cdf = np.cumsum(weights)
    cdf[-1] = 1.0
    return values, weights, np.asarray(values, dtype=np.int64), cdf


def _draw_errors(noise: NoiseModel, q: int, size: int, rng: np.random.Generator) -> np.ndarray:
    values, _, values_arr, cdf = _distribution(noise, q)
    if len(values) == 1:
        return np.full(size, values[0], dtype=np.int64)
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return values_arr[np.minimum(idx, len(values) - 1)]


@dataclass(frozen=True, eq=False)
class SampleSpec:
    """Full description of one quantum sample: secret, subset, realized errors.

    ``subset is None`` means all of F_q^n.  Exactly one of ``errors`` (an
    explicit vector -> error map) and ``histogram`` (error value -> count)
    is present; the histogram form is allowed only for the full subset or
    above the explicit-map size limit, since no per-vector assignment is
    retained there.
    """

    fp: FieldParams
    n: int
    s: tuple[int, ...]
    v: int
    noise: NoiseModel
    subset: tuple[tuple[int, ...], ...] | None = None
    errors: dict[tuple[int, ...], int] | None = None
    histogram: dict[int, int] | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        q = self.fp.q
        if self.n < 1:
            raise ParameterError("dimension n must be >= 1")
        if len(self.s) != self.n or any(not 0 <= x < q for x in self.s):
            raise ParameterError("secret must be a length-n vector over [0, q)")
        qn = q**self.n
        if not 1 <= self.v <= qn:
            raise ParameterError(f"subset size v = {self.v} outside [1, q^n = {qn}]")
        self.noise.validate_for(q)
        if self.subset is None:
            if self.v != qn:
                raise ParameterError("subset None means all of F_q^n, so v must equal q^n")
        else:
            if len(self.subset) != self.v:
                raise ParameterError("explicit subset length must equal v")
            if len(set(self.subset)) != self.v:
                raise ParameterError("explicit subset vectors must be distinct")
            for a in self.subset:
                if len(a) != self.n or any(not 0 <= x < q for x in a):
                    raise ParameterError(f"subset vector {a} not in F_q^{self.n}")
        if (self.errors is None) == (self.histogram is None):
            raise ParameterError("exactly one of errors / histogram must be given")
        support = set(self.noise.distribution(q)[0])
        if self.errors is not None:
            if len(self.errors) != self.v:
                raise ParameterError("error map must assign every subset element")
            if self.subset is not None and set(self.errors) != set(self.subset):
                raise ParameterError("error map keys must match the subset")
            bad = [e for e in self.errors.values() if e not in support]
            if bad:
                raise ParameterError(f"error value {bad[0]} outside the noise support")
        else:
            # Single-bin histograms determine the assignment uniquely, so any
            # subset may carry them (noise None, realized global shifts).
            if self.subset is not None and self.v <= EXPLICIT_ERROR_LIMIT and len(self.histogram) > 1:
                raise ParameterError(
                    "multi-bin histogram errors require the full subset or v above the explicit-map limit"
                )
            if any(c < 0 for c in self.histogram.values()):
                raise ParameterError("histogram counts must be non-negative")
            if sum(self.histogram.values()) != self.v:
                raise ParameterError("histogram counts must sum to v")
            bad = [b for b in self.histogram if b not in support]
            if bad:
                raise ParameterError(f"histogram value {bad[0]} outside the noise support")

    def error_histogram(self) -> dict[int, int]:
        """Counts of each realized error value, from either representation."""
        if self.histogram is not None:
            return dict(self.histogram)
        counts: dict[int, int] = {}
        for e in self.errors.values():
            counts[e] = counts.get(e, 0) + 1
        return counts


@dataclass(frozen=True)
class OutcomeDistribution:
    """Exact outcome-category probabilities of the QFT-and-measure recovery step.

    ``per_jstar_good[j*]`` is the probability of the outcome
    (-j*s mod q, j*); entry 0 is unused and zero.
    """

    p_correct: float
    p_bot: float
    p_wrong: float
    per_jstar_good: np.ndarray

    def __post_init__(self) -> None:
        for name, value in (("p_correct", self.p_correct), ("p_bot", self.p_bot), ("p_wrong", self.p_wrong)):
            if not -1e-12 <= value <= 1.0 + 1e-12:
                raise ParameterError(f"{name} = {value} outside [0, 1]")
        if abs(self.p_correct + self.p_bot + self.p_wrong - 1.0) > 1e-12:
            raise ParameterError("outcome probabilities must sum to 1")
        if abs(float(self.per_jstar_good[1:].sum()) - self.p_correct) > 1e-12:
            raise ParameterError("p_correct must equal the sum over j* != 0")


@lru_cache(maxsize=64)
def _all_vectors(q: int, n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in _vector_table(q, n))


@lru_cache(maxsize=64)
def _vector_table(q: int, n: int) -> np.ndarray:
    """All vectors of F_q^n in flat-index order, as an int64 array."""
    if q**n > ENUMERABLE_LIMIT:
        raise ParameterError(f"q^n = {q**n} too large to enumerate")
    return np.stack(np.unravel_index(np.arange(q**n), (q,) * n), axis=1).astype(np.int64)


def _decode_indices(idx: np.ndarray, q: int, n: int) -> tuple[tuple[int, ...], ...]:
    grid = np.stack(np.unravel_index(idx, (q,) * n), axis=1)
    return tuple(tuple(int(x) for x in row) for row in grid)


def draw_sample_spec(
    fp: FieldParams,
    n: int,
    s: tuple[int, ...],
    v: int,
    noise: NoiseModel,
    rng: np.random.Generator,
    *,
    subset_mode: str = "auto",
    errors_as: str = "auto",
    seed: int | None = None,
) -> SampleSpec:
    """Draw a fresh sample spec: uniform size-v subset, errors from the noise model.

    ``errors_as`` overrides the storage rule ("map" below the explicit limit,
    "histogram" above); forcing "histogram" is distributionally identical for
    every consumer that draws at most one classical sample per spec.
    """
    q = fp.q
    qn = q**n
    if not 1 <= v <= qn:
        raise ParameterError(f"subset size v = {v} outside [1, q^n = {qn}]")
    if subset_mode not in ("auto", "all", "random"):
        raise ParameterError(f"unknown subset mode {subset_mode!r}")
    if subset_mode == "all" and v != qn:
        raise ParameterError("subset mode 'all' requires v = q^n")

    subset: tuple[tuple[int, ...], ...] | None
    if v == qn:
        subset = None
    elif qn <= ENUMERABLE_LIMIT:
        subset = _decode_indices(rng.choice(qn, size=v, replace=False), q, n)
    else:
        if v * v > qn // 100:
            raise ParameterError(
                "rejection subset sampling needs v^2 <= q^n / 100 when q^n is not enumerable"
            )
        chosen: set[tuple[int, ...]] = set()
        while len(chosen) < v:
            chosen.add(tuple(int(x) for x in rng.integers(0, q, size=n)))
        subset = tuple(chosen)

    values, weights = noise.distribution(q)
    errors: dict[tuple[int, ...], int] | None = None
    histogram: dict[int, int] | None = None
    if noise.is_global or noise.kind == "none":
        shift = int(_draw_errors(noise, q, 1, rng)[0]) if noise.is_global else 0
        histogram = {shift: v}
    elif errors_as == "histogram" or (errors_as == "auto" and v > EXPLICIT_ERROR_LIMIT):
        if subset is not None and v <= EXPLICIT_ERROR_LIMIT:
            raise ParameterError("histogram storage needs the full subset at this size")
        counts = rng.multinomial(v, weights)
        histogram = {b: int(c) for b, c in zip(values, counts) if c}
    else:
        vectors = subset if subset is not None else _all_vectors(q, n)
        draws = _draw_errors(noise, q, v, rng)
        errors = dict(zip(vectors, draws.tolist()))
    return SampleSpec(
        fp=fp, n=n, s=tuple(s), v=v, noise=noise,
        subset=subset, errors=errors, histogram=histogram, seed=seed,
    )


def sample_stream(
    fp: FieldParams,
    n: int,
    s: tuple[int, ...],
    v: int,
    noise: NoiseModel,
    rng: np.random.Generator,
    **draw_kwargs,
) -> Callable[[], SampleSpec]:
    """Source of i.i.d. fresh sample specs (new subset and errors per call)."""

    def source() -> SampleSpec:
        return draw_sample_spec(fp, n, s, v, noise, rng, **draw_kwargs)

    return source


def materialize_dense(spec: SampleSpec) -> DenseState:
    """The state (1/sqrt(v)) sum_{a in V} |a>|a.s + e_a mod q> on n+1 registers."""
    q = spec.fp.q
    s_vec = np.asarray(spec.s, dtype=np.int64)
    if spec.histogram is not None and len(spec.histogram) > 1:
        raise StateError("histogram spec has no per-vector error assignment")
    if spec.subset is None:
        vecs = _vector_table(q, spec.n)
        base = np.arange(spec.v, dtype=np.int64) * q
    else:
        vecs = np.asarray(spec.subset, dtype=np.int64).reshape(spec.v, spec.n)
        base = np.zeros(spec.v, dtype=np.int64)
        for col in range(spec.n):
            base = base * q + vecs[:, col]
        base *= q
    if spec.errors is not None:
        vectors = spec.subset if spec.subset is not None else _all_vectors(q, spec.n)
        errs = np.fromiter((spec.errors[a] for a in vectors), dtype=np.int64, count=spec.v)
    else:
        (shift,) = spec.histogram  # single bin: the assignment is unique
        errs = shift
    flat = base + (vecs @ s_vec + errs) % q
    amps = np.zeros(q ** (spec.n + 1), dtype=np.complex128)
    amps[flat] = 1.0 / math.sqrt(spec.v)
    return DenseState(spec.fp, spec.n + 1, amps)


def draw_classical_sample(
    spec: SampleSpec, rng: np.random.Generator
) -> tuple[tuple[int, ...], int]:
    """Computational-basis measurement: a uniform over V, b = a.s + e."""
    q = spec.fp.q
    if spec.subset is not None:
        a = spec.subset[int(rng.integers(len(spec.subset)))]
    else:
        a = tuple(int(x) for x in rng.integers(0, q, size=spec.n))
    if spec.errors is not None:
        e = spec.errors[a]
    else:
        values = tuple(spec.histogram)
        counts = np.fromiter(spec.histogram.values(), dtype=np.float64)
        e = values[_weighted_index(counts, rng)]
    b = (sum(ai * si for ai, si in zip(a, spec.s)) + e) % q
    return a, b


def _weighted_index(weights: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(weights)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(idx, weights.size - 1)


def outcome_distribution(spec: SampleSpec) -> OutcomeDistribution:
    """Exact category probabilities from the error-value histogram.

    O(q * support) time; materializes a q-length array, so it is meant for
    experiment-scale q (a guard rejects q > 2**26).
    """
    q = spec.fp.q
    if q > 2**26:
        raise ParameterError("outcome_distribution materializes q-length arrays; q too large")
    hist = spec.error_histogram()
    values = np.fromiter(hist.keys(), dtype=np.int64)
    counts = np.fromiter(hist.values(), dtype=np.float64)
    jstar = np.arange(1, q, dtype=np.int64)
    phases = np.exp(2j * np.pi * (np.multiply.outer(values % q, jstar) % q) / q)
    good_amp_sums = counts @ phases
    denom = float(spec.v) * float(q) ** (spec.n + 1)
    per = np.zeros(q, dtype=np.float64)
    per[1:] = np.abs(good_amp_sums) ** 2 / denom
    p_correct = float(per[1:].sum())
    p_bot = 1.0 / q  # Parseval over the j* = 0 slice, exact for any spec
    p_wrong = 1.0 - p_correct - p_bot
    if p_wrong < 0.0:
        if p_wrong < -1e-9:
            raise ParameterError(f"inconsistent outcome probabilities: p_wrong = {p_wrong}")
        p_wrong = 0.0
    return OutcomeDistribution(p_correct=p_correct, p_bot=p_bot, p_wrong=p_wrong, per_jstar_good=per)


def theoretical_bound(v: int, k: int, q: int, n: int, gamma_mode: str = "paper") -> float:
    """Lower bound on the per-sample recovery probability under k-bounded noise.

    "paper" is the closed constant v/(20 k q^n); "optimized" maximizes
    gamma * v * cos^2(2 pi gamma) / (k q^n) over a gamma grid in (0, 1/4).
    """
    if k < 1:
        raise ParameterError("bound requires k >= 1; the noiseless case is exact: (q-1)/q")
    if not 1 <= v <= q**n:
        raise ParameterError(f"v = {v} outside [1, q^n]")
    scale = v / (k * q**n)
    if gamma_mode == "paper":
        return scale / 20.0
    if gamma_mode == "optimized":
        grid = np.arange(1e-4, 0.25, 1e-4)
        return float(np.max(grid * np.cos(2.0 * np.pi * grid) ** 2)) * scale
    raise ParameterError(f"unknown gamma mode {gamma_mode!r}")


# --- serialization -----------------------------------------------------------

def spec_to_json(spec: SampleSpec) -> str:
    """Serialize to the documented key-value schema (q, n, s, subset, v, noise, errors, seed)."""
    noise = _noise_to_obj(spec.noise)
    if spec.errors is not None:
        errors = {"map": [[list(a), e] for a, e in spec.errors.items()]}
    else:
        errors = {"histogram": [[b, c] for b, c in spec.histogram.items()]}
    return json.dumps(
        {
            "q": spec.fp.q,
            "n": spec.n,
            "s": list(spec.s),
            "subset": "all" if spec.subset is None else [list(a) for a in spec.subset],
            "v": spec.v,
            "noise": noise,
            "errors": errors,
            "seed": spec.seed,
        }
    )


def spec_from_json(text: str) -> SampleSpec:
    obj = json.loads(text)
    fp = FieldParams(obj["q"])
    subset = None if obj["subset"] == "all" else tuple(tuple(a) for a in obj["subset"])
    errors = histogram = None
    if "map" in obj["errors"]:
        errors = {tuple(a): int(e) for a, e in obj["errors"]["map"]}
    else:
        histogram = {int(b): int(c) for b, c in obj["errors"]["histogram"]}
    return SampleSpec(
        fp=fp,
        n=int(obj["n"]),
        s=tuple(obj["s"]),
        v=int(obj["v"]),
        noise=_noise_from_obj(obj["noise"]),
        subset=subset,
        errors=errors,
        histogram=histogram,
        seed=obj.get("seed"),
    )


def _noise_to_obj(noise: NoiseModel) -> dict:
    obj: dict = {"kind": noise.kind}
    if noise.kind in ("bounded-uniform", "gaussian"):
        obj["k"] = noise.k
    if noise.kind == "gaussian":
        obj["sigma"] = noise.sigma
    if noise.kind == "bernoulli":
        obj["eta"] = noise.eta
    if noise.kind == "global-shift":
        obj["inner"] = _noise_to_obj(noise.inner)
    return obj


def _noise_from_obj(obj: dict) -> NoiseModel:
    kind = obj["kind"]
    if kind == "none":
        return NoiseModel.none()
    if kind == "bounded-uniform":
        return NoiseModel.bounded_uniform(obj["k"])
    if kind == "gaussian":
        return NoiseModel.gaussian(obj["sigma"], obj["k"])
    if kind == "bernoulli":
        return NoiseModel.bernoulli(obj["eta"])
    if kind == "global-shift":
        return NoiseModel.global_shift(_noise_from_obj(obj["inner"]))
    raise ParameterError(f"unknown noise kind {kind!r}")
