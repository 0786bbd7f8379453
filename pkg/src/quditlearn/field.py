"""Prime-field arithmetic: centered representatives, inverses and roots of unity.

Field elements are plain Python ints reduced to [0, q).  ``FieldParams``
bundles a prime modulus with the complex q-th root of unity used by the
phase arithmetic; everything here is immutable and safe to share.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache

MAX_Q = 2**40  # keeps element products inside 128-bit intermediates

# Deterministic Miller-Rabin witness set, valid for all n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class ParameterError(ValueError):
    """Invalid modulus or parameter combination."""


class NoInverseError(ParameterError):
    """Requested inverse of a non-invertible element."""


class NoRootError(ParameterError):
    """No primitive root of the requested order exists."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test for 64-bit-scale integers."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldParams:
    """A prime modulus q with its complex root of unity exp(2*pi*i/q)."""

    q: int
    omega: complex = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.q, int) or not is_prime(self.q):
            raise ParameterError(f"modulus must be prime, got {self.q!r}")
        if self.q > MAX_Q:
            raise ParameterError(f"modulus {self.q} exceeds the 2**40 cap")
        object.__setattr__(self, "omega", cmath.exp(2j * cmath.pi / self.q))

    def omega_pow(self, exponent: int) -> complex:
        # Reduce mod q before exponentiating: raw exponents such as
        # a*(j + j*s) overflow double precision long before q does.
        return cmath.exp(2j * cmath.pi * ((exponent % self.q) / self.q))

    def reduce(self, a: int) -> int:
        return a % self.q


def _require_odd_prime(q: int) -> None:
    if q % 2 == 0 or not is_prime(q):
        raise ParameterError(f"centered representatives need an odd prime modulus, got {q}")


def centered(a: int, q: int) -> int:
    """The unique b = a (mod q) in [-(q-1)/2, (q-1)/2]."""
    _require_odd_prime(q)
    a %= q
    return a - q if a > (q - 1) // 2 else a


def centered_abs(a: int, q: int) -> int:
    """Magnitude of the centered representative of a modulo q."""
    return abs(centered(a, q))


def mod_inverse(a: int, q: int) -> int:
    """Multiplicative inverse of a modulo prime q."""
    a %= q
    if a == 0:
        raise NoInverseError("0 has no multiplicative inverse")
    return pow(a, -1, q)


@lru_cache(maxsize=None)
def _prime_divisors(m: int) -> tuple[int, ...]:
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return tuple(out)


def primitive_mth_root(m: int, q: int) -> int:
    """An element of multiplicative order exactly m modulo prime q.

    Requires m | q-1; raises NoRootError otherwise.
    """
    if not is_prime(q):
        raise ParameterError(f"modulus must be prime, got {q}")
    if m < 1 or (q - 1) % m != 0:
        raise NoRootError(f"{m} does not divide {q - 1}, no order-{m} element exists")
    if m == 1:
        return 1
    cofactor = (q - 1) // m
    for g in range(2, q):
        h = pow(g, cofactor, q)
        if all(pow(h, m // p, q) != 1 for p in _prime_divisors(m)):
            return h
    raise NoRootError(f"no element of order {m} found modulo {q}")  # unreachable for prime q
