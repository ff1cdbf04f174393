"""Exact arithmetic in Z/p^k: residues, units, Hensel lifting, Teichmuller-type elements."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

MODULUS_CAP = 1 << 62
MAX_MATRIX_SIZE = 8

# Deterministic Miller-Rabin witness set, valid for all odd numbers < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class NonUnitError(ArithmeticError):
    """Raised when inverting a residue divisible by p."""


class NotARootError(ValueError):
    """The seed residue is not a root of the polynomial mod p."""


class SingularRootError(ValueError):
    """The derivative vanishes mod p at the seed, so the root does not lift uniquely."""


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if m % q == 0:
            return m == q
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class RingParams:
    """The triple (p, n, k) identifying the matrix ring Mat_n(Z/p^k)."""

    p: int
    n: int
    k: int

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if not 1 <= self.n <= MAX_MATRIX_SIZE:
            raise ValueError(f"matrix size n = {self.n} outside [1, {MAX_MATRIX_SIZE}]")
        if self.k < 1:
            raise ValueError(f"exponent k = {self.k} must be >= 1")
        if self.p ** self.k > MODULUS_CAP:
            raise ValueError(f"modulus p^k = {self.p}^{self.k} exceeds cap 2^62")

    @property
    def modulus(self) -> int:
        return self.p ** self.k

    def reduced(self, k_target: int) -> "RingParams":
        return RingParams(self.p, self.n, k_target)


@dataclass(frozen=True)
class ResidueInt:
    """An integer reduced mod p^k. Arithmetic stays in [0, modulus)."""

    value: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise ValueError("modulus must be >= 2")
        object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> "ResidueInt":
        if isinstance(other, int):
            return ResidueInt(other, self.modulus)
        if not isinstance(other, ResidueInt):
            raise TypeError(f"cannot combine ResidueInt with {type(other).__name__}")
        if other.modulus != self.modulus:
            raise ValueError(f"modulus mismatch: {self.modulus} vs {other.modulus}")
        return other

    def __add__(self, other) -> "ResidueInt":
        other = self._coerce(other)
        return ResidueInt(self.value + other.value, self.modulus)

    __radd__ = __add__

    def __sub__(self, other) -> "ResidueInt":
        other = self._coerce(other)
        return ResidueInt(self.value - other.value, self.modulus)

    def __mul__(self, other) -> "ResidueInt":
        other = self._coerce(other)
        return ResidueInt(self.value * other.value, self.modulus)

    __rmul__ = __mul__

    def __neg__(self) -> "ResidueInt":
        return ResidueInt(-self.value, self.modulus)

    def __pow__(self, e: int) -> "ResidueInt":
        if e < 0:
            return self.inverse() ** (-e)
        return ResidueInt(pow(self.value, e, self.modulus), self.modulus)

    def __int__(self) -> int:
        return self.value

    def prime(self) -> int:
        """The prime p dividing the modulus (modulus is always a prime power here)."""
        return _prime_of(self.modulus)

    def is_unit(self) -> bool:
        return self.value % self.prime() != 0

    def inverse(self) -> "ResidueInt":
        if not self.is_unit():
            raise NonUnitError(f"{self.value} is not a unit mod {self.modulus}")
        return ResidueInt(pow(self.value, -1, self.modulus), self.modulus)


def hensel_root(c0: int, c1: int, c2: int, r0: int, params: RingParams) -> ResidueInt:
    """Lift the root r0 of c2*x^2 + c1*x + c0 from mod p up to mod p^k.

    Requires f(r0) = 0 mod p and f'(r0) a unit mod p; the lifted root is then
    the unique residue mod p^k that reduces to r0 and kills f.  Newton's step
    x <- x - f(x)/f'(x) is iterated k-1 times, which more than doubles the
    settled precision each pass.
    """
    p, k = params.p, params.k
    m = params.modulus

    def f(x: int, mod: int) -> int:
        return (c2 * x * x + c1 * x + c0) % mod

    def fprime(x: int, mod: int) -> int:
        return (2 * c2 * x + c1) % mod

    r0 = r0 % p
    if f(r0, p) != 0:
        raise NotARootError(f"{r0} is not a root of the polynomial mod {p}")
    if fprime(r0, p) % p == 0:
        raise SingularRootError(f"derivative vanishes mod {p} at {r0}")

    a = r0
    for _ in range(max(k - 1, 0)):
        deriv_inv = pow(fprime(a, m), -1, m)
        a = (a - f(a, m) * deriv_inv) % m
    assert f(a, m) == 0 and a % p == r0
    return ResidueInt(a, m)


@lru_cache(maxsize=None)
def _prime_of(modulus: int) -> int:
    f = 2
    while f * f <= modulus:
        if modulus % f == 0:
            return f
        f += 1
    return modulus


@lru_cache(maxsize=None)
def _prime_factors(m: int) -> tuple[int, ...]:
    out = []
    f = 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1
    if m > 1:
        out.append(m)
    return tuple(out)


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    """Smallest generator of the multiplicative group mod p (search from 2)."""
    if p == 2:
        return 1
    factors = _prime_factors(p - 1)
    g = 2
    while True:
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
        g += 1


def order_p_minus_1_element(params: RingParams) -> ResidueInt:
    """A unit of Z/p^k with multiplicative order exactly p-1.

    Takes the smallest primitive root g mod p and raises it to the p^(k-1)
    power, which kills the p-part of the unit group while fixing the residue
    mod p.  For p = 2 this is just 1.
    """
    p, k = params.p, params.k
    if p == 2:
        return ResidueInt(1, params.modulus)
    g = primitive_root(p)
    a = pow(g, p ** (k - 1), params.modulus)
    return ResidueInt(a, params.modulus)


def multiplicative_order(x: ResidueInt, bound: int = 1 << 24) -> int:
    if not x.is_unit():
        raise NonUnitError("order undefined for non-units")
    acc = x
    for d in range(1, bound + 1):
        if acc.value == 1:
            return d
        acc = acc * x
    raise ArithmeticError("order exceeds bound")
