"""Exact arithmetic for the number systems behind the 4x4 lattice codes.

Three layers live here:

* Gaussian integers and Gaussian rationals, the coefficient alphabet.
* The rational quaternion algebra spanned by {1, xi, j, j*xi} over Q(i),
  where xi = exp(i*pi/4), together with its Lipschitz and Hurwitz rings.
* Structural matrix representations: the generic left-regular
  representation of a cyclic algebra, and the 2x2 golden construction
  over Z[i][theta] with theta the golden ratio.

All ring operations are exact (integers and fractions).  Floating point
appears only when a caller explicitly asks for a complex embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "GaussianInt",
    "GaussianRational",
    "QuatElement",
    "CyclicRepInput",
    "gi_norm",
    "quat_mul",
    "lipschitz_member",
    "hurwitz_member",
    "reduced_trace",
    "reduced_norm",
    "quaternion_rep_2x2",
    "cyclic_rep",
    "golden_mul",
    "golden_sigma",
    "golden_embed",
    "golden_codeword",
    "QUAT_ONE",
    "QUAT_XI",
    "QUAT_J",
    "QUAT_JXI",
    "QUAT_RHO",
    "GOLDEN_ALPHA",
    "XI_COMPLEX",
]

XI_COMPLEX = complex(math.sqrt(0.5), math.sqrt(0.5))  # exp(i*pi/4)


# ---------------------------------------------------------------------------
# Gaussian integers and rationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianInt:
    """Gaussian integer a + b*i with exact integer parts."""

    re: int = 0
    im: int = 0

    def __add__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianInt":
        return GaussianInt(-self.re, -self.im)

    def __mul__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def conj(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def in_even_ideal(self) -> bool:
        """Membership in the ideal generated by 1+i: re + im must be even."""
        return (self.re + self.im) % 2 == 0

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


def gi_norm(z: GaussianInt) -> int:
    """Field norm re^2 + im^2; zero only for the zero element."""
    return z.norm()


@dataclass(frozen=True)
class GaussianRational:
    """Element of Q(i) with exact rational parts."""

    re: Fraction
    im: Fraction

    @classmethod
    def of(cls, re=0, im=0) -> "GaussianRational":
        return cls(Fraction(re), Fraction(im))

    @classmethod
    def from_int(cls, z: GaussianInt) -> "GaussianRational":
        return cls(Fraction(z.re), Fraction(z.im))

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def times_i(self) -> "GaussianRational":
        return GaussianRational(-self.im, self.re)

    def is_gaussian_integer(self) -> bool:
        return self.re.denominator == 1 and self.im.denominator == 1

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


_ZERO = GaussianRational.of(0, 0)
_HALF_ONE_PLUS_I = GaussianRational.of(Fraction(1, 2), Fraction(1, 2))


def _as_grat(value) -> GaussianRational:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, GaussianInt):
        return GaussianRational.from_int(value)
    if isinstance(value, tuple):
        return GaussianRational.of(*value)
    return GaussianRational.of(value)


# ---------------------------------------------------------------------------
# The quaternion algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuatElement:
    """Quaternion c1 + xi*c2 + j*c3 + j*xi*c4 with c_t in Q(i).

    The defining relations are xi^2 = i, j^2 = -1 and z*j = j*conj(z) for
    complex z.  Coefficients are kept as exact Gaussian rationals so that
    the half-integer elements of the Hurwitz ring (and every product of
    such elements) stay representable; the scaled coordinates
    d_t = (1+i)*c_t used by the integrality tests are recovered exactly
    through :meth:`d_coordinates`.
    """

    c1: GaussianRational
    c2: GaussianRational
    c3: GaussianRational
    c4: GaussianRational

    @classmethod
    def from_gaussian(cls, c1, c2=0, c3=0, c4=0) -> "QuatElement":
        return cls(_as_grat(c1), _as_grat(c2), _as_grat(c3), _as_grat(c4))

    @classmethod
    def from_d(cls, d1, d2=0, d3=0, d4=0) -> "QuatElement":
        """Build from scaled coordinates d_t = (1+i)*c_t.

        Accepts GaussianInt (the exact alphabet of the Hurwitz tests) or
        anything :func:`GaussianRational` understands.
        """
        half_one_minus_i = GaussianRational.of(Fraction(1, 2), Fraction(-1, 2))
        return cls(
            *(_as_grat(d) * half_one_minus_i for d in (d1, d2, d3, d4))
        )

    def coefficients(self) -> tuple[GaussianRational, ...]:
        return (self.c1, self.c2, self.c3, self.c4)

    def d_coordinates(self) -> tuple[GaussianRational, ...]:
        """Scaled coordinates d_t = (1+i)*c_t."""
        one_plus_i = GaussianRational.of(1, 1)
        return tuple(one_plus_i * c for c in self.coefficients())

    def __add__(self, other: "QuatElement") -> "QuatElement":
        return QuatElement(
            self.c1 + other.c1,
            self.c2 + other.c2,
            self.c3 + other.c3,
            self.c4 + other.c4,
        )

    def __sub__(self, other: "QuatElement") -> "QuatElement":
        return QuatElement(
            self.c1 - other.c1,
            self.c2 - other.c2,
            self.c3 - other.c3,
            self.c4 - other.c4,
        )

    def __neg__(self) -> "QuatElement":
        return QuatElement(-self.c1, -self.c2, -self.c3, -self.c4)

    def __mul__(self, other: "QuatElement") -> "QuatElement":
        return quat_mul(self, other)

    def conjugate(self) -> "QuatElement":
        """Quaternion conjugation: fixes the complex part, negates j-part."""
        return QuatElement(self.c1.conj(), self.c2.conj().times_i().__neg__(),
                           -self.c3, -self.c4)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coefficients())

    def to_complex_pair(self) -> tuple[complex, complex]:
        """Embedding q = a1 + j*a2 with a1, a2 complex."""
        a1 = complex(self.c1) + XI_COMPLEX * complex(self.c2)
        a2 = complex(self.c3) + XI_COMPLEX * complex(self.c4)
        return a1, a2


def quat_mul(p: QuatElement, q: QuatElement) -> QuatElement:
    """Exact product in the algebra.

    Writing p = a1 + j*a2 and q = b1 + j*b2 with a, b in Q(xi), the
    product is (a1*b1 - conj(a2)*b2) + j*(conj(a1)*b2 + a2*b1).  Each
    Q(xi) element is a pair (u, v) standing for u + xi*v, multiplied via
    xi^2 = i and conjugated via conj(u + xi*v) = conj(u) - i*xi*conj(v).
    """
    c1, c2, c3, c4 = p.coefficients()
    e1, e2, e3, e4 = q.coefficients()
    f1 = c1 * e1 + (c2 * e2).times_i() - c3.conj() * e3 - c4.conj() * e4
    f2 = c1 * e2 + c2 * e1 - c3.conj() * e4 + (c4.conj() * e3).times_i()
    f3 = c1.conj() * e3 + c2.conj() * e4 + c3 * e1 + (c4 * e2).times_i()
    f4 = c1.conj() * e4 - (c2.conj() * e3).times_i() + c3 * e2 + c4 * e1
    return QuatElement(f1, f2, f3, f4)


def lipschitz_member(q: QuatElement) -> bool:
    """True when every coefficient c_t is a Gaussian integer."""
    return all(c.is_gaussian_integer() for c in q.coefficients())


def hurwitz_member(q: QuatElement) -> bool:
    """Membership in the Hurwitz ring of the algebra.

    Requires (1+i)*c_t integral for every t together with
    c1 + c3 and c2 + c4 integral.
    """
    for d in q.d_coordinates():
        if not d.is_gaussian_integer():
            return False
    if not (q.c1 + q.c3).is_gaussian_integer():
        return False
    if not (q.c2 + q.c4).is_gaussian_integer():
        return False
    return True


# -- reduced trace / reduced norm over the center Q(sqrt2) ------------------


@dataclass(frozen=True)
class _Root2Complex:
    """Element g0 + g1*sqrt(2) of Q(i, sqrt2), parts in Q(i)."""

    g0: GaussianRational
    g1: GaussianRational

    def __add__(self, other: "_Root2Complex") -> "_Root2Complex":
        return _Root2Complex(self.g0 + other.g0, self.g1 + other.g1)

    def __mul__(self, other: "_Root2Complex") -> "_Root2Complex":
        two = GaussianRational.of(2)
        return _Root2Complex(
            self.g0 * other.g0 + two * (self.g1 * other.g1),
            self.g0 * other.g1 + self.g1 * other.g0,
        )

    def conj(self) -> "_Root2Complex":
        return _Root2Complex(self.g0.conj(), self.g1.conj())

    def center_projection(self) -> tuple[Fraction, Fraction]:
        # Elements of the center are real; the i-parts must vanish exactly.
        assert self.g0.im == 0 and self.g1.im == 0, "value not in the center"
        return self.g0.re, self.g1.re


def _complex_parts(q: QuatElement) -> tuple[_Root2Complex, _Root2Complex]:
    """q = a1 + j*a2 with a1, a2 written over the basis {1, sqrt2} of Q(i,sqrt2).

    xi = (1+i)/sqrt2 = ((1+i)/2)*sqrt2, so u + xi*v = u + ((1+i)/2 * v)*sqrt2.
    """
    a1 = _Root2Complex(q.c1, _HALF_ONE_PLUS_I * q.c2)
    a2 = _Root2Complex(q.c3, _HALF_ONE_PLUS_I * q.c4)
    return a1, a2


def reduced_trace(q: QuatElement) -> tuple[Fraction, Fraction]:
    """Trace of the 2x2 representation, as exact (a, b) meaning a + b*sqrt2."""
    a1, _ = _complex_parts(q)
    return (a1 + a1.conj()).center_projection()


def reduced_norm(q: QuatElement) -> tuple[Fraction, Fraction]:
    """Determinant of the 2x2 representation: |a1|^2 + |a2|^2 over {1, sqrt2}."""
    a1, a2 = _complex_parts(q)
    return (a1 * a1.conj() + a2 * a2.conj()).center_projection()


def quaternion_rep_2x2(q: QuatElement) -> np.ndarray:
    """Complex 2x2 left-regular representation [[a1, -conj(a2)], [a2, conj(a1)]]."""
    a1, a2 = q.to_complex_pair()
    return np.array([[a1, -a2.conjugate()], [a2, a1.conjugate()]])


QUAT_ONE = QuatElement.from_gaussian(1)
QUAT_XI = QuatElement.from_gaussian(0, 1)
QUAT_J = QuatElement.from_gaussian(0, 0, 1)
QUAT_JXI = QuatElement.from_gaussian(0, 0, 0, 1)
# rho = (1 + i + j + k)/2 in the {1, xi, j, j*xi} basis
QUAT_RHO = QuatElement(
    _HALF_ONE_PLUS_I,
    _ZERO,
    GaussianRational.of(Fraction(1, 2), Fraction(-1, 2)),
    _ZERO,
)


# ---------------------------------------------------------------------------
# Cyclic-algebra left-regular representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CyclicRepInput:
    """Pre-evaluated data for the n x n left-regular representation.

    ``sigma_images[k][t]`` holds the k-th automorphism power applied to
    the t-th coefficient; row 0 is the raw coefficient vector.  Galois
    consistency of the table is the caller's contract.
    """

    n: int
    gamma: complex
    sigma_images: np.ndarray


def cyclic_rep(inp: CyclicRepInput) -> np.ndarray:
    """Left-regular representation of x0 + u*x1 + ... + u^(n-1)*x_(n-1).

    Column c carries the c-th automorphism power applied to a cyclic
    shift of the coefficients, with gamma multiplying the entries that
    wrap around: A[r, c] = sigma^c(x_(r-c)) for r >= c and
    gamma * sigma^c(x_(n+r-c)) otherwise.
    """
    n = inp.n
    if n < 1:
        raise ValueError(f"representation size must be positive, got {n}")
    s = np.asarray(inp.sigma_images, dtype=complex)
    if s.shape != (n, n):
        raise ValueError(f"sigma_images must be {n}x{n}, got {s.shape}")
    out = np.empty((n, n), dtype=complex)
    for r in range(n):
        for c in range(n):
            if r >= c:
                out[r, c] = s[c, r - c]
            else:
                out[r, c] = inp.gamma * s[c, n + r - c]
    return out


# ---------------------------------------------------------------------------
# Golden construction over O_E = Z[i][theta], theta^2 = theta + 1
# ---------------------------------------------------------------------------

GoldenNum = tuple[GaussianInt, GaussianInt]  # a + b*theta

GOLDEN_ALPHA: GoldenNum = (GaussianInt(1, 1), GaussianInt(0, -1))  # 1 + i - i*theta

_THETA = (1.0 + math.sqrt(5.0)) / 2.0
_THETA_CONJ = (1.0 - math.sqrt(5.0)) / 2.0


def golden_mul(x: GoldenNum, y: GoldenNum) -> GoldenNum:
    """(a + b*theta)(c + d*theta) with theta^2 = theta + 1, exactly."""
    a, b = x
    c, d = y
    return (a * c + b * d, a * d + b * c + b * d)


def golden_sigma(x: GoldenNum) -> GoldenNum:
    """Conjugation theta -> 1 - theta."""
    a, b = x
    return (a + b, -b)


def golden_embed(x: GoldenNum, conjugate: bool = False) -> complex:
    """Numeric embedding with theta = (1 + sqrt5)/2, or its conjugate."""
    a, b = x
    t = _THETA_CONJ if conjugate else _THETA
    return complex(a) + complex(b) * t


def golden_codeword(x0: GoldenNum, x1: GoldenNum) -> np.ndarray:
    """2x2 codeword (1/sqrt5) [[a*x0, i*s(a)*s(x1)], [a*x1, s(a)*s(x0)]].

    Here a = 1 + i - i*theta and s is the conjugation theta -> 1 - theta.
    Inputs are exact (a + b*theta) pairs over the Gaussian integers;
    theta arithmetic stays symbolic and only the returned matrix is
    embedded numerically.
    """
    alpha = GOLDEN_ALPHA
    top_left = golden_embed(golden_mul(alpha, x0))
    bottom_left = golden_embed(golden_mul(alpha, x1))
    sigma_alpha_x0 = golden_embed(golden_mul(alpha, x0), conjugate=True)
    sigma_alpha_x1 = golden_embed(golden_mul(alpha, x1), conjugate=True)
    scale = 1.0 / math.sqrt(5.0)
    return scale * np.array(
        [[top_left, 1j * sigma_alpha_x1], [bottom_left, sigma_alpha_x0]]
    )
