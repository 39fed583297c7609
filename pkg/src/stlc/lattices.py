"""Construction and bookkeeping for the nested 4x4 code lattices.

The family is indexed by string tags:

* ``L1``     circulant-with-i matrices over the Gaussian integers,
* ``L2``     the quaternionic base lattice, isometric to Z^8,
* ``L3``     the half-integer extension of L2 (Hurwitz coefficients),
* ``L4``     index-2 sublattice of L2 (overall parity check, D8 geometry),
* ``L5``     index-4 sublattice (two interleaved parity checks, D4+D4),
* ``L6``     index-16 sublattice (extended-Hamming congruences, E8 geometry),
* ``DAST``   the diagonalizable +-1 pattern lattice used as a baseline.

Coefficient vectors are 8 integers (Re c1, Im c1, ..., Re c4, Im c4).
Determinant computations are exact: a closed form for the quaternionic
family and an integer cofactor expansion for everything else.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import GaussianInt, QuatElement, hurwitz_member

__all__ = [
    "LATTICE_TAGS",
    "QUATERNIONIC_TAGS",
    "SUBLATTICE_INDEX",
    "MIN_DET",
    "normalize_tag",
    "coeff_pairs",
    "encode_L1",
    "encode_H",
    "encode_DAST",
    "encode",
    "basis_matrices",
    "quat_from_coeffs",
    "gram_det",
    "det4_gaussian_batch",
    "member",
    "member_batch",
    "index_of",
    "min_det_search",
    "binary_projection",
    "rate_bpcu",
    "normalized_volume",
    "shortest_vectors",
    "average_energy",
]

LATTICE_TAGS = ("L1", "L2", "L3", "L4", "L5", "L6", "DAST")
QUATERNIONIC_TAGS = frozenset({"L2", "L3", "L4", "L5", "L6"})
SUBLATTICE_INDEX = {"L2": 1, "L4": 2, "L5": 4, "L6": 16}

# Proven minimum determinants of the integer-coefficient lattices.  The
# exhaustive search below re-certifies the values on boxes.
MIN_DET = {"L1": 1, "L2": 1, "L3": 1, "L4": 4, "L5": 16, "L6": 64}


def normalize_tag(tag: str) -> str:
    t = str(tag).upper()
    if t not in LATTICE_TAGS:
        raise ValueError(f"unknown lattice {tag!r}; valid: {', '.join(LATTICE_TAGS)}")
    return t


def coeff_pairs(x: Sequence) -> tuple[complex, complex, complex, complex]:
    """Fold an 8-vector (Re c1, Im c1, ...) into four complex coefficients."""
    x = list(x)
    if len(x) != 8:
        raise ValueError(f"coefficient vector must have 8 entries, got {len(x)}")
    return tuple(complex(x[2 * t], x[2 * t + 1]) for t in range(4))


# ---------------------------------------------------------------------------
# Codeword encoders
# ---------------------------------------------------------------------------


def encode_L1(x: Sequence) -> np.ndarray:
    """Circulant-with-i codeword of the number-field lattice."""
    c1, c2, c3, c4 = coeff_pairs(x)
    return np.array(
        [
            [c1, 1j * c4, 1j * c3, 1j * c2],
            [c2, c1, 1j * c4, 1j * c3],
            [c3, c2, c1, 1j * c4],
            [c4, c3, c2, c1],
        ]
    )


def encode_H(x: Sequence) -> np.ndarray:
    """Quaternionic codeword with block form [[A, -B^H], [B, A^H]]."""
    c1, c2, c3, c4 = coeff_pairs(x)
    cj = complex.conjugate
    return np.array(
        [
            [c1, 1j * c2, -cj(c3), -cj(c4)],
            [c2, c1, 1j * cj(c4), -cj(c3)],
            [c3, 1j * c4, cj(c1), cj(c2)],
            [c4, c3, -1j * cj(c2), cj(c1)],
        ]
    )


def encode_DAST(vals: Sequence) -> np.ndarray:
    """Sign-pattern codeword with rows equal to the +-1 eigenvectors."""
    vals = list(vals)
    if len(vals) != 4:
        raise ValueError(f"expected 4 coefficients, got {len(vals)}")
    x1, x2, x3, x4 = (complex(v) for v in vals)
    return np.array(
        [
            [x1, x2, x3, x4],
            [x1, -x2, x3, -x4],
            [x1, x2, -x3, -x4],
            [x1, -x2, -x3, x4],
        ]
    )


def encode(tag: str, x: Sequence) -> np.ndarray:
    """Dispatch an 8-vector to the family encoder for ``tag``."""
    tag = normalize_tag(tag)
    if tag == "L1":
        return encode_L1(x)
    if tag == "DAST":
        return encode_DAST(coeff_pairs(x))
    return encode_H(x)


def basis_matrices(tag: str) -> np.ndarray:
    """The eight basis codewords, stacked (8, 4, 4), in natural order.

    Basis k is the encoder applied to the k-th unit coefficient vector,
    so a codeword with integer vector x is sum_k x[k] * basis[k].
    """
    tag = normalize_tag(tag)
    out = np.empty((8, 4, 4), dtype=complex)
    for k in range(8):
        e = [0] * 8
        e[k] = 1
        out[k] = encode(tag, e)
    return out


def quat_from_coeffs(x: Sequence) -> QuatElement:
    """Algebra element with Gaussian-integer coefficients from an 8-vector."""
    xs = [int(v) for v in x]
    return QuatElement.from_gaussian(
        GaussianInt(xs[0], xs[1]),
        GaussianInt(xs[2], xs[3]),
        GaussianInt(xs[4], xs[5]),
        GaussianInt(xs[6], xs[7]),
    )


# ---------------------------------------------------------------------------
# Exact determinants
# ---------------------------------------------------------------------------


def _encode_H_int(x: Sequence[int]):
    """encode_H over exact integer pairs (re, im)."""
    x = [int(v) for v in x]
    c = [(x[2 * t], x[2 * t + 1]) for t in range(4)]

    def i_times(z):
        return (-z[1], z[0])

    def conj(z):
        return (z[0], -z[1])

    def neg(z):
        return (-z[0], -z[1])

    c1, c2, c3, c4 = c
    return [
        [c1, i_times(c2), neg(conj(c3)), neg(conj(c4))],
        [c2, c1, i_times(conj(c4)), neg(conj(c3))],
        [c3, i_times(c4), conj(c1), conj(c2)],
        [c4, c3, neg(i_times(conj(c2))), conj(c1)],
    ]


_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
_COMPLEMENT = {(0, 1): (2, 3), (0, 2): (1, 3), (0, 3): (1, 2),
               (1, 2): (0, 3), (1, 3): (0, 2), (2, 3): (0, 1)}


def det4_gaussian_batch(re: np.ndarray, im: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact determinant of stacked 4x4 Gaussian-integer matrices.

    ``re`` and ``im`` are integer arrays of shape (..., 4, 4).  Uses a
    Laplace expansion along the top two rows with 2x2 complementary
    minors, entirely in int64, so results are exact for the coefficient
    boxes used here.
    """
    re = np.asarray(re, dtype=np.int64)
    im = np.asarray(im, dtype=np.int64)

    def cmul(a, b):
        return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])

    def m(r, c):
        return (re[..., r, c], im[..., r, c])

    det_r = np.zeros(re.shape[:-2], dtype=np.int64)
    det_i = np.zeros(re.shape[:-2], dtype=np.int64)
    for (p, q) in _PAIRS:
        cp, cq = _COMPLEMENT[(p, q)]
        top = tuple(
            a - b
            for a, b in zip(cmul(m(0, p), m(1, q)), cmul(m(0, q), m(1, p)))
        )
        bot = tuple(
            a - b
            for a, b in zip(cmul(m(2, cp), m(3, cq)), cmul(m(2, cq), m(3, cp)))
        )
        term = cmul(top, bot)
        sign = -1 if (p + q) % 2 else 1
        det_r = det_r + sign * term[0]
        det_i = det_i + sign * term[1]
    return det_r, det_i


def _det4_int(x: Sequence[int], encoder) -> tuple[int, int]:
    M = encoder(x)
    re = np.array([[e[0] for e in row] for row in M], dtype=np.int64)
    im = np.array([[e[1] for e in row] for row in M], dtype=np.int64)
    dr, di = det4_gaussian_batch(re[None], im[None])
    return int(dr[0]), int(di[0])


def gram_det(x: Sequence[int]) -> int:
    """Exact det(M M^H) for a quaternionic codeword.

    Evaluates the closed form (alpha^2 - |k|^2)^2 with
    alpha = sum |c_t|^2 and k = -i c1 c2* + c2 c1* - i c3 c4* + c4 c3*,
    and cross-checks it against |det M|^2 from an exact integer cofactor
    expansion.
    """
    xs = [int(v) for v in x]
    alpha = sum(v * v for v in xs)
    # k factors as (1-i) * t, so |k|^2 = 2 t^2
    k_re_im = _k_gaussian(xs)
    k_norm = k_re_im[0] ** 2 + k_re_im[1] ** 2
    closed = (alpha * alpha - k_norm) ** 2
    dr, di = _det4_int(xs, _encode_H_int)
    cofactor = dr * dr + di * di
    if closed != cofactor:
        raise AssertionError(
            f"determinant mismatch for {xs}: closed {closed} vs cofactor {cofactor}"
        )
    return closed


def _k_gaussian(xs: Sequence[int]) -> tuple[int, int]:
    """k = -i c1 c2* + c2 c1* - i c3 c4* + c4 c3* as an exact (re, im) pair."""
    x1, x2, x3, x4, x5, x6, x7, x8 = xs

    def term(a_re, a_im, b_re, b_im):
        # -i*(a b*) + conj(a b*) = (1 - i)(re(a b*) + im(a b*))
        ab_re = a_re * b_re + a_im * b_im
        ab_im = a_im * b_re - a_re * b_im
        return (ab_re + ab_im, -(ab_re + ab_im))

    t1 = term(x1, x2, x3, x4)
    t2 = term(x5, x6, x7, x8)
    return (t1[0] + t2[0], t1[1] + t2[1])


# ---------------------------------------------------------------------------
# Membership and indices
# ---------------------------------------------------------------------------


def member(tag: str, x: Sequence[int]) -> bool:
    """Exact sublattice membership of an integer coefficient vector.

    L4, L5, L6 evaluate their mod-2 congruences literally; L3 defers to
    the Hurwitz conditions of the algebra; L1, L2 and DAST admit every
    integer vector.
    """
    tag = normalize_tag(tag)
    xs = [int(v) for v in x]
    if len(xs) != 8:
        raise ValueError("coefficient vector must have 8 entries")
    if tag in ("L1", "L2", "DAST"):
        return True
    if tag == "L3":
        return hurwitz_member(quat_from_coeffs(xs))
    p = [v & 1 for v in xs]
    if tag == "L4":
        return sum(p) % 2 == 0
    if tag == "L5":
        return (p[0] + p[1] + p[4] + p[5]) % 2 == 0 and (
            p[2] + p[3] + p[6] + p[7]
        ) % 2 == 0
    # L6: all pair sums congruent, both alternating sums even
    pair = [(p[0] + p[1]) % 2, (p[2] + p[3]) % 2, (p[4] + p[5]) % 2, (p[6] + p[7]) % 2]
    if len(set(pair)) != 1:
        return False
    odd = (p[0] + p[2] + p[4] + p[6]) % 2
    even = (p[1] + p[3] + p[5] + p[7]) % 2
    return odd == 0 and even == 0


def member_batch(tag: str, X: np.ndarray) -> np.ndarray:
    """Vectorized membership over rows of an integer array (N, 8)."""
    tag = normalize_tag(tag)
    X = np.asarray(X)
    p = X & 1
    n = X.shape[0]
    if tag in ("L1", "L2", "L3", "DAST"):
        return np.ones(n, dtype=bool)
    if tag == "L4":
        return (p.sum(axis=1) % 2) == 0
    if tag == "L5":
        a = (p[:, 0] + p[:, 1] + p[:, 4] + p[:, 5]) % 2 == 0
        b = (p[:, 2] + p[:, 3] + p[:, 6] + p[:, 7]) % 2 == 0
        return a & b
    pair = (p[:, 0::2] + p[:, 1::2]) % 2
    same = (pair == pair[:, :1]).all(axis=1)
    odd = (p[:, 0] + p[:, 2] + p[:, 4] + p[:, 6]) % 2 == 0
    even = (p[:, 1] + p[:, 3] + p[:, 5] + p[:, 7]) % 2 == 0
    return same & odd & even


def index_of(tag: str) -> int:
    """Sublattice index inside the base lattice (1, 2, 4, 16)."""
    tag = normalize_tag(tag)
    if tag not in SUBLATTICE_INDEX:
        raise ValueError(f"index defined for L2, L4, L5, L6 only, not {tag}")
    return SUBLATTICE_INDEX[tag]


# ---------------------------------------------------------------------------
# Exhaustive minimum-determinant search
# ---------------------------------------------------------------------------


def _coordinate_blocks(box: int, dtype=np.int64):
    """Yield the integer box [-box, box]^8 as (N, 8) blocks."""
    rng = np.arange(-box, box + 1, dtype=dtype)
    inner = np.stack(
        np.meshgrid(*([rng] * 7), indexing="ij"), axis=-1
    ).reshape(-1, 7)
    for first in rng:
        block = np.empty((inner.shape[0], 8), dtype=dtype)
        block[:, 0] = first
        block[:, 1:] = inner
        yield block


def _closed_form_batch(X: np.ndarray) -> np.ndarray:
    alpha = (X.astype(np.int64) ** 2).sum(axis=1)
    t = (
        X[:, 0] * X[:, 2]
        + X[:, 1] * X[:, 3]
        + X[:, 1] * X[:, 2]
        - X[:, 0] * X[:, 3]
        + X[:, 4] * X[:, 6]
        + X[:, 5] * X[:, 7]
        + X[:, 5] * X[:, 6]
        - X[:, 4] * X[:, 7]
    ).astype(np.int64)
    return (alpha * alpha - 2 * t * t) ** 2


def _batch_abs_det_sq(tag: str, X: np.ndarray) -> np.ndarray:
    if tag in QUATERNIONIC_TAGS:
        return _closed_form_batch(X)
    # exact cofactor path for L1 / DAST
    n = X.shape[0]
    re = np.zeros((n, 4, 4), dtype=np.int64)
    im = np.zeros((n, 4, 4), dtype=np.int64)
    if tag == "L1":
        c_re = X[:, 0::2].astype(np.int64)
        c_im = X[:, 1::2].astype(np.int64)
        for r in range(4):
            for c in range(4):
                t = (r - c) % 4
                if r >= c:
                    re[:, r, c] = c_re[:, t]
                    im[:, r, c] = c_im[:, t]
                else:  # wrapped entries pick up a factor i
                    re[:, r, c] = -c_im[:, t]
                    im[:, r, c] = c_re[:, t]
    else:  # DAST
        signs = np.array(
            [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]],
            dtype=np.int64,
        )
        c_re = X[:, 0::2].astype(np.int64)
        c_im = X[:, 1::2].astype(np.int64)
        for r in range(4):
            for c in range(4):
                re[:, r, c] = signs[r, c] * c_re[:, c]
                im[:, r, c] = signs[r, c] * c_im[:, c]
    dr, di = det4_gaussian_batch(re, im)
    return dr * dr + di * di


def min_det_search(tag: str, box: int) -> tuple[int, tuple[int, ...]]:
    """Exhaustive exact minimum of det(M M^H) over nonzero members.

    Coordinates range over |x_i| <= box.  Returns the minimum together
    with the first witness in scan order.  Exact in int64; the box is
    capped well below the overflow bound.
    """
    tag = normalize_tag(tag)
    if tag == "L3":
        raise ValueError("L3 has half-integer coordinates; search L2..L6 instead")
    if box < 2:
        raise ValueError("box must be at least 2")
    if box > 32:
        raise ValueError("box > 32 would overflow the exact int64 path")
    best = None
    witness = None
    for block in _coordinate_blocks(box):
        mask = member_batch(tag, block)
        nonzero = (block != 0).any(axis=1)
        mask &= nonzero
        if not mask.any():
            continue
        dets = _batch_abs_det_sq(tag, block[mask])
        idx = int(np.argmin(dets))
        val = int(dets[idx])
        if best is None or val < best:
            best = val
            witness = tuple(int(v) for v in block[mask][idx])
    if best is None:
        raise RuntimeError("empty search box")
    return best, witness


# ---------------------------------------------------------------------------
# Binary projections, rates, volumes
# ---------------------------------------------------------------------------


def binary_projection(tag: str) -> frozenset[tuple[int, ...]]:
    """Set of mod-2 residues of the lattice members, as 8-bit words."""
    tag = normalize_tag(tag)
    if tag not in SUBLATTICE_INDEX:
        raise ValueError(f"binary projection defined for L2, L4, L5, L6, not {tag}")
    words = []
    for w in range(256):
        bits = tuple((w >> k) & 1 for k in range(8))
        if member(tag, bits):
            words.append(bits)
    return frozenset(words)


def rate_bpcu(Q: int, tag: str) -> float:
    """Data rate log2(Q^8 / index) / 4 in bits per channel use."""
    tag = normalize_tag(tag)
    if Q < 2:
        raise ValueError("alphabet size Q must be at least 2")
    idx = SUBLATTICE_INDEX.get(tag)
    if idx is None:
        if tag in ("L1", "DAST"):
            idx = 1  # full integer lattices carry no congruence
        else:
            raise ValueError(f"rate undefined for {tag}")
    return (8.0 * math.log2(Q) - math.log2(idx)) / 4.0


def normalized_volume(tag: str) -> Fraction:
    """Fundamental volume after scaling the minimum determinant to one.

    A real scale s multiplies det(M M^H) by s^8 and the fundamental
    volume by s^8, so the normalized volume is index / min_det.
    """
    return Fraction(index_of(tag), MIN_DET[normalize_tag(tag)])


# ---------------------------------------------------------------------------
# Short-vector enumeration and average energy
# ---------------------------------------------------------------------------


def shortest_vectors(
    tag: str, count: int, offset: bool = False, max_box: int = 5
) -> tuple[np.ndarray, np.ndarray]:
    """The ``count`` shortest nonzero members, ties broken lexicographically.

    Returns (w, norm4) where w = 2*v holds doubled coordinates (exact for
    the half-integer offset coset) and norm4 = |w|^2 = 4 |v|^2.  With
    ``offset`` the enumerated set is the coset v = x + (1/2, ..., 1/2)
    with x in the lattice.  Radius growth over nested boxes guarantees
    completeness of each returned shell.
    """
    tag = normalize_tag(tag)
    if tag not in ("L1", "L2", "L4", "L5", "L6"):
        raise ValueError(f"enumeration supported for L1, L2, L4, L5, L6, not {tag}")
    if count < 1:
        raise ValueError("count must be positive")
    for box in range(1, max_box + 1):
        if offset:
            rng = np.arange(-box, box, dtype=np.int64)  # v = x + 1/2 in (-box, box)
            cover4 = (2 * box - 1) ** 2
        else:
            rng = np.arange(-box, box + 1, dtype=np.int64)
            cover4 = 4 * box * box
        collected_w = []
        collected_norm = []
        for block in _blocks_from_range(rng):
            w = 2 * block + (1 if offset else 0)
            norm4 = (w * w).sum(axis=1)
            mask = member_batch(tag, block) & (norm4 <= cover4) & (norm4 > 0)
            if mask.any():
                collected_w.append(w[mask])
                collected_norm.append(norm4[mask])
        if not collected_w:
            continue
        w = np.concatenate(collected_w)
        norm4 = np.concatenate(collected_norm)
        if len(w) < count:
            continue
        order = np.lexsort(tuple(w[:, k] for k in range(7, -1, -1)) + (norm4,))
        return w[order][:count], norm4[order][:count]
    raise ValueError(
        f"enumeration radius too small for {count} vectors (max_box={max_box})"
    )


def _blocks_from_range(rng: np.ndarray):
    inner = np.stack(np.meshgrid(*([rng] * 7), indexing="ij"), axis=-1).reshape(-1, 7)
    for first in rng:
        block = np.empty((inner.shape[0], 8), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = inner
        yield block


def average_energy(tag: str, count: int, offset: bool = False) -> float:
    """Mean squared norm of the ``count`` shortest members, min-det normalized.

    Each lattice is scaled so its minimum determinant is one (scale
    s = min_det^(-1/8), squared norms pick up s^2 = min_det^(-1/4)).
    """
    tag = normalize_tag(tag)
    _, norm4 = shortest_vectors(tag, count, offset=offset)
    mean_sq = float(norm4.sum()) / (4.0 * count)
    return mean_sq * MIN_DET[tag] ** (-0.25)
