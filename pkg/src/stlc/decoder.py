"""Closest-point search over the constrained alphabet Z_Q^m.

The decoder is a depth-first sphere search with Schnorr-Euchner sibling
enumeration, running over integer symbols q in Z_Q = {0, ..., Q-1} after
a QR preprocessing of the real effective channel.  Sublattice structure
is enforced during the search by parity checks that fire at the
shallowest level where all their coordinates are assigned (code
controlled sphere decoding).  An exhaustive maximum-likelihood oracle
over the same candidate set backs every decoder test.

Search level i (1-based) assigns symbol x_i; the search walks from
level m down to level 1, so a check over coordinates S becomes decidable
at level min(S).  The checks below are an echelon basis of the lattice's
mod-2 constraint space with pairwise distinct minima, which makes the
pruning both sound (a pruned suffix has no valid completion) and
complete (unpruned leaves are exactly the valid words).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import lattices

__all__ = [
    "RankDeficient",
    "TooLarge",
    "EffectiveChannel",
    "DecodeResult",
    "qr_preprocess",
    "decode_order",
    "decode_checks",
    "ccsd_check",
    "sphere_decode",
    "zf_dfe_point",
    "valid_points",
    "ml_oracle",
    "pam_absorb",
    "block_split_decode",
]

# Distance comparisons in the main step use this absolute slack so that
# an equal-distance candidate never replaces the first one found.
_DIST_TOL = 1e-12


class RankDeficient(ValueError):
    """The received lattice collapsed: R has a (numerically) zero pivot."""


class TooLarge(ValueError):
    """Exhaustive enumeration would exceed the configured candidate budget."""


@dataclass(frozen=True)
class EffectiveChannel:
    """QR-preprocessed real channel B = Q R with positive diagonal R."""

    b: np.ndarray
    q: np.ndarray
    r: np.ndarray

    @property
    def m(self) -> int:
        return self.r.shape[0]

    def y_prime(self, y: np.ndarray) -> np.ndarray:
        """Rotate a received vector into the triangular frame."""
        return self.q.T @ np.asarray(y, dtype=float)


@dataclass
class DecodeResult:
    q_hat: np.ndarray
    distance_sq: float
    nodes_visited: int
    found: bool


def qr_preprocess(B: np.ndarray, rank_tol: float = 1e-12) -> EffectiveChannel:
    """Thin QR factorization with the R diagonal forced positive.

    Raises :class:`RankDeficient` when the smallest diagonal magnitude
    does not exceed ``rank_tol``, which is how a collapsed received
    lattice announces itself.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] < B.shape[1]:
        raise ValueError(f"channel matrix must be n x m with n >= m, got {B.shape}")
    q, r = np.linalg.qr(B)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    r = signs[:, None] * r
    if np.min(np.diag(r)) <= rank_tol:
        raise RankDeficient(
            f"smallest R diagonal {np.min(np.diag(r)):.3e} below {rank_tol:.0e}"
        )
    return EffectiveChannel(b=B, q=q, r=r)


# ---------------------------------------------------------------------------
# Decode ordering and parity-check schedule
# ---------------------------------------------------------------------------

_NATURAL_CHECKS: dict[str, tuple[tuple[int, ...], ...]] = {
    "L1": (),
    "L2": (),
    "L3": (),
    "DAST": (),
    "L4": ((0, 1, 2, 3, 4, 5, 6, 7),),
    "L5": ((0, 1, 4, 5), (2, 3, 6, 7)),
    # rank-4 basis equivalent to: all pair sums congruent mod 2 and both
    # alternating sums even
    "L6": ((0, 1, 2, 3), (2, 3, 4, 5), (4, 5, 6, 7), (0, 2, 4, 6)),
}


def decode_order(tag: str, m: int = 8) -> tuple[int, ...]:
    """Column order of the effective channel: natural coordinate per level.

    L5 interleaves the coordinate pairs so that both of its parity checks
    involve a contiguous half of the search tree; everything else keeps
    the natural order.
    """
    tag = lattices.normalize_tag(tag)
    if m == 8 and tag == "L5":
        return (0, 1, 4, 5, 2, 3, 6, 7)
    return tuple(range(m))


@lru_cache(maxsize=None)
def decode_checks(tag: str, m: int = 8) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Echelonized parity checks in decode coordinates.

    Returns tuples (pivot, coords) sorted by pivot, where pivot is the
    minimum decode coordinate of the check (0-based) and the pivots are
    pairwise distinct.  Echelonization is plain GF(2) elimination of the
    natural constraint masks after permutation into decode order.
    """
    tag = lattices.normalize_tag(tag)
    natural = _NATURAL_CHECKS[tag]
    if not natural:
        return ()
    order = decode_order(tag, m)
    inv = {nat: lvl for lvl, nat in enumerate(order)}
    masks = [sum(1 << inv[c] for c in chk) for chk in natural]
    basis: dict[int, int] = {}
    for v in masks:
        while v:
            pivot = (v & -v).bit_length() - 1
            if pivot in basis:
                v ^= basis[pivot]
            else:
                basis[pivot] = v
                break
    out = []
    for pivot in sorted(basis):
        mask = basis[pivot]
        coords = tuple(k for k in range(m) if (mask >> k) & 1)
        out.append((pivot, coords))
    return tuple(out)


def ccsd_check(tag: str, q_suffix: Sequence[int], level: int) -> str:
    """Tri-state parity verdict for a partially assigned vector.

    ``q_suffix`` holds the symbols of levels ``level..m`` (1-based, in
    decode order).  Returns ``"fail"`` if a check whose coordinates are
    all assigned is violated, ``"pass"`` if every check of the lattice is
    assigned and satisfied, and ``"undetermined"`` otherwise.
    """
    suffix = [int(v) for v in q_suffix]
    m = level - 1 + len(suffix)
    checks = decode_checks(tag, m)
    k0 = level - 1  # 0-based decode coordinate of the suffix start
    all_determined = True
    for pivot, coords in checks:
        if pivot < k0:
            all_determined = False
            continue
        parity = sum(suffix[c - k0] for c in coords) & 1
        if parity:
            return "fail"
    return "pass" if all_determined else "undetermined"


# ---------------------------------------------------------------------------
# Sphere decoder
# ---------------------------------------------------------------------------


def sphere_decode(
    ch: EffectiveChannel,
    y_prime: Sequence[float],
    Q: int,
    lattice: str = "L2",
    c0: float = math.inf,
    trace: list[str] | None = None,
) -> DecodeResult:
    """Constrained closest-point search, Schnorr-Euchner order.

    Minimizes sum_j |y'_j - sum_l r_jl x_l|^2 over x in Z_Q^m subject to
    the lattice parity checks.  The channel's columns must follow
    :func:`decode_order` for the lattice; the returned ``q_hat`` is
    reported back in natural coordinate order.  ``c0`` is the initial
    squared radius in the triangular frame; infinity makes the first
    accepted candidate the zero-forcing DFE point.  ``nodes_visited``
    counts every execution of the main (in-sphere) test.  When ``trace``
    is a list, one ``level,value,partial_dist,action`` record is appended
    per main-step visit.
    """
    if Q < 2:
        raise ValueError("alphabet size Q must be at least 2")
    R = ch.r
    m = ch.m
    y = [float(v) for v in y_prime]
    if len(y) != m:
        raise ValueError(f"y_prime must have length {m}")
    rows = [[float(R[i, j]) for j in range(m)] for i in range(m)]
    checks_at: list[list[tuple[int, ...]]] = [[] for _ in range(m)]
    for pivot, coords in decode_checks(lattice, m):
        checks_at[pivot].append(coords)

    x = [0] * m
    delta = [0] * m
    T = [0.0] * m
    xi = [0.0] * m
    best: list[int] | None = None
    d_c = float(c0)
    nodes = 0

    def dfe(k: int) -> None:
        resid = y[k] - xi[k]
        x[k] = math.floor(resid / rows[k][k] + 0.5)
        delta[k] = 1 if resid - rows[k][k] * x[k] >= 0 else -1

    def sibling(k: int) -> None:
        x[k] += delta[k]
        delta[k] = -delta[k] - (1 if delta[k] >= 0 else -1)

    k = m - 1
    dfe(k)
    while True:
        # main step: inside the sphere?
        nodes += 1
        e = y[k] - xi[k] - rows[k][k] * x[k]
        dist = T[k] + e * e
        if dist >= d_c - _DIST_TOL:
            if trace is not None:
                trace.append(f"{k + 1},{x[k]},{dist:.6g},prune")
            if k == m - 1:
                break  # whole tree exhausted
            k += 1
            sibling(k)
            continue
        if x[k] < 0 or x[k] >= Q:
            if trace is not None:
                trace.append(f"{k + 1},{x[k]},{dist:.6g},bound")
            sibling(k)
            continue
        if checks_at[k] and any(
            sum(x[c] for c in coords) & 1 for coords in checks_at[k]
        ):
            if trace is not None:
                trace.append(f"{k + 1},{x[k]},{dist:.6g},parity")
            sibling(k)
            continue
        if k > 0:
            if trace is not None:
                trace.append(f"{k + 1},{x[k]},{dist:.6g},descend")
            row = rows[k - 1]
            xi[k - 1] = sum(row[j] * x[j] for j in range(k, m))
            T[k - 1] = dist
            k -= 1
            dfe(k)
            continue
        # valid leaf: shrink the radius, record, move one level up
        d_c = dist
        best = x.copy()
        if trace is not None:
            trace.append(f"{k + 1},{x[k]},{dist:.6g},accept")
        k += 1
        sibling(k)

    order = decode_order(lattice, m)
    q_hat = np.zeros(m, dtype=int)
    if best is not None:
        for lvl, nat in enumerate(order):
            q_hat[nat] = best[lvl]
    return DecodeResult(
        q_hat=q_hat,
        distance_sq=d_c if best is not None else math.inf,
        nodes_visited=nodes,
        found=best is not None,
    )


def zf_dfe_point(ch: EffectiveChannel, y_prime: Sequence[float], Q: int) -> np.ndarray:
    """Successive rounding in back-substitution order, clamped to Z_Q.

    Ignores parity checks; coordinates follow the channel's columns.
    """
    R = ch.r
    m = ch.m
    y = [float(v) for v in y_prime]
    x = [0] * m
    for k in range(m - 1, -1, -1):
        acc = sum(R[k, j] * x[j] for j in range(k + 1, m))
        v = math.floor((y[k] - acc) / R[k, k] + 0.5)
        x[k] = min(max(v, 0), Q - 1)
    return np.array(x, dtype=int)


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------


def valid_points(Q: int, lattice: str, m: int = 8) -> np.ndarray:
    """All congruence-valid symbol vectors in Z_Q^m, natural order."""
    if Q**m > 10**7:
        raise TooLarge(f"{Q}^{m} candidates exceed the 1e7 budget")
    grid = np.stack(
        np.meshgrid(*([np.arange(Q)] * m), indexing="ij"), axis=-1
    ).reshape(-1, m)
    if m == 8:
        mask = lattices.member_batch(lattice, grid)
        grid = grid[mask]
    return grid


def ml_oracle(
    ch: EffectiveChannel, y_prime: Sequence[float], Q: int, lattice: str = "L2"
) -> DecodeResult:
    """Brute-force minimization of |y' - R x|^2 over the valid candidates.

    ``nodes_visited`` reports the candidate count.  Ties resolve to the
    first candidate in natural enumeration order.
    """
    m = ch.m
    cand = valid_points(Q, lattice, m)
    order = decode_order(lattice, m)
    y = np.asarray(y_prime, dtype=float)
    resid = y[None, :] - cand[:, order] @ ch.r.T
    dists = (resid**2).sum(axis=1)
    idx = int(np.argmin(dists))
    return DecodeResult(
        q_hat=cand[idx].copy(),
        distance_sq=float(dists[idx]),
        nodes_visited=len(cand),
        found=True,
    )


# ---------------------------------------------------------------------------
# Block-split decoding
# ---------------------------------------------------------------------------


def pam_absorb(B: np.ndarray, y: np.ndarray, Q: int) -> tuple[np.ndarray, np.ndarray]:
    """Fold the PAM map u = 2q - (Q-1) into the channel.

    Transmitting sum_k u_k b_k equals 2 B q - (Q-1) B 1, so the search
    over q uses B' = 2B and y' = y + (Q-1) B 1.
    """
    B = np.asarray(B, dtype=float)
    y = np.asarray(y, dtype=float)
    return 2.0 * B, y + (Q - 1) * B.sum(axis=1)


def block_split_decode(
    h: np.ndarray, y: np.ndarray, Q: int, lattice: str = "L2"
) -> DecodeResult:
    """Decode the two 4-dimensional halves of the base lattice separately.

    The codeword columns spanned by (c1, c2) and by (c3, c4) map to
    orthogonal real subspaces for every channel vector, so the joint
    search factors into two independent searches.  Only the base lattice
    qualifies; the denser sublattices couple the halves through their
    parity checks.
    """
    tag = lattices.normalize_tag(lattice)
    if tag != "L2":
        raise ValueError(f"block splitting requires L2; {tag} couples the blocks")
    h = np.asarray(h, dtype=complex)
    basis = lattices.basis_matrices(tag)
    cols = np.einsum("j,kjl->kl", h, basis)  # (8, 4) complex rows h B_k
    B = np.concatenate([cols.real, cols.imag], axis=1).T  # (8, 8) real
    y_real = np.concatenate([np.asarray(y, complex).real, np.asarray(y, complex).imag])
    B2, y2 = pam_absorb(B, y_real, Q)

    total_nodes = 0
    dist = 0.0
    parts = []
    found = True
    for half in (slice(0, 4), slice(4, 8)):
        ch = qr_preprocess(B2[:, half])
        res = sphere_decode(ch, ch.y_prime(y2), Q, lattice="L2")
        total_nodes += res.nodes_visited
        dist += res.distance_sq
        found &= res.found
        parts.append(res.q_hat)
    return DecodeResult(
        q_hat=np.concatenate(parts),
        distance_sq=dist,
        nodes_visited=total_nodes,
        found=found,
    )
