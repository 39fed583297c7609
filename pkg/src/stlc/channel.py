"""MISO Rayleigh-fading simulation around the lattice decoders.

One receive antenna observes y = h X + n for a 4x4 codeword X, a complex
4-vector channel h with i.i.d. unit-variance entries, and i.i.d. complex
Gaussian noise of unit variance per complex dimension.  Realified over
the lattice basis this becomes an 8-dimensional integer search problem,
handed to the sphere decoder.

Reproducibility contract: every trial draws from its own substream
seeded by (seed, snr_index, trial_index), so results are independent of
execution order and worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import decoder, lattices

__all__ = [
    "OutOfRange",
    "SimConfig",
    "BlerPoint",
    "ProfileBin",
    "ProfileResult",
    "effective_channel",
    "sensitivity_metric",
    "sensitivity_family",
    "mean_symbol_energy",
    "shortest_vector_code",
    "code_mean_energy",
    "scale_factor",
    "sample_codeword",
    "run_bler",
    "complexity_profile",
    "dmt_bound",
]


class OutOfRange(ValueError):
    """Multiplexing gain outside the validity range of a tradeoff bound."""


# ---------------------------------------------------------------------------
# Effective real channel
# ---------------------------------------------------------------------------


def effective_channel(h: Sequence[complex], tag: str) -> np.ndarray:
    """Real 8x8 matrix whose column k realifies h * B_k, decode-ordered.

    B_k are the basis codewords of the lattice in natural order
    (unit coefficient vectors); columns follow the lattice's decode
    ordering so the matrix feeds the sphere decoder directly.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (4,):
        raise ValueError(f"channel vector must have 4 entries, got {h.shape}")
    if not np.any(h):
        raise ValueError("channel vector must be nonzero")
    tag = lattices.normalize_tag(tag)
    rows = np.einsum("j,kjl->kl", h, lattices.basis_matrices(tag))  # (8, 4)
    real8 = np.concatenate([rows.real, rows.imag], axis=1)  # row k = realify(h B_k)
    order = list(decoder.decode_order(tag, 8))
    return real8[order].T


# ---------------------------------------------------------------------------
# Sensitivity
# ---------------------------------------------------------------------------

_DAST_ROWS = np.array(
    [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]],
    dtype=complex,
)

_ZETA = np.exp(1j * np.pi / 8)
_L1_ROWS = np.array(
    [[_ZETA ** (j * k) for k in range(4)] for j in (1, 5, 9, 13)], dtype=complex
)

_XI = np.exp(1j * np.pi / 4)
_V_PLUS = np.array([[1, _XI, 0, 0], [0, 0, 1, _XI]], dtype=complex) / math.sqrt(2)
_V_MINUS = np.array([[1, -_XI, 0, 0], [0, 0, 1, -_XI]], dtype=complex) / math.sqrt(2)


def sensitivity_family(tag: str) -> str:
    tag = lattices.normalize_tag(tag)
    if tag == "L1":
        return "l1"
    if tag == "DAST":
        return "dast-like"
    return "quaternionic"


def sensitivity_metric(h: Sequence[complex], family: str) -> float:
    """Distance-to-collapse proxy for a channel realization.

    For the diagonalizable families this is the smallest squared
    magnitude among the four coefficients of h in the common eigenbasis
    (the +-1 rows for DAST, the root-of-unity rows for L1).  For the
    quaternionic family it is min(|h_plus|^2, |h_minus|^2), the squared
    norms of the projections onto the two critical subspaces, which are
    orthogonal complements of each other.
    """
    h = np.asarray(h, dtype=complex)
    fam = str(family).lower()
    if fam in lattices.LATTICE_TAGS or fam.upper() in lattices.LATTICE_TAGS:
        fam = sensitivity_family(fam)
    if fam in ("dast", "dast-like"):
        coeffs = (_DAST_ROWS.conj() @ h) / 4.0
        return float(np.min(np.abs(coeffs) ** 2))
    if fam == "l1":
        coeffs = (_L1_ROWS.conj() @ h) / 4.0
        return float(np.min(np.abs(coeffs) ** 2))
    if fam == "quaternionic":
        p_plus = float(np.sum(np.abs(_V_PLUS.conj() @ h) ** 2))
        p_minus = float(np.sum(np.abs(_V_MINUS.conj() @ h) ** 2))
        return min(p_plus, p_minus)
    raise ValueError(f"unknown sensitivity family {family!r}")


# ---------------------------------------------------------------------------
# Simulation configuration
# ---------------------------------------------------------------------------


@dataclass
class SimConfig:
    """One Monte-Carlo sweep: a lattice, a code, and an SNR grid.

    Two code constructions are available:

    * symbol-box (default): symbols q are drawn uniformly over the
      congruence-valid subset of Z_Q^8 and mapped through the PAM
      alphabet u = 2q - (Q-1); the code size is Q^8 / index for even Q.
    * shortest-vector (``code_size`` set): the code is the ``code_size``
      lexicographically-first shortest lattice vectors, which realizes
      exact power-of-two sizes for the sublattices.  ``coset_offset``
      picks the plain lattice (False) or the half-integer coset (True);
      None selects whichever has lower average energy.

    ``trials_per_point`` is the trial count when no stopping rule is
    given.  With ``target_errors`` set, each point stops once that many
    block errors accumulate or ``max_trials`` (default
    ``trials_per_point``) is reached, whichever happens first.
    """

    lattice: str
    q: int
    snr_db_grid: tuple[float, ...]
    trials_per_point: int
    seed: int
    normalize_mindet: bool = True
    max_trials: int | None = None
    target_errors: int | None = None
    code_size: int | None = None
    coset_offset: bool | None = None

    def validate(self, min_trials: int = 1) -> "SimConfig":
        tag = lattices.normalize_tag(self.lattice)
        if tag == "L3":
            raise ValueError("L3 is not a transmit code; simulate L1..L6 or DAST")
        if self.q < 2:
            raise ValueError("alphabet size must be at least 2")
        grid = tuple(float(v) for v in self.snr_db_grid)
        if not grid:
            raise ValueError("snr_db_grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr_db_grid must be strictly increasing")
        if self.trials_per_point < min_trials:
            raise ValueError(f"trials_per_point must be at least {min_trials}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.max_trials is not None and self.max_trials < 1:
            raise ValueError("max_trials must be positive")
        if self.target_errors is not None and self.target_errors < 1:
            raise ValueError("target_errors must be positive")
        if self.code_size is not None:
            if self.code_size < 2:
                raise ValueError("code_size must be at least 2")
            if tag not in ("L1", "L2", "L4", "L5", "L6"):
                raise ValueError(f"shortest-vector codes unsupported for {tag}")
        elif self.coset_offset is not None:
            raise ValueError("coset_offset requires code_size")
        return self

    def point_cap(self) -> int:
        if self.target_errors is None:
            return self.trials_per_point
        return self.max_trials if self.max_trials is not None else self.trials_per_point


@dataclass
class BlerPoint:
    snr_db: float
    trials: int
    block_errors: int
    bler: float
    avg_nodes: float
    p95_nodes: float


# ---------------------------------------------------------------------------
# Scaling conventions
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _parity_code(tag: str) -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple((w >> k) & 1 for k in range(8))
        for w in range(256)
        if lattices.member(tag, tuple((w >> k) & 1 for k in range(8)))
    )


@lru_cache(maxsize=None)
def mean_symbol_energy(tag: str, Q: int) -> float:
    """Exact E[|u|^2] for u = 2q - (Q-1), q uniform over the valid words.

    The valid set is a union of parity cosets; the calculation weights
    each binary residue word by its number of Z_Q preimages.
    """
    tag = lattices.normalize_tag(tag)
    n_even = (Q + 1) // 2
    n_odd = Q // 2
    e_even = Fraction(sum((2 * q - (Q - 1)) ** 2 for q in range(0, Q, 2)), n_even)
    e_odd = (
        Fraction(sum((2 * q - (Q - 1)) ** 2 for q in range(1, Q, 2)), n_odd)
        if n_odd
        else Fraction(0)
    )
    code = _parity_code(tag)
    total = Fraction(0)
    coord = [Fraction(0)] * 8
    for word in code:
        wt = sum(word)
        weight = Fraction(n_even ** (8 - wt) * n_odd**wt)
        if weight == 0:
            continue
        total += weight
        for i, b in enumerate(word):
            coord[i] += weight * (e_odd if b else e_even)
    return float(sum(c / total for c in coord))


@lru_cache(maxsize=None)
def shortest_vector_code(
    tag: str, size: int, coset_offset: bool | None = None
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Deterministic shortest-vector codebook of a given size.

    Returns (w, norm4, offset) with w the doubled integer coordinates of
    the ``size`` shortest members (ties broken lexicographically) and
    norm4 = |w|^2.  With ``coset_offset=None`` the plain lattice and the
    half-integer coset compete and the lower-energy one wins (plain on a
    tie).  Callers must treat the arrays as read-only.
    """
    tag = lattices.normalize_tag(tag)
    if coset_offset is not None:
        w, n4 = lattices.shortest_vectors(tag, size, offset=bool(coset_offset))
        return w, n4, bool(coset_offset)
    best = None
    for off in (False, True):
        w, n4 = lattices.shortest_vectors(tag, size, offset=off)
        key = (int(n4.sum()), off)
        if best is None or key < best[0]:
            best = (key, w, n4, off)
    _, w, n4, off = best
    return w, n4, off


def code_mean_energy(cfg: SimConfig) -> float:
    """Exact mean squared coefficient norm of the configured code."""
    tag = lattices.normalize_tag(cfg.lattice)
    if cfg.code_size is None:
        return mean_symbol_energy(tag, cfg.q)
    _, n4, _ = shortest_vector_code(tag, cfg.code_size, cfg.coset_offset)
    return float(n4.sum()) / (4.0 * cfg.code_size)


def scale_factor(cfg: SimConfig, snr_db: float) -> float:
    """Transmit amplitude applied to codeword entries at one SNR point.

    With ``normalize_mindet`` the min-det-normalized codes are compared
    at the literal SNR definition: snr_db = 10 log10 of (average transmit
    energy per channel use / noise variance per complex dimension),
    i.e. s = sqrt(10^(snr/10) / E) with E the exact mean squared
    coefficient norm of the code (block energy is 4 E s^2 over 4 uses).
    Without it, snr_db is a raw amplitude in lattice units,
    s = 10^(snr/20), with no energy normalization.
    """
    if cfg.normalize_mindet:
        return math.sqrt(10.0 ** (snr_db / 10.0) / code_mean_energy(cfg))
    return 10.0 ** (snr_db / 20.0)


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


def sample_codeword(rng: np.random.Generator, tag: str, Q: int) -> np.ndarray:
    """Uniform congruence-valid symbol vector via rejection over Z_Q^8."""
    while True:
        q = rng.integers(0, Q, size=8)
        if lattices.member(tag, q):
            return q


def _run_trial(args) -> tuple[int, int, float]:
    tag, Q, seed, snr_idx, trial_idx, scale, want_sens, code_size, coset_offset = args
    rng = np.random.default_rng([seed, snr_idx, trial_idx])
    h = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / math.sqrt(2.0)
    sens = sensitivity_metric(h, sensitivity_family(tag)) if want_sens else 0.0

    if code_size is not None:
        # explicit codebook: exhaustive ML detection over all words
        w, _, _ = shortest_vector_code(tag, code_size, coset_offset)
        k = int(rng.integers(0, len(w)))
        noise_c = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / math.sqrt(2.0)
        rows = np.einsum("j,kjl->kl", h, lattices.basis_matrices(tag))
        b_nat = np.concatenate([rows.real, rows.imag], axis=1).T  # (8, 8) natural
        cand = (0.5 * scale) * (w @ b_nat.T)  # codeword vectors are w / 2
        y = cand[k] + np.concatenate([noise_c.real, noise_c.imag])
        dists = ((cand - y) ** 2).sum(axis=1)
        err = int(int(np.argmin(dists)) != k)
        return err, len(w), sens

    q_nat = sample_codeword(rng, tag, Q)
    noise_c = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / math.sqrt(2.0)
    order = list(decoder.decode_order(tag, 8))
    B = scale * effective_channel(h, tag)
    u = 2 * q_nat[order] - (Q - 1)
    y = B @ u + np.concatenate([noise_c.real, noise_c.imag])
    B2, y2 = decoder.pam_absorb(B, y, Q)
    try:
        ch = decoder.qr_preprocess(B2)
    except decoder.RankDeficient:
        return 1, 0, sens  # collapsed channel: count as a block error
    res = decoder.sphere_decode(ch, ch.y_prime(y2), Q, lattice=tag)
    err = int(not (res.found and np.array_equal(res.q_hat, q_nat)))
    return err, res.nodes_visited, sens


def _map_trials(executor, payloads):
    if executor is None:
        return [_run_trial(p) for p in payloads]
    return list(executor.map(_run_trial, payloads, chunksize=64))


_CHUNK = 512


def run_bler(cfg: SimConfig, workers: int = 1) -> list[BlerPoint]:
    """Monte-Carlo block error rate sweep over the configured SNR grid.

    Deterministic for a fixed config: per-trial substreams make the
    result independent of chunking and of ``workers``; the stopping rule
    is evaluated on chunk boundaries in trial order.
    """
    cfg.validate()
    tag = lattices.normalize_tag(cfg.lattice)
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        points = []
        for snr_idx, snr_db in enumerate(cfg.snr_db_grid):
            s = scale_factor(cfg, snr_db)
            cap = cfg.point_cap()
            errors = 0
            trials = 0
            nodes: list[int] = []
            while trials < cap:
                n = min(_CHUNK, cap - trials)
                payloads = [
                    (tag, cfg.q, cfg.seed, snr_idx, t, s, False,
                     cfg.code_size, cfg.coset_offset)
                    for t in range(trials, trials + n)
                ]
                for err, nd, _ in _map_trials(executor, payloads):
                    errors += err
                    nodes.append(nd)
                trials += n
                if cfg.target_errors is not None and errors >= cfg.target_errors:
                    break
            arr = np.asarray(nodes, dtype=float)
            points.append(
                BlerPoint(
                    snr_db=float(snr_db),
                    trials=trials,
                    block_errors=errors,
                    bler=errors / trials,
                    avg_nodes=float(arr.mean()),
                    p95_nodes=float(np.percentile(arr, 95)),
                )
            )
        return points
    finally:
        if executor is not None:
            executor.shutdown()


# ---------------------------------------------------------------------------
# Complexity vs sensitivity
# ---------------------------------------------------------------------------


@dataclass
class ProfileBin:
    lo: float
    hi: float
    count: int
    mean_nodes: float
    p95_nodes: float


@dataclass
class ProfileResult:
    sensitivity: np.ndarray
    nodes: np.ndarray
    bins: list[ProfileBin]

    def p95_nodes(self) -> float:
        return float(np.percentile(self.nodes, 95)) if len(self.nodes) else math.nan


def complexity_profile(
    cfg: SimConfig, bins: int = 10, workers: int = 1
) -> ProfileResult:
    """Joint view of decoder work and channel sensitivity.

    Runs ``trials_per_point`` trials at every SNR point (no early
    stopping), records (sensitivity, nodes_visited) per trial, and
    aggregates node statistics over ``bins`` sensitivity quantile bins.
    Zero trials yield an empty histogram.
    """
    cfg.validate(min_trials=0)
    if bins < 1:
        raise ValueError("bins must be positive")
    tag = lattices.normalize_tag(cfg.lattice)
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        sens: list[float] = []
        nodes: list[int] = []
        for snr_idx, snr_db in enumerate(cfg.snr_db_grid):
            s = scale_factor(cfg, snr_db)
            for start in range(0, cfg.trials_per_point, _CHUNK):
                n = min(_CHUNK, cfg.trials_per_point - start)
                payloads = [
                    (tag, cfg.q, cfg.seed, snr_idx, t, s, True,
                     cfg.code_size, cfg.coset_offset)
                    for t in range(start, start + n)
                ]
                for _, nd, sv in _map_trials(executor, payloads):
                    nodes.append(nd)
                    sens.append(sv)
    finally:
        if executor is not None:
            executor.shutdown()

    sens_arr = np.asarray(sens, dtype=float)
    nodes_arr = np.asarray(nodes, dtype=float)
    if len(sens_arr) == 0:
        return ProfileResult(sens_arr, nodes_arr, [])
    edges = np.quantile(sens_arr, np.linspace(0.0, 1.0, bins + 1))
    idx = np.clip(np.searchsorted(edges[1:-1], sens_arr, side="right"), 0, bins - 1)
    out = []
    for b in range(bins):
        mask = idx == b
        count = int(mask.sum())
        if count:
            mean_nodes = float(nodes_arr[mask].mean())
            p95 = float(np.percentile(nodes_arr[mask], 95))
        else:
            mean_nodes = math.nan
            p95 = math.nan
        out.append(ProfileBin(float(edges[b]), float(edges[b + 1]), count, mean_nodes, p95))
    return ProfileResult(sens_arr, nodes_arr, out)


# ---------------------------------------------------------------------------
# Diversity-multiplexing tradeoff bounds
# ---------------------------------------------------------------------------

_DMT = {
    "l1-like": (4.0, 0.25),
    "l2-like": (2.0, 0.5),
    "optimal": (1.0, 1.0),
}


def dmt_bound(family: str, r: float) -> float:
    """Piecewise-linear diversity lower bound at multiplexing gain r.

    ``L1-like`` decays as 4(1-4r) on [0, 1/4], ``L2-like`` as 4(1-2r) on
    [0, 1/2], and ``optimal`` is 4(1-r) on [0, 1].
    """
    fam = str(family).lower()
    if fam not in _DMT:
        raise ValueError(f"unknown family {family!r}; valid: {sorted(_DMT)}")
    slope, r_max = _DMT[fam]
    if r < 0 or r > r_max:
        raise OutOfRange(f"r={r} outside [0, {r_max}] for {family}")
    return 4.0 * (1.0 - slope * r)
