"""Sphere decoder: QR preprocessing, constrained search, oracle agreement."""

import itertools
import math
import re

import numpy as np
import pytest

from stlc import channel, decoder, lattices


def random_instance(rng, tag, Q, noise=0.8):
    """One noisy received vector through the real transmit pipeline."""
    h = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / math.sqrt(2)
    q = channel.sample_codeword(rng, tag, Q)
    B = channel.effective_channel(h, tag)
    order = list(decoder.decode_order(tag, 8))
    y = B @ (2 * q[order] - (Q - 1)) + noise * rng.standard_normal(8)
    B2, y2 = decoder.pam_absorb(B, y, Q)
    ch = decoder.qr_preprocess(B2)
    return ch, ch.y_prime(y2), q


class TestQrPreprocess:
    def test_identity(self):
        ch = decoder.qr_preprocess(np.eye(5))
        assert np.allclose(ch.q, np.eye(5))
        assert np.allclose(ch.r, np.eye(5))

    def test_duplicate_column_rank_deficient(self):
        B = np.random.default_rng(0).standard_normal((6, 4))
        B[:, 2] = B[:, 1]
        with pytest.raises(decoder.RankDeficient):
            decoder.qr_preprocess(B)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            B = rng.standard_normal((8, 8))
            ch = decoder.qr_preprocess(B)
            assert np.max(np.abs(ch.q @ ch.r - B)) < 1e-10
            assert np.max(np.abs(ch.q.T @ ch.q - np.eye(8))) < 1e-10
            assert np.diag(ch.r).min() > 0

    def test_y_prime(self):
        rng = np.random.default_rng(2)
        B = rng.standard_normal((8, 8))
        y = rng.standard_normal(8)
        ch = decoder.qr_preprocess(B)
        assert np.allclose(ch.y_prime(y), ch.q.T @ y)


class TestDecodeChecks:
    def test_orders(self):
        assert decoder.decode_order("L5") == (0, 1, 4, 5, 2, 3, 6, 7)
        assert decoder.decode_order("L2") == tuple(range(8))

    def test_echelon_pivots_distinct(self):
        for tag in ("L4", "L5", "L6"):
            checks = decoder.decode_checks(tag)
            pivots = [p for p, _ in checks]
            assert len(set(pivots)) == len(pivots)
            for p, coords in checks:
                assert min(coords) == p

    def test_leaf_equivalence_with_membership(self):
        # a complete vector passes every check iff it is a lattice member
        for tag in ("L2", "L4", "L5", "L6"):
            order = list(decoder.decode_order(tag))
            for bits in itertools.product((0, 1), repeat=8):
                verdict = decoder.ccsd_check(tag, bits, 1)
                x_nat = [0] * 8
                for lvl, nat in enumerate(order):
                    x_nat[nat] = bits[lvl]
                assert (verdict == "pass") == lattices.member(tag, x_nat)
                assert verdict in ("pass", "fail")

    def test_ccsd_examples(self):
        assert decoder.ccsd_check("L2", [1, 0, 1], 6) == "pass"
        assert decoder.ccsd_check("L4", [1, 1, 0, 0, 0, 0, 0, 0], 1) == "pass"
        # two assigned top symbols leave every L6 check undetermined
        assert decoder.ccsd_check("L6", [1, 0], 7) == "undetermined"
        # once levels 5..8 are fixed, unequal pair parities are rejected
        assert decoder.ccsd_check("L6", [0, 0, 1, 0], 5) == "fail"

    def test_ccsd_soundness_and_completeness(self):
        # a passing suffix always extends to a member; a failing one never does
        rng = np.random.default_rng(3)
        for tag in ("L4", "L5", "L6"):
            order = list(decoder.decode_order(tag))
            for _ in range(120):
                level = int(rng.integers(2, 9))
                suffix = [int(v) for v in rng.integers(0, 2, 9 - level)]
                verdict = decoder.ccsd_check(tag, suffix, level)
                extendable = False
                for prefix in itertools.product((0, 1), repeat=level - 1):
                    full = list(prefix) + suffix
                    x_nat = [0] * 8
                    for lvl, nat in enumerate(order):
                        x_nat[nat] = full[lvl]
                    if lattices.member(tag, x_nat):
                        extendable = True
                        break
                if verdict == "fail":
                    assert not extendable
                else:
                    assert extendable


class TestSphereDecode:
    def test_noiseless_recovery(self):
        rng = np.random.default_rng(4)
        for tag in ("L1", "L2", "L4", "L5", "L6", "DAST"):
            for Q in (2, 3):
                ch, _, q = random_instance(rng, tag, Q, noise=0.0)
                order = list(decoder.decode_order(tag, 8))
                yp = ch.y_prime(ch.b @ q[order])
                res = decoder.sphere_decode(ch, yp, Q, tag)
                assert res.found and np.array_equal(res.q_hat, q)
                assert res.distance_sq < 1e-16

    def test_oracle_agreement_l4(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            ch, yp, _ = random_instance(rng, "L4", 2)
            a = decoder.sphere_decode(ch, yp, 2, "L4")
            b = decoder.ml_oracle(ch, yp, 2, "L4")
            if not np.array_equal(a.q_hat, b.q_hat):
                assert abs(a.distance_sq - b.distance_sq) < 1e-9

    def test_l6_outputs_satisfy_congruences(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            ch, yp, _ = random_instance(rng, "L6", 2, noise=1.5)
            res = decoder.sphere_decode(ch, yp, 2, "L6")
            assert res.found and lattices.member("L6", res.q_hat)

    def test_radius_monotonicity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            ch, yp, _ = random_instance(rng, "L5", 2)
            full = decoder.sphere_decode(ch, yp, 2, "L5")
            again = decoder.sphere_decode(ch, yp, 2, "L5", c0=full.distance_sq * 1.001)
            assert np.array_equal(full.q_hat, again.q_hat)

    def test_not_found_on_tiny_radius(self):
        rng = np.random.default_rng(8)
        ch, yp, _ = random_instance(rng, "L4", 2)
        best = decoder.sphere_decode(ch, yp, 2, "L4")
        res = decoder.sphere_decode(ch, yp, 2, "L4", c0=best.distance_sq * 0.25)
        assert not res.found and res.distance_sq == math.inf

    def test_node_count_determinism(self):
        rng = np.random.default_rng(9)
        ch, yp, _ = random_instance(rng, "L6", 2)
        runs = [decoder.sphere_decode(ch, yp, 2, "L6") for _ in range(3)]
        assert len({r.nodes_visited for r in runs}) == 1
        assert len({tuple(r.q_hat) for r in runs}) == 1

    def test_babai_point_found_first(self):
        rng = np.random.default_rng(10)
        for _ in range(40):
            ch, yp, _ = random_instance(rng, "L2", 4, noise=0.5)
            trace = []
            decoder.sphere_decode(ch, yp, 4, "L2", trace=trace)
            values = {}
            first = None
            for line in trace:
                lvl, val, _, act = line.split(",")
                if act in ("descend", "accept"):
                    values[int(lvl)] = int(val)
                if act == "accept":
                    first = [values[i] for i in range(1, 9)]
                    break
            assert first is not None
            assert np.array_equal(first, decoder.zf_dfe_point(ch, yp, 4))

    def test_trace_format(self):
        rng = np.random.default_rng(11)
        ch, yp, _ = random_instance(rng, "L4", 2)
        trace = []
        decoder.sphere_decode(ch, yp, 2, "L4", trace=trace)
        pat = re.compile(r"^[1-8],-?\d+,[^,]+,(descend|accept|prune|bound|parity)$")
        assert trace and all(pat.match(line) for line in trace)
        assert any(line.endswith("accept") for line in trace)

    def test_invalid_alphabet(self):
        ch = decoder.qr_preprocess(np.eye(8))
        with pytest.raises(ValueError):
            decoder.sphere_decode(ch, np.zeros(8), 1, "L2")


class TestMlOracle:
    def test_candidate_counts(self):
        assert len(decoder.valid_points(2, "L4")) == 128
        assert len(decoder.valid_points(2, "L2")) == 256
        assert len(decoder.valid_points(2, "L6")) == 16

    def test_noiseless(self):
        rng = np.random.default_rng(12)
        ch, _, q = random_instance(rng, "L4", 2, noise=0.0)
        order = list(decoder.decode_order("L4", 8))
        yp = ch.q.T @ (ch.b @ q[order])
        res = decoder.ml_oracle(ch, yp, 2, "L4")
        assert np.array_equal(res.q_hat, q)

    def test_too_large(self):
        ch = decoder.qr_preprocess(np.eye(8))
        with pytest.raises(decoder.TooLarge):
            decoder.ml_oracle(ch, np.zeros(8), 10, "L2")


class TestBlockSplit:
    def test_agrees_with_full_decode(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            h = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / math.sqrt(2)
            q = rng.integers(0, 2, 8)
            y = h @ lattices.encode("L2", 2 * q - 1)
            y = y + 0.5 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
            split = decoder.block_split_decode(h, y, 2, "L2")
            B = channel.effective_channel(h, "L2")
            B2, y2 = decoder.pam_absorb(B, np.concatenate([y.real, y.imag]), 2)
            ch = decoder.qr_preprocess(B2)
            full = decoder.sphere_decode(ch, ch.y_prime(y2), 2, "L2")
            assert np.array_equal(split.q_hat, full.q_hat)
            assert abs(split.distance_sq - full.distance_sq) < 1e-8

    def test_block_images_orthogonal(self):
        rng = np.random.default_rng(14)
        for _ in range(200):
            h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            a = rng.integers(-2, 3, 8)
            a[4:] = 0
            b = rng.integers(-2, 3, 8)
            b[:4] = 0
            v1 = h @ lattices.encode("L2", a)
            v2 = h @ lattices.encode("L2", b)
            assert abs(np.vdot(v1, v2).real) < 1e-10

    def test_fewer_nodes_on_average(self):
        rng = np.random.default_rng(15)
        split_nodes = full_nodes = 0
        for _ in range(1000):
            h = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / math.sqrt(2)
            q = rng.integers(0, 2, 8)
            y = h @ lattices.encode("L2", 2 * q - 1)
            y = y + 0.6 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
            split = decoder.block_split_decode(h, y, 2, "L2")
            B = channel.effective_channel(h, "L2")
            B2, y2 = decoder.pam_absorb(B, np.concatenate([y.real, y.imag]), 2)
            ch = decoder.qr_preprocess(B2)
            full = decoder.sphere_decode(ch, ch.y_prime(y2), 2, "L2")
            split_nodes += split.nodes_visited
            full_nodes += full.nodes_visited
        assert split_nodes <= full_nodes

    def test_rejects_coupled_lattices(self):
        h = np.array([1.0, 0.5j, -0.25, 0.1 + 0.1j])
        y = np.zeros(4, dtype=complex)
        for tag in ("L4", "L5", "L6"):
            with pytest.raises(ValueError):
                decoder.block_split_decode(h, y, 2, tag)
