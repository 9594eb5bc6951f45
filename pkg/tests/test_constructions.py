import math

import numpy as np
import pytest

from mcsecrecy.ciphermodel import CipherError, induced_joint
from mcsecrecy.constructions import (ExpanderSpec, KeystreamSpec, ResourceLimitError,
                                     build_expander_cipher, build_stream_cipher, cascade, fwht,
                                     expander_lambda2, expander_lambda2_rho, msb, otp,
                                     permutation_cipher, ramanujan_report, random_cipher,
                                     random_expander_spec, random_stream_cipher, reference_cipher,
                                     walsh_biases, walsh_rho)
from mcsecrecy.probcore import mutual_information
from mcsecrecy.spectral import maximal_correlation, singular_values

from oracles import circulant_abs_eigs, walsh_bias_direct


def rho_svd(cipher):
    return maximal_correlation(induced_joint(cipher))


class TestStream:
    @pytest.mark.parametrize("n,streams,expected", [
        (2, [0, 1, 2, 3], 0.0),
        (2, [0b00, 0b11], 1.0),
        (1, [0, 1], 0.0),
        (2, [0b00, 0b01], 1.0),
    ])
    def test_examples(self, n, streams, expected):
        spec = KeystreamSpec(n=n, s=int(math.log2(len(streams))), streams=streams)
        assert walsh_rho(spec) == pytest.approx(expected, abs=1e-12)
        assert rho_svd(build_stream_cipher(spec)) == pytest.approx(expected, abs=1e-9)

    def test_fwht_matches_direct(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            n = int(rng.integers(1, 7))
            s = int(rng.integers(0, 5))
            spec = random_stream_cipher(n, s, int(rng.integers(2**32)))
            np.testing.assert_allclose(walsh_biases(spec), walsh_bias_direct(spec.streams, n), atol=1e-15)

    def test_fwht_is_involution_up_to_scale(self):
        x = np.arange(16, dtype=np.int64)
        np.testing.assert_array_equal(fwht(fwht(x)), 16 * x)

    def test_spectrum_is_hadamard_multiset(self):
        # Singular values of B are |bias(v)| for v != 0, with multiplicity.
        spec = random_stream_cipher(4, 2, seed=5)
        sv = np.sort(singular_values(induced_joint(build_stream_cipher(spec))))[::-1]
        bias = np.sort(np.abs(walsh_biases(spec)[1:]))[::-1]
        np.testing.assert_allclose(sv[: bias.size], bias, atol=1e-12)

    def test_seed_determinism(self):
        assert random_stream_cipher(4, 2, seed=7) == random_stream_cipher(4, 2, seed=7)
        assert random_stream_cipher(4, 2, seed=7) != random_stream_cipher(4, 2, seed=8)

    def test_single_stream_leaks_everything(self):
        assert walsh_rho(random_stream_cipher(4, 0, seed=3)) == 1.0

    def test_bad_word(self):
        with pytest.raises(ValueError):
            KeystreamSpec(n=2, s=0, streams=[4])

    def test_too_large(self):
        spec = KeystreamSpec(n=40, s=0, streams=[0])
        with pytest.raises(ResourceLimitError):
            walsh_rho(spec)


class TestExpander:
    def test_identity(self):
        spec = ExpanderSpec(n=2, d=1, permutations=[range(4)])
        c = build_expander_cipher(spec)
        np.testing.assert_array_equal(c.table, [[0, 1, 2, 3], [0, 1, 2, 3]])
        assert rho_svd(c) == pytest.approx(1.0)
        assert expander_lambda2_rho(spec) == pytest.approx(1.0)

    def test_four_cycle(self):
        spec = ExpanderSpec(n=2, d=1, permutations=[[1, 2, 3, 0]])
        eigs = circulant_abs_eigs([0, 1, 0, 1])
        np.testing.assert_allclose(sorted(eigs), [0, 0, 2, 2], atol=1e-12)
        assert expander_lambda2(spec) == pytest.approx(2.0)
        assert expander_lambda2_rho(spec) == pytest.approx(1.0)
        assert rho_svd(build_expander_cipher(spec)) == pytest.approx(1.0)

    def test_circulant_two_shifts(self):
        spec = ExpanderSpec(n=2, d=2, permutations=[[1, 2, 3, 0], [2, 3, 0, 1]])
        # first row: +1 and -1 once, +2 twice
        eigs = np.sort(circulant_abs_eigs([0, 1, 2, 1]))
        expected = eigs[-2] / spec.degree
        assert expander_lambda2_rho(spec) == pytest.approx(expected)
        assert expected == pytest.approx(0.5)
        assert rho_svd(build_expander_cipher(spec)) == pytest.approx(expected, abs=1e-9)

    def test_complete(self):
        n = 2
        perms = [[(m + j) % 4 for m in range(4)] for j in range(4)]
        spec = ExpanderSpec(n=n, d=4, permutations=perms)
        assert expander_lambda2_rho(spec) == pytest.approx(0.0, abs=1e-12)

    def test_random_well_formed(self):
        spec = random_expander_spec(8, 8, seed=1)
        c = build_expander_cipher(spec)
        assert c.n_keys == 16 and c.n_messages == 256
        assert expander_lambda2_rho(spec) == pytest.approx(rho_svd(c), abs=1e-9)

    def test_random_matches_svd(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            spec = random_expander_spec(int(rng.integers(1, 6)), int(rng.integers(1, 9)),
                                        int(rng.integers(2**32)))
            assert expander_lambda2_rho(spec) == pytest.approx(rho_svd(build_expander_cipher(spec)),
                                                               abs=1e-9)

    def test_not_bijection(self):
        with pytest.raises(CipherError):
            ExpanderSpec(n=1, d=1, permutations=[[0, 0]])

    def test_ramanujan_report(self):
        r = ramanujan_report(random_expander_spec(6, 4, seed=2))
        assert r.degree == 8
        assert r.threshold == pytest.approx(2 * math.sqrt(7))
        assert r.rho == pytest.approx(r.lambda2 / 8)


class TestCascade:
    def test_with_otp(self):
        rng = np.random.default_rng(1)
        c = random_cipher(4, 2, seed=int(rng.integers(100)))
        assert rho_svd(cascade(c, otp(2))) == pytest.approx(0, abs=1e-9)

    def test_c2_twice(self):
        c = cascade(reference_cipher("c2"), reference_cipher("c2"))
        assert c.n_keys == 4
        assert rho_svd(c) <= 0.5 + 1e-9

    def test_fixed_bijection_first(self):
        c = reference_cipher("c2")
        first = permutation_cipher([2, 0, 3, 1])
        assert rho_svd(cascade(first, c)) == pytest.approx(rho_svd(c), abs=1e-12)

    def test_key_order(self):
        a, b = random_cipher(4, 2, seed=1), random_cipher(4, 3, seed=2)
        ab = cascade(a, b)
        for k1 in range(2):
            for k2 in range(3):
                for m in range(4):
                    assert ab.encrypt(k1 * 3 + k2, m) == b.encrypt(k2, a.encrypt(k1, m))

    def test_submultiplicative(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            a = random_cipher(5, int(rng.integers(1, 4)), seed=int(rng.integers(1000)))
            b = random_cipher(5, int(rng.integers(1, 4)), seed=int(rng.integers(1000)))
            assert rho_svd(cascade(a, b)) <= rho_svd(a) * rho_svd(b) + 1e-9

    def test_stream_cascade_keeps_keystream(self):
        ab = cascade(otp(2), msb(2, 1))
        assert ab.is_stream

    def test_mismatch(self):
        with pytest.raises(CipherError):
            cascade(otp(2), otp(3))


class TestReferences:
    def test_c2(self):
        assert rho_svd(reference_cipher("c2")) == pytest.approx(math.sqrt(0.5))

    def test_counterexample_four(self):
        j = induced_joint(reference_cipher("counterexample(4)"))
        assert mutual_information(j) == pytest.approx(0.3671875, abs=1e-12)
        assert maximal_correlation(j) == pytest.approx(1.0)

    def test_msb_like_c1(self):
        j = induced_joint(reference_cipher("msb(2,1)"))
        assert maximal_correlation(j) == pytest.approx(1.0)
        assert mutual_information(j) == pytest.approx(1.0)

    def test_unknown(self):
        with pytest.raises(KeyError):
            reference_cipher("des")
        with pytest.raises(KeyError):
            reference_cipher("otp")

    def test_converse_holds_for_builders(self):
        from mcsecrecy.bounds import converse_min_key

        ciphers = [reference_cipher(n) for n in ("c1", "c2", "otp(3)", "msb(3,2)", "counterexample(3)")]
        ciphers += [build_stream_cipher(random_stream_cipher(4, s, seed=s)) for s in range(5)]
        ciphers += [build_expander_cipher(random_expander_spec(4, d, seed=d)) for d in (1, 2, 4)]
        for c in ciphers:
            rho = rho_svd(c)
            need = converse_min_key(c.message_bits, math.log2(rho) if rho > 0 else -math.inf)
            assert c.key_bits >= need.value_log2 - 1e-6, c.label
