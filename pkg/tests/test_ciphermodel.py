import json

import numpy as np
import pytest

from mcsecrecy.ciphermodel import (Cipher, CipherFormatError, CipherValidationError,
                                   MessageDistributionScenario, adjacency_counts, deserialize,
                                   induced_joint, load, save, serialize)
from mcsecrecy.constructions import (build_expander_cipher, build_stream_cipher, otp,
                                     random_cipher, random_expander_spec, random_stream_cipher,
                                     reference_cipher)
from mcsecrecy.probcore import Pmf

from oracles import naive_joint


def test_otp_valid():
    c = otp(2)
    assert c.n_keys == 4
    assert c.keystream == (0, 1, 2, 3)


def test_collision_named():
    with pytest.raises(CipherValidationError) as info:
        Cipher(n_messages=2, n_keys=1, n_ciphertexts=4, table=[[3, 3]])
    assert info.value.key == 0
    assert info.value.messages == (0, 1)
    assert "key 0" in str(info.value)


def test_c2_table_valid():
    c = reference_cipher("c2")
    np.testing.assert_array_equal(c.table, [[0, 1, 2, 3], [1, 2, 3, 0]])


def test_out_of_range_index():
    with pytest.raises(CipherValidationError):
        Cipher(n_messages=2, n_keys=1, n_ciphertexts=2, table=[[0, 2]])


def test_decrypt_inverts_encrypt():
    c = random_cipher(7, 5, 9, seed=2)
    for k in range(c.n_keys):
        for m in range(c.n_messages):
            assert c.decrypt(k, c.encrypt(k, m)) == m


class TestInducedJoint:
    def test_otp_independent(self):
        j = induced_joint(otp(2))
        np.testing.assert_allclose(j.probs, np.full((4, 4), 1 / 16))

    def test_c1(self):
        j = induced_joint(reference_cipher("c1"))
        expected = np.zeros((4, 4))
        for m in range(4):
            expected[m, m] = expected[m, (m + 2) % 4] = 1 / 8
        np.testing.assert_allclose(j.probs, expected)

    def test_c2(self):
        j = induced_joint(reference_cipher("c2"))
        expected = np.zeros((4, 4))
        for m in range(4):
            expected[m, m] = expected[m, (m + 1) % 4] = 1 / 8
        np.testing.assert_allclose(j.probs, expected)

    def test_matches_loop_construction(self):
        rng = np.random.default_rng(0)
        for i in range(30):
            c = random_cipher(int(rng.integers(2, 9)), int(rng.integers(1, 6)),
                              int(rng.integers(9, 12)), seed=i)
            pmf = Pmf(rng.dirichlet(np.ones(c.n_messages)))
            j = induced_joint(MessageDistributionScenario(c, pmf))
            np.testing.assert_allclose(j.probs, naive_joint(c.table.tolist(), pmf.probs, c.n_ciphertexts),
                                       atol=1e-15)

    def test_row_marginal_is_message_pmf(self):
        rng = np.random.default_rng(5)
        c = random_cipher(6, 3, 8, seed=1)
        pmf = Pmf(rng.dirichlet(np.ones(6)))
        j = induced_joint(MessageDistributionScenario(c, pmf))
        np.testing.assert_allclose(j.row_marginal.probs, pmf.probs, atol=1e-15)

    def test_column_support_at_most_key_count(self):
        c = random_cipher(8, 3, 8, seed=4)
        counts = adjacency_counts(c)
        assert (np.count_nonzero(counts, axis=0) <= c.n_keys).all()

    @pytest.mark.parametrize("name", ["c1", "c2", "otp(3)", "msb(3,1)"])
    def test_group_ciphers_uniform_output(self, name):
        c = reference_cipher(name)
        assert (adjacency_counts(c).sum(axis=0) == c.n_keys).all()
        np.testing.assert_allclose(induced_joint(c).col_marginal.probs, 1 / c.n_ciphertexts)

    def test_pmf_size_mismatch(self):
        with pytest.raises(CipherValidationError):
            MessageDistributionScenario(reference_cipher("c2"), Pmf.uniform(3))


class TestSerialization:
    @pytest.mark.parametrize("cipher", [
        reference_cipher("c2"),
        otp(3),
        reference_cipher("counterexample(3)"),
        build_stream_cipher(random_stream_cipher(5, 3, seed=11)),
        build_expander_cipher(random_expander_spec(3, 2, seed=1)),
        random_cipher(5, 3, 7, seed=9),
    ], ids=lambda c: c.label)
    def test_round_trip(self, cipher):
        assert deserialize(serialize(cipher)) == cipher

    def test_stream_written_as_keystream(self):
        doc = json.loads(serialize(build_stream_cipher(random_stream_cipher(6, 2, seed=3))))
        assert "keystream" in doc and "table" not in doc
        assert all(len(w) == 2 for w in doc["keystream"])

    def test_file_round_trip(self, tmp_path):
        c = reference_cipher("c2")
        save(c, tmp_path / "c2.json")
        assert load(tmp_path / "c2.json") == c

    def test_too_few_ciphertexts(self):
        doc = {"format_version": 1, "label": "x", "n_messages": 3, "n_keys": 1,
               "n_ciphertexts": 2, "table": [[0, 1, 2]]}
        with pytest.raises(CipherValidationError):
            deserialize(json.dumps(doc))

    def test_hand_written(self):
        text = """{"format_version": 1, "label": "swap", "n_messages": 2,
                   "n_keys": 1, "n_ciphertexts": 2, "table": [[1, 0]]}"""
        c = deserialize(text)
        assert c.encrypt(0, 0) == 1 and c.encrypt(0, 1) == 0
        assert c.label == "swap"

    def test_keystream_form(self):
        text = json.dumps({"format_version": 1, "label": "ks", "n_messages": 16, "n_keys": 2,
                           "n_ciphertexts": 16, "keystream": ["0", "a"]})
        c = deserialize(text)
        assert c.encrypt(1, 5) == 5 ^ 10

    def test_malformed_json_reports_position(self):
        with pytest.raises(CipherFormatError) as info:
            deserialize('{"format_version": 1,\n "label": }')
        assert info.value.line == 2

    def test_collision_in_file(self):
        doc = {"format_version": 1, "label": "bad", "n_messages": 2, "n_keys": 1,
               "n_ciphertexts": 2, "table": [[0, 0]]}
        with pytest.raises(CipherValidationError):
            deserialize(json.dumps(doc))

    @pytest.mark.parametrize("patch", [
        {"format_version": 2},
        {"n_keys": "2"},
        {"table": [[0, 1, 2, 3]]},
        {"table": [[0, 1, 2, 3], [1, 2, 3, 0.5]]},
    ])
    def test_bad_fields(self, patch):
        doc = json.loads(serialize(reference_cipher("c2")))
        doc.update(patch)
        with pytest.raises(CipherFormatError):
            deserialize(json.dumps(doc))

    def test_both_payloads_rejected(self):
        doc = json.loads(serialize(otp(2)))
        doc["table"] = otp(2).table.tolist()
        with pytest.raises(CipherFormatError):
            deserialize(json.dumps(doc))
