import numpy as np
import pytest

from hfcf import synth
from hfcf.errors import (
    DuplicateIdentityError,
    EmptyGalleryError,
    FormatError,
    MissingTruthError,
    NormError,
    UnknownIdentityError,
)
from hfcf.gallery import (
    GalleryRecord,
    GalleryStore,
    QueryResult,
    cosine_distance,
    line_to_record,
    params_file_read,
    params_file_write,
    query_1n,
    record_to_line,
    retrieval_rate,
)
from hfcf.polyprotect import gen_params


def build_gallery(count=20, dim=128, seed=42, overlap=4):
    ids = synth.make_identities(count, dim, seed=seed)
    store = GalleryStore()
    params = {}
    for i in range(count):
        label = f"person{i:03d}"
        store.enroll(label, ids[i], identity_seed=7000 + i, overlap=overlap)
        params[label] = gen_params(7000 + i, overlap=overlap)
    return ids, store, params


class TestStore:
    def test_enroll_and_lookup(self):
        _, store, _ = build_gallery(5)
        assert len(store) == 5
        assert "person003" in store
        rec = store.get("person003")
        assert rec.norm > 0
        assert len(rec.fingerprint) == 64

    def test_duplicate_rejected(self, rng):
        store = GalleryStore()
        v = rng.uniform(-1, 1, size=32)
        store.enroll("alice", v, identity_seed=1, overlap=4)
        with pytest.raises(DuplicateIdentityError):
            store.enroll("alice", v, identity_seed=2, overlap=4)

    def test_same_embedding_different_seeds_differ(self, rng):
        store = GalleryStore()
        v = rng.uniform(-1, 1, size=32)
        a = store.enroll("a", v, identity_seed=1, overlap=4)
        b = store.enroll("b", v, identity_seed=2, overlap=4)
        assert not np.array_equal(a.protected, b.protected)
        assert a.fingerprint != b.fingerprint

    def test_fingerprints_unique_at_scale(self, rng):
        store = GalleryStore()
        v = rng.uniform(-1, 1, size=16)
        for i in range(1000):
            store.enroll(f"id{i}", v, identity_seed=i, overlap=0)
        prints = {r.fingerprint for r in store.records()}
        assert len(prints) == 1000

    def test_save_load_lossless(self, tmp_path):
        _, store, _ = build_gallery(10)
        path = tmp_path / "store.tsv"
        store.save(path)
        loaded = GalleryStore.load(path)
        assert loaded.identities() == store.identities()
        for identity in store.identities():
            a, b = store.get(identity), loaded.get(identity)
            assert np.array_equal(a.protected, b.protected)
            assert a.norm == b.norm
            assert a.fingerprint == b.fingerprint

    def test_raw_embedding_never_persisted(self, tmp_path, rng):
        v = rng.uniform(-1, 1, size=64)
        store = GalleryStore()
        store.enroll("alice", v, identity_seed=9, overlap=4)
        path = tmp_path / "store.tsv"
        store.save(path)
        blob = path.read_bytes()
        for encoding in (np.float32, np.float64):
            for value in v.astype(encoding):
                assert value.tobytes() not in blob

    def test_append_only_file_growth(self, tmp_path, rng):
        from hfcf.gallery import append_record

        store = GalleryStore()
        path = tmp_path / "store.tsv"
        for i in range(3):
            rec = store.enroll(f"id{i}", rng.uniform(-1, 1, 32), identity_seed=i, overlap=4)
            append_record(path, rec)
        loaded = GalleryStore.load(path)
        assert loaded.identities() == ["id0", "id1", "id2"]
        for identity in loaded.identities():
            assert np.array_equal(loaded.get(identity).protected, store.get(identity).protected)

    def test_record_line_roundtrip(self, rng):
        rec = GalleryRecord("bob", rng.standard_normal(17).astype(np.float32), 3.5, "ab" * 32)
        back = line_to_record(record_to_line(rec))
        assert back.identity == rec.identity
        assert np.array_equal(back.protected, rec.protected)
        assert back.norm == rec.norm
        assert back.fingerprint == rec.fingerprint

    def test_bad_lines_rejected(self, tmp_path):
        path = tmp_path / "store.tsv"
        path.write_text("only two\tfields\n")
        with pytest.raises(FormatError):
            GalleryStore.load(path)

    def test_identity_with_tab_rejected(self, rng):
        with pytest.raises(FormatError):
            GalleryRecord("a\tb", rng.standard_normal(4).astype(np.float32), 1.0, "00")

    def test_zero_norm_rejected(self):
        with pytest.raises(NormError):
            GalleryRecord("x", np.zeros(4, dtype=np.float32), 0.0, "00")


class TestQuery:
    def test_exact_match_rank_one(self):
        ids, store, params = build_gallery(10)
        res = query_1n(ids[4], params, store, k=5, truth="person004")
        assert res.ranked[0][0] == "person004"
        assert abs(res.ranked[0][1]) <= 1e-9

    def test_k_clamped_to_gallery_size(self):
        ids, store, params = build_gallery(5)
        res = query_1n(ids[0], params, store, k=50)
        assert len(res.ranked) == 5

    def test_distances_sorted(self, rng):
        ids, store, params = build_gallery(10)
        res = query_1n(rng.uniform(-1, 1, size=128), params, store, k=10)
        dists = [d for _, d in res.ranked]
        assert dists == sorted(dists)

    def test_empty_gallery(self, rng):
        with pytest.raises(EmptyGalleryError):
            query_1n(rng.uniform(-1, 1, 16), {}, GalleryStore(), k=1)

    def test_missing_params(self):
        ids, store, params = build_gallery(3)
        del params["person001"]
        with pytest.raises(UnknownIdentityError):
            query_1n(ids[0], params, store, k=3)

    def test_callable_provider(self):
        ids, store, params = build_gallery(3)
        res = query_1n(ids[1], params.__getitem__, store, k=1)
        assert res.ranked[0][0] == "person001"

    def test_perturbed_queries_rank_one(self, rng):
        ids, store, params = build_gallery(30)
        for i in range(10):
            q = synth.perturb(ids[i], 0.05, rng)
            res = query_1n(q, params, store, k=1, truth=f"person{i:03d}")
            assert res.ranked[0][0] == f"person{i:03d}"

    def test_exact_match_rank_one_secure(self):
        ids, store, params = build_gallery(8, dim=64)
        res = query_1n(ids[4], params, store, k=3, secure=True, triple_seed=17)
        assert res.ranked[0][0] == "person004"
        assert abs(res.ranked[0][1]) <= 1e-3

    def test_secure_matches_local(self, rng):
        ids, store, params = build_gallery(12, dim=64)
        q = synth.perturb(ids[5], 0.05, rng)
        local = query_1n(q, params, store, k=12)
        secure = query_1n(q, params, store, k=12, secure=True, triple_seed=31)
        assert [i for i, _ in local.ranked] == [i for i, _ in secure.ranked]
        for (_, a), (_, b) in zip(local.ranked, secure.ranked):
            assert abs(a - b) <= 1e-3


class TestRetrievalRate:
    def _result(self, truth, labels):
        return QueryResult(
            tuple((label, 0.1 * i) for i, label in enumerate(labels)), truth
        )

    def test_all_rank_one(self):
        results = [self._result("a", ["a", "b", "c"]) for _ in range(4)]
        for k in (1, 2, 3):
            assert retrieval_rate(results, k) == 1.0

    def test_truth_never_present(self):
        results = [self._result("zz", ["a", "b", "c"]) for _ in range(4)]
        assert retrieval_rate(results, 3) == 0.0

    def test_mixed_ranks(self):
        # half the queries have truth at rank 3, half at rank 1
        at3 = self._result("c", ["a", "b", "c"])
        at1 = self._result("a", ["a", "b", "c"])
        results = [at3, at1, at3, at1]
        assert retrieval_rate(results, 1) == 0.5
        assert retrieval_rate(results, 2) == 0.5
        assert retrieval_rate(results, 3) == 1.0

    def test_monotone_in_k(self, rng):
        ids, store, params = build_gallery(15)
        results = []
        for i in range(15):
            q = synth.perturb(ids[i], 0.3, rng)
            results.append(query_1n(q, params, store, k=15, truth=f"person{i:03d}"))
        rates = [retrieval_rate(results, k) for k in range(1, 16)]
        assert all(b >= a for a, b in zip(rates, rates[1:]))

    def test_missing_truth(self):
        res = QueryResult((("a", 0.1),), None)
        with pytest.raises(MissingTruthError):
            retrieval_rate([res], 1)
        with pytest.raises(MissingTruthError):
            retrieval_rate([], 1)


class TestHelpers:
    def test_cosine_distance_zero_norm(self):
        with pytest.raises(NormError):
            cosine_distance(np.zeros(4), np.ones(4))

    def test_cosine_distance_values(self):
        a = np.array([1.0, 0.0])
        assert cosine_distance(a, a) == pytest.approx(0.0)
        assert cosine_distance(a, np.array([0.0, 1.0])) == pytest.approx(1.0)
        assert cosine_distance(a, -a) == pytest.approx(2.0)

    def test_params_file_roundtrip(self, tmp_path):
        entries = [(f"id{i}", gen_params(100 + i, overlap=i % 5)) for i in range(5)]
        path = tmp_path / "params.tsv"
        params_file_write(path, entries)
        back = params_file_read(path)
        assert list(back) == [identity for identity, _ in entries]
        for identity, params in entries:
            assert back[identity] == params

    def test_query_result_validates_order(self):
        with pytest.raises(ValueError):
            QueryResult((("a", 0.5), ("b", 0.1)))
