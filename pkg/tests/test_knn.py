"""kNN graph, signature and semantic affinity tests.

The central oracle is an exhaustive per-pair scan with python-level
cosine distances; both kernel backends must reproduce its neighbor sets
exactly. The end-to-end dense oracle reimplements the whole signature
pipeline with dense vectors.
"""

import numpy as np
import pytest

from regiolect.embeddings import CommonTokenSet, EmbeddingTable, common_tokens
from regiolect.kernels import available_backends, topk_neighbors
from regiolect.knn import (
    RegionSignature,
    knn_graph,
    load_signature_tsv,
    neighbor_weight,
    save_signature_tsv,
    semantic_affinity,
    signature,
)

BACKENDS = available_backends()


def brute_force_sets(vectors, k):
    """O(n^2) oracle: per-query sorted scan over explicit cosine
    distances, ties on index."""
    n = len(vectors)
    normed = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    out = []
    for q in range(n):
        cands = []
        for j in range(n):
            if j == q:
                continue
            d = 1.0 - float(np.dot(normed[q], normed[j]))
            cands.append((d, j))
        cands.sort()
        out.append([j for _, j in cands[:k]])
    return out


def random_table(region, tokens, dim, seed):
    rng = np.random.default_rng(seed)
    return EmbeddingTable(region=region, dim=dim, vectors={
        t: rng.normal(size=dim) for t in tokens})


class TestTopkNeighbors:
    @pytest.mark.parametrize("backend", BACKENDS)
    def test_matches_exhaustive_oracle(self, backend):
        rng = np.random.default_rng(42)
        vectors = rng.normal(size=(200, 16))
        normed = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
        idx, dist = topk_neighbors(normed, 7, backend=backend)
        oracle = brute_force_sets(vectors, 7)
        for q in range(200):
            assert list(idx[q]) == oracle[q]
        assert np.all(np.diff(dist, axis=1) >= 0)

    def test_backends_agree(self):
        if len(BACKENDS) < 2:
            pytest.skip("compiled kernel not built")
        rng = np.random.default_rng(1)
        vectors = rng.normal(size=(300, 25))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        ic, dc = topk_neighbors(vectors, 10, backend="c")
        ip, dp = topk_neighbors(vectors, 10, backend="python")
        assert np.array_equal(ic, ip)
        # both backends select over the same BLAS distances: bitwise equal
        assert np.array_equal(dc, dp)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_thread_count_invariance_bitwise(self, backend):
        rng = np.random.default_rng(2)
        vectors = rng.normal(size=(150, 8))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        base_idx, base_dist = topk_neighbors(vectors, 5, backend=backend,
                                             block_size=32, threads=1)
        for threads in (2, 4, 8):
            idx, dist = topk_neighbors(vectors, 5, backend=backend,
                                       block_size=32, threads=threads)
            assert np.array_equal(idx, base_idx)
            assert np.array_equal(dist, base_dist)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_block_size_invariant_neighbor_sets(self, backend):
        # distance bits may move in the last ulp when BLAS sees other
        # shapes; the selected neighbors must not
        rng = np.random.default_rng(2)
        vectors = rng.normal(size=(150, 8))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        base_idx, base_dist = topk_neighbors(vectors, 5, backend=backend,
                                             block_size=150)
        for block in (7, 64):
            idx, dist = topk_neighbors(vectors, 5, backend=backend,
                                       block_size=block)
            assert np.array_equal(idx, base_idx)
            assert np.allclose(dist, base_dist, atol=1e-12)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_duplicate_vectors_tie_break(self, backend):
        # rows 0 and 1 identical: each lists the other first at d=0;
        # rows 3 and 4 identical too, and 0 < 1 resolves their tie
        base = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0],
                         [0.6, 0.8], [0.6, 0.8]])
        idx, dist = topk_neighbors(base, 2, backend=backend)
        assert idx[0][0] == 1 and dist[0][0] == pytest.approx(0.0, abs=1e-12)
        assert idx[1][0] == 0
        assert idx[3][0] == 4 and idx[4][0] == 3
        # the identical pair ties at distance to row 2's orthogonal vector
        assert list(idx[2]) == [3, 4]

    def test_k_validation(self):
        with pytest.raises(ValueError):
            topk_neighbors(np.eye(3), 3)
        with pytest.raises(ValueError):
            topk_neighbors(np.eye(3), 0)


class TestKnnGraph:
    def test_collinear_geometry(self):
        # two collinear vectors prefer each other over the orthogonal one
        table = EmbeddingTable(region="MX", dim=2, vectors={
            "a": np.array([1.0, 0.0]),
            "b": np.array([2.0, 0.0]),
            "c": np.array([0.0, 1.0])})
        common = CommonTokenSet(tokens=("a", "b", "c"), min_regions=1)
        graph = knn_graph(table, common, k=1)
        assert graph.neighbors["a"][0][0] == "b"
        assert graph.neighbors["b"][0][0] == "a"

    def test_duplicated_tokens_distance_zero(self):
        table = EmbeddingTable(region="MX", dim=3, vectors={
            "a": np.array([1.0, 2.0, 3.0]),
            "b": np.array([1.0, 2.0, 3.0]),
            "c": np.array([-3.0, 1.0, 0.2])})
        common = CommonTokenSet(tokens=("a", "b", "c"), min_regions=1)
        graph = knn_graph(table, common, k=1)
        assert graph.neighbors["a"][0][0] == "b"
        assert graph.neighbors["a"][0][1] == pytest.approx(0.0, abs=1e-12)
        assert graph.neighbors["b"][0][0] == "a"

    def test_restricted_to_common_and_present(self):
        table = random_table("MX", ["a", "b", "c", "d"], 5, seed=3)
        common = CommonTokenSet(tokens=("a", "b", "c"), min_regions=1)
        graph = knn_graph(table, common, k=2)
        assert set(graph.neighbors) == {"a", "b", "c"}
        for nbrs in graph.neighbors.values():
            assert all(nb in {"a", "b", "c"} for nb, _ in nbrs)

    def test_too_few_tokens_error(self):
        table = random_table("MX", ["a", "b"], 4, seed=4)
        common = CommonTokenSet(tokens=("a", "b"), min_regions=1)
        with pytest.raises(ValueError):
            knn_graph(table, common, k=2)

    def test_matches_oracle_on_fixture(self):
        tokens = [f"t{i:03d}" for i in range(60)]
        table = random_table("MX", tokens, 10, seed=5)
        common = CommonTokenSet(tokens=tuple(sorted(tokens)), min_regions=1)
        graph = knn_graph(table, common, k=4)
        mat = np.stack([table.vectors[t] for t in sorted(tokens)])
        oracle = brute_force_sets(mat, 4)
        ordered = sorted(tokens)
        for row, token in enumerate(ordered):
            assert [nb for nb, _ in graph.neighbors[token]] == \
                [ordered[j] for j in oracle[row]]


class TestSignature:
    def test_weight_formula(self):
        assert neighbor_weight(0.0) == 1.5
        assert neighbor_weight(1.0) == 1.0
        assert neighbor_weight(2.0) == pytest.approx(0.5 + 1 / 3, abs=1e-12)

    def test_entry_count_and_bounds(self):
        tokens = [f"t{i}" for i in range(30)]
        table = random_table("MX", tokens, 6, seed=6)
        common = CommonTokenSet(tokens=tuple(sorted(tokens)), min_regions=1)
        k = 5
        sig = signature(knn_graph(table, common, k=k))
        assert len(sig) == len(tokens) * k
        for w in sig.entries.values():
            assert 0.8333 < w <= 1.5

    def test_tsv_roundtrip(self, tmp_path):
        table = random_table("MX", ["a", "b", "c", "d"], 4, seed=7)
        common = CommonTokenSet(tokens=("a", "b", "c", "d"), min_regions=1)
        sig = signature(knn_graph(table, common, k=2))
        path = tmp_path / "sig.tsv"
        save_signature_tsv(sig, path)
        back = load_signature_tsv(path, "MX")
        assert back.entries == sig.entries


def dense_pipeline_oracle(tables, min_regions, k):
    """End-to-end reimplementation with dense vectors over the full
    (token x token) grid."""
    membership = {}
    for t in tables:
        for tok in t.vectors:
            membership[tok] = membership.get(tok, 0) + 1
    common = sorted(t for t, m in membership.items() if m >= min_regions)
    pos = {t: i for i, t in enumerate(common)}
    n = len(common)
    dense = []
    for table in tables:
        present = [t for t in common if t in table.vectors]
        grid = np.zeros((n, n))
        for tok in present:
            u = table.vectors[tok]
            dists = []
            for other in present:
                if other == tok:
                    continue
                v = table.vectors[other]
                d = 1.0 - float(np.dot(u, v) /
                                (np.linalg.norm(u) * np.linalg.norm(v)))
                dists.append((d, other))
            dists.sort()
            for d, other in dists[:k]:
                grid[pos[tok], pos[other]] = 0.5 + 1.0 / (1.0 + d)
        dense.append(grid.ravel())
    m = len(tables)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i != j:
                u, v = dense[i], dense[j]
                out[i, j] = 1.0 - (u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return out


class TestSemanticAffinity:
    def make_signatures(self, tables, min_regions=1, k=3):
        common = common_tokens(tables, min_regions=min_regions)
        return [signature(knn_graph(t, common, k=k)) for t in tables]

    def test_identical_tables_distance_exactly_zero(self):
        tokens = [f"t{i}" for i in range(12)]
        t1 = random_table("MX", tokens, 5, seed=8)
        t2 = EmbeddingTable(region="AR", dim=5,
                            vectors={k: v.copy() for k, v in t1.vectors.items()})
        sigs = self.make_signatures([t1, t2])
        matrix = semantic_affinity(sigs)
        assert matrix.values[0, 1] == 0.0

    def test_disjoint_supports_distance_one(self):
        a = RegionSignature("MX", {("a", "b"): 1.2, ("b", "a"): 1.1})
        b = RegionSignature("AR", {("c", "d"): 1.2, ("d", "c"): 1.1})
        matrix = semantic_affinity([a, b])
        assert matrix.values[0, 1] == 1.0

    def test_symmetric_zero_diagonal(self):
        tables = [random_table(r, [f"t{i}" for i in range(15)], 4, seed=s)
                  for r, s in (("MX", 9), ("AR", 10), ("ES", 11))]
        matrix = semantic_affinity(self.make_signatures(tables))
        assert np.array_equal(matrix.values, matrix.values.T)
        assert np.all(np.diag(matrix.values) == 0.0)

    def test_empty_signature_excluded(self):
        a = RegionSignature("MX", {("a", "b"): 1.2})
        b = RegionSignature("AR", {("a", "b"): 1.3})
        empty = RegionSignature("GQ", {})
        with pytest.warns(UserWarning, match="GQ"):
            matrix = semantic_affinity([a, b, empty])
        assert matrix.labels == ("MX", "AR")

    def test_matches_dense_pipeline_oracle(self):
        # 3 regions x 20 tokens x 5 dims, k=3; some tokens missing per
        # region so presence handling is exercised
        rng = np.random.default_rng(12)
        universe = [f"t{i:02d}" for i in range(20)]
        tables = []
        for region, seed in (("MX", 13), ("AR", 14), ("ES", 15)):
            drop = set(rng.choice(20, size=2, replace=False))
            tokens = [t for i, t in enumerate(universe) if i not in drop]
            tables.append(random_table(region, tokens, 5, seed=seed))
        sigs = self.make_signatures(tables, min_regions=2, k=3)
        ours = semantic_affinity(sigs)
        oracle = dense_pipeline_oracle(tables, min_regions=2, k=3)
        assert np.allclose(ours.values, oracle, atol=1e-9)

    def test_rotation_invariance(self):
        # rotating one table's vectors by an orthogonal transform leaves
        # its affinity row unchanged (cosine is rotation invariant)
        rng = np.random.default_rng(16)
        tokens = [f"t{i}" for i in range(18)]
        tables = [random_table(r, tokens, 6, seed=s)
                  for r, s in (("MX", 17), ("AR", 18), ("ES", 19))]
        base = semantic_affinity(self.make_signatures(tables))
        q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        rotated = EmbeddingTable(region="MX", dim=6, vectors={
            t: v @ q for t, v in tables[0].vectors.items()})
        rotated_matrix = semantic_affinity(
            self.make_signatures([rotated, tables[1], tables[2]]))
        assert np.allclose(base.values, rotated_matrix.values, atol=1e-9)

    def test_noise_monotone_sanity(self):
        # a lightly perturbed copy stays closer than an unrelated table
        rng = np.random.default_rng(20)
        tokens = [f"t{i}" for i in range(25)]
        t1 = random_table("MX", tokens, 5, seed=21)
        noisy = EmbeddingTable(region="AR", dim=5, vectors={
            t: v + 0.01 * rng.normal(size=5) for t, v in t1.vectors.items()})
        other = random_table("ES", tokens, 5, seed=22)
        matrix = semantic_affinity(self.make_signatures([t1, noisy, other]))
        assert matrix["MX", "AR"] < matrix["MX", "ES"]
