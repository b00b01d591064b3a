"""Embedding file parsing and common-token selection tests."""

import numpy as np
import pytest

from regiolect.embeddings import (
    EmbeddingTable,
    common_tokens,
    load_embeddings,
    save_embeddings,
)


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def table(region, tokens, dim=4, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingTable(region=region, dim=dim, vectors={
        t: rng.normal(size=dim) for t in tokens})


class TestLoadEmbeddings:
    def test_small_file(self, tmp_path):
        path = tmp_path / "v.vec"
        write_lines(path, ["2 3", "hola 1.0 2.0 3.0", "adios -1.5 0.25 9.0"])
        t = load_embeddings(path, "MX")
        assert t.region == "MX"
        assert t.dim == 3
        assert len(t) == 2
        assert np.array_equal(t.vectors["hola"], [1.0, 2.0, 3.0])

    def test_short_row_reports_line(self, tmp_path):
        path = tmp_path / "v.vec"
        write_lines(path, ["2 3", "hola 1.0 2.0 3.0", "adios 1.0 2.0"])
        with pytest.raises(ValueError, match=":3:"):
            load_embeddings(path, "MX")

    @pytest.mark.parametrize("rows,err", [
        (["x 3"], "header"),
        (["1 3", "hola 1.0 nan 2.0"], "non-finite"),
        (["1 3", "hola 0.0 0.0 0.0"], "zero vector"),
        (["1 3", "hola 1.0 x 2.0"], "non-numeric"),
        (["2 2", "a 1.0 2.0", "a 3.0 4.0"], "duplicate"),
        (["3 2", "a 1.0 2.0", "b 3.0 4.0"], "declares 3"),
    ])
    def test_malformed(self, tmp_path, rows, err):
        path = tmp_path / "v.vec"
        write_lines(path, rows)
        with pytest.raises(ValueError, match=err):
            load_embeddings(path, "MX")

    def test_roundtrip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(17)
        t = EmbeddingTable(region="AR", dim=50, vectors={
            f"tok{i}": rng.normal(size=50) for i in range(1000)})
        path = tmp_path / "v.vec"
        save_embeddings(t, path)
        back = load_embeddings(path, "AR")
        assert back.dim == t.dim
        assert set(back.vectors) == set(t.vectors)
        for token, vec in t.vectors.items():
            assert np.array_equal(back.vectors[token], vec)

    def test_save_rejects_space_token(self, tmp_path):
        t = EmbeddingTable(region="AR", dim=2,
                           vectors={"a b": np.array([1.0, 2.0])})
        with pytest.raises(ValueError):
            save_embeddings(t, tmp_path / "v.vec")


class TestCommonTokens:
    def test_threshold_boundary(self):
        tables = [table(f"R{i}", ["shared"] + [f"only{i}"], seed=i)
                  for i in range(6)]
        tables[5].vectors.pop("shared")
        common = common_tokens(tables, min_regions=5)
        assert "shared" in common
        assert "only0" not in common

    def test_min_regions_one_is_union(self):
        tables = [table("A", ["x", "y"]), table("B", ["y", "z"])]
        common = common_tokens(tables, min_regions=1)
        assert common.tokens == ("x", "y", "z")

    def test_membership_count_oracle(self):
        rng = np.random.default_rng(23)
        universe = [f"t{i}" for i in range(80)]
        tables = []
        for i in range(7):
            members = [t for t in universe if rng.random() < 0.5]
            tables.append(table(f"R{i}", members, seed=100 + i))
        for threshold in (1, 3, 5, 7):
            got = common_tokens(tables, min_regions=threshold)
            # brute-force membership loop
            want = sorted(
                t for t in universe
                if sum(t in tb.vectors for tb in tables) >= threshold)
            assert list(got.tokens) == want

    def test_lexicographic_order(self):
        tables = [table("A", ["zeta", "alfa", "mu"]),
                  table("B", ["zeta", "alfa", "mu"])]
        assert common_tokens(tables, 2).tokens == ("alfa", "mu", "zeta")

    def test_empty_result_error(self):
        tables = [table("A", ["x"]), table("B", ["y"])]
        with pytest.raises(ValueError):
            common_tokens(tables, min_regions=2)

    def test_min_regions_validation(self):
        tables = [table("A", ["x"])]
        with pytest.raises(ValueError):
            common_tokens(tables, min_regions=2)
        with pytest.raises(ValueError):
            common_tokens(tables, min_regions=0)
