"""Tests for the admissible-triple classifier."""

import json
from fractions import Fraction
from pathlib import Path
from unittest.mock import patch

import pytest

from k3n_lattices.classifier import (
    GOLDEN,
    GOLDEN_TABLES,
    UNCORROBORATED,
    candidate_triples,
    corroborate,
    enumerate_table,
    golden_diff,
    induced_check,
    induced_divisibility,
    is_admissible,
    load_golden,
    load_k3_pairs,
    natural_split_check,
    primes_in_scope,
    same_genus,
    verify_representative,
)
from k3n_lattices.errors import IsometryUndecidedError, LatticeError, ScopeError
from k3n_lattices.existence import even_lattice_exists, exists_by_strict_inequality, genus_of, unique_in_genus
from k3n_lattices.expressions import lattice_from_text
from k3n_lattices.forms import cyclic_form, is_isometric
from k3n_lattices.lattice import (
    PrimitiveVector,
    direct_sum,
    hyperbolic_plane,
    named_lattice,
    orthogonal_complement,
    primitive_vector,
    search_primitive_vector,
)

DATA = Path(__file__).parent / "data"


def test_candidate_triples() -> None:
    """Test the raw candidate ranges."""
    assert list(candidate_triples(23)) == [(23, 1, 0), (23, 1, 1)]
    assert len(list(candidate_triples(3))) == sum(min(m, 23 - 2 * m) + 1 for m in range(1, 12))


def test_scope() -> None:
    """Test that out-of-scope inputs are rejected."""
    with pytest.raises(ScopeError):
        is_admissible(3, 2, 10, 0)
    with pytest.raises(ScopeError):
        is_admissible(10, 3, 10, 0)
    with pytest.raises(ScopeError):
        enumerate_table(10, 3)

    scanned, skipped = primes_in_scope(10)
    assert 3 in skipped
    assert 3 not in scanned
    assert scanned == [5, 7, 11, 13, 17, 19, 23]


def test_screening_reasons() -> None:
    """Test the range and parity screens."""
    assert is_admissible(3, 3, 12, 0).verdict.reasons == ["range"]
    assert is_admissible(3, 3, 10, 1).verdict.reasons == ["parity"]
    assert is_admissible(3, 3, 10, 1).admissible is False


def test_worked_exclusions() -> None:
    """Test triples that must be rejected, with their reasons."""
    row = is_admissible(3, 5, 5, 3)
    assert row.admissible is False
    assert any("p-adic-boundary(5)" in tag for tag in row.verdict.reasons)
    assert is_admissible(2, 5, 5, 3).admissible is True

    assert is_admissible(3, 13, 1, 0).admissible is False
    assert is_admissible(2, 13, 1, 0).admissible is False

    for m, a in [(8, 6), (8, 7)]:
        row = is_admissible(4, 3, m, a)
        assert row.admissible is False, (m, a)
        assert any("p-adic-boundary" in tag or tag == "glue-length" for tag in row.verdict.reasons)


def test_boundary_pass() -> None:
    """Test (3, 9, 5) at n = 3 and its representative U(3) + Omega."""
    row = is_admissible(3, 3, 9, 5)
    assert row.admissible is True
    assert "T:p-adic-boundary(3)" in row.verdict.checks
    assert verify_representative("U(3) + Omega", row.t_genus_options[0])
    assert verify_representative("2*U(3) + E6 + E8", row.s_genus)

    # Test the sign convention matters at the boundary
    assert is_admissible(3, 3, 9, 5, sign_convention="t_plus").admissible is False


def test_glue_case_labels() -> None:
    """Test the certificate of a cyclic-glue row."""
    row = is_admissible(4, 3, 8, 1)
    assert row.admissible is True
    assert row.glue_case == "cyclic-glue(ii.a)"
    assert "glue-crosscheck" in row.verdict.checks
    assert "assumption(O(S)->O(q_S) surjective)" in row.verdict.checks
    assert is_isometric(row.t_genus_options[0].form, cyclic_form(6, Fraction(7, 6)))
    assert verify_representative("<2> + E6", row.t_genus_options[0])


def test_rank_one_rows() -> None:
    """Test the rows with rk T = 1."""
    row = is_admissible(4, 3, 11, 0)
    assert row.admissible is True
    assert "special-case(rank-one)" in row.verdict.checks
    assert same_genus(row.t_genus_options[0], genus_of(named_lattice("<2>")))

    assert is_admissible(2, 3, 11, 1).admissible is True
    assert is_admissible(3, 3, 11, 1).admissible is False
    assert is_admissible(3, 3, 11, 0).admissible is False

    for n, square in [(2, 46), (3, 92), (4, 138)]:
        row = is_admissible(n, 23, 1, 1)
        assert row.admissible is True, n
        assert verify_representative(f"<{square}>", row.t_genus_options[0])

    # (23, 1, 0) first appears at n = 24
    assert not any(is_admissible(n, 23, 1, 0).admissible for n in range(2, 24))
    row = is_admissible(24, 23, 1, 0)
    assert row.admissible is True
    assert verify_representative("<2>", row.t_genus_options[0])


@pytest.mark.parametrize("n, p, rows", [(3, 3, 26), (4, 3, 46), (3, 23, 1), (4, 23, 1)])
def test_golden_tables(n: int, p: int, rows: int) -> None:
    """Test the computed tables against the bundled ones, representatives included."""
    golden = load_golden(n, p)
    assert golden is not None
    assert len(golden.rows) == rows

    table = enumerate_table(n, p, jobs=4)
    diff = golden_diff(table, golden)
    assert diff.missing == []
    assert diff.extra == []
    assert diff.representative_failures == []
    assert diff.ok
    assert table.keys() == [row.key for row in golden.rows]
    assert all(row.provenance == GOLDEN for row in table.rows)


@pytest.mark.parametrize("n, p", sorted(GOLDEN_TABLES))
def test_strict_inequality_agrees_on_golden_rows(n: int, p: int) -> None:
    """Test that rank > l(A) with a matching Milgram signature never contradicts the existence test."""
    table = enumerate_table(n, p, jobs=4)
    for row in table.rows:
        assert not [tag for tag in row.verdict.reasons if "strict-inequality" in tag], row.key
        for g in (row.s_genus, *row.t_genus_options):
            assert g is not None
            strict = exists_by_strict_inequality(g)
            assert strict is not False, row.key
            if strict:
                assert even_lattice_exists(g).exists is True, row.key

    # Test that the comparison actually ran
    assert any(tag.endswith(":strict-inequality") for row in table.rows for tag in row.verdict.checks)


def test_strict_inequality_disagreement_is_reported() -> None:
    """Test that a disagreement between the two existence tests rejects the row and names both sides."""
    with patch("k3n_lattices.classifier.exists_by_strict_inequality", return_value=False):
        row = is_admissible(3, 23, 1, 1)
    assert "S:strict-inequality-disagreement" in row.verdict.reasons
    assert row.admissible is False


def test_golden_markers() -> None:
    """Test that markers and representatives are attached to the rows."""
    table = enumerate_table(4, 3)
    (star,) = [row for row in table.rows if row.marker == "star"]
    assert star.key == (3, 11, 0)
    assert star.s_expression == "2*U + 2*E8 + A2"
    assert star.t_expression == "<2>"
    assert {row.key for row in table.rows if row.marker == "diamond"} >= {(3, 10, 3), (3, 8, 5)}

    assert enumerate_table(3, 23).keys() == [(23, 1, 1)]
    assert load_golden(5, 3) is None


def test_uncorroborated_primes() -> None:
    """Test that primes without a bundled table keep the computed provenance."""
    table = enumerate_table(3, 5)
    assert (5, 5, 3) not in table.keys()
    assert all(row.provenance == UNCORROBORATED for row in table.rows)
    assert all(row.marker is None for row in table.rows)


def test_n2_and_n3_differ_only_at_5_5_3() -> None:
    """Test that n = 2 and n = 3 agree on p = 5..19 except for (5, 5, 3)."""
    difference = set()
    for p in [5, 7, 11, 13, 17, 19]:
        two, three = set(enumerate_table(2, p).keys()), set(enumerate_table(3, p).keys())
        assert three <= two
        difference |= two - three
    assert difference == {(5, 5, 3)}


def test_enumeration_is_deterministic() -> None:
    """Test that the thread pool does not change the result."""
    assert enumerate_table(4, 3, jobs=1).keys() == enumerate_table(4, 3, jobs=8).keys()

    seen = []
    enumerate_table(3, 23, on_start=seen.append, on_result=lambda row: seen.append(row.key))
    assert seen == [2, (23, 1, 0), (23, 1, 1)]


def test_genus_identities() -> None:
    """Test the genus identities behind alternative representatives."""
    pairs = [
        ("U + E6 + A2", "U(3) + E8"),
        ("U(3) + 3*A2", "U + E6dual3"),
        ("U + 3*A2 + <-4>", "U(3) + E6 + <-4>"),
    ]
    for left, right in pairs:
        g = genus_of(lattice_from_text(left))
        assert same_genus(g, genus_of(lattice_from_text(right))), (left, right)
        assert unique_in_genus(g) is True

    assert not verify_representative("U", genus_of(named_lattice("U", 3)))


def test_natural_split() -> None:
    """Test the natural split T = T_K3 + <-2(n-1)>."""
    pairs = {(pair.p, pair.m, pair.a): pair for pair in load_k3_pairs(DATA / "k3_p3.json")}
    assert len(pairs) == 24

    row = is_admissible(3, 3, 10, 0)
    assert natural_split_check(row.t_genus_options[0], 3, pairs[(3, 10, 0)], row.s_genus)
    assert not natural_split_check(row.t_genus_options[0], 3, pairs[(3, 10, 2)])

    table = enumerate_table(3, 3)
    corroborate(table, list(pairs.values()))
    labels = {row.key: row.corroboration for row in table.rows}
    assert labels[(3, 10, 0)] == "natural"
    assert labels[(3, 9, 5)] is None
    assert sum(label == "natural" for label in labels.values()) == 24


def test_induced_embedding() -> None:
    """Test the induced embedding of (3, 8, 1) at n = 4 from the K3 pair (3, 8, 2)."""
    k3_t = lattice_from_text("U + 2*A2")
    assert induced_divisibility(direct_sum(k3_t, hyperbolic_plane()), 6, 6) == 3

    row = is_admissible(4, 3, 8, 1)
    assert induced_check(row.t_genus_options[0], 4, k3_t, bound=3)


def test_induced_from_u3_summand() -> None:
    """Test that v = e + f in the U(3) summand of U + U(3) + 2E8 leaves U + 2E8 + <-6>."""
    ambient = lattice_from_text("U(3) + U + 2*E8")
    v = primitive_vector(ambient, (1, 1) + (0,) * 18)
    assert ambient.square(v.coords) == 6
    assert search_primitive_vector(named_lattice("U", 3), 6, 1, divisibility=3) == PrimitiveVector((1, 1))
    complement = orthogonal_complement(ambient, v)
    assert same_genus(genus_of(complement), genus_of(lattice_from_text("U + 2*E8 + <-6>")))


def test_load_k3_pairs_rejects_markers(tmp_path: Path) -> None:
    """Test that unknown markers are rejected."""
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"p": 3, "rows": [{"p": 3, "m": 10, "a": 0, "S": "2*U", "T": "U", "marker": "?"}]}))
    with pytest.raises(LatticeError, match="Unknown marker"):
        load_k3_pairs(path)


def test_undecided_genus_comparison() -> None:
    """Test that a capped 2-adic search leaves genus comparisons undecided rather than False."""
    g = genus_of(named_lattice("U", 2))
    undecided = IsometryUndecidedError(16, 1)
    with patch("k3n_lattices.classifier.is_isometric", side_effect=undecided):
        assert same_genus(g, g) is None
        assert verify_representative("U(2)", g) is None
        # Different signatures are decided before any isometry search
        assert same_genus(g, genus_of(named_lattice("<2>"))) is False

    table = enumerate_table(3, 23)
    golden = load_golden(3, 23)
    assert golden is not None
    with patch("k3n_lattices.classifier.is_isometric", side_effect=undecided):
        diff = golden_diff(table, golden)
    assert diff.undecided == [((23, 1, 1), "S"), ((23, 1, 1), "T")]
    assert diff.representative_failures == []
    assert diff.ok


def test_row_note_for_5_5_3() -> None:
    """Test that the n = 2 row (5, 5, 3) explains why it is missing at n = 3."""
    row = is_admissible(2, 5, 5, 3)
    assert row.note is not None
    assert "U(5) + <-10>" in row.note
    assert any(verify_representative("U(5) + <-10>", g) for g in row.t_genus_options)
    assert is_admissible(3, 5, 5, 3).note is None

    assert [row.key for row in enumerate_table(2, 5).rows if row.note] == [(5, 5, 3)]
