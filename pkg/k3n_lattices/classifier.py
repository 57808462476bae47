"""Admissible triples (p, m, a) for order-p isometries of the K3^[n] lattice."""

import concurrent.futures
import json
import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Final, Literal

import sympy

from .errors import IsometryUndecidedError, LatticeError, ScopeError
from .existence import (
    ExistenceVerdict,
    Genus,
    SignConvention,
    even_lattice_exists,
    exists_by_strict_inequality,
    genus_of,
)
from .expressions import LatticeExpr, evaluate, parse
from .forms import format_form, is_isometric, orthogonal_sum
from .glue import (
    L_SIGNATURE,
    MAX_PRIME,
    GlueCase,
    check_odd_prime,
    enumerate_glue_cases,
    q_L_of,
    q_S_of,
    rank_one_cases,
    s_rank_k,
    s_signature,
    t_signature,
)
from .lattice import (
    GramLattice,
    angle_lattice,
    determinant,
    direct_sum,
    hyperbolic_plane,
    iter_primitive_vectors,
    orthogonal_complement,
)

Marker = Literal["club", "natural", "diamond", "star", "none"]
MARKERS: Final = ("club", "natural", "diamond", "star", "none")

DEFAULT_BOUND: Final = 5
# Candidate vectors examined per induced-embedding search
INDUCED_SEARCH_LIMIT: Final = 200
# Largest ambient rank the induced-embedding box search is run on
INDUCED_MAX_RANK: Final = 8

UNCORROBORATED: Final = "computed, externally uncorroborated"
GOLDEN: Final = "golden"

GOLDEN_TABLES: Final = frozenset({(3, 3), (4, 3), (3, 23), (4, 23)})
SURJECTIVITY_ASSUMPTION: Final = "assumption(O(S)->O(q_S) surjective)"

# Rows whose status differs between neighbouring n, keyed by (n, (p, m, a))
ROW_NOTES: Final = {
    (2, (5, 5, 3)): "admissible for n = 2 only: T = U(5) + <-10> realises the T-genus; absent for n = 3",
}


@dataclass(frozen=True)
class AdmissibleTriple:
    """A candidate (p, m, a) together with the genera and the certificate of the decision."""

    p: int
    m: int
    a: int
    alpha: int
    beta: int
    s_genus: Genus | None
    t_genus_options: tuple[Genus, ...]
    verdict: ExistenceVerdict
    glue_case: str | None = None
    s_expression: str | None = None
    t_expression: str | None = None
    marker: Marker | None = None
    provenance: str = UNCORROBORATED
    corroboration: str | None = None
    note: str | None = None

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.p, self.m, self.a)

    @property
    def admissible(self) -> bool | None:
        return self.verdict.exists


@dataclass
class ClassificationTable:
    """Admissible rows for one n, sorted by (p desc, m desc, a asc)."""

    n: int
    rows: list[AdmissibleTriple] = field(default_factory=list)
    skipped_primes: list[int] = field(default_factory=list)

    def keys(self) -> list[tuple[int, int, int]]:
        return [row.key for row in self.rows]


@dataclass(frozen=True)
class GoldenRow:
    p: int
    m: int
    a: int
    s: str
    t: str
    marker: Marker

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.p, self.m, self.a)


@dataclass(frozen=True)
class GoldenTable:
    n: int | None
    p: int
    rows: tuple[GoldenRow, ...]


@dataclass
class GoldenDiff:
    """Differences between a computed table and a bundled one."""

    missing: list[tuple[int, int, int]] = field(default_factory=list)
    extra: list[tuple[int, int, int]] = field(default_factory=list)
    representative_failures: list[tuple[tuple[int, int, int], str]] = field(default_factory=list)
    # Representatives whose genus comparison hit the isometry search cap
    undecided: list[tuple[tuple[int, int, int], str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.missing or self.extra or self.representative_failures)


@dataclass(frozen=True)
class K3Pair:
    """Invariant and co-invariant genera of an order-p isometry of the K3 lattice."""

    p: int
    m: int
    a: int
    t_expression: str
    s_expression: str
    t_genus: Genus
    s_genus: Genus


def same_genus(a: Genus, b: Genus) -> bool | None:
    """True or False when decided; None when the 2-parts exceed the isometry search cap."""
    if a.signature != b.signature:
        return False
    try:
        return is_isometric(a.form, b.form)
    except IsometryUndecidedError as e:
        logging.warning(f"{e}; genus comparison left undecided")
        return None


def _rejected(
    p: int, m: int, a: int, alpha: int, beta: int, reason: str, convention: SignConvention
) -> AdmissibleTriple:
    verdict = ExistenceVerdict(exists=False, reasons=[reason], sign_convention=convention)
    return AdmissibleTriple(p, m, a, alpha, beta, None, (), verdict)


def _merge(verdict: ExistenceVerdict, part: ExistenceVerdict, prefix: str) -> None:
    verdict.reasons.extend(f"{prefix}:{tag}" for tag in part.reasons)
    verdict.checks.extend(f"{prefix}:{tag}" for tag in part.checks)
    verdict.boundary_primes.extend(q for q in part.boundary_primes if q not in verdict.boundary_primes)


def _strict_crosscheck(verdict: ExistenceVerdict, part: ExistenceVerdict, g: Genus, prefix: str) -> None:
    """Compare an existence verdict with the rank > l(A) criterion wherever both decide."""
    strict = exists_by_strict_inequality(g)
    if strict is None or part.exists is None:
        return
    if strict == part.exists:
        verdict.checks.append(f"{prefix}:strict-inequality")
        return
    genus_text = f"{g.signature} {format_form(g.form)}"
    logging.warning(f"Strict-inequality criterion says {strict}, existence test says {part.exists} for {genus_text}")
    verdict.reasons.append(f"{prefix}:strict-inequality-disagreement")


def _glue_checks(case: GlueCase, s_size: int, l_size: int) -> list[tuple[str, bool]]:
    results = []
    if case.x is not None:
        results.append(("glue-crosscheck", is_isometric(case.q_t_target, case.q_t_computed)))
    # |A_T| |Γ|² = |A_S| |A_L|
    results.append(("glue-bookkeeping", case.q_t_computed.size * case.x_order**2 == s_size * l_size))
    return results


def is_admissible(
    n: int,
    p: int,
    m: int,
    a: int,
    *,
    sign_convention: SignConvention = "t_minus",
) -> AdmissibleTriple:
    """Decide whether (p, m, a) is admissible for K3^[n]-type lattices.

    The pipeline screens range and parity, takes the rank-one shortcut when
    rk T = 1, tests existence of S, then keeps the glue cases of glue length a
    and tests existence of T for each.

    Raises:
        ScopeError: If p = 2, p > 23 or p² divides 2(n-1).
    """
    check_odd_prime(p)
    q_l = q_L_of(n, p)
    alpha, beta = q_l.alpha, q_l.beta

    if m < 1 or (p - 1) * m > L_SIGNATURE.rank - 1 or not 0 <= a <= min(m, 23 - (p - 1) * m):
        return _rejected(p, m, a, alpha, beta, "range", sign_convention)
    if alpha == 0 and (m - a) % 2:
        return _rejected(p, m, a, alpha, beta, "parity", sign_convention)

    verdict = ExistenceVerdict(exists=True, sign_convention=sign_convention)
    rank_one = None
    if (p - 1) * m == L_SIGNATURE.rank - 1:
        rank_one = next((case for case in rank_one_cases(n, p) if (case.m, case.a) == (m, a)), None)
        if rank_one is None:
            verdict.exists = False
            verdict.reasons.append("special-case(rank-one)")
            return AdmissibleTriple(p, m, a, alpha, beta, None, (), verdict)
        verdict.checks.append("special-case(rank-one)")

    q_s = q_S_of(p, m, a, alpha)
    s_genus = Genus(s_signature(p, m), q_s)
    s_verdict = even_lattice_exists(s_genus, sign_convention=sign_convention)
    _merge(verdict, s_verdict, "S")
    _strict_crosscheck(verdict, s_verdict, s_genus, "S")
    if alpha == 1:
        verdict.checks.append(SURJECTIVITY_ASSUMPTION)

    k = s_rank_k(m, a, alpha)
    cases = [
        case
        for case in enumerate_glue_cases(q_s, q_l.form, p, alpha, s_signature=s_genus.signature)
        if case.glue_length == a
    ]
    logging.debug(f"({p},{m},{a}) n={n}: k={k}, glue cases {[case.label for case in cases]}")
    if not cases:
        verdict.reasons.append("glue-length")

    t_options: list[Genus] = []
    labels: list[str] = []
    t_undecided = False
    for case in cases:
        for tag, passed in _glue_checks(case, q_s.size, q_l.form.size):
            (verdict.checks if passed else verdict.reasons).append(tag)
        t_genus = Genus(t_signature(p, m), case.q_t_target)
        t_verdict = even_lattice_exists(t_genus, sign_convention=sign_convention)
        _merge(verdict, t_verdict, "T")
        _strict_crosscheck(verdict, t_verdict, t_genus, "T")
        if rank_one is not None:
            passed = same_genus(genus_of(angle_lattice(rank_one.t_square)), t_genus)
            if passed is None:
                verdict.reasons.append("rank-one-representative(undecided)")
                t_undecided = True
                continue
            (verdict.checks if passed else verdict.reasons).append("rank-one-representative")
            if not passed:
                continue
        if t_verdict.exists:
            t_options.append(t_genus)
            labels.append(f"{case.tag}({case.label})")
        elif t_verdict.exists is None:
            t_undecided = True

    s_exists = not any(tag.startswith("S:") for tag in verdict.reasons)
    if s_exists and t_options and "glue-crosscheck" not in verdict.reasons:
        verdict.exists = True
    elif s_exists and t_undecided:
        verdict.exists = None
    else:
        verdict.exists = False
    return AdmissibleTriple(
        p=p,
        m=m,
        a=a,
        alpha=alpha,
        beta=beta,
        s_genus=s_genus,
        t_genus_options=tuple(t_options),
        verdict=verdict,
        glue_case=", ".join(labels) or None,
        note=ROW_NOTES.get((n, (p, m, a))),
    )


def candidate_triples(p: int) -> Iterator[tuple[int, int, int]]:
    """Every (p, m, a) inside the rank range, before any screening."""
    for m in range(1, 22 // (p - 1) + 1):
        for a in range(0, min(m, 23 - (p - 1) * m) + 1):
            yield (p, m, a)


def primes_in_scope(n: int, p: int | None = None) -> tuple[list[int], list[int]]:
    """Primes to scan and primes skipped because they are out of scope for n."""
    if p is not None:
        check_odd_prime(p)
        q_L_of(n, p)
        return [p], []
    scanned, skipped = [], []
    for q in sympy.primerange(3, MAX_PRIME + 1):
        try:
            q_L_of(n, q)
        except ScopeError as e:
            logging.warning(f"Skipping p = {q}: {e}")
            skipped.append(int(q))
            continue
        scanned.append(int(q))
    return scanned, skipped


def enumerate_table(
    n: int,
    p: int | None = None,
    *,
    jobs: int = 1,
    sign_convention: SignConvention = "t_minus",
    golden: bool = True,
    on_start: Callable[[int], None] | None = None,
    on_result: Callable[[AdmissibleTriple], None] | None = None,
) -> ClassificationTable:
    """Collect the admissible rows for n, optionally for a single prime.

    Rows are computed independently (in a thread pool when jobs > 1) and
    sorted afterwards, so the output does not depend on the schedule.

    Args:
        n: The K3^[n] parameter.
        p: A single odd prime, or None for every prime in scope.
        jobs: Worker threads.
        sign_convention: Forwarded to the existence tests.
        golden: Attach representatives and markers from the bundled tables.
        on_start: Called with the number of candidate triples before the scan.
        on_result: Called once per candidate triple, e.g. to advance a progress bar.
    """
    primes, skipped = primes_in_scope(n, p)
    candidates = [triple for q in primes for triple in candidate_triples(q)]
    logging.debug(f"Enumerating {len(candidates)} candidate triples for n = {n}, primes {primes}")
    if on_start is not None:
        on_start(len(candidates))

    def decide(triple: tuple[int, int, int]) -> AdmissibleTriple:
        result = is_admissible(n, *triple, sign_convention=sign_convention)
        if on_result is not None:
            on_result(result)
        return result

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(decide, candidates))
    else:
        results = [decide(triple) for triple in candidates]

    rows = sorted((row for row in results if row.admissible), key=lambda row: (-row.p, -row.m, row.a))
    table = ClassificationTable(n=n, rows=rows, skipped_primes=skipped)
    if golden:
        for q in primes:
            bundled = load_golden(n, q)
            if bundled is not None:
                attach_golden(table, bundled)
    return table


# Representatives


def verify_representative(expr: LatticeExpr | str, g: Genus) -> bool | None:
    """Whether the lattice of the expression lies in the genus g; None when undecided."""
    lattice = evaluate(parse(expr, lenient=True) if isinstance(expr, str) else expr)
    return same_genus(genus_of(lattice), g)


def natural_split_check(t_genus: Genus, n: int, k3_pair: K3Pair, s_genus: Genus | None = None) -> bool:
    """True iff t_genus is the genus of T_K3 ⊕ ⟨-2(n-1)⟩ and the S-genera agree; undecided counts as False."""
    delta = genus_of(angle_lattice(-2 * (n - 1)))
    split = Genus(k3_pair.t_genus.signature + delta.signature, orthogonal_sum(k3_pair.t_genus.form, delta.form))
    if same_genus(split, t_genus) is not True:
        return False
    return s_genus is None or same_genus(s_genus, k3_pair.s_genus) is True


def induced_divisibility(ambient: GramLattice, square: int, target_order: int) -> int | None:
    """d with square·|det| / d² = target_order, when it is an integer."""
    numerator = square * abs(determinant(ambient))
    if target_order < 1 or numerator % target_order:
        return None
    d = math.isqrt(numerator // target_order)
    return d if d * d == numerator // target_order else None


def induced_check(t_genus: Genus, n: int, k3_t: GramLattice, bound: int = DEFAULT_BOUND) -> bool:
    """Search T_K3 ⊕ U for a primitive v with v² = 2(n-1) whose complement lies in t_genus.

    U comes last so that its coordinates fall in the vectorized tail of the box scan.
    Ambients above INDUCED_MAX_RANK are not searched.
    """
    ambient = direct_sum(k3_t, hyperbolic_plane())
    if ambient.rank > INDUCED_MAX_RANK:
        logging.debug(f"Ambient rank {ambient.rank} exceeds {INDUCED_MAX_RANK}; induced search skipped")
        return False
    square = 2 * (n - 1)
    divisibility = induced_divisibility(ambient, square, t_genus.form.size)
    if divisibility is None:
        logging.debug(f"No divisibility gives |A_T| = {t_genus.form.size} inside a lattice of rank {ambient.rank}")
        return False
    for count, v in enumerate(iter_primitive_vectors(ambient, square, bound, divisibility=divisibility)):
        if count >= INDUCED_SEARCH_LIMIT:
            break
        if same_genus(genus_of(orthogonal_complement(ambient, v)), t_genus):
            logging.debug(f"Induced embedding found: v = {list(v.coords)}")
            return True
    return False


# Golden tables


def _parse_golden(data: dict) -> GoldenTable:
    rows = []
    for entry in data["rows"]:
        marker = entry.get("marker", "none")
        if marker not in MARKERS:
            raise LatticeError(f"Unknown marker {marker!r}")
        rows.append(GoldenRow(int(entry["p"]), int(entry["m"]), int(entry["a"]), entry["S"], entry["T"], marker))
    return GoldenTable(n=data.get("n"), p=int(data["p"]), rows=tuple(rows))


def load_golden(n: int, p: int) -> GoldenTable | None:
    """The bundled reference table for (n, p), if there is one."""
    if (n, p) not in GOLDEN_TABLES:
        return None
    text = resources.files("k3n_lattices").joinpath("golden", f"n{n}_p{p}.json").read_text(encoding="utf-8")
    return _parse_golden(json.loads(text))


def attach_golden(table: ClassificationTable, golden: GoldenTable) -> None:
    by_key = {row.key: row for row in golden.rows}
    for i, row in enumerate(table.rows):
        entry = by_key.get(row.key)
        if row.p != golden.p:
            continue
        table.rows[i] = replace(
            row,
            s_expression=entry.s if entry else None,
            t_expression=entry.t if entry else None,
            marker=entry.marker if entry else None,
            provenance=GOLDEN if entry else UNCORROBORATED,
        )


def golden_diff(table: ClassificationTable, golden: GoldenTable) -> GoldenDiff:
    """Compare triple sets and check every listed S and T against the computed genera."""
    diff = GoldenDiff()
    computed = {row.key: row for row in table.rows if row.p == golden.p}
    expected = {row.key: row for row in golden.rows}
    diff.missing = sorted(set(expected) - set(computed), key=lambda key: (-key[1], key[2]))
    diff.extra = sorted(set(computed) - set(expected), key=lambda key: (-key[1], key[2]))
    for key, entry in expected.items():
        row = computed.get(key)
        if row is None:
            continue
        s_match = verify_representative(entry.s, row.s_genus) if row.s_genus is not None else False
        t_matches = [verify_representative(entry.t, g) for g in row.t_genus_options]
        t_match = True if any(t_matches) else (None if None in t_matches else False)
        for which, match in (("S", s_match), ("T", t_match)):
            if match is None:
                diff.undecided.append((key, which))
            elif not match:
                diff.representative_failures.append((key, which))
    logging.debug(f"Golden diff for p = {golden.p}: {len(diff.missing)} missing, {len(diff.extra)} extra")
    return diff


# K3 data


def load_k3_pairs(path: Path) -> list[K3Pair]:
    """Read K3 invariant/co-invariant pairs stored in the golden-table layout."""
    table = _parse_golden(json.loads(Path(path).read_text(encoding="utf-8")))
    pairs = []
    for row in table.rows:
        t_lattice = evaluate(parse(row.t, lenient=True))
        s_lattice = evaluate(parse(row.s, lenient=True))
        pairs.append(K3Pair(row.p, row.m, row.a, row.t, row.s, genus_of(t_lattice), genus_of(s_lattice)))
    logging.debug(f"Loaded {len(pairs)} K3 pairs from {path}")
    return pairs


def corroborate(table: ClassificationTable, pairs: list[K3Pair], bound: int = DEFAULT_BOUND) -> None:
    """Label rows realised by a natural split, or by an induced embedding from the K3 pair with a + 1."""
    by_key = {(pair.p, pair.m, pair.a): pair for pair in pairs}
    for i, row in enumerate(table.rows):
        label = None
        natural = by_key.get(row.key)
        if natural is not None and any(
            natural_split_check(g, table.n, natural, row.s_genus) for g in row.t_genus_options
        ):
            label = "natural"
        else:
            source = by_key.get((row.p, row.m, row.a + 1))
            if source is not None:
                k3_t = evaluate(parse(source.t_expression, lenient=True))
                if any(induced_check(g, table.n, k3_t, bound) for g in row.t_genus_options):
                    label = "induced"
        table.rows[i] = replace(row, corroboration=label)
