"""Transitive-commutativity analysis for finite groups.

When commuting is a transitive relation on the non-central elements of a
finite group G, the inclusion-maximal abelian subgroups cover G and meet
pairwise in the center.  Counting that cover yields a family of integer
invariants: the free rank of the configuration-space fundamental group for
the cover's member orders, the free rank attached to pairwise-commuting
tuples in G itself, and the index bookkeeping tying the two together.
This module computes those numbers exactly (arbitrary precision) and the
solvability verdict they encode.

Everything here is counting and integer arithmetic; no space is ever
built.  Brute-force subgroup enumeration is intentional and is adequate
for group orders into the hundreds.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

from .finitegroup import (
    FiniteGroup,
    Subgroup,
    center,
    centralizer,
    derived_subgroup,
    is_solvable,
    subgroup_closure,
)
from .simplicial import from_facets, rank_rho


def is_CT(G: FiniteGroup) -> bool:
    """True iff commuting is transitive on non-central elements.

    Directly: for all non-central a, b, c, if a commutes with b and b with
    c then a commutes with c.  Checked per middle element b: every pair of
    non-central members of the centralizer of b must commute.
    """
    central = center(G).members
    t = G.table
    for b in range(G.order):
        if b in central:
            continue
        others = [x for x in centralizer(G, b).members if x not in central]
        for i, a in enumerate(others):
            for c in others[i + 1 :]:
                if t[a][c] != t[c][a]:
                    return False
    return True


def _commutes_with_all(G: FiniteGroup, x: int, members: frozenset[int]) -> bool:
    t = G.table
    return all(t[x][a] == t[a][x] for a in members)


def maximal_abelian_cover(G: FiniteGroup) -> tuple[tuple[Subgroup, ...], int]:
    """All inclusion-maximal abelian subgroups, and their count.

    Every element lies in some maximal abelian subgroup, so the returned
    family always covers G.  Enumeration walks the poset of abelian
    subgroups upward: extend a closed abelian subgroup by any element
    commuting with all of it, close, repeat; a state with no extension is
    maximal.  States are memoized, so the cost is bounded by the number of
    abelian subgroups times the group order.
    """
    if G.is_abelian():
        return (Subgroup(G, frozenset(range(G.order))),), 1
    seen: set[frozenset[int]] = set()
    maximal: set[frozenset[int]] = set()
    stack = [subgroup_closure(G, (g,)).members for g in range(1, G.order)]
    while stack:
        members = stack.pop()
        if members in seen:
            continue
        seen.add(members)
        extensions = [
            x
            for x in range(G.order)
            if x not in members and _commutes_with_all(G, x, members)
        ]
        if not extensions:
            maximal.add(members)
            continue
        for x in extensions:
            grown = subgroup_closure(G, members | {x}).members
            if grown not in seen:
                stack.append(grown)
    ordered = sorted(maximal, key=sorted)
    return tuple(Subgroup(G, m) for m in ordered), len(ordered)


def ng_rank(G: FiniteGroup, cover: Sequence[Subgroup]) -> int:
    """Free rank attached to the pairwise-commuting structure of G.

    General form: 1 - [G:Z] + sum([G:Z] - [G:G_i]) over the cover.  With
    trivial center this rearranges to 1 + (n-1)|G| - sum(|G|/|G_i|); both
    are evaluated and must agree in that case.
    """
    z = center(G).order
    idx_z = G.order // z
    general = 1 - idx_z + sum(idx_z - sub.index() for sub in cover)
    if z == 1:
        n = len(cover)
        rearranged = 1 + (n - 1) * G.order - sum(G.order // sub.order for sub in cover)
        if general != rearranged:
            raise RuntimeError(
                f"rank formula forms disagree: {general} vs {rearranged}"
            )
    return general


@dataclass(frozen=True)
class CTRankReport:
    """Rank and index bookkeeping for a CT group with trivial center.

    cover_kernel_rank is the free rank of the kernel of the comparison map
    from the free product of the cover's subgroups to their direct product
    (edgeless-complex rank formula on the cover's orders).
    commuting_space_rank is ng_rank.  common_subgroup_rank is the rank of
    the shared finite-index free subgroup, computed two independent ways
    that must coincide: index commutator_subgroup_order in the cover
    kernel, index quotient_order in the commuting-space group.
    """

    group_order: int
    center_order: int
    covering_number: int
    cover_orders: tuple[int, ...]
    cover_kernel_rank: int
    commuting_space_rank: int
    rank_gap: int
    commutator_subgroup_order: int
    quotient_order: int
    common_subgroup_rank: int


def rank_gap_and_indices(G: FiniteGroup, cover: Sequence[Subgroup]) -> CTRankReport:
    """Evaluate both rank formulas over a maximal-abelian cover.

    Requires trivial center and a nonabelian group (covering number >= 3).
    Raises RuntimeError when internal identities fail; that is a bug
    signal, never an input problem.
    """
    if center(G).order != 1:
        raise ValueError("rank comparison requires trivial center")
    n = len(cover)
    if n < 3:
        raise ValueError("rank comparison requires a nonabelian group")
    orders = tuple(sub.order for sub in cover)
    rho = rank_rho(from_facets(n, []), orders, "closed_form")
    ng = ng_rank(G, cover)
    gap = rho - ng
    if gap <= 0:
        raise RuntimeError(f"rank gap must be positive, got {gap}")
    commutator_order = derived_subgroup(G).order
    total = prod(orders)
    abelianized = G.order // commutator_order
    if (total * commutator_order) % G.order != 0:
        raise RuntimeError("quotient index is not an integer")
    quotient = total // abelianized
    via_cover = 1 + commutator_order * (rho - 1)
    via_commuting = 1 + quotient * (ng - 1)
    if via_cover != via_commuting:
        raise RuntimeError(
            f"shared-subgroup rank disagrees: {via_cover} vs {via_commuting}"
        )
    return CTRankReport(
        group_order=G.order,
        center_order=1,
        covering_number=n,
        cover_orders=orders,
        cover_kernel_rank=rho,
        commuting_space_rank=ng,
        rank_gap=gap,
        commutator_subgroup_order=commutator_order,
        quotient_order=quotient,
        common_subgroup_rank=via_cover,
    )


@dataclass(frozen=True)
class ParityReport:
    """Parity table for odd group order: rank parities and the three
    pairwise index ratios, which must all be odd integers."""

    applicable: bool
    reason: str
    rank_parities: tuple[str, str, str]
    ratios: tuple[int, int, int]
    all_ratios_odd: bool

    @staticmethod
    def inapplicable(reason: str) -> "ParityReport":
        return ParityReport(False, reason, ("", "", ""), (0, 0, 0), False)


def parity_report(fragment: CTRankReport) -> ParityReport:
    """Oddness bookkeeping for odd-order groups.

    The three ranks (cover kernel, commuting space, common subgroup) share
    one parity, and the ratios common/commuting, common/cover and
    cover/commuting of the shifted ranks (r-1) are odd integers.  For even
    group order the table is reported inapplicable rather than raising.
    """
    if fragment.group_order % 2 == 0:
        return ParityReport.inapplicable("group order is even")
    rho = fragment.cover_kernel_rank
    ng = fragment.commuting_space_rank
    common = fragment.common_subgroup_rank
    parities = tuple("even" if r % 2 == 0 else "odd" for r in (rho, ng, common))
    if len(set(parities)) != 1:
        raise RuntimeError(f"rank parities disagree: {parities}")
    if (rho - 1) % (ng - 1) != 0:
        raise RuntimeError("shifted ranks are not in integer ratio")
    ratios = (
        (common - 1) // (ng - 1),
        (common - 1) // (rho - 1),
        (rho - 1) // (ng - 1),
    )
    all_odd = all(r % 2 == 1 for r in ratios)
    if not all_odd:
        raise RuntimeError(f"index ratios must be odd for odd order: {ratios}")
    return ParityReport(True, "", parities, ratios, all_odd)


@dataclass(frozen=True)
class SolvabilityVerdict:
    perfect: bool
    h1_surjective: bool
    solvable: bool


def feit_thompson_criterion(G: FiniteGroup) -> SolvabilityVerdict:
    """Solvability read off the first-homology comparison map.

    For a CT group with trivial center, the map on first homology from the
    pairwise-commuting space to the wedge-of-classifying-spaces model is
    surjective exactly when G is perfect, and G is solvable exactly when
    the map is not surjective.  Both sides are computed independently
    (derived series vs derived subgroup) and must agree.
    """
    if center(G).order != 1:
        raise ValueError("criterion requires trivial center")
    if not is_CT(G):
        raise ValueError("criterion requires transitive commuting")
    perfect = derived_subgroup(G).order == G.order
    solvable = is_solvable(G)
    if solvable == perfect:
        raise RuntimeError(
            "solvability criterion mismatch: "
            f"perfect={perfect}, solvable={solvable}"
        )
    return SolvabilityVerdict(perfect=perfect, h1_surjective=perfect, solvable=solvable)


@dataclass(frozen=True)
class CTReport:
    """Full analysis bundle for one group, as surfaced by the CLI."""

    group_order: int
    is_ct: bool
    center_order: int
    ranks: CTRankReport
    parity: ParityReport
    verdict: SolvabilityVerdict


def ct_report(G: FiniteGroup) -> CTReport:
    """Run the whole suite on one CT group with trivial center."""
    if not is_CT(G):
        raise ValueError("group is not CT: commuting is not transitive")
    z = center(G).order
    if z != 1:
        raise ValueError(f"analysis requires trivial center, |Z| = {z}")
    cover, _ = maximal_abelian_cover(G)
    ranks = rank_gap_and_indices(G, cover)
    return CTReport(
        group_order=G.order,
        is_ct=True,
        center_order=z,
        ranks=ranks,
        parity=parity_report(ranks),
        verdict=feit_thompson_criterion(G),
    )
