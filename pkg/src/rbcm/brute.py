"""Independent oracles: exhaustive map and automorphism enumeration.

Nothing here reuses the structured classification machinery as a source of
truth: automorphisms come from generator-image scans, regularity from arc
propagation counts, and map enumeration either from the definitional scan
over generating sequences (the naive tier) or from the coset-extension scan
organized over index-2 subgroups.  Outputs re-verify from definitions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import autos, maps
from .groups import (
    DeltaParams,
    GroupElement,
    GroupError,
    Metacyclic,
    index2_subgroups_all,
    plus_presentation,
)
from .maps import BalanceData, CayleyMap, SkewMorphism


@dataclass(frozen=True)
class SearchBudget:
    """Hard limits enforced before and during searches."""

    max_order: int = 64
    max_candidates: int = 5_000_000
    time_limit_s: "Optional[float]" = None


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


@dataclass
class FoundMap:
    cmap: CayleyMap
    skew: SkewMorphism
    balance: BalanceData

    def to_json_dict(self) -> dict:
        doc = maps.map_to_json_dict(self.cmap, self.skew)
        doc["t"] = self.balance.t
        doc["ell"] = self.balance.ell
        doc["type"] = self.balance.map_type
        doc["valency"] = self.cmap.d
        return doc


# -- automorphism enumeration by generator images ------------------------------


def enumerate_automorphisms(
    G: Metacyclic, budget: "Optional[SearchBudget]" = None
) -> "list[tuple[GroupElement, GroupElement]]":
    """All (image of a, image of b) pairs preserving the relations and generating.

    A candidate pair induces the map ``a^x b^y -> A^x B^y``; the relations
    make it a homomorphism and bijectivity makes it an automorphism.
    """
    budget = budget or SearchBudget(max_order=1 << 12)
    if G.order > budget.max_order:
        raise BudgetExceeded(f"order {G.order} exceeds the budget {budget.max_order}")
    orders = {g: G.element_order(g) for g in G.elements()}
    a_cands = [g for g, o in orders.items() if o == G.element_order(G.alpha())]
    b_cands = [g for g, o in orders.items() if o == G.element_order(G.beta())]
    if len(a_cands) * len(b_cands) > budget.max_candidates:
        raise BudgetExceeded(
            f"{len(a_cands)}x{len(b_cands)} candidate pairs exceed the budget"
        )
    out = []
    for A in a_cands:
        A_r = G.pow(A, G.r)
        for B in b_cands:
            if G.mul(G.mul(B, A), G.inv(B)) != A_r:
                continue
            perm = _pair_perm(G, A, B)
            if np.bincount(perm, minlength=G.order).max() == 1:
                out.append((A, B))
    return out


def _pair_perm(G: Metacyclic, A: GroupElement, B: GroupElement) -> np.ndarray:
    """The endomorphism ``a^x b^y -> A^x B^y`` as an index array."""
    a_pows = np.empty(G.n, dtype=np.int64)
    cur = G.identity()
    for x in range(G.n):
        a_pows[x] = G.encode(cur)
        cur = G.mul(cur, A)
    b_pows = np.empty(G.m, dtype=np.int64)
    cur = G.identity()
    for y in range(G.m):
        b_pows[y] = G.encode(cur)
        cur = G.mul(cur, B)
    idx = G.all_idx()
    return G.mul_vec(a_pows[idx // G.m], b_pows[idx % G.m])


_PERM_CACHE: "dict[Metacyclic, list[np.ndarray]]" = {}


def automorphism_perms(G: Metacyclic, budget: "Optional[SearchBudget]" = None) -> "list[np.ndarray]":
    if G not in _PERM_CACHE:
        _PERM_CACHE[G] = [
            _pair_perm(G, A, B) for A, B in enumerate_automorphisms(G, budget)
        ]
    return _PERM_CACHE[G]


# -- generic subgroup automorphisms --------------------------------------------


def _generating_sequence(G: Metacyclic, members: np.ndarray) -> "list[int]":
    member_set = set(members.tolist())
    for g in members:
        if g and _span(G, [int(g)], member_set):
            return [int(g)]
    for g in members:
        if not g:
            continue
        for h in members:
            if h and _span(G, [int(g), int(h)], member_set):
                return [int(g), int(h)]
    raise GroupError("subgroup needs more than two generators")


def _span(G: Metacyclic, gens: "list[int]", member_set: set) -> bool:
    closed = G.closure_idx(gens)
    return closed.size == len(member_set) and set(closed.tolist()) == member_set


def subgroup_automorphism_perms(G: Metacyclic, members: np.ndarray) -> "list[np.ndarray]":
    """Automorphisms of a subgroup (as permutations of parent-encoded members).

    Candidates are order-matching generator images, extended breadth-first
    over the subgroup's Cayley graph; consistency of the extension makes the
    map a homomorphism, and bijectivity an automorphism.
    """
    gens = _generating_sequence(G, members)
    member_list = [int(v) for v in members.tolist()]
    orders = {v: G.element_order(G.decode(v)) for v in member_list}
    out = []
    cand_lists = [[v for v in member_list if orders[v] == orders[g]] for g in gens]

    def bfs(images: "list[int]") -> "Optional[np.ndarray]":
        fmap = np.full(G.order, -1, dtype=np.int64)
        fmap[0] = 0
        queue = [0]
        while queue:
            v = queue.pop()
            for g, img in zip(gens, images):
                w = int(G.mul_vec(np.int64(v), np.int64(g)))
                wi = int(G.mul_vec(np.int64(fmap[v]), np.int64(img)))
                if fmap[w] < 0:
                    fmap[w] = wi
                    queue.append(w)
                elif fmap[w] != wi:
                    return None
        vals = fmap[members]
        if np.any(vals < 0) or len(set(vals.tolist())) != members.size:
            return None
        return fmap

    def rec(i: int, images: "list[int]") -> Iterator[np.ndarray]:
        if i == len(gens):
            fmap = bfs(images)
            if fmap is not None:
                yield fmap
            return
        for cand in cand_lists[i]:
            yield from rec(i + 1, images + [cand])

    for fmap in rec(0, []):
        out.append(fmap)
    return out


# -- canonical forms and deduplication ------------------------------------------


def _canonical_form(cmap: CayleyMap, aut_perms: "list[np.ndarray]") -> tuple:
    """Lexicographically least rotated image of the generator cycle over Aut(G)."""
    best = None
    seq = cmap.omega_idx
    for perm in aut_perms:
        image = perm[seq]
        start = int(np.argmin(image))
        rolled = tuple(np.roll(image, -start).tolist())
        if best is None or rolled < best:
            best = rolled
    return best


def _dedupe(found: "list[FoundMap]", aut_perms: "list[np.ndarray]") -> "list[FoundMap]":
    seen = {}
    for fm in found:
        key = _canonical_form(fm.cmap, aut_perms)
        if key not in seen:
            seen[key] = fm
    return [seen[k] for k in sorted(seen)]


def _reverify(G: Metacyclic, omega: "list[GroupElement]") -> "Optional[FoundMap]":
    """Re-check a candidate from definitions alone; None if any check fails."""
    try:
        cmap = CayleyMap(G, omega)
    except maps.MapError:
        return None
    skew = maps.is_regular(cmap)
    if skew is None:
        return None
    bal = maps.balance_data(cmap)
    if bal is None:
        return None
    return FoundMap(cmap, skew, bal)


# -- structured enumeration over index-2 subgroups -------------------------------


def enumerate_rbcm(
    G: Metacyclic, budget: "Optional[SearchBudget]" = None, exhaustive: bool = False
) -> "list[FoundMap]":
    """All regular t-balanced maps on ``G`` up to isomorphism.

    The balanced arm scans automorphism orbits (the rotation of a balanced
    map extends to an automorphism).  The ``t > 1`` arm scans triples of an
    index-2 subgroup ``H`` (the kernel-to-be), an automorphism of ``H``, and
    seeds ``omega_d, omega_1`` off ``H``; the skew-morphism is forced to be
    ``phi(h * omega_d) = phi(h) * omega_1`` on the coset.  With
    ``exhaustive=True`` every output is also re-certified by the arc-image
    counting oracle.
    """
    budget = budget or SearchBudget()
    if G.order > budget.max_order:
        raise BudgetExceeded(f"order {G.order} exceeds the budget {budget.max_order}")
    start = time.monotonic()
    aut_perms = automorphism_perms(G, SearchBudget(max_order=max(64, G.order)))
    found: "list[FoundMap]" = []

    # balanced arm: inverse-closed generating orbits of automorphisms
    for perm in aut_perms:
        for orbit in _perm_cycles(perm):
            if 0 in orbit:
                continue
            omega = [G.decode(i) for i in orbit]
            fm = _reverify(G, omega)
            if fm is not None:
                found.append(fm)
        _check_time(start, budget, found)

    # t > 1 arm: kernel subgroup + automorphism + coset seeds
    for H in index2_subgroups_all(G):
        members = H.member_idx()
        coset = np.setdiff1d(G.all_idx(), members)
        for hperm in subgroup_automorphism_perms(G, members):
            _check_time(start, budget, found)
            for wd in coset:
                wd_inv = int(G.inv_vec(np.array([wd], dtype=np.int64))[0])
                shifted = hperm[G.mul_vec(coset, np.int64(wd_inv))]
                for w1 in coset:
                    phi = np.empty(G.order, dtype=np.int64)
                    phi[members] = hperm[members]
                    phi[coset] = G.mul_vec(shifted, np.int64(w1))
                    orbit = _orbit(phi, int(wd))
                    if orbit is None:
                        continue
                    omega = [G.decode(i) for i in orbit]
                    fm = _reverify(G, omega)
                    if fm is not None:
                        found.append(fm)

    result = _dedupe(found, aut_perms)
    if exhaustive:
        for fm in result:
            count = maps.map_automorphism_count(fm.cmap)
            if count != G.order * fm.cmap.d:
                raise AssertionError(
                    f"arc-image count {count} contradicts regularity of {fm.cmap}"
                )
    return result


def _perm_cycles(perm: np.ndarray) -> "list[list[int]]":
    seen = np.zeros(perm.size, dtype=bool)
    cycles = []
    for s in range(perm.size):
        if seen[s]:
            continue
        cyc = []
        v = s
        while not seen[v]:
            seen[v] = True
            cyc.append(int(v))
            v = int(perm[v])
        cycles.append(cyc)
    return cycles


def _orbit(phi: np.ndarray, seed: int) -> "Optional[list[int]]":
    out = []
    cur = int(phi[seed])
    while cur != seed:
        out.append(cur)
        if len(out) > phi.size:
            return None
        cur = int(phi[cur])
    out.append(seed)
    return out


def _check_time(start: float, budget: SearchBudget, partial) -> None:
    if budget.time_limit_s is not None and time.monotonic() - start > budget.time_limit_s:
        raise BudgetExceeded("time limit exceeded", partial)


# -- naive definitional enumeration ----------------------------------------------


def naive_enumerate_rbcm(
    G: Metacyclic, budget: "Optional[SearchBudget]" = None
) -> "list[FoundMap]":
    """Scan all balanced-compatible generating sequences; regularity by propagation.

    Generating sets are inverse-closed subsets; for each size ``d`` the
    orderings are generated directly from the involution structure
    ``iota(i) = ell + t i`` (the only orderings that can satisfy the balance
    identity), with the least generator pinned at the first position so each
    cyclic ordering appears once.  Survivors are certified with the
    arc-image counting oracle.
    """
    budget = budget or SearchBudget(max_order=32)
    if G.order > budget.max_order:
        raise BudgetExceeded(f"order {G.order} exceeds the naive budget {budget.max_order}")
    start = time.monotonic()
    involutions = []
    pairs = []
    for g in G.elements():
        if g.is_identity():
            continue
        gi = g.inverse()
        if gi == g:
            involutions.append(g)
        elif G.encode(g) < G.encode(gi):
            pairs.append((g, gi))

    found: "list[FoundMap]" = []
    for inv_mask in range(1 << len(involutions)):
        chosen_inv = [g for i, g in enumerate(involutions) if inv_mask >> i & 1]
        for pair_mask in range(1 << len(pairs)):
            chosen_pairs = [p for i, p in enumerate(pairs) if pair_mask >> i & 1]
            omega_set = chosen_inv + [g for p in chosen_pairs for g in p]
            if not omega_set or not G.generates(omega_set):
                continue
            _check_time(start, budget, found)
            d = len(omega_set)
            least = min(G.encode(g) for g in omega_set)
            for omega in _balanced_orderings(G, chosen_inv, chosen_pairs, d, least):
                fm = _check_ordering(G, omega)
                if fm is not None:
                    found.append(fm)

    aut_perms = automorphism_perms(G, SearchBudget(max_order=max(64, G.order)))
    result = _dedupe(found, aut_perms)
    for fm in result:
        count = maps.map_automorphism_count(fm.cmap)
        if count != G.order * fm.cmap.d:
            raise AssertionError("arc-image count contradicts regularity")
    return result


def _check_ordering(G: Metacyclic, omega: "list[GroupElement]") -> "Optional[FoundMap]":
    try:
        cmap = CayleyMap(G, omega)
    except maps.MapError:
        return None
    skew = maps.is_regular(cmap)
    if skew is None:
        return None
    bal = maps.balance_data(cmap)
    if bal is None:
        return None
    return FoundMap(cmap, skew, bal)


def _balanced_orderings(
    G: Metacyclic,
    chosen_inv: "list[GroupElement]",
    chosen_pairs: "list[tuple[GroupElement, GroupElement]]",
    d: int,
    least: int,
) -> Iterator["list[GroupElement]"]:
    """All orderings compatible with some ``iota(i) = ell + t i``, least first."""
    for t in range(1, d + 1):
        if (t * t) % d != 1 % d:
            continue
        for ell in range(1, d + 1):
            if ((t + 1) * ell) % d:
                continue
            iota = [((ell + t * (i + 1) - 1) % d) for i in range(d)]  # 0-based images
            if any(iota[iota[i]] != i for i in range(d)):
                continue
            fixed = [i for i in range(d) if iota[i] == i]
            cycles = sorted(
                {(min(i, iota[i]), max(i, iota[i])) for i in range(d) if iota[i] != i}
            )
            if len(fixed) != len(chosen_inv):
                continue
            yield from _assign(G, fixed, cycles, chosen_inv, chosen_pairs, d, least)


def _assign(G, fixed, cycles, chosen_inv, chosen_pairs, d, least):
    slots: "list[Optional[GroupElement]]" = [None] * d
    inv_used = [False] * len(chosen_inv)
    pair_used = [False] * len(chosen_pairs)

    def orbits_in_order():
        # the orbit containing position 0 goes first so the pinning prunes early
        first = [o for o in ([(f,) for f in fixed] + cycles) if 0 in o]
        rest = [o for o in ([(f,) for f in fixed] + cycles) if 0 not in o]
        return first + rest

    orbit_list = orbits_in_order()

    def rec(k: int):
        if k == len(orbit_list):
            yield list(slots)
            return
        orbit = orbit_list[k]
        if len(orbit) == 1:
            (i,) = orbit
            for idx, g in enumerate(chosen_inv):
                if inv_used[idx]:
                    continue
                if i == 0 and G.encode(g) != least:
                    continue
                inv_used[idx] = True
                slots[i] = g
                yield from rec(k + 1)
                inv_used[idx] = False
                slots[i] = None
        else:
            i, j = orbit
            for idx, (g, gi) in enumerate(chosen_pairs):
                if pair_used[idx]:
                    continue
                for first, second in ((g, gi), (gi, g)):
                    if i == 0 and G.encode(first) != least:
                        continue
                    pair_used[idx] = True
                    slots[i], slots[j] = first, second
                    yield from rec(k + 1)
                    pair_used[idx] = False
                    slots[i] = slots[j] = None
        return

    # if the least element must appear somewhere, and position 0's orbit kind
    # does not match the least element's kind, no ordering survives the pinning
    least_el = G.decode(least)
    least_is_inv = least_el == least_el.inverse()
    first_orbit = orbit_list[0]
    if (len(first_orbit) == 1) != least_is_inv:
        return
    yield from rec(0)


# -- guided search on the 2-power family ------------------------------------------


@dataclass
class GuidedResult:
    found: "list[FoundMap]"
    exhausted: bool
    stats: "dict[str, int]" = field(default_factory=dict)


def prune_predicates(a: int, b: int, c: int, phi_plus: autos.AutoParams) -> "dict[str, bool]":
    """The necessary conditions used to prune kernel automorphism candidates."""
    mod_c1 = 1 << (c - 1)
    mod_b = 1 << b
    p = phi_plus
    return {
        "y1_odd": p.y1 % 2 == 1,
        "square_congruence": (p.x1 * p.x1 + p.x2 * p.y1 - 1) % mod_c1 == 0,
        "trace_congruence": (p.x1 + p.y2) % mod_b == 0,
        "involution_congruence": (p.y2 * p.y2 + p.x2 * p.y1 - 1) % mod_b == 0,
    }


def guided_search_delta(
    a: int, b: int, c: int, budget: "Optional[SearchBudget]" = None
) -> GuidedResult:
    """Exhaustive search for maps on ``D(a,b,c)``, pruned by necessary conditions.

    The kernel must be ``<a^2, b>`` with the restricted skew-morphism among
    the automorphism candidates passing :func:`prune_predicates`; the other
    structural data is a seed pair ``(omega_d, omega_1)`` off the kernel.
    Orbits of all seed pairs are advanced in lockstep (numpy batch); a pair
    survives only if the seed's inverse shows up inside its orbit.  The
    balanced arm (rotation extending to an automorphism) is scanned as well.
    Every survivor is re-verified from definitions.
    """
    budget = budget or SearchBudget(max_order=1 << 14, time_limit_s=None)
    params = DeltaParams(a, b, c)
    G = params.group()
    if G.order > budget.max_order:
        raise BudgetExceeded(f"order {G.order} exceeds the budget {budget.max_order}")
    start = time.monotonic()
    stats = {"kernel_candidates": 0, "pairs_scanned": 0, "pairs_surviving": 0}
    found: "list[FoundMap]" = []

    # balanced arm
    aut_perms = _delta_aut_perms(G)
    for perm in aut_perms:
        for orbit in _perm_cycles(perm):
            if 0 in orbit or len(orbit) < 2:
                continue
            orbit_set = set(orbit)
            inv = G.inv_vec(np.array(orbit, dtype=np.int64))
            if any(int(i) not in orbit_set for i in inv):
                continue
            if G.closure_idx(orbit).size != G.order:
                continue
            fm = _reverify(G, [G.decode(i) for i in orbit])
            if fm is not None:
                found.append(fm)
    _check_time(start, budget, found)

    pres = plus_presentation(G, "a2_b")
    sub = pres.group
    cands = [
        p for p in autos.aut_group(sub) if all(prune_predicates(a, b, c, p).values())
    ]
    stats["kernel_candidates"] = len(cands)

    N, m = G.order, G.m
    idx = G.all_idx()
    even_mask = (idx // m) % 2 == 0
    even_idx = idx[even_mask]
    coset = idx[~even_mask]
    n_coset = coset.size

    # The coset orbit of a seed omega_d factors through the twisted powers
    # T_1 = c, T_(k+1) = phi+(T_k) * c of c = omega_1 omega_d^-1: the orbit is
    # omega_i = T_i omega_d, it closes at the least d with T_d = 1, and it
    # contains omega_d^-1 exactly at positions ell with T_ell = omega_d^-2.
    # Three sound prunes follow.  (P1) omega_d^-2 must occur among the
    # twisted powers (inverse closure).  (P2) the rotation of a regular map
    # has order equal to the valency, so ord(phi+) must divide d (an
    # automorphism trivial on every vertex is trivial).  (P3) the
    # beta-exponent consequence of t-balance: gamma_(ell+ti) + gamma_i +
    # 2 y(omega_d) = 0 (mod m) for all i, where gamma_k = y(T_k), for some
    # t^2 = 1 (mod d) with (t+1) ell = 0 (mod d).
    sq_inv = G.inv_vec(G.mul_vec(coset, coset))
    sq_inv_sub = (sq_inv // m) // 2 * sub.m + sq_inv % m
    coset_y = coset % m
    L = sub.order
    valid_ts: "dict[int, list[int]]" = {}

    for phi_plus in cands:
        _check_time(start, budget, found)
        sub_perm = autos.as_perm(phi_plus)
        ord_plus = _perm_order(sub_perm)
        phi_on_even = np.full(N, -1, dtype=np.int64)
        sx = (even_idx // m) // 2
        sy = even_idx % m
        simg = sub_perm[sx * sub.m + sy]
        phi_on_even[even_idx] = (2 * (simg // sub.m)) % G.n * m + simg % sub.m

        rows = sub.all_idx()
        c_vals = sub.all_idx()
        T = c_vals.copy()
        pos = np.zeros((L, L), dtype=np.int32)
        gamma = np.zeros((L, L + 1), dtype=np.int16)
        pos[rows, T] = 1
        gamma[rows, 0] = T % sub.m
        closure = np.zeros(L, dtype=np.int64)
        closed = T == 0
        closure[rows[closed]] = 1
        rows, c_vals, T = rows[~closed], c_vals[~closed], T[~closed]
        step = 1
        while rows.size:
            step += 1
            if step > L + 1:
                raise AssertionError("twisted-power orbit longer than the kernel")
            stats["pairs_scanned"] += int(rows.size)
            T = sub.mul_vec(sub_perm[T], c_vals)
            pos[rows, T] = step
            gamma[rows, step - 1] = T % sub.m
            closed = T == 0
            if np.any(closed):
                closure[rows[closed]] = step
                rows, c_vals, T = rows[~closed], c_vals[~closed], T[~closed]

        ell_mat = pos[:, sq_inv_sub]  # (c, omega_d) -> position of the inverse, 0 if absent
        pair_ok = (ell_mat > 0) & ((closure % ord_plus == 0) & (closure >= 2))[:, None]
        memo: "dict[tuple[int, int, int], bool]" = {}
        for c_row in np.flatnonzero(pair_ok.any(axis=1)):
            d = int(closure[c_row])
            # reconstruct the twisted-power sequence of this row, in parent coordinates
            vals = np.flatnonzero(pos[c_row] > 0)
            seq = np.empty(d, dtype=np.int64)
            seq[pos[c_row, vals] - 1] = vals
            seq_parent = 2 * (seq // sub.m) * m + seq % sub.m
            wd_cols = np.flatnonzero(pair_ok[c_row])
            # each map is seen once per orbit element; keep only the seed that
            # is minimal in its own orbit (omega_i = T_i * omega_d)
            orbit_elems = G.mul_vec_outer(seq_parent, coset[wd_cols])
            wd_cols = wd_cols[orbit_elems.min(axis=0) >= coset[wd_cols]]
            for wd_col in wd_cols:
                ell = int(ell_mat[c_row, wd_col])
                yd = int(coset_y[wd_col])
                key = (int(c_row), ell, yd)
                if key not in memo:
                    if d not in valid_ts:
                        valid_ts[d] = [t for t in range(1, d + 1) if (t * t) % d == 1 % d]
                    gam = gamma[c_row, :d].astype(np.int64)
                    memo[key] = any(
                        _beta_balance_ok(gam, d, t, ell, yd, m) for t in valid_ts[d]
                    )
                if not memo[key]:
                    continue
                # (P4) full inverse-position structure: omega_i^-1 must land in
                # the orbit at positions affine in i with a square exponent
                wd = int(coset[wd_col])
                wd_inv = int(G.inv_vec(np.array([wd], dtype=np.int64))[0])
                v = G.mul_vec(
                    np.int64(wd_inv), G.mul_vec(G.inv_vec(seq_parent), np.int64(wd_inv))
                )
                v_sub = (v // m) // 2 * sub.m + v % m
                j = pos[c_row, v_sub].astype(np.int64)
                if np.any(j == 0):
                    continue
                t0 = int((j[1] - j[0]) % d) if d > 1 else 1
                if (t0 * t0) % d != 1 % d:
                    continue
                if np.any((j - j[0] - t0 * np.arange(d)) % d):
                    continue
                stats["pairs_surviving"] += 1
                c_parent = 2 * (int(c_row) // sub.m) * m + int(c_row) % sub.m
                w1 = int(G.mul_vec(np.int64(c_parent), np.int64(wd)))
                phi = phi_on_even.copy()
                phi[coset] = G.mul_vec(
                    phi_on_even[G.mul_vec(coset, np.int64(wd_inv))], np.int64(w1)
                )
                orbit = _orbit(phi, wd)
                if orbit is None or len(orbit) != d:
                    continue
                # (P5) the derived power function must take the two values
                # {1, t}; anything else cannot be a t-balanced map with this
                # kernel, and skipping it avoids a full verification pass
                if not _two_valued_pi_probe(G, phi, orbit, t0):
                    continue
                fm = _reverify(G, [G.decode(i) for i in orbit])
                if fm is not None:
                    found.append(fm)

    result = _dedupe(found, aut_perms)
    return GuidedResult(result, True, stats)


def _two_valued_pi_probe(G: Metacyclic, phi: np.ndarray, orbit: "list[int]", t: int) -> bool:
    """Probe-derived power function values must all lie in {1, t (mod d)}."""
    d = len(orbit)
    t_val = t % d if t % d else d
    pos_of = np.full(G.order, -1, dtype=np.int64)
    pos_of[np.array(orbit, dtype=np.int64)] = np.arange(d)
    mu0 = np.int64(orbit[0])  # phi(omega_d) = omega_1
    probe = G.mul_vec(G.inv_vec(phi), phi[G.mul_vec(G.all_idx(), mu0)])
    pos = pos_of[probe]
    if np.any(pos < 0):
        return False
    pi = np.where(pos >= 1, pos, d)
    return set(np.unique(pi).tolist()) <= {1, t_val}


def _perm_order(perm: np.ndarray) -> int:
    out = 1
    for cycle in _perm_cycles(perm):
        out = out * len(cycle) // np.gcd(out, len(cycle))
    return int(out)


def _beta_balance_ok(gam: np.ndarray, d: int, t: int, ell: int, yd: int, m: int) -> bool:
    """Necessary balance condition on beta-exponents for offset ell and exponent t."""
    if ((t + 1) * ell) % d:
        return False
    i = np.arange(1, d + 1)
    j = (ell + t * i - 1) % d
    return bool(np.all((gam[j] + gam[i - 1] + 2 * yd) % m == 0))


def _delta_aut_perms(G: Metacyclic) -> "list[np.ndarray]":
    return [autos.as_perm(p) for p in autos.aut_group(G)]
