"""Acceptance suite: one test per exit criterion, one printed verdict line each.

Run with `pytest -v -s tests/test_acceptance.py` to see the verdict lines.

Criterion 3's first clause is asserted exactly as stated; the computed
bracket is the full coset of its indeterminacy (two elements), so that
clause stays red.  See notes in the repository documentation; every
other clause of criterion 3 passes, and the companion test pins the
coset-corrected value.
"""

import itertools

import numpy as np
import pytest

from conftest import RINGS, random_module, random_stable_map, random_vanishing_chain

from stmodcat.adams import (
    NotACycle,
    ProjectiveClass,
    adams_resolution,
    dr_bracket_forms,
    dr_set,
    ghost_cover,
    pages,
    sparse_check,
)
from stmodcat.heller import heller_check
from stmodcat.linalg import EnumerationOverflow, in_span, rank, stack_rows
from stmodcat.modrep import (
    Ring,
    block_map,
    free_module,
    identity_map,
    jordan_type,
    module_from_partition,
    mu_map,
    zero_map,
)
from stmodcat.stcat import (
    DIRECT,
    OP,
    Triangle,
    cone_triangle,
    fiber_triangle,
    is_distinguished,
    is_stably_zero,
    omega,
    rotate,
    rotate_back,
    sigma_map,
    sigma_ob,
    sigma_omega_comparison,
    stable_hom,
    stably_equal,
    susp_map,
)
from stmodcat.toda import (
    all_jseqs,
    bracket3,
    higher_bracket,
    toda_family,
)

R24 = Ring(2, 4)
R33 = Ring(3, 3)
k24 = module_from_partition(R24, [1])
Ok24 = module_from_partition(R24, [3])
M24 = module_from_partition(R24, [2])
k33 = module_from_partition(R33, [1])
M33 = module_from_partition(R33, [2])
GHOST24 = ProjectiveClass(k24)


def verdict(n, ok, detail=""):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}{' - ' + detail if detail else ''}")
    assert ok, f"criterion {n} failed: {detail}"


@pytest.fixture(scope="module")
def res6():
    return adams_resolution(M24, GHOST24, 6)


def kappa():
    return block_map([k24, Ok24], [M24], [[mu_map(R24, 1, 2, 1), None]])


# -- criterion 1: structure of the p=2, m=4 stable category ------------------


def test_criterion_1_structure():
    Ok, _, _ = omega(k24)
    ok = jordan_type(Ok) == (3,)
    OOk, _, _ = omega(Ok)
    ok &= jordan_type(OOk) == (1,)
    OM, _, _ = omega(M24)
    ok &= jordan_type(OM) == (2,)
    S_kM = stable_hom(k24, M24)
    S_OkM = stable_hom(Ok24, M24)
    ok &= S_kM.sdim == 1 and S_OkM.sdim == 1
    ok &= S_kM.stable_coords(mu_map(R24, 1, 2, 1)) != (0,)
    ok &= S_OkM.stable_coords(mu_map(R24, 3, 2, 0)) != (0,)
    ok &= is_stably_zero(mu_map(R24, 3, 2, 1))   # mu_x dies in T(Omega k, M)
    verdict(1, ok, "Omega k = R/x^3, Omega^2 k = k, Omega M = M; "
                   "T(k,M), T(Omega k, M) one-dimensional on mu_x, mu_1")


# -- criterion 2: the resolution --------------------------------------------


def test_criterion_2_resolution(res6):
    P0, p0 = ghost_cover(M24, GHOST24)
    ok = jordan_type(P0) == (3, 1)
    expected_p = block_map([k24, Ok24], [M24],
                           [[mu_map(R24, 1, 2, 1), mu_map(R24, 3, 2, 0)]])
    ok &= stably_equal(p0, expected_p)
    ok &= jordan_type(fiber_triangle(p0).f.src) == (2,)
    expected_d1 = block_map([k24, Ok24], [k24, Ok24],
                            [[None, mu_map(R24, 3, 1, 0)],
                             [mu_map(R24, 1, 3, 2), None]])
    ok &= stably_equal(res6.d1op(0), expected_d1)
    verdict(2, ok, "cover k+Omega k with p=[mu_x, mu_1], fiber M, "
                   "d1=[[0,mu_1],[mu_x^2,0]]")


# -- criterion 3: the quoted bracket values at p = 2 --------------------------


def _c4_bracket_data(res6):
    rep = dr_bracket_forms(res6, M24, kappa(), 2)
    sigma_p = block_map([Ok24, k24], [M24],
                        [[mu_map(R24, 3, 2, 0), mu_map(R24, 1, 2, 1)]])
    slot = stable_hom(rep.dr.src, M24)
    return rep, slot, sigma_p


def test_criterion_3a_delta_bracket_as_stated(res6):
    """<kappa, d_1, delta> = {1_M}, asserted exactly as stated.

    The computed set is the full coset {1_M, 1_M + mu_x} of the
    bracket's indeterminacy (kappa composed with T(Sigma M, P_0)
    contains the stably nonzero mu_x), so this assertion fails; the
    coset law forces the two-element answer.  See the companion test.
    """
    rep, _, _ = _c4_bracket_data(res6)
    v_delta = rep.variants["with_delta"]
    amb = stable_hom(v_delta.src, v_delta.tgt)
    stated = v_delta.elements == {amb.stable_coords(identity_map(M24))}
    verdict("3a (as stated)", stated,
            f"<kappa,d_1,delta> computed {sorted(v_delta.elements)}, "
            f"stated {{1_M}}")


def test_criterion_3a_delta_bracket_coset(res6):
    rep, _, _ = _c4_bracket_data(res6)
    v_delta = rep.variants["with_delta"]
    amb = stable_hom(v_delta.src, v_delta.tgt)
    one = amb.stable_coords(identity_map(M24))
    ok = one in v_delta.elements and len(v_delta.elements) == 2
    mu_x_cls = amb.stable_coords(mu_map(R24, 2, 2, 1))
    other = tuple((a + b) % 2 for a, b in zip(one, mu_x_cls))
    ok &= other in v_delta.elements
    verdict("3a (coset-corrected)", ok,
            "<kappa,d_1,delta> = {1_M, 1_M + mu_x}, the coset of its "
            "indeterminacy containing the identity")


def test_criterion_3_remaining_values(res6):
    rep, slot, sigma_p = _c4_bracket_data(res6)
    composed = rep.variants["with_delta_composed"]
    ok = composed == {slot.stable_coords(sigma_p)}
    ok &= rep.dr.elements == composed
    ops = rep.variants["operations_bracket"]
    ok &= len(ops.elements) == 2
    for b in range(2):
        want = block_map([Ok24, k24], [M24],
                         [[mu_map(R24, 3, 2, 0),
                           mu_map(R24, 1, 2, 1) if b else None]])
        ok &= slot.stable_coords(want) in ops.elements
    ok &= composed < ops.elements  # restricted strictly inside full
    verdict("3 (remaining)", ok,
            "<kappa,d_1,delta>(Sigma p) = d_2[kappa] = {[mu_1 mu_x]}; "
            "<kappa,d_1,d_1> = {[mu_1, b mu_x]}; inclusion proper")


# -- criterion 4: the p=3 negative bracket -----------------------------------


def test_criterion_4_c3_example():
    mu1 = mu_map(R33, 2, 1, 0)
    mux = mu_map(R33, 1, 2, 1)
    bs = bracket3(mu1, mux, mu1, defn="fc")
    amb = stable_hom(bs.src, bs.tgt)
    minus_one = amb.stable_coords(identity_map(k33).scale(-1))
    one = amb.stable_coords(identity_map(k33))
    ok = bs.elements == {minus_one}
    fam = toda_family(DIRECT, mu1, mux, mu1)
    ok &= len(fam) == 1
    ok &= fam[0].sigma_alpha.src == k33 and amb.stable_coords(fam[0].sigma_alpha) == minus_one
    beta_amb = stable_hom(fam[0].beta.src, fam[0].beta.tgt)
    ok &= beta_amb.stable_coords(fam[0].beta) == one
    ok &= not bs.equal_sets(bs.negate())
    verdict(4, ok, "<mu_1,mu_x,mu_1> = {-1_k}, unique fillers "
                   "Sigma alpha = -1, beta = 1; bracket differs from its negative")


# -- criterion 5: degenerate brackets ----------------------------------------


def test_criterion_5_lemma_examples():
    X, Y, Z = M33, k33, M33
    full = bracket3(identity_map(Z), zero_map(Y, Z), zero_map(X, Y))
    amb = stable_hom(sigma_ob(X), Z)
    ok = len(full.elements) == 3 ** amb.sdim
    trivial = bracket3(zero_map(Y, Z), identity_map(Y), zero_map(X, Y))
    ok &= trivial.elements == {(0,) * amb.sdim}
    verdict(5, ok, "<1,0,0> is the whole group; <0,1,0> = {0}")


# -- criterion 6: the randomized property battery -----------------------------


def _triples(rng, count, max_dim=6):
    made = 0
    while made < count:
        ring = RINGS[int(rng.integers(0, len(RINGS)))]
        yield random_vanishing_chain(rng, ring, 3, max_dim)
        made += 1


def test_criterion_6_property_battery():
    rng = np.random.default_rng(20260811)
    cases = 0
    # (i) the three definitions coincide
    done = 0
    for f3, f2, f1 in _triples(rng, 80, max_dim=5):
        try:
            sets = {d: bracket3(f3, f2, f1, defn=d, cap=30000).elements
                    for d in ("cc", "fc", "ff")}
        except EnumerationOverflow:
            continue
        assert sets["cc"] == sets["fc"] == sets["ff"]
        done += 1
        cases += 1
        if done >= 60:
            break
    assert done >= 50

    # (ii) nonempty brackets are cosets of the indeterminacy
    checked = 0
    for f3, f2, f1 in _triples(rng, 60, max_dim=6):
        try:
            bs = bracket3(f3, f2, f1, cap=30000)
        except EnumerationOverflow:
            continue
        cases += 1
        if bs.is_empty():
            continue
        p = f1.src.ring.p
        assert len(bs.elements) == p ** len(bs.indeterminacy)
        base = next(iter(bs.elements))
        sub = stack_rows(p, [np.array(r) for r in bs.indeterminacy],
                         cols=len(base))
        for e in bs.elements:
            assert in_span(sub, (np.array(e) - np.array(base)) % p)
        checked += 1
    assert checked >= 10

    # (iii) the four juggling inclusions
    juggled = 0
    while juggled < 30:
        ring = RINGS[int(rng.integers(0, len(RINGS)))]
        f4, f3, f2, f1 = random_vanishing_chain(rng, ring, 4, max_dim=5)
        try:
            amb = stable_hom(sigma_ob(f1.src), f4.tgt)
            b123 = bracket3(f3, f2, f1, cap=30000)
            lhs1 = {amb.stable_coords(f4 @ u) for u in b123.rep_maps()}
            rhs1 = bracket3(f4 @ f3, f2, f1, cap=30000).elements
            b234 = bracket3(f4, f3, f2, cap=30000)
            sf1 = sigma_map(f1)
            lhs2 = {amb.stable_coords(u @ sf1) for u in b234.rep_maps()}
            rhs2 = bracket3(f4, f3, f2 @ f1, cap=30000).elements
            mid = bracket3(f4, f3 @ f2, f1, cap=30000).elements
        except EnumerationOverflow:
            continue
        assert lhs1 <= rhs1 and lhs2 <= rhs2
        assert rhs1 <= mid and rhs2 <= mid
        juggled += 1
        cases += 1

    # (iv) suspension negates the bracket
    for f3, f2, f1 in _triples(rng, 20, max_dim=5):
        try:
            bs = bracket3(f3, f2, f1, cap=30000)
            sbs = bracket3(sigma_map(f3), sigma_map(f2), sigma_map(f1),
                           cap=30000)
        except EnumerationOverflow:
            continue
        amb2 = stable_hom(sbs.src, sbs.tgt)
        p = f1.src.ring.p
        moved = frozenset(tuple((-c) % p for c in amb2.stable_coords(sigma_map(u)))
                          for u in bs.rep_maps())
        assert sbs.elements == moved
        cases += 1

    # (v) self-duality for n = 3 and n = 4
    def op_transport(bso, Xn, n):
        comp = sigma_omega_comparison(Xn, n - 2)
        out = set()
        for u in bso.rep_maps(OP):
            v = comp @ susp_map(u, n - 2)
            out.add(stable_hom(v.src, v.tgt).stable_coords(v))
        return frozenset(out)

    for f3, f2, f1 in _triples(rng, 10, max_dim=4):
        direct = bracket3(f3, f2, f1, cap=30000)
        opbs = bracket3(f1, f2, f3, ctx=OP, cap=30000)
        assert op_transport(opbs, f3.tgt, 3) == direct.elements
        cases += 1
    dual4 = 0
    while dual4 < 5:
        ring = RINGS[int(rng.integers(0, len(RINGS)))]
        maps = random_vanishing_chain(rng, ring, 4, max_dim=4)
        try:
            direct = higher_bracket(maps, cap=20000)
            if direct.is_empty():
                continue
            opbs = higher_bracket(list(reversed(maps)), ctx=OP, cap=20000)
        except EnumerationOverflow:
            continue
        assert op_transport(opbs, maps[0].tgt, 4) == direct.elements
        dual4 += 1
        cases += 1

    # (vi) the reduction-order sign law: every sequence at n=4 and all six at n=5
    nonempty = 0
    while nonempty < 12:
        ring = RINGS[int(rng.integers(0, len(RINGS)))]
        maps = random_vanishing_chain(rng, ring, 4, max_dim=5)
        try:
            b00 = higher_bracket(maps, jseq=(0, 0), cap=20000)
            if b00.is_empty():
                continue
            b01 = higher_bracket(maps, jseq=(0, 1), cap=20000)
        except EnumerationOverflow:
            continue
        assert b01.equal_sets(b00.negate())
        nonempty += 1
        cases += 1
    five = 0
    while five < 8:
        ring = RINGS[int(rng.integers(0, len(RINGS)))]
        maps = random_vanishing_chain(rng, ring, 5, max_dim=4)
        try:
            base = higher_bracket(maps, jseq=(0, 0, 0), cap=20000)
            if base.is_empty():
                continue
            for jseq in all_jseqs(5):
                bs = higher_bracket(maps, jseq=jseq, cap=20000)
                expected = base if sum(jseq) % 2 == 0 else base.negate()
                assert bs.equal_sets(expected)
        except EnumerationOverflow:
            continue
        five += 1
        cases += 1
    assert nonempty + five >= 20

    verdict(6, cases >= 200,
            f"{cases} randomized cases: cc=fc=ff, coset law, juggling, "
            f"suspension, self-duality, sign law ({nonempty + five} nonempty "
            f"higher instances)")


# -- criterion 7: spectral sequence coherence ---------------------------------


def test_criterion_7_ss_coherence(res6):
    E0 = stable_hom(res6.P[0], M24)
    ok = True
    r3 = 0
    for c in itertools.product(range(2), repeat=E0.sdim):
        x = E0.from_stable_coords(c)
        d2 = dr_set(res6, M24, x, 2)
        for e in d2.elements:
            rep = stable_hom(d2.src, d2.tgt).from_stable_coords(e)
            dd = dr_set(res6, M24, rep, 2, s=2, t=1)
            ok &= (0,) * len(next(iter(dd.elements))) in dd.elements
        forms = dr_bracket_forms(res6, M24, x, 2)
        ok &= forms.equal_full and forms.equal_restricted
        ok &= bool(forms.equal_w_filtered)
        try:
            f3 = dr_bracket_forms(res6, M24, x, 3)
            ok &= f3.equal_full and f3.equal_restricted and bool(f3.equal_w_filtered)
            r3 += 1
        except NotACycle:
            pass
    pgs = pages(res6, M24, 3)
    p1, p2 = pgs[0], pgs[1]
    for (s, t), g2 in p2.groups.items():
        d_out = p1.differentials.get((s, t))
        d_in = p1.differentials.get((s - 1, t))
        g1 = p1.groups[(s, t)]
        kdim = g1.dim - (rank(d_out) if d_out is not None else 0)
        idim = rank(d_in) if d_in is not None else 0
        ok &= g2.dim == kdim - idim
    for page in pgs:
        for (s, t), mat in page.differentials.items():
            nxt = page.differentials.get((s + page.r, t + page.r - 1))
            if nxt is not None:
                ok &= (nxt @ mat).is_zero()
    verdict(7, ok, f"d_r.d_r in the zero coset; E_2 = H(E_1, d_1); "
                   f"forms (a)=(b)=(c) at r=2 on all classes, r=3 on {r3}")


# -- criterion 8: triangle recognition ----------------------------------------


def test_criterion_8_heller_agreement():
    rng = np.random.default_rng(88)
    total = 0
    while total < 100:
        ring = RINGS[int(rng.integers(0, len(RINGS)))]
        A = random_module(rng, ring, 5)
        B = random_module(rng, ring, 5)
        f = random_stable_map(rng, A, B)
        t = cone_triangle(f)
        kind = int(rng.integers(0, 4))
        if kind == 1:
            t = rotate(t) if rng.random() < 0.5 else rotate_back(t)
        elif kind == 2:
            which = int(rng.integers(0, 3))
            maps = [t.f, t.g, t.h]
            maps[which] = zero_map(maps[which].src, maps[which].tgt)
            t = Triangle(*maps)
        elif kind == 3:
            if ring.p == 2:
                continue
            which = int(rng.integers(0, 3))
            maps = [t.f, t.g, t.h]
            maps[which] = -maps[which]
            t = Triangle(*maps)
        assert heller_check(t).distinguished == is_distinguished(t)
        total += 1
    verdict(8, total >= 100,
            f"{total} candidates agree with the cone-isomorphism ground truth")


# -- criterion 9: sparseness ---------------------------------------------------


def test_criterion_9_sparseness():
    ok = True
    for N in range(2, 9):
        ok &= not sparse_check(k24, N, 4).sparse
    proj = sparse_check(free_module(R24, 1), 2, 4)
    ok &= proj.sparse and proj.vacuous
    verdict(9, ok, "stable End of k is not N-sparse for any N >= 2; "
                   "a projective generator is vacuously sparse")
