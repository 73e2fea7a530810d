"""Toda brackets: 3-fold (three definitions), families, n-fold brackets
under arbitrary reduction sequences, restricted brackets, and filtered
object witnesses.

All computations are exact enumerations of the defining lifting and
extension problems inside finite stable hom groups, done in a
computation context (the category or its opposite), so every bracket
here can also be evaluated in the opposite category for duality checks.

Conventions: the fiber-cofiber bracket of (f3, f2, f1) collects the
composites beta . Sigma(alpha) where, for the fixed cone triangle
(f2, q, iota), Sigma(alpha) satisfies iota . Sigma(alpha) = -Sigma(f1)
and beta satisfies beta . q = f3.  Empty brackets carry a reason code
naming the composite that failed to vanish.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    AffineSpace,
    EnumerationOverflow,
    FpMatrix,
    affine_image,
    enumerate_points,
    in_span,
    row_space_basis,
    solve_affine,
    stack_rows,
)
from .modrep import RMap, RModule, zero_module
from .stcat import DIRECT


class BracketError(Exception):
    pass


class PrescribedMapError(BracketError):
    """A prescribed lift or extension fails its defining equation."""


class OctahedronError(BracketError):
    """No octahedron completion exists; the input triangles are inconsistent."""


@dataclass(frozen=True)
class BracketSet:
    """A finite subset of a stable hom group, in quotient coordinates."""

    src: RModule
    tgt: RModule
    ctx_name: str
    elements: frozenset
    indeterminacy: tuple | None = None
    empty_reason: str | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def is_empty(self) -> bool:
        return not self.elements

    def __contains__(self, coords) -> bool:
        return tuple(int(c) for c in coords) in self.elements

    def same_ambient(self, other: "BracketSet") -> bool:
        return (self.src == other.src and self.tgt == other.tgt
                and self.ctx_name == other.ctx_name)

    def equal_sets(self, other: "BracketSet") -> bool:
        return self.same_ambient(other) and self.elements == other.elements

    def subset_of(self, other: "BracketSet") -> bool:
        return self.same_ambient(other) and self.elements <= other.elements

    def negate(self) -> "BracketSet":
        p = self.src.ring.p
        neg = frozenset(tuple((-c) % p for c in e) for e in self.elements)
        return BracketSet(self.src, self.tgt, self.ctx_name, neg,
                          self.indeterminacy, self.empty_reason,
                          dict(self.metadata))

    def sorted_elements(self) -> list[tuple]:
        return sorted(self.elements)

    def rep_maps(self, ctx=DIRECT) -> list[RMap]:
        return [ctx.make(self.src, self.tgt, e) for e in self.sorted_elements()]


@dataclass(frozen=True)
class TodaFamilyElement:
    """One pair (beta, Sigma alpha) through a fixed cone of the middle map."""

    intermediate: RModule
    sigma_alpha: RMap
    beta: RMap
    cone_q: RMap
    cone_iota: RMap

    def composite(self, ctx=DIRECT) -> RMap:
        return ctx.compose(self.beta, self.sigma_alpha)


def _family_solutions(ctx, f3, f2, f1):
    """Cone of f2 plus the two affine solution sets (either may be None)."""
    C, q, iota = ctx.cone(f2)
    sf1 = ctx.sigma_map(f1)
    alpha_sols = ctx.solve_post(iota, ctx.negate(sf1))
    beta_sols = ctx.solve_pre(q, f3)
    return C, q, iota, alpha_sols, beta_sols


def _empty_reason(alpha_sols, beta_sols) -> str | None:
    if alpha_sols is None:
        return "f2.f1 not stably zero"
    if beta_sols is None:
        return "f3.f2 not stably zero"
    return None


def toda_family(ctx, f3, f2, f1, cap: int = 4096) -> list[TodaFamilyElement]:
    """All pairs (beta, Sigma alpha) through the canonical cone of f2."""
    C, q, iota, alpha_sols, beta_sols = _family_solutions(ctx, f3, f2, f1)
    if alpha_sols is None or beta_sols is None:
        return []
    SX0 = ctx.sigma_ob(ctx.src(f1))
    X3 = ctx.tgt(f3)
    alphas = ctx.classes(SX0, C, alpha_sols, cap)
    betas = ctx.classes(C, X3, beta_sols, cap)
    return [TodaFamilyElement(C, a, b, q, iota)
            for b in betas for a in alphas]


def indeterminacy_basis(ctx, f3, f2, f1) -> tuple:
    """Basis (rows of stable coordinates) of the indeterminacy subgroup."""
    X0, X1 = ctx.src(f1), ctx.tgt(f1)
    X2, X3 = ctx.tgt(f2), ctx.tgt(f3)
    SX0, SX1 = ctx.sigma_ob(X0), ctx.sigma_ob(X1)
    amb = ctx.hom(SX0, X3)
    sf1 = ctx.sigma_map(f1)
    rows = []
    for u in ctx.hom(SX0, X2).quotient_basis_maps():
        rows.append(amb.stable_coords(ctx.compose(f3, u)))
    for v in ctx.hom(SX1, X3).quotient_basis_maps():
        rows.append(amb.stable_coords(ctx.compose(v, sf1)))
    basis = row_space_basis(stack_rows(X0.ring.p, rows, cols=amb.sdim))
    return tuple(tuple(int(x) for x in r) for r in basis.a)


def _bracket_from_maps(ctx, SX0, Xn, maps, reason=None, meta=None,
                       with_indet=None) -> BracketSet:
    space = ctx.hom(SX0, Xn)
    elems = frozenset(space.stable_coords(f) for f in maps)
    return BracketSet(SX0, Xn, ctx.name, elems, with_indet, reason, meta or {})


def bracket3(f3, f2, f1, defn: str = "fc", ctx=DIRECT,
             cap: int = 4096) -> BracketSet:
    """The 3-fold Toda bracket, by the chosen construction.

    defn: "cc" (iterated cofiber), "fc" (fiber-cofiber), or "ff"
    (iterated fiber).  All three produce the same subset of
    T(Sigma X0, X3); computing them separately is the point of the
    cross-checks.
    """
    if ctx.tgt(f1) != ctx.src(f2) or ctx.tgt(f2) != ctx.src(f3):
        raise BracketError("maps are not composable")
    if defn == "fc":
        return _bracket3_fc(ctx, f3, f2, f1, cap)
    if defn == "cc":
        return _bracket3_cc(ctx, f3, f2, f1, cap)
    if defn == "ff":
        return _bracket3_ff(ctx, f3, f2, f1, cap)
    raise BracketError(f"unknown bracket definition {defn!r}")


def _bracket3_fc(ctx, f3, f2, f1, cap) -> BracketSet:
    X0, X3 = ctx.src(f1), ctx.tgt(f3)
    SX0 = ctx.sigma_ob(X0)
    fam = _family_solutions(ctx, f3, f2, f1)
    C, q, iota, alpha_sols, beta_sols = fam
    reason = _empty_reason(alpha_sols, beta_sols)
    if reason:
        return _bracket_from_maps(ctx, SX0, X3, [], reason,
                                  {"defn": "fc"})
    p = X0.ring.p
    if p ** (alpha_sols.dim + beta_sols.dim) > cap:
        raise EnumerationOverflow(
            f"{p ** (alpha_sols.dim + beta_sols.dim)} filler pairs exceed cap {cap}")
    alphas = ctx.classes(SX0, C, alpha_sols, cap)
    betas = ctx.classes(C, X3, beta_sols, cap)
    maps = [ctx.compose(b, a) for b in betas for a in alphas]
    return _bracket_from_maps(
        ctx, SX0, X3, maps, None,
        {"defn": "fc", "lifts": len(alphas), "extensions": len(betas)},
        indeterminacy_basis(ctx, f3, f2, f1))


def _enumerate_coords(sols: AffineSpace, cap: int):
    return [tuple(int(x) for x in v) for v in enumerate_points(sols, cap)]


def _bracket3_cc(ctx, f3, f2, f1, cap) -> BracketSet:
    X0, X3 = ctx.src(f1), ctx.tgt(f3)
    SX0 = ctx.sigma_ob(X0)
    C1, q1, iota1 = ctx.cone(f1)
    phi_sols = ctx.solve_pre(q1, f2)
    if phi_sols is None:
        return _bracket_from_maps(ctx, SX0, X3, [], "f2.f1 not stably zero",
                                  {"defn": "cc"})
    # only the composite f3 . phi matters for the psi-solutions
    comp_space = affine_image(phi_sols, ctx.post_matrix(f3, C1))
    elements: set = set()
    found_any = False
    for e in enumerate_points(comp_space, cap):
        target = ctx.make(C1, X3, e)
        psi_sols = ctx.solve_pre(iota1, target)
        if psi_sols is None:
            continue
        found_any = True
        elements.update(_enumerate_coords(psi_sols, cap))
    reason = None if found_any else "f3.f2 not stably zero"
    return BracketSet(SX0, X3, ctx.name, frozenset(elements),
                      indeterminacy_basis(ctx, f3, f2, f1),
                      None if elements else reason, {"defn": "cc"})


def _bracket3_ff(ctx, f3, f2, f1, cap) -> BracketSet:
    X0, X1 = ctx.src(f1), ctx.tgt(f1)
    X3 = ctx.tgt(f3)
    SX0 = ctx.sigma_ob(X0)
    W = ctx.sigma_inv_ob(X3)
    F, u, v = ctx.fiber(f3)
    p = X0.ring.p
    gamma_only = ctx.solve_post(v, f2)
    if gamma_only is None:
        return _bracket_from_maps(ctx, SX0, X3, [], "f3.f2 not stably zero",
                                  {"defn": "ff"})
    # joint system on (gamma, delta): v.gamma = f2 and gamma.f1 = u.delta
    sp_g = ctx.hom(X1, F)
    sp_d = ctx.hom(X0, W)
    m_v = ctx.post_matrix(v, X1)
    m_pre = ctx.pre_matrix(f1, F)
    m_u = ctx.post_matrix(u, X0)
    amb_f2 = ctx.hom(X1, ctx.tgt(f2))
    top = np.hstack([m_v.a, np.zeros((m_v.rows, sp_d.sdim), dtype=np.int64)])
    bot = np.hstack([m_pre.a, (-m_u.a) % p])
    rhs = np.concatenate([
        np.array(amb_f2.stable_coords(f2), dtype=np.int64),
        np.zeros(m_pre.rows, dtype=np.int64)])
    joint = solve_affine(FpMatrix(p, np.vstack([top, bot])), rhs)
    if joint is None:
        return _bracket_from_maps(ctx, SX0, X3, [], "f2.f1 not stably zero",
                                  {"defn": "ff"})
    # project onto the delta block, then push through delta -> ident . Sigma delta
    sel = np.hstack([np.zeros((sp_d.sdim, sp_g.sdim), dtype=np.int64),
                     np.eye(sp_d.sdim, dtype=np.int64)]).reshape(
                         sp_d.sdim, sp_g.sdim + sp_d.sdim)
    delta_space = affine_image(joint, FpMatrix(p, sel))
    ident = ctx.unit_inverse(X3)
    amb = ctx.hom(SX0, X3)
    cols = [amb.stable_coords(ctx.compose(ident, ctx.sigma_map(b)))
            for b in sp_d.quotient_basis_maps()]
    L = FpMatrix(p, np.array(cols, dtype=np.int64).T.reshape(amb.sdim, sp_d.sdim))
    img = affine_image(delta_space, L)
    elements = frozenset(tuple(int(x) for x in e)
                         for e in enumerate_points(img, cap))
    return BracketSet(SX0, X3, ctx.name, elements,
                      indeterminacy_basis(ctx, f3, f2, f1), None,
                      {"defn": "ff"})


def bracket3_contains(f3, f2, f1, target: RMap, ctx=DIRECT) -> bool:
    """Membership in the 3-fold bracket without enumerating it.

    A nonempty bracket is a single coset of its indeterminacy, so one
    composite plus the subgroup decides membership.
    """
    X0, X3 = ctx.src(f1), ctx.tgt(f3)
    SX0 = ctx.sigma_ob(X0)
    C, q, iota, alpha_sols, beta_sols = _family_solutions(ctx, f3, f2, f1)
    if alpha_sols is None or beta_sols is None:
        return False
    amb = ctx.hom(SX0, X3)
    a0 = ctx.make(SX0, C, alpha_sols.representative)
    b0 = ctx.make(C, X3, beta_sols.representative)
    e0 = np.array(amb.stable_coords(ctx.compose(b0, a0)), dtype=np.int64)
    tgt = np.array(amb.stable_coords(target), dtype=np.int64)
    indet = indeterminacy_basis(ctx, f3, f2, f1)
    rows = stack_rows(X0.ring.p, [np.array(r, dtype=np.int64) for r in indet],
                      cols=amb.sdim)
    return in_span(rows, (tgt - e0) % X0.ring.p)


def bracket3_restricted(f3, f2, f1, sigma_alpha: RMap | None = None,
                        beta: RMap | None = None, ctx=DIRECT,
                        cap: int = 4096) -> BracketSet:
    """Fiber-cofiber bracket with one side prescribed.

    sigma_alpha prescribes the lift Sigma X0 -> C_{f2}; beta prescribes
    the extension C_{f2} -> X3.  The prescribed map is validated against
    its defining equation.
    """
    X0, X3 = ctx.src(f1), ctx.tgt(f3)
    SX0 = ctx.sigma_ob(X0)
    C, q, iota, alpha_sols, beta_sols = _family_solutions(ctx, f3, f2, f1)
    reason = _empty_reason(alpha_sols, beta_sols)
    if reason:
        return _bracket_from_maps(ctx, SX0, X3, [], reason,
                                  {"defn": "fc-restricted"})
    if sigma_alpha is not None:
        if not ctx.eq(ctx.compose(iota, sigma_alpha),
                      ctx.negate(ctx.sigma_map(f1))):
            raise PrescribedMapError(
                "prescribed lift does not satisfy iota . a = -Sigma f1")
        alphas = [sigma_alpha]
    else:
        alphas = ctx.classes(SX0, C, alpha_sols, cap)
    if beta is not None:
        if not ctx.eq(ctx.compose(beta, q), f3):
            raise PrescribedMapError(
                "prescribed extension does not satisfy b . q = f3")
        betas = [beta]
    else:
        betas = ctx.classes(C, X3, beta_sols, cap)
    maps = [ctx.compose(b, a) for b in betas for a in alphas]
    return _bracket_from_maps(ctx, SX0, X3, maps, None,
                              {"defn": "fc-restricted"})


# ---------------------------------------------------------------------------
# higher brackets


def default_jseq(n: int) -> tuple[int, ...]:
    return (0,) * (n - 2)


def all_jseqs(n: int):
    """All valid reduction sequences (j_1, ..., j_{n-2}) with 0 <= j_i < i."""
    ranges = [range(i) for i in range(1, n - 1)]
    return [tuple(js) for js in itertools.product(*ranges)]


@dataclass
class _Branch:
    maps: list          # remaining maps, leftmost (f_n side) first
    trace: list         # per-stage (C, q, iota, beta, sigma_alpha)


def higher_bracket(maps, jseq=None, ctx=DIRECT, cap: int = 4096,
                   with_trace: bool = False):
    """n-fold Toda bracket of maps = (f_n, ..., f_1), leftmost first.

    jseq selects which consecutive triple each reduction stage consumes
    (0 <= j_i < i, applied innermost last); all zeros is the standard
    bracket.  Returns a BracketSet, plus per-element traces when
    with_trace is set.
    """
    maps = list(maps)
    n = len(maps)
    if n < 2:
        raise BracketError("need at least two maps")
    for a, b in zip(maps[1:], maps[:-1]):
        if ctx.tgt(a) != ctx.src(b):
            raise BracketError("maps are not composable")
    if jseq is None:
        jseq = default_jseq(n)
    jseq = tuple(jseq)
    if len(jseq) != n - 2 or any(not 0 <= j < i + 1
                                 for i, j in enumerate(jseq)):
        raise BracketError(f"invalid reduction sequence {jseq} for n={n}")
    X0, Xn = ctx.src(maps[-1]), ctx.tgt(maps[0])
    Samb = susp_in_ctx(ctx, X0, n - 2)

    branches = [_Branch(maps, [])]
    reason = None
    for j in reversed(jseq):
        new_branches: list[_Branch] = []
        for br in branches:
            f3, f2, f1 = br.maps[j], br.maps[j + 1], br.maps[j + 2]
            fam = toda_family(ctx, f3, f2, f1, cap)
            if not fam and reason is None:
                C, q, iota, a_sols, b_sols = _family_solutions(ctx, f3, f2, f1)
                reason = _empty_reason(a_sols, b_sols) or "empty family"
            rest = [ctx.sigma_map(g) for g in br.maps[j + 3:]]
            for el in fam:
                new_branches.append(_Branch(
                    br.maps[:j] + [el.beta, el.sigma_alpha] + rest,
                    br.trace + [el]))
        if len(new_branches) > cap:
            raise EnumerationOverflow(
                f"{len(new_branches)} bracket branches exceed cap {cap}")
        branches = new_branches

    space = ctx.hom(Samb, Xn)
    elements = {}
    for br in branches:
        g, f = br.maps
        c = space.stable_coords(ctx.compose(g, f))
        elements.setdefault(c, br.trace)
    bs = BracketSet(Samb, Xn, ctx.name, frozenset(elements),
                    None, None if elements else (reason or "empty"),
                    {"n": n, "jseq": jseq, "branches": len(branches)})
    if with_trace:
        return bs, elements
    return bs


def susp_in_ctx(ctx, M: RModule, k: int) -> RModule:
    for _ in range(k):
        M = ctx.sigma_ob(M)
    return M


# ---------------------------------------------------------------------------
# restricted higher brackets through octahedra


@dataclass(frozen=True)
class CtxTriangle:
    """A (ctx-)distinguished triangle Z -> J -> Z' -> Sigma Z."""

    g: RMap
    h: RMap
    k: RMap


@dataclass
class RestrictedStage:
    W: RModule
    q: RMap
    iota: RMap
    alpha: RMap
    beta: RMap
    gamma: RMap


@dataclass
class RestrictedTrace:
    stages: list


def suspend_ctx_triangle(ctx, t: CtxTriangle) -> CtxTriangle:
    return CtxTriangle(ctx.sigma_map(t.g), ctx.sigma_map(t.h),
                       ctx.negate(ctx.sigma_map(t.k)))


def _restricted_octahedron(ctx, tA: CtxTriangle, tB: CtxTriangle,
                           cap: int = 4096) -> RestrictedStage:
    """Complete the octahedron on the factorization gB . hA.

    Returns the cone of the composite with maps alpha, beta forming a
    distinguished triangle over gamma = (Sigma kA) . kB, satisfying the
    four commuting squares.  Raises OctahedronError when no completion
    exists (inconsistent input triangles).
    """
    c = ctx.compose(tB.g, tA.h)
    W, q, iota = ctx.cone(c)
    SZA = ctx.tgt(tA.k)
    ZB1 = ctx.tgt(tB.h)
    gamma = ctx.compose(ctx.sigma_map(tA.k), tB.k)
    # alpha: Sigma Z_A -> W with alpha.kA = q.gB and iota.alpha = -Sigma gA
    m1 = ctx.pre_matrix(tA.k, W)
    m2 = ctx.post_matrix(iota, SZA)
    amb1 = ctx.hom(ctx.src(tA.k), W)
    amb2 = ctx.hom(SZA, ctx.tgt(iota))
    rhs = np.concatenate([
        np.array(amb1.stable_coords(ctx.compose(q, tB.g)), dtype=np.int64),
        np.array(amb2.stable_coords(ctx.negate(ctx.sigma_map(tA.g))),
                 dtype=np.int64)])
    p = ctx.src(c).ring.p
    alpha_sols = solve_affine(FpMatrix(p, np.vstack([m1.a, m2.a])), rhs)
    beta_sols = ctx.solve_pre(q, tB.h)
    if alpha_sols is None or beta_sols is None:
        raise OctahedronError("no octahedron completion for the factorization")
    for av in enumerate_points(alpha_sols, cap):
        alpha = ctx.make(SZA, W, av)
        for bv in enumerate_points(beta_sols, cap):
            beta = ctx.make(W, ZB1, bv)
            if ctx.is_distinguished(alpha, beta, gamma):
                return RestrictedStage(W, q, iota, alpha, beta, gamma)
    raise OctahedronError("no commuting completion is distinguished")


def restricted_higher_bracket(triangles, g: RMap, x: RMap, ctx=DIRECT,
                              cap: int = 4096,
                              with_trace: bool = False):
    """The inductively defined restricted bracket for factored maps.

    triangles: CtxTriangle list t_1 ... t_{n-1} (Z_i -> J_i -> Z_{i+1} ->
    Sigma Z_i), rightmost factorization first; g: Z_n -> A caps the left
    end; x: B -> J_1 feeds the right end.  The value is a subset of
    T(Sigma^{n-2} B, A).
    """
    triangles = list(triangles)
    n = len(triangles) + 1
    B, A = ctx.src(x), ctx.tgt(g)
    stages: list[RestrictedStage] = []
    if n == 2:
        comp = ctx.compose(g, ctx.compose(triangles[0].h, x))
        bs = _bracket_from_maps(ctx, B, A, [comp], None, {"n": 2})
        return (bs, RestrictedTrace(stages)) if with_trace else bs

    while True:
        st = _restricted_octahedron(ctx, triangles[-2], triangles[-1], cap)
        stages.append(st)
        if len(triangles) == 2:
            break
        new_last = CtxTriangle(st.alpha, st.beta, st.gamma)
        triangles = [suspend_ctx_triangle(ctx, t) for t in triangles[:-2]]
        triangles.append(new_last)
        x = ctx.sigma_map(x)

    # final stage: all lifts of -Sigma x through iota, composed with g.beta
    st = stages[-1]
    sx = ctx.sigma_map(x)
    lift_sols = ctx.solve_post(st.iota, ctx.negate(sx))
    SB = susp_in_ctx(ctx, B, n - 2)
    if lift_sols is None:
        bs = _bracket_from_maps(ctx, SB, A, [], "x does not lift", {"n": n})
        return (bs, RestrictedTrace(stages)) if with_trace else bs
    gb = ctx.compose(g, st.beta)
    maps = [ctx.compose(gb, a) for a in ctx.classes(SB, st.W, lift_sols, cap)]
    bs = _bracket_from_maps(ctx, SB, A, maps, None, {"n": n})
    return (bs, RestrictedTrace(stages)) if with_trace else bs


# ---------------------------------------------------------------------------
# filtered objects


@dataclass
class FilteredObject:
    """A tower of cones witnessing one element of a higher bracket."""

    stages: list          # F_0 = 0, F_1, ..., F_{n-1}
    i_maps: list          # i_j : F_j -> F_{j+1}
    q_maps: list          # q_j : F_j -> Sigma^{j-1} Y_{n_f - j}
    e_maps: list          # e_j : Sigma^j Y_{n_f-1-j} -> Sigma F_j
    sigma: RMap
    sigma_prime: RMap
    checks: dict


def filtered_witness(maps, element_coords, ctx=DIRECT,
                     cap: int = 4096) -> FilteredObject:
    """Assemble and verify the filtered object behind one bracket element.

    maps = (f_n, ..., f_1) with the standard reduction sequence; the
    element is given in quotient coordinates of T(Sigma^{n-2} X0, Xn).
    Verifies every stage triangle, the stage composites, and the
    witness diagram for the element; any failure lands in .checks.
    """
    bs, traces = higher_bracket(maps, ctx=ctx, cap=cap, with_trace=True)
    key = tuple(int(c) for c in element_coords)
    if key not in traces:
        raise BracketError("element does not lie in the bracket")
    trace = traces[key]
    n = len(maps)
    nf = n - 1
    maps = list(maps)
    f_n = maps[0]
    f_1 = maps[-1]
    lam = list(reversed(maps[1:-1]))  # lambda_1 = f_2, ..., lambda_{nf-1} = f_{n-1}
    X_last = ctx.tgt(maps[1])         # X_{n-1}

    stages = [zero_module(X_last.ring), X_last]
    i_maps, q_maps, e_maps = [], [], []
    checks: dict = {}
    # q_1 is the identity; i_1 carries the sign of the first cone
    q_maps.append(ctx.identity(X_last))
    for j, el in enumerate(trace, start=1):
        stages.append(el.intermediate)
        i_maps.append(ctx.negate(el.cone_q) if j == 1 else el.cone_q)
        q_maps.append(el.cone_iota)
        if j == 1:
            e_maps.append(ctx.sigma_map(maps[1]))       # Sigma f_{n-1}
        else:
            e_maps.append(ctx.negate(ctx.sigma_map(trace[j - 2].sigma_alpha)))

    # stage triangles (i_j, q_{j+1}, e_j) must be distinguished
    for j in range(1, nf):
        ok = ctx.is_distinguished(i_maps[j - 1], q_maps[j], e_maps[j - 1])
        checks[f"triangle_{j}"] = ok
    # composite conditions (Sigma q_j) . e_j = Sigma^j lambda_{nf-j}
    for j in range(1, nf):
        lhs = ctx.compose(ctx.sigma_map(q_maps[j - 1]), e_maps[j - 1])
        rhs = lam[nf - j - 1]
        for _ in range(j):
            rhs = ctx.sigma_map(rhs)
        checks[f"composite_{j}"] = ctx.eq(lhs, rhs)

    sigma = q_maps[-1]
    sigma_prime = ctx.negate(trace[0].cone_q)
    for el in trace[1:]:
        sigma_prime = ctx.compose(el.cone_q, sigma_prime)

    a = ctx.negate(trace[-1].sigma_alpha)
    b = ctx.negate(trace[-1].beta)
    snf1 = f_1
    for _ in range(n - 2):
        snf1 = ctx.sigma_map(snf1)
    checks["witness_lift"] = ctx.eq(ctx.compose(sigma, a), snf1)
    checks["witness_extension"] = ctx.eq(ctx.compose(b, sigma_prime), f_n)
    elem_map = ctx.make(bs.src, bs.tgt, key)
    checks["witness_composite"] = ctx.eq(ctx.compose(b, a), elem_map)
    if not all(checks.values()):
        raise BracketError(f"filtered object verification failed: {checks}")
    return FilteredObject(stages, i_maps, q_maps, e_maps, sigma,
                          sigma_prime, checks)
