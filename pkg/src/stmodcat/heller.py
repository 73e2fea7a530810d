"""Triangle recognition: a candidate is distinguished iff the represented
five-term sequences are exact and the 3-fold bracket of its maps
contains the identity.

The represented-functor condition is checked on one indecomposable test
object per isomorphism class: every module is a finite sum of the
blocks R/x^i, represented functors take sums to products, and the
family of blocks with i < m is closed under suspension up to
isomorphism, so exactness over these test objects decides exactness
over every object.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import EnumerationOverflow, FpMatrix, rank, row_space_basis
from .modrep import identity_map, module_from_partition
from .stcat import (
    Triangle,
    counit_iso,
    omega_map,
    post_matrix,
    sigma_ob,
)
from .toda import bracket3, bracket3_contains


@dataclass
class HellerVerdict:
    distinguished: bool
    exactness_ok: bool
    bracket_ok: bool
    failing_test_object: tuple | None
    bracket_elements: frozenset

    def __bool__(self):
        return self.distinguished


def _image_rows(mat: FpMatrix) -> FpMatrix:
    return row_space_basis(mat.transpose())


def _exact_at(into: FpMatrix, out: FpMatrix) -> bool:
    """Is im(into) = ker(out) for a composable pair of matrices?"""
    if (out @ into).a.any():
        return False
    return rank(into) == out.cols - rank(out)


def heller_check(t: Triangle, cap: int = 4096) -> HellerVerdict:
    """Apply both recognition conditions to a candidate triangle."""
    X, Y, Z = t.objects
    ring = X.ring
    # Sigma^{-1} h, transported through the comparison
    v = counit_iso(X) @ omega_map(t.h)
    failing = None
    exact = True
    for i in range(1, ring.m):
        A = module_from_partition(ring, [i])
        mv = post_matrix(v, A)
        mf = post_matrix(t.f, A)
        mg = post_matrix(t.g, A)
        mh = post_matrix(t.h, A)
        spots = [("X", mv, mf), ("Y", mf, mg), ("Z", mg, mh)]
        for name, into, out in spots:
            if not _exact_at(into, out):
                exact = False
                failing = (i, name)
                break
        if not exact:
            break

    bracket_ok = False
    elements: frozenset = frozenset()
    if exact:
        SX = sigma_ob(X)
        bracket_ok = bracket3_contains(t.h, t.g, t.f, identity_map(SX))
        try:
            elements = bracket3(t.h, t.g, t.f, cap=cap).elements
        except EnumerationOverflow:
            elements = frozenset()  # evidence only; membership already decided
    return HellerVerdict(exact and bracket_ok, exact, bracket_ok,
                         failing, elements)
