import random
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moorek.abelian import (
    AbelianError,
    AbelianGroup,
    ArithmeticOverflowError,
    GroupHom,
    UnsupportedInputError,
    cyclic,
    det,
    diagonal,
    direct_sum,
    free,
    from_presentation,
    hermite_normal_form,
    is_exact,
    matmul,
    n_primary_part,
    normalize_cyclic,
    smith_normal_form,
    solve_in_group,
    subquotients,
    tensor_Zn,
    tor_Zn,
)

from oracles import determinantal_divisors, elements, hom_apply, same_group

matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


def random_group(rng, max_summands=3, top=12):
    return normalize_cyclic([rng.randint(1, top) for _ in range(rng.randint(0, max_summands))])


def random_hom(rng, dom, cod):
    cols = []
    for d in dom.factors:
        col = []
        for e in cod.factors:
            step = e // gcd(e, d) if e else (0 if d else 1)
            col.append(rng.randint(0, 5) * step)
        cols.append(col)
    return GroupHom.from_columns(dom, cod, cols)


# ----------------------------------------------------------------------
# Smith normal form


def test_snf_example_against_determinantal_divisors():
    u, d, v = smith_normal_form([[2, 4], [6, 8]])
    assert diagonal(d) == [2, 4]
    assert determinantal_divisors([[2, 4], [6, 8]]) == [2, 4]
    assert matmul(matmul(u, [[2, 4], [6, 8]]), v) == d


def test_snf_identity_and_zero():
    assert diagonal(smith_normal_form([[1, 0, 0], [0, 1, 0], [0, 0, 1]])[1]) == [1, 1, 1]
    _, d, _ = smith_normal_form([[0, 0, 0], [0, 0, 0]])
    assert d == [[0, 0, 0], [0, 0, 0]]


def test_snf_rejects_empty():
    with pytest.raises(AbelianError):
        smith_normal_form([])


def test_snf_overflow_is_loud():
    with pytest.raises(ArithmeticOverflowError):
        smith_normal_form([[2**62, 3], [5, 2**62]])
    with pytest.raises(ArithmeticOverflowError):
        smith_normal_form([[2**63, 1], [1, 1]])


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_snf_properties(m):
    u, d, v = smith_normal_form(m)
    assert matmul(matmul(u, m), v) == d
    assert abs(det(u)) == 1 and abs(det(v)) == 1
    diag = diagonal(d)
    assert all(x >= 0 for x in diag)
    nonzero = [x for x in diag if x]
    assert diag[: len(nonzero)] == nonzero
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
    for r in range(len(d)):
        for c in range(len(d[0])):
            if r != c:
                assert d[r][c] == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r))))
def test_snf_matches_minor_oracle(m):
    assert diagonal(smith_normal_form(m)[1]) == determinantal_divisors(m)


def test_hermite_form_is_echelon():
    h = hermite_normal_form([[2, 4, 4], [-6, 6, 12], [10, 4, 16]], 3)
    pivots = [next(i for i, x in enumerate(row) if x) for row in h]
    assert pivots == sorted(pivots) and len(set(pivots)) == len(pivots)
    assert all(row[p] > 0 for row, p in zip(h, pivots))


# ----------------------------------------------------------------------
# presentations


def test_presentation_examples():
    assert from_presentation(1, [[5]]) == cyclic(5)
    assert from_presentation(2, []) == free(2)
    assert from_presentation(2, [[2, 0], [0, 4]]).factors == (2, 4)
    assert from_presentation(2, [[6, 0], [0, 4]]).factors == (2, 12)


def test_presentation_dimension_mismatch():
    with pytest.raises(AbelianError):
        from_presentation(2, [[1, 2, 3]])


def test_group_invariants_enforced():
    with pytest.raises(AbelianError):
        AbelianGroup((4, 2))
    with pytest.raises(AbelianError):
        AbelianGroup((1,))
    with pytest.raises(AbelianError):
        AbelianGroup((0, 2))
    with pytest.raises(AbelianError):
        AbelianGroup((2,), ("a", "b"))


def test_labels_do_not_affect_equality():
    assert AbelianGroup((2, 4), ("a", "b")) == AbelianGroup((2, 4), ("x", "y"))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 12), max_size=4))
def test_presentation_is_idempotent(orders):
    g = normalize_cyclic(orders)
    again = from_presentation(g.rank, g.relation_rows())
    assert again == g
    assert again.basis.to_normal == [[int(i == j) for j in range(g.rank)] for i in range(g.rank)]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 12), max_size=3))
def test_normalized_group_matches_enumeration(orders):
    g = normalize_cyclic(orders)
    assert same_group(g.factors, orders)


def test_basis_change_round_trip():
    g = normalize_cyclic([4, 6], ["a", "b"])
    assert g.factors == (2, 12)
    for v in elements([4, 6]):
        normal = g.reduce([sum(r[i] * v[i] for i in range(2)) for r in g.basis.to_normal])
        back = [sum(g.basis.from_normal[r][c] * normal[c] for c in range(g.rank)) for r in range(2)]
        assert (back[0] - v[0]) % 4 == 0 and (back[1] - v[1]) % 6 == 0


def test_element_reduction_and_json():
    g = AbelianGroup((3, 0), ("g", "t"))
    assert g.reduce([4, -2]) == (1, -2)
    assert g.to_json() == {"factors": [3, 0], "labels": ["g", "t"]}
    assert AbelianGroup.from_json(g.to_json()) == g


# ----------------------------------------------------------------------
# homomorphisms and subquotients


def test_hom_well_definedness_enforced():
    with pytest.raises(AbelianError):
        GroupHom(cyclic(2), cyclic(3), ((1,),))
    GroupHom(cyclic(2), cyclic(4), ((2,),))


def test_multiplication_by_minus_n_on_Z():
    sq = subquotients(GroupHom.scalar(free(1), -3))
    assert sq.kernel.factors == () and sq.image.factors == (0,) and sq.cokernel.factors == (3,)


def test_zero_map_on_Zn():
    sq = subquotients(GroupHom.zero(cyclic(5), cyclic(5)))
    assert sq.kernel == cyclic(5) and sq.image.factors == () and sq.cokernel == cyclic(5)


def test_times_two_on_Z4_against_enumeration():
    h = GroupHom.scalar(cyclic(4), 2)
    sq = subquotients(h)
    ker = [x for x in range(4) if (2 * x) % 4 == 0]
    im = {(2 * x) % 4 for x in range(4)}
    assert sq.kernel.order == len(ker) == 2
    assert sq.image.order == len(im) == 2
    assert sq.cokernel.factors == (2,)


def check_subquotients_by_enumeration(h):
    dom, cod = h.domain, h.codomain
    d_els = elements(dom.factors)
    c_els = elements(cod.factors)
    ker = [x for x in d_els if not any(h(x))]
    im = {tuple(h(x)) for x in d_els}
    sq = subquotients(h)
    assert same_group(sq.kernel.factors, dom.factors, ker)
    assert same_group(sq.image.factors, cod.factors, sorted(im))
    assert same_group(sq.cokernel.factors, cod.factors, c_els, im)
    # the retained maps land where they should
    incl = {tuple(sq.kernel_inclusion(x)) for x in elements(sq.kernel.factors)}
    assert incl == set(ker)
    assert {tuple(sq.image_inclusion(x)) for x in elements(sq.image.factors)} == im
    for x in d_els:
        assert not any(sq.cokernel_projection(h(x)))
    assert sq.kernel.order * sq.image.order == dom.order


def test_subquotients_random_against_enumeration():
    rng = random.Random(11)
    for _ in range(60):
        dom, cod = random_group(rng), random_group(rng)
        check_subquotients_by_enumeration(random_hom(rng, dom, cod))


def test_solve_in_group():
    g = AbelianGroup((2, 4))
    assert solve_in_group(g, [(1, 1)], (1, 3)) == [3]
    assert solve_in_group(g, [(0, 2)], (1, 0)) is None


def test_direct_sum_maps():
    s, inj, proj = direct_sum(cyclic(2, "a"), cyclic(3, "b"))
    assert s.factors == (6,)
    for i, p in zip(inj, proj):
        assert i.then(p) == GroupHom.identity(i.domain)


# ----------------------------------------------------------------------
# exactness


def test_bockstein_row_for_Z_is_exact():
    n = 4
    z, zn = free(1), cyclic(n)
    seq = [GroupHom.scalar(z, -n), GroupHom(z, zn, ((1,),)), GroupHom.zero(zn, AbelianGroup(()))]
    assert is_exact(seq).exact


def test_identity_sequence_is_exact():
    zn = cyclic(3)
    zero = AbelianGroup(())
    assert is_exact([GroupHom.zero(zero, zn), GroupHom.identity(zn), GroupHom.zero(zn, zero)]).exact


def test_zero_maps_on_Z_not_exact():
    z = free(1)
    report = is_exact([GroupHom.zero(z, z), GroupHom.zero(z, z)])
    assert not report.exact
    assert not report.nodes[0].exact


def test_is_exact_rejects_non_composable():
    with pytest.raises(AbelianError):
        is_exact([GroupHom.identity(cyclic(2)), GroupHom.identity(cyclic(3))])


# ----------------------------------------------------------------------
# tensor, Tor, localization


def test_tensor_examples():
    assert tensor_Zn(free(1), 3) == cyclic(3)
    assert tensor_Zn(cyclic(4), 2) == cyclic(2)
    assert tensor_Zn(cyclic(3), 2).factors == ()
    with pytest.raises(AbelianError):
        tensor_Zn(cyclic(3), 1)


def test_tor_examples():
    assert tor_Zn(free(1), 5).factors == ()
    assert tor_Zn(AbelianGroup((3, 3)), 3).factors == (3, 3)
    assert tor_Zn(cyclic(6), 4) == cyclic(2)
    with pytest.raises(AbelianError):
        tor_Zn(cyclic(3), 0)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 12), max_size=3), st.integers(2, 12))
def test_tensor_and_tor_against_enumeration(orders, n):
    g = normalize_cyclic(orders)
    els = elements(g.factors)
    n_multiples = {tuple((n * c) % d for c, d in zip(x, g.factors)) for x in els}
    assert same_group(tensor_Zn(g, n).factors, g.factors, els, n_multiples)
    killed = [x for x in els if not any((n * c) % d for c, d in zip(x, g.factors))]
    assert same_group(tor_Zn(g, n).factors, g.factors, killed)


def test_n_primary_part_examples():
    assert n_primary_part(cyclic(6), 2) == cyclic(2)
    assert n_primary_part(cyclic(9), 3) == cyclic(9)
    assert n_primary_part(cyclic(5), 2).factors == ()
    with pytest.raises(UnsupportedInputError):
        n_primary_part(free(1), 2)


def test_hom_apply_oracle_agrees_with_call():
    rng = random.Random(3)
    for _ in range(20):
        dom, cod = random_group(rng), random_group(rng)
        h = random_hom(rng, dom, cod)
        for x in elements(dom.factors):
            assert tuple(h(x)) == hom_apply(h.matrix, cod.factors, x)
