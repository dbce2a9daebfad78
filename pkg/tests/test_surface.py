import random
from fractions import Fraction

import pytest

from kwall.lattice import IntersectionLattice, pair
from kwall.surface import (
    BlowupCenter,
    ConfigurationError,
    SurfaceModel,
    anticanonical_degree,
    build_blowup_extension,
    contraction_orders,
    pullback_weil,
    surface_from_doc,
    surface_to_doc,
)

F = Fraction


def make_p2() -> SurfaceModel:
    lat = IntersectionLattice.diagonal(('h',), (1,))
    return SurfaceModel('p2', lat, lat.div((-3,)), (('line', lat.basis('h')),))


def make_sigma5() -> SurfaceModel:
    lat = IntersectionLattice.diagonal(('h', 'e1', 'e2', 'e3', 'e4'), (1, -1, -1, -1, -1))
    gens = [(f'exc{i}', lat.basis(f'e{i}')) for i in range(1, 5)]
    pairs = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    for i, j in pairs:
        coords = [1, 0, 0, 0, 0]
        coords[i] = coords[j] = -1
        gens.append((f'line{i}{j}', lat.div(coords)))
    return SurfaceModel('sigma5', lat, lat.div((-3, 1, 1, 1, 1)), tuple(gens))


def make_index3() -> SurfaceModel:
    # second Hirzebruch surface blown up at five points of one fiber, then
    # the fiber transform (-5) and the negative section (-2) contract to a
    # single index-3 quotient point
    names = ('sect', 'fib', 'e1', 'e2', 'e3', 'e4', 'e5')
    rows = [
        [-2, 1, 0, 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 0, 0],
    ] + [[0] * 2 + [-1 if j == i else 0 for j in range(5)] for i in range(5)]
    lat = IntersectionLattice.from_rows(names, rows)
    fiber5 = lat.div((0, 1, -1, -1, -1, -1, -1))
    gens = [('sect', lat.basis('sect')), ('fiber5', fiber5)]
    gens += [(f'exc{i}', lat.basis(f'e{i}')) for i in range(1, 6)]
    gens.append(('sect-inf', lat.div((1, 2, 0, 0, 0, 0, 0))))
    return SurfaceModel(
        'index3', lat, lat.div((-2, -4, 1, 1, 1, 1, 1)), tuple(gens),
        contracted=('fiber5', 'sect'),
        k_discrepancies=(('fiber5', F(-2, 3)), ('sect', F(-1, 3))),
    )


def make_xq() -> SurfaceModel:
    lat = IntersectionLattice.diagonal(('h', 'e1', 'e2', 'e3', 'e4', 'e5'),
                                       (1, -1, -1, -1, -1, -1))
    axis = lat.div((1, -1, -1, -1, -1, -1))
    gens = [('axis', axis)]
    gens += [(f'exc{i}', lat.basis(f'e{i}')) for i in range(1, 6)]
    gens += [(f'ray{i}', lat.div([1] + [-1 if j == i else 0 for j in range(1, 6)]))
             for i in range(1, 6)]
    return SurfaceModel(
        'xq', lat, lat.div((-3, 1, 1, 1, 1, 1)), tuple(gens),
        contracted=('axis',), k_discrepancies=(('axis', F(-1, 2)),),
    )


def test_degrees():
    assert anticanonical_degree(make_sigma5()) == 5
    assert anticanonical_degree(make_p2()) == 9
    assert anticanonical_degree(make_xq()) == 5
    assert anticanonical_degree(make_index3()) == 5


def test_models_validate():
    for m in (make_p2(), make_sigma5(), make_xq(), make_index3()):
        assert m.failures() == ()


def test_index3_canonical_pullback():
    m = make_index3()
    pk = m.anticanonical_pullback
    assert pk.coords == (F(5, 3), F(10, 3), F(-1, 3), F(-1, 3), F(-1, 3), F(-1, 3), F(-1, 3))
    for n in m.contracted:
        assert pair(pk, m.gen(n)) == 0


def test_index3_weil_pullbacks_match_known_values():
    m = make_index3()
    lat = m.lattice
    # exceptional over a blown-up point
    pb = pullback_weil(m, lat.basis('e1'))
    assert pb - lat.basis('e1') == F(2, 9) * m.gen('fiber5') + F(1, 9) * m.gen('sect')
    # generic fiber through the singular point
    pb = pullback_weil(m, lat.basis('fib'))
    assert pb - lat.basis('fib') == F(1, 9) * m.gen('fiber5') + F(5, 9) * m.gen('sect')
    # disjoint positive section
    sec = lat.div((1, 2, 0, 0, 0, 0, 0))
    pb = pullback_weil(m, sec)
    assert pb - sec == F(2, 9) * m.gen('fiber5') + F(1, 9) * m.gen('sect')
    # section through exactly one blown-up point needs no correction
    thru = lat.div((1, 2, -1, 0, 0, 0, 0))
    assert pullback_weil(m, thru) == thru


def test_pullback_weil_orthogonality_random():
    m = make_index3()
    rng = random.Random(7)
    for _ in range(50):
        d = m.lattice.div([F(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(7)])
        pb = pullback_weil(m, d)
        for c in m.contracted_classes:
            assert pair(pb, c) == 0


def test_contraction_orders():
    m = make_xq()
    # a line through one of the five collinear points misses the contracted axis
    ray = m.lattice.div((1, -1, 0, 0, 0, 0))
    assert contraction_orders(m, ray)['axis'] == 0
    # a generic line meets it once: pull(h) = h + (1/4) axis
    orders = contraction_orders(m, m.lattice.basis('h'))
    assert orders['axis'] == F(1, 4)


def test_pullback_weil_identity_without_contraction():
    m = make_sigma5()
    d = m.lattice.div((2, -1, 0, 3, '1/2'))
    assert pullback_weil(m, d) == d


def test_ordinary_blowup_extension():
    base = make_sigma5()
    ext = build_blowup_extension(base, BlowupCenter.make(weights=(1, 1), exc_name='e5'))
    assert pair(ext.e_class, ext.e_class) == -1
    assert ext.a_over_base == 2
    k = ext.model.canonical
    assert pair(k, k) == pair(base.canonical, base.canonical) - 1


def test_weighted_blowup_extension():
    base = make_sigma5()
    ext = build_blowup_extension(
        base,
        BlowupCenter.make(weights=(1, 2), exc_name='w',
                          through={'line12': 2, 'line34': 1}),
    )
    assert pair(ext.e_class, ext.e_class) == F(-1, 2)
    assert ext.a_over_base == 3
    lt = ext.model.gen('line12')
    assert lt == ext.pullback(base.gen('line12')) - 2 * ext.e_class
    assert pair(lt, ext.e_class) == 1


def test_extension_pullback_is_isometry():
    base = make_sigma5()
    ext = build_blowup_extension(base, BlowupCenter.make(weights=(2, 3), exc_name='w'))
    rng = random.Random(11)
    for _ in range(100):
        a = base.lattice.div([F(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(5)])
        b = base.lattice.div([F(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(5)])
        assert pair(ext.pullback(a), ext.pullback(b)) == pair(a, b)
        assert pair(ext.pullback(a), ext.e_class) == 0


def test_p2_blowup_preserves_hyperplane_square():
    base = make_p2()
    ext = build_blowup_extension(base, BlowupCenter.make(weights=(1, 1), exc_name='e1'))
    h = ext.pullback(base.lattice.basis('h'))
    assert pair(h, h) == 1


def test_extension_rejects_bad_input():
    base = make_sigma5()
    with pytest.raises(ConfigurationError):
        build_blowup_extension(base, BlowupCenter.make(weights=(2, 4)))
    with pytest.raises(ConfigurationError):
        build_blowup_extension(base, BlowupCenter.make(weights=(0, 1)))
    with pytest.raises(ConfigurationError):
        build_blowup_extension(base, BlowupCenter.make(through={'nope': 1}))
    with pytest.raises(ConfigurationError):
        # a (-1)-curve cannot have a triple point
        build_blowup_extension(base, BlowupCenter.make(through={'line12': 3}))


def test_extension_center_on_contracted_curve():
    # blowing up a point of the contracted axis is allowed; the valuation
    # layer owns the discrepancy correction for such centers
    xq = make_xq()
    ext = build_blowup_extension(xq, BlowupCenter.make(through={'axis': 1}, exc_name='e'))
    assert pair(ext.model.gen('axis'), ext.e_class) == 1
    assert ext.a_over_base == 2


def test_failures_reported():
    m = make_xq()
    bad = SurfaceModel(m.name, m.lattice, m.canonical, m.mori_gens,
                       contracted=('ghost',))
    assert any('ghost' in f for f in bad.failures())
    # two (-1)-curves meeting in one point are not negative definite
    bad2 = SurfaceModel(m.name, m.lattice, m.canonical, m.mori_gens,
                        contracted=('exc1', 'ray2'))
    assert any('negative definite' in f for f in bad2.failures())
    # class that is neither negative nor K-negative cannot be extremal
    lat = m.lattice
    bad3 = SurfaceModel('x', lat, m.canonical,
                        m.mori_gens + (('bogus', lat.div((-1, 0, 0, 0, 0, 0))),))
    assert any('bogus' in f for f in bad3.failures())


def test_surface_doc_roundtrip():
    m = make_index3()
    doc = surface_to_doc(m)
    m2 = surface_from_doc(doc)
    assert m2.lattice == m.lattice
    assert m2.canonical == m.canonical
    assert m2.degree == 5
    with pytest.raises(ConfigurationError):
        surface_from_doc({'basis': ['h'], 'gram': [['1']]})
