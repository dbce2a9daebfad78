import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import builders
from kwall.lattice import EngineError, pair
from kwall.positivity import (
    NotPseudoEffective,
    QuadraticPiece,
    VolumeProfile,
    integrate_profile,
    is_nef,
    profile_to_doc,
    volume_profile,
    zariski_decompose,
)
from kwall.surface import ConfigurationError

F = Fraction


def _ray(model, origin, direction, expected, tau, integral):
    prof = volume_profile(model, origin, direction)
    assert prof.tau == tau
    assert prof.failures(degree=pair(origin, origin)) == ()
    got = [(p.t_lo, p.t_hi, p.coeffs, set(p.chamber_support)) for p in prof.pieces]
    assert got == [(F(a), F(b), tuple(F(x) for x in q), set(s))
                   for a, b, q, s in expected]
    assert integrate_profile(prof) == integral
    return prof


def test_sigma5_along_a_line():
    m = builders.sigma5()
    _ray(m, -1 * m.canonical, m.gen('line12'),
         [(0, 1, (5, -2, -1), ()),
          (1, 2, (8, -8, 2), {'exc1', 'exc2', 'line34'})],
         tau=2, integral=F(13, 3))


def test_xt_along_quartic_section():
    m = builders.xt()
    _ray(m, m.anticanonical_pullback, m.lattice.div((1, 4, -1, -1, -1, -1)),
         [(0, 1, (5, -4, 0), ()),
          (1, F(3, 2), (9, -12, 4), {'exc1', 'exc2', 'exc3', 'exc4'})],
         tau=F(3, 2), integral=F(19, 6))


def test_xt_along_contracted_section():
    m = builders.xt()
    _ray(m, m.anticanonical_pullback, m.gen('sigma'),
         [(0, F(1, 2), (5, 0, -4), ()),
          (F(1, 2), F(3, 2), (6, -4, 0), {'fib1', 'fib2', 'fib3', 'fib4'})],
         tau=F(3, 2), integral=F(13, 3))


def test_xq_extension_along_exceptional():
    ext = builders.xq_ext_r()
    origin = ext.pullback(ext.base.anticanonical_pullback)
    _ray(ext.model, origin, ext.e_class,
         [(0, 2, (5, 0, -1), ()),
          (2, F(5, 2), (25, -20, 4), {f'ray{i}' for i in range(1, 6)})],
         tau=F(5, 2), integral=F(15, 2))


def test_index3_along_contracted_fiber():
    m = builders.index3()
    _ray(m, m.anticanonical_pullback, m.gen('fiber5'),
         [(0, F(1, 3), (5, 0, F(-9, 2)), {'sect'}),
          (F(1, 3), F(10, 3), (F(50, 9), F(-10, 3), F(1, 2)),
           {'sect', 'exc1', 'exc2', 'exc3', 'exc4', 'exc5'})],
         tau=F(10, 3), integral=F(55, 9))


def test_xprime_along_contracted_fiber():
    m = builders.xprime()
    _ray(m, m.anticanonical_pullback, m.gen('l3'),
         [(0, F(1, 2), (5, 0, F(-8, 3)), {'s3'}),
          (F(1, 2), F(3, 2), (F(23, 4), -3, F(1, 3)),
           {'s3', 'exc1', 'exc2', 'exc3'}),
          (F(3, 2), F(7, 2), (F(49, 8), F(-7, 2), F(1, 2)),
           {'s3', 'exc1', 'exc2', 'exc3', 'exc-g'})],
         tau=F(7, 2), integral=F(41, 6))


def test_xprime_extension_along_exceptional():
    ext = builders.xprime_ext_p()
    origin = ext.pullback(ext.base.anticanonical_pullback)
    _ray(ext.model, origin, ext.e_class,
         [(0, 2, (5, 0, F(-1, 2)), ()),
          (2, 3, (F(17, 3), F(-2, 3), F(-1, 3)), {'fiber-g'}),
          (3, F(7, 2), (F(98, 3), F(-56, 3), F(8, 3)),
           {'fiber-g', 'conic1', 'conic2', 'conic3'})],
         tau=F(7, 2), integral=F(32, 3))


def test_x12_along_exceptional():
    m = builders.x12()
    _ray(m, m.anticanonical_pullback, m.gen('exc-a1'),
         [(0, 3, (5, -2, F(1, 6)), {'a1', 'a2-head', 'a2-tail'}),
          (3, 4, (8, -4, F(1, 2)), {'a1', 'a2-head', 'a2-tail', 'exc-a2'})],
         tau=4, integral=F(23, 3))


def test_x11_along_line():
    m = builders.x11()
    _ray(m, m.anticanonical_pullback, m.gen('line-pq'),
         [(0, 2, (5, -2, 0), {'a1p', 'a1q'}),
          (2, 3, (9, -6, 1), {'a1p', 'a1q', 'exc-p', 'exc-q'})],
         tau=3, integral=F(19, 3))


def test_x11_extension_along_exceptional():
    # the A1 curve is dragged into the support by the exceptional over its
    # residual point, so this ray has three chambers
    ext = builders.x11_ext()
    origin = ext.pullback(ext.base.anticanonical_pullback)
    _ray(ext.model, origin, ext.e_class,
         [(0, 1, (5, 0, -1), ()),
          (1, 3, (F(37, 6), F(-7, 3), F(1, 6)), {'exc-p', 'tang-p', 'a1p'}),
          (3, 4, (F(32, 3), F(-16, 3), F(2, 3)),
           {'exc-p', 'tang-p', 'a1p', 'tang-q'})],
         tau=4, integral=F(28, 3))


def test_zariski_known_negative_part():
    m = builders.sigma5()
    mk = -1 * m.canonical
    res = zariski_decompose(m, mk - F(3, 2) * m.gen('line12'))
    assert dict(res.negative_support) == {
        'exc1': F(1, 2), 'exc2': F(1, 2), 'line34': F(1, 2)}
    assert res.failures() == ()
    res2 = zariski_decompose(m, mk - F(1, 2) * m.gen('line12'))
    assert res2.negative_support == ()
    assert res2.positive == mk - F(1, 2) * m.gen('line12')
    res3 = zariski_decompose(m, mk)
    assert res3.negative_support == () and res3.positive == mk


def test_nef_reports():
    m = builders.sigma5()
    mk = -1 * m.canonical
    assert bool(is_nef(m, mk))
    assert bool(is_nef(m, m.lattice.zero()))
    rep = is_nef(m, mk - F(3, 2) * m.gen('line12'))
    assert not rep and rep.witness in {'exc1', 'exc2', 'line34'}


def test_junk_input_rejected():
    m = builders.sigma5()
    with pytest.raises(EngineError):
        zariski_decompose(m, -1 * m.lattice.basis('e1'))
    with pytest.raises(ConfigurationError):
        volume_profile(m, m.lattice.basis('e1'), m.gen('line12'))
    with pytest.raises(ConfigurationError):
        volume_profile(m, m.lattice.zero(), m.gen('line12'))
    with pytest.raises(ConfigurationError):
        volume_profile(m, -1 * m.canonical, m.lattice.zero())


def test_profile_value_and_doc():
    m = builders.sigma5()
    prof = volume_profile(m, -1 * m.canonical, m.gen('line12'))
    assert prof.value(F(1, 2)) == F(15, 4)
    assert prof.value(2) == 0
    with pytest.raises(ValueError):
        prof.value(3)
    doc = profile_to_doc(prof)
    assert doc['tau'] == '2'
    assert [p['coeffs'] for p in doc['pieces']] == [['5', '-2', '-1'],
                                                    ['8', '-8', '2']]


def test_chamber_supports_nested():
    for make in (builders.sigma5, builders.xt, builders.x11, builders.x12,
                 builders.xq, builders.xprime, builders.index3):
        m = make()
        o = m.anticanonical_pullback
        for name, _ in m.mori_gens:
            prof = volume_profile(m, o, m.gen(name))
            seen: set = set()
            for p in prof.pieces:
                assert seen <= set(p.chamber_support)
                seen = set(p.chamber_support)


MODELS = [builders.sigma5, builders.xn, builders.x11, builders.x12,
          builders.xq, builders.xt, builders.xprime]


@pytest.mark.parametrize('make', MODELS, ids=lambda f: f.__name__)
def test_profiles_along_every_generator(make):
    '''dual route: piecewise value against a fresh point decomposition'''
    m = make()
    o = m.anticanonical_pullback
    deg = pair(o, o)
    for name, _ in m.mori_gens:
        prof = volume_profile(m, o, m.gen(name))
        assert prof.failures(degree=deg) == ()
        for k in range(8):
            t = prof.tau * k / 7
            p = zariski_decompose(m, o - t * m.gen(name)).positive
            assert prof.value(t) == pair(p, p)


@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_random_ray_profiles_are_valid(data):
    make = data.draw(st.sampled_from(MODELS))
    m = make()
    names = list(m.gen_names)
    weights = data.draw(st.lists(
        st.fractions(min_value=0, max_value=3, max_denominator=6),
        min_size=len(names), max_size=len(names)))
    direction = m.lattice.zero()
    for w, n in zip(weights, names):
        direction = direction + w * m.gen(n)
    if direction.is_zero():
        return
    o = m.anticanonical_pullback
    prof = volume_profile(m, o, direction)
    assert prof.failures(degree=pair(o, o)) == ()
    assert integrate_profile(prof) > 0
    mid = prof.tau / 2
    p = zariski_decompose(m, o - mid * direction).positive
    assert prof.value(mid) == pair(p, p)


def test_walk_matches_subset_oracle():
    '''the chamber walk and an exhaustive negative-definite subset search
    must agree on every pseudo-effective class'''
    from oracle import ZariskiOracle

    rng = random.Random(20260825)
    for make in (builders.sigma5, builders.xn, builders.x11, builders.x12,
                 builders.xt, builders.xq):
        m = make()
        oracle = ZariskiOracle(m)
        gens = [c for _, c in m.mori_gens]
        for _ in range(30):
            d = m.anticanonical_pullback * F(rng.randrange(0, 3))
            for c in gens:
                d = d + F(rng.randrange(0, 7), rng.randrange(1, 4)) * c
            if d.is_zero():
                continue
            assert zariski_decompose(m, d).positive == oracle.positive_part(d)


def test_integrate_trivial_profile():
    piece = QuadraticPiece(F(0), F(1), (F(3), F(0), F(0)), ())
    assert integrate_profile(VolumeProfile((piece,), F(1))) == 3
    assert NotPseudoEffective.__mro__[1] is EngineError
