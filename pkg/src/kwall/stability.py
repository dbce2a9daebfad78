'''
log pairs, divisorial valuations, and exact wall arithmetic

A pair carries a boundary divisor whose class is twice the anticanonical
class, scaled by a coefficient c.  Every invariant of interest is then an
affine function of c: the log discrepancy drops linearly with the order of
the boundary along the valuation, and the expected vanishing order picks up
a global (1 - 2c) factor.  Their difference is the destabilising margin
whose roots are the walls.
'''

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property

from .lattice import DivClass, pair, rational, rational_str
from .positivity import VolumeProfile, integrate_profile, volume_profile
from .surface import (
    BlowupExtension,
    ConfigurationError,
    SurfaceModel,
    contraction_orders,
    pullback_weil,
)

HALF = Fraction(1, 2)

TAGS = frozenset({'plain', 'vertical', 'horizontal'})


@dataclass(frozen=True)
class AffineRatFn:
    '''exact affine function const + slope * c of the boundary coefficient

    TESTS:
        >>> f = AffineRatFn(Fraction(1), Fraction(-4))
        >>> f.value(Fraction(1, 17))
        Fraction(13, 17)
        >>> str(f - AffineRatFn(Fraction(13, 15), Fraction(-26, 15)))
        '2/15 - 34/15 c'
    '''
    const: Fraction
    slope: Fraction

    def value(self, c) -> Fraction:
        return self.const + self.slope * rational(c)

    @property
    def is_zero(self) -> bool:
        return self.const == 0 and self.slope == 0

    def __add__(self, other: 'AffineRatFn') -> 'AffineRatFn':
        return AffineRatFn(self.const + other.const, self.slope + other.slope)

    def __sub__(self, other: 'AffineRatFn') -> 'AffineRatFn':
        return AffineRatFn(self.const - other.const, self.slope - other.slope)

    def __neg__(self) -> 'AffineRatFn':
        return AffineRatFn(-self.const, -self.slope)

    def __str__(self) -> str:
        if self.slope == 0:
            return rational_str(self.const)
        tail = f'{rational_str(abs(self.slope))} c'
        if self.const == 0:
            return tail if self.slope > 0 else f'-{tail}'
        sign = '+' if self.slope > 0 else '-'
        return f'{rational_str(self.const)} {sign} {tail}'


def affine(const, slope) -> AffineRatFn:
    return AffineRatFn(rational(const), rational(slope))


@dataclass(frozen=True)
class LogPair:
    '''
    boundary divisor on a resolution, scaled by the symbol c

    ``boundary`` holds (component name or None, class on the resolution,
    multiplicity); the component classes are the proper transforms of the
    honest curves downstairs, so the cycle-level order along a contracted
    curve comes from the pullback solve, never from raw coordinates.
    '''
    surface: SurfaceModel
    boundary: tuple[tuple[str | None, DivClass, Fraction], ...]
    c_lo: Fraction = Fraction(0)
    c_hi: Fraction = HALF

    @classmethod
    def make(cls, surface: SurfaceModel, parts, c_range=(0, HALF)) -> 'LogPair':
        '''parts: iterable of (component, mult); a component is a generator
        name, a DivClass or coordinate tuple, or a (label, class) pair for a
        curve that is not a declared generator'''
        rows = []
        for comp, mult in parts:
            if isinstance(comp, str):
                rows.append((comp, surface.gen(comp), rational(mult)))
            elif isinstance(comp, DivClass):
                rows.append((None, comp, rational(mult)))
            elif len(comp) == 2 and isinstance(comp[0], str):
                label, cl = comp
                if not isinstance(cl, DivClass):
                    cl = surface.lattice.div(cl)
                rows.append((label, cl, rational(mult)))
            else:
                rows.append((None, surface.lattice.div(comp), rational(mult)))
        return cls(surface, tuple(rows),
                   rational(c_range[0]), rational(c_range[1])).validate()

    @cached_property
    def boundary_class(self) -> DivClass:
        '''full pullback of the boundary cycle to the resolution'''
        out = self.surface.lattice.zero()
        for _, comp, mult in self.boundary:
            out = out + mult * pullback_weil(self.surface, comp)
        return out

    @cached_property
    def anticanonical_factor(self) -> Fraction:
        '''k with boundary class = k * anticanonical; 2 for the usual pairs,
        0 for an empty boundary'''
        acp = self.surface.anticanonical_pullback
        deg = pair(acp, acp)
        return pair(self.boundary_class, acp) / deg if deg else Fraction(0)

    def boundary_order(self, name: str) -> Fraction:
        '''order of the boundary along a named curve of the resolution

        A contracted curve gets the coefficient the components force in the
        pullback cycle; anything else gets its summed multiplicity.
        '''
        if name in self.surface.contracted:
            total = Fraction(0)
            for _, comp, mult in self.boundary:
                total += mult * contraction_orders(self.surface, comp)[name]
            return total
        if name not in self.surface.gen_names and \
                all(n != name for n, _, _ in self.boundary):
            raise ConfigurationError(
                f'{self.surface.name}: {name!r} is neither a generator nor a '
                'boundary component label')
        return sum((mult for n, _, mult in self.boundary if n == name),
                   Fraction(0))

    def component_class(self, label: str) -> DivClass:
        for n, cl, _ in self.boundary:
            if n == label:
                return cl
        raise ConfigurationError(f'no boundary component labelled {label!r}')

    def failures(self) -> tuple[str, ...]:
        problems = []
        if not (0 <= self.c_lo < self.c_hi <= HALF):
            problems.append(f'coefficient range ({self.c_lo}, {self.c_hi}) is not inside (0, 1/2)')
        for n, _, mult in self.boundary:
            if mult < 0:
                problems.append(f'component {n or "?"} has negative multiplicity {mult}')
            if n is not None and n in self.surface.contracted:
                problems.append(f'component {n} is a contracted curve, not a curve downstairs')
        target = self.anticanonical_factor * self.surface.anticanonical_pullback
        if self.anticanonical_factor < 0 or self.boundary_class != target:
            problems.append(
                f'boundary class {self.boundary_class.coords} is not a non-negative '
                'multiple of the anticanonical class')
        if self.surface.degree <= 0:
            problems.append('degree is not positive, the scaled polarisation cannot be ample')
        return tuple(problems)

    def validate(self) -> 'LogPair':
        problems = self.failures()
        if problems:
            raise ConfigurationError(
                f'{self.surface.name}: ' + '; '.join(problems))
        return self

    def contains(self, c) -> bool:
        return self.c_lo < rational(c) < self.c_hi


@dataclass(frozen=True)
class ValuationSpec:
    '''
    divisorial valuation with its empty-boundary log discrepancy ``a_x``
    and the order ``ord_b`` of the boundary along it

    ``ambient`` is either the resolution itself (the valuation is one of its
    curves) or a one-step blow-up extension carrying the centre data.  The
    tag marks torus equivariance: vertical valuations may vanish only at a
    boundary of the stable locus, a nonzero horizontal margin can always be
    flipped into a destabilising direction.
    '''
    name: str
    ambient: SurfaceModel | BlowupExtension
    e_class: DivClass
    a_x: Fraction
    ord_b: Fraction
    tag: str = 'plain'

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ConfigurationError(f'unknown equivariance tag {self.tag!r}')
        if self.a_x < 0:
            raise ConfigurationError(
                f'{self.name}: log discrepancy {self.a_x} < 0 over the surface')

    @property
    def model(self) -> SurfaceModel:
        if isinstance(self.ambient, BlowupExtension):
            return self.ambient.model
        return self.ambient

    def base_surface(self) -> SurfaceModel:
        if isinstance(self.ambient, BlowupExtension):
            return self.ambient.base
        return self.ambient

    @classmethod
    def on_surface(cls, p: LogPair, name: str, tag: str = 'plain') -> 'ValuationSpec':
        '''a named curve of the resolution: a declared generator, a
        contracted curve, or a labelled boundary component; a_x = 1 plus the
        stored discrepancy when the curve is contracted'''
        m = p.surface
        a_x = Fraction(1) + m.discrepancy.get(name, Fraction(0))
        try:
            cl = m.gen(name)
        except KeyError:
            cl = p.component_class(name)
        return cls(name, m, cl, a_x, p.boundary_order(name), tag)

    @classmethod
    def on_extension(cls, p: LogPair, ext: BlowupExtension, name: str = '',
                     tag: str = 'plain', a_x=None, ord_b=None) -> 'ValuationSpec':
        '''the exceptional divisor of a one-step blow-up

        ``a_x`` and ``ord_b`` default to the values forced by the centre
        data: the discrepancy over the base corrected by any contracted
        curves through the centre, and the boundary multiplicities pushed
        through their centre orders.
        '''
        if ext.base != p.surface:
            raise ConfigurationError('extension is not built over the pair surface')
        scale = -pair(ext.e_class, ext.e_class)

        def centre_order(gen_name: str) -> Fraction:
            return pair(ext.model.gen(gen_name), ext.e_class) / scale

        if a_x is None:
            a_x = ext.a_over_base
            for n in ext.base.contracted:
                a_x += ext.base.discrepancy[n] * centre_order(n)
        if ord_b is None:
            ord_b = Fraction(0)
            for comp_name, _, mult in p.boundary:
                if comp_name is None or comp_name not in ext.base.gen_names:
                    raise ConfigurationError(
                        f'component {comp_name!r} has no centre data on the '
                        'extension; pass ord_b explicitly')
                ord_b += mult * centre_order(comp_name)
            for n in ext.base.contracted:
                ord_b += p.boundary_order(n) * centre_order(n)
        return cls(name or ext.e_class.lattice.names[-1], ext, ext.e_class,
                   rational(a_x), rational(ord_b), tag)


def _check_pairing(p: LogPair, v: ValuationSpec) -> None:
    if v.base_surface() != p.surface:
        raise ConfigurationError(
            f'valuation {v.name} does not live over surface {p.surface.name}')


def log_discrepancy(p: LogPair, v: ValuationSpec) -> AffineRatFn:
    '''a_x - ord_b * c, the log discrepancy of the scaled pair'''
    _check_pairing(p, v)
    return AffineRatFn(v.a_x, -v.ord_b)


def valuation_profile(v: ValuationSpec) -> VolumeProfile:
    '''volume profile of the anticanonical class along the valuation ray'''
    origin = v.base_surface().anticanonical_pullback
    if isinstance(v.ambient, BlowupExtension):
        origin = v.ambient.pullback(origin)
    return volume_profile(v.model, origin, v.e_class)


def s_invariant(p: LogPair, v: ValuationSpec) -> AffineRatFn:
    '''
    expected vanishing order along the valuation, as a function of c

    Because the boundary class is k times the anticanonical class (k = 2
    for the pairs of interest), scaling by c only rescales the polarisation
    by (1 - kc), so the integral computed once at c = 0 carries the whole
    c-dependence.
    '''
    _check_pairing(p, v)
    s = integrate_profile(valuation_profile(v)) / p.surface.degree
    return AffineRatFn(s, -p.anticanonical_factor * s)


def beta(p: LogPair, v: ValuationSpec) -> AffineRatFn:
    '''destabilising margin: log discrepancy minus expected vanishing order'''
    return log_discrepancy(p, v) - s_invariant(p, v)


@dataclass(frozen=True)
class WallSolve:
    '''root of an affine margin inside an open interval, if any'''
    root: Fraction | None
    identically_zero: bool = False


def solve_wall(b: AffineRatFn, lo=0, hi=HALF) -> WallSolve:
    '''
    unique root of b inside the open interval (lo, hi)

    The identically-zero margin is reported as its own outcome rather than
    a wall; a constant nonzero margin has no root.

    TESTS:
        >>> solve_wall(affine(1, -4) - affine(Fraction(13, 15), Fraction(-26, 15))).root
        Fraction(1, 17)
        >>> solve_wall(affine(0, 0)).identically_zero
        True
        >>> solve_wall(affine(1, -1)).root is None
        True
    '''
    lo, hi = rational(lo), rational(hi)
    if b.is_zero:
        return WallSolve(None, identically_zero=True)
    if b.slope == 0:
        return WallSolve(None)
    root = -b.const / b.slope
    if lo < root < hi:
        return WallSolve(root)
    return WallSolve(None)


class Verdict(str, Enum):
    POLYSTABLE = 'polystable'
    SEMISTABLE_BOUNDARY = 'semistable-boundary'
    UNSTABLE = 'unstable'


FUTAKI_NOTE = ('vanishing of the horizontal margins stands in for the full '
               'vector-field character; a nonzero value flips to a '
               'destabilising direction under the torus')


@dataclass(frozen=True)
class StabilityReport:
    verdict: Verdict
    c: Fraction
    margins: tuple[tuple[str, Fraction], ...]
    witnesses: tuple[tuple[str, Fraction], ...]
    note: str = FUTAKI_NOTE


def polystability_check(p: LogPair, vs, c) -> StabilityReport:
    '''
    equivariant verdict at a fixed coefficient

    Polystable iff every vertical margin is positive and every horizontal
    margin vanishes; any negative margin, or a nonzero horizontal one, is
    destabilising, and a vanishing vertical margin signals the boundary of
    the stable region.
    '''
    if not vs:
        raise ConfigurationError('polystability needs the equivariant valuation list')
    c = rational(c)
    if not p.contains(c):
        raise ConfigurationError(
            f'coefficient {c} outside the admissible range ({p.c_lo}, {p.c_hi})')
    values = [(v, beta(p, v).value(c)) for v in vs]
    margins = tuple((v.name, x) for v, x in values)
    negative = tuple((v.name, x) for v, x in values if x < 0)
    if negative:
        return StabilityReport(Verdict.UNSTABLE, c, margins, negative)
    twisted = tuple((v.name, x) for v, x in values
                    if v.tag == 'horizontal' and x != 0)
    if twisted:
        return StabilityReport(Verdict.UNSTABLE, c, margins, twisted)
    grazing = tuple((v.name, x) for v, x in values
                    if v.tag == 'vertical' and x == 0)
    if grazing:
        return StabilityReport(Verdict.SEMISTABLE_BOUNDARY, c, margins, grazing)
    return StabilityReport(Verdict.POLYSTABLE, c, margins, ())


def quotient_order_bound(pair_degree) -> Fraction:
    '''
    largest order of a local quotient group compatible with semistability

    The local volume of a quotient point is 4 over the group order and can
    never drop below four ninths of the degree, so the order is at most
    9/degree.

    TESTS:
        >>> quotient_order_bound(Fraction(9))
        Fraction(1, 1)
    '''
    d = rational(pair_degree)
    if d <= 0:
        raise ConfigurationError(f'degree {d} is not positive')
    return 9 / d


def index_feasibility(d: int, n: int, c, ord_lower) -> bool:
    '''
    can a 1/(d n^2) (1, d n a - 1) point survive at coefficient c?

    Exact test of d n^2 * (4/9) * 5 (1-2c)^2 <= (2 - c * ord)^2, using a
    lower bound for the order of the boundary at the point.
    '''
    if d < 1 or n < 1:
        raise ConfigurationError(f'index data d={d}, n={n} must be positive integers')
    c = rational(c)
    if not 0 < c < HALF:
        raise ConfigurationError(f'coefficient {c} outside (0, 1/2)')
    ord_lower = rational(ord_lower)
    if ord_lower < 0:
        raise ConfigurationError(f'negative boundary order bound {ord_lower}')
    lhs = Fraction(d * n * n) * Fraction(4, 9) * 5 * (1 - 2 * c) ** 2
    return lhs <= (2 - c * ord_lower) ** 2


def vgit_slope(c) -> Fraction:
    '''
    slope matching the quartic-curve variation of GIT at coefficient c

    TESTS:
        >>> vgit_slope(Fraction(1, 4))
        Fraction(5, 2)
        >>> vgit_slope(Fraction(11, 28))
        Fraction(10, 7)
    '''
    c = rational(c)
    if not Fraction(1, 4) <= c < HALF:
        raise ConfigurationError(f'coefficient {c} outside [1/4, 1/2)')
    return (25 - 20 * c) / (28 * c + 1)
