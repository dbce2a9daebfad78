'''
Built-in fixture catalog: surfaces, boundary divisors, valuations, walls.

Fixtures live in a versioned JSON resource (data/catalog.json, overridable
through the KWALL_CATALOG environment variable) and decode into validated
engine objects.  Each fixture pins the affine log discrepancy its valuation
must reproduce, optionally the expected vanishing order and margin, and the
wall coefficient the margin's root must hit; the wall table is the sorted
list of all wall coefficients the catalog as a whole must produce, with one
metadata entry per wall.

Trust convention for expected values: "golden" marks targets the engine has
to reproduce from an external source of truth, "frozen" marks values first
derived by the engine itself and pinned against regressions.
'''
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Optional

from .lattice import rational, rational_vector
from .stability import AffineRatFn, LogPair, ValuationSpec
from .surface import (
    BlowupCenter,
    ConfigurationError,
    SurfaceModel,
    build_blowup_extension,
    surface_from_doc,
)

DATA_PATH = Path(__file__).resolve().parent / 'data' / 'catalog.json'
ENV_VAR = 'KWALL_CATALOG'


class CatalogError(ConfigurationError):
    '''catalog resource missing, malformed, or queried with a bad id'''


@dataclass(frozen=True)
class Expected:
    '''pinned targets for one fixture; None means derived on demand'''
    log_discrepancy: AffineRatFn
    vanishing_order: Optional[AffineRatFn]
    margin: Optional[AffineRatFn]
    wall: Optional[Fraction]
    trust: str


@dataclass(frozen=True)
class Display:
    '''presentation metadata: the printed margin is scale * (A - S)'''
    scale: Fraction
    beta_text: Optional[str] = None
    curve: Optional[str] = None
    weights: tuple[int, ...] = ()


def printed_margin(margin: AffineRatFn, scale=1) -> str:
    '''
    display normal form ``g(nc-m)/d`` of a scaled margin

    Keeps the integer content g outside the bracket so the root m/n stays
    readable.  Only meant for rising margins with a positive root, which is
    what every displayed catalog cell is.

    TESTS::

        >>> from .stability import affine
        >>> printed_margin(affine('-23/30', '76/30'), 2)
        '(76c-23)/15'
        >>> printed_margin(affine('-4/15', '38/15'))
        '2(19c-2)/15'
    '''
    c0 = rational(margin.const) * rational(scale)
    c1 = rational(margin.slope) * rational(scale)
    if c1 <= 0 or c0 >= 0:
        raise CatalogError(f'margin {margin} has no display normal form')
    d = lcm(c0.denominator, c1.denominator)
    n, m = int(c1 * d), int(-c0 * d)
    g = gcd(n, m)
    lead = '' if g == 1 else str(g)
    tail = '' if d == 1 else f'/{d}'
    return f'{lead}({n // g}c-{m // g}){tail}'


@dataclass(frozen=True)
class Fixture:
    id: str
    pair: LogPair
    valuation: ValuationSpec
    expected: Expected
    display: Optional[Display] = None
    notes: tuple[str, ...] = ()
    equivariant: tuple[ValuationSpec, ...] = ()

    @property
    def family(self) -> str:
        return self.id.split('/', 1)[0]

    @property
    def surface(self) -> SurfaceModel:
        return self.pair.surface


@dataclass(frozen=True)
class WallEntry:
    value: Fraction
    kind: str
    families: tuple[str, ...]
    description: str

    @property
    def divisorial(self) -> bool:
        return self.kind == 'divisorial'


@dataclass(frozen=True)
class WallTable:
    entries: tuple[WallEntry, ...]

    @property
    def walls(self) -> tuple[Fraction, ...]:
        return tuple(e.value for e in self.entries)

    @property
    def divisorial_walls(self) -> tuple[Fraction, ...]:
        return tuple(e.value for e in self.entries if e.divisorial)

    def entry(self, value) -> WallEntry:
        value = rational(value)
        for e in self.entries:
            if e.value == value:
                return e
        raise CatalogError(f'no wall at {value}')


@dataclass(frozen=True)
class Catalog:
    version: int
    path: str
    surfaces: tuple[SurfaceModel, ...]
    fixtures: tuple[Fixture, ...]
    wall_table: WallTable

    @cached_property
    def _surface_index(self) -> dict:
        return {m.name: m for m in self.surfaces}

    @cached_property
    def _fixture_index(self) -> dict:
        return {f.id: f for f in self.fixtures}

    def surface(self, name: str) -> SurfaceModel:
        try:
            return self._surface_index[name]
        except KeyError:
            known = ', '.join(sorted(self._surface_index))
            raise CatalogError(
                f'unknown surface {name!r}; available: {known}') from None

    def fixture(self, fixture_id: str) -> Fixture:
        try:
            return self._fixture_index[fixture_id]
        except KeyError:
            known = ', '.join(f.id for f in self.fixtures)
            raise CatalogError(
                f'unknown fixture id {fixture_id!r}; '
                f'available: {known}') from None

    def ids(self, family: Optional[str] = None) -> tuple[str, ...]:
        if family is None:
            return tuple(f.id for f in self.fixtures)
        return tuple(f.id for f in self.fixtures
                     if f.family.startswith(family))


def _decode_affine(doc) -> AffineRatFn:
    return AffineRatFn(rational(doc['const']), rational(doc['slope']))


def _decode_part(model: SurfaceModel, doc):
    mult = rational(doc['mult'])
    if 'gen' in doc:
        return doc['gen'], mult
    cls = model.lattice.div(rational_vector(doc['class']))
    if 'label' in doc:
        return (doc['label'], cls), mult
    return cls, mult


def _decode_valuation(pair: LogPair, doc) -> ValuationSpec:
    kind = doc.get('kind')
    tag = doc.get('tag', 'plain')
    if kind == 'surface':
        return ValuationSpec.on_surface(pair, doc['name'], tag=tag)
    if kind == 'class':
        cls = pair.surface.lattice.div(rational_vector(doc['class']))
        return ValuationSpec(name=doc['name'], ambient=pair.surface,
                             e_class=cls, a_x=rational(doc['a_x']),
                             ord_b=rational(doc['ord_b']), tag=tag)
    if kind == 'blowup':
        cdoc = doc['center']
        center = BlowupCenter.make(
            weights=tuple(int(w) for w in cdoc.get('weights', (1, 1))),
            exc_name=cdoc.get('exc_name', 'e'),
            through=tuple((n, rational(m)) for n, m in cdoc.get('through', ())),
            extra_mori=tuple((n, rational_vector(cl))
                             for n, cl in cdoc.get('extra_mori', ())))
        ext = build_blowup_extension(pair.surface, center)
        a_x = rational(doc['a_x']) if 'a_x' in doc else None
        ord_b = rational(doc['ord_b']) if 'ord_b' in doc else None
        return ValuationSpec.on_extension(pair, ext, name=doc.get('name', ''),
                                          tag=tag, a_x=a_x, ord_b=ord_b)
    raise CatalogError(f'unknown valuation kind {kind!r}')


def _decode_expected(doc) -> Expected:
    def affine_or_none(key):
        sub = doc.get(key)
        if sub is None or sub == 'derived':
            return None
        return _decode_affine(sub)

    wall = doc.get('wall')
    return Expected(
        log_discrepancy=_decode_affine(doc['A']),
        vanishing_order=affine_or_none('S'),
        margin=affine_or_none('beta'),
        wall=None if wall is None else rational(wall),
        trust=doc.get('trust', 'frozen'))


def _decode_display(doc) -> Display:
    return Display(
        scale=rational(doc.get('scale', 1)),
        beta_text=doc.get('beta'),
        curve=doc.get('curve'),
        weights=tuple(int(w) for w in doc.get('weights', ())))


def _decode_fixture(surfaces: dict, doc) -> Fixture:
    try:
        model = surfaces[doc['surface']]
    except KeyError:
        raise CatalogError(
            f'fixture {doc.get("id")!r} names unknown surface '
            f'{doc.get("surface")!r}') from None
    parts = tuple(_decode_part(model, p) for p in doc.get('boundary', ()))
    pair = LogPair.make(model, parts).validate()
    valuation = _decode_valuation(pair, doc['valuation'])
    display = doc.get('display')
    return Fixture(
        id=doc['id'],
        pair=pair,
        valuation=valuation,
        expected=_decode_expected(doc['expected']),
        display=None if display is None else _decode_display(display),
        notes=tuple(doc.get('notes', ())),
        equivariant=tuple(_decode_valuation(pair, v)
                          for v in doc.get('equivariant', ())))


def _decode_wall(doc) -> WallEntry:
    kind = doc['kind']
    if kind not in ('divisorial', 'flip'):
        raise CatalogError(f'unknown wall kind {kind!r}')
    return WallEntry(value=rational(doc['value']), kind=kind,
                     families=tuple(doc.get('families', ())),
                     description=doc.get('description', ''))


def catalog_path() -> Path:
    '''embedded resource path, or the KWALL_CATALOG override'''
    override = os.environ.get(ENV_VAR)
    return Path(override) if override else DATA_PATH


@lru_cache(maxsize=None)
def _load_resolved(path_str: str) -> Catalog:
    path = Path(path_str)
    if not path.is_file():
        raise CatalogError(f'catalog resource {path_str} does not exist')
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CatalogError(f'catalog resource {path_str} is not JSON: {exc}')
    surfaces = tuple(surface_from_doc(d).validate() for d in doc['surfaces'])
    index = {m.name: m for m in surfaces}
    fixtures = tuple(_decode_fixture(index, d) for d in doc['fixtures'])
    seen = set()
    for f in fixtures:
        if f.id in seen:
            raise CatalogError(f'duplicate fixture id {f.id!r}')
        seen.add(f.id)
    entries = tuple(_decode_wall(d) for d in doc['walls'])
    if list(entries) != sorted(entries, key=lambda e: e.value):
        raise CatalogError('wall table is not sorted')
    return Catalog(version=int(doc.get('version', 0)), path=path_str,
                   surfaces=surfaces, fixtures=fixtures,
                   wall_table=WallTable(entries))


def load_catalog(path=None) -> Catalog:
    '''load and cache the catalog at ``path`` (default: catalog_path())'''
    p = Path(path) if path is not None else catalog_path()
    return _load_resolved(str(p.resolve()))


def load_fixture(fixture_id: str) -> Fixture:
    '''
    one validated fixture by id

    TESTS:
        >>> load_fixture('Sigma5/D_1_17/L1').expected.wall
        Fraction(1, 17)
    '''
    return load_catalog().fixture(fixture_id)


def enumerate_fixtures(family: Optional[str] = None) -> tuple[str, ...]:
    '''fixture ids in catalog order, optionally filtered by family prefix'''
    return load_catalog().ids(family)


def expected_wall_list() -> WallTable:
    '''the full sorted wall table with per-wall metadata'''
    return load_catalog().wall_table


def pair_from_doc(doc, catalog: Optional[Catalog] = None) -> LogPair:
    '''
    validated pair from a standalone document

    Schema: {"surface": catalog name, "boundary": [part, ...]} where a part
    is {"mult": p/q} plus either {"gen": name} or {"class": [...]} with an
    optional "label".
    '''
    if not isinstance(doc, dict):
        raise CatalogError('pair document must be a json object')
    if 'surface' not in doc:
        raise CatalogError("pair document has no 'surface' field")
    cat = catalog if catalog is not None else load_catalog()
    model = cat.surface(doc['surface'])
    try:
        parts = tuple(_decode_part(model, p) for p in doc.get('boundary', ()))
    except KeyError as exc:
        raise CatalogError(
            f'boundary part is missing field {exc.args[0]!r}') from None
    return LogPair.make(model, parts).validate()


def valuation_from_doc(pair: LogPair, doc) -> ValuationSpec:
    '''
    validated valuation from a standalone document, resolved against a pair

    Same schema as the catalog fixture "valuation" object: kind "surface"
    with a generator name, kind "class" with a class plus a_x and ord_b, or
    kind "blowup" with a center description.
    '''
    if not isinstance(doc, dict):
        raise CatalogError('valuation document must be a json object')
    try:
        return _decode_valuation(pair, doc)
    except KeyError as exc:
        raise CatalogError(
            f'valuation document is missing field {exc.args[0]!r}') from None
