'''
Exact rational bilinear-form algebra for divisor classes.

Everything downstream (nef tests, Zariski decompositions, volume integrals,
wall coefficients) reduces to arithmetic in a finite-rank lattice with a
Q-valued symmetric pairing. All scalars are fractions.Fraction; no floats
appear anywhere in this module.
'''
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


class EngineError(Exception):
    '''base class for computational failures (as opposed to bad input)'''


class SingularSystem(EngineError):
    '''linear system without a unique solution'''


def rational(x: int | str | Fraction) -> Fraction:
    '''
    parse a rational from an int, a Fraction or a "p/q" / "n" string

    TESTS:
        >>> rational("-3/4")
        Fraction(-3, 4)
        >>> rational(7)
        Fraction(7, 1)
    '''
    if isinstance(x, bool):
        raise ValueError(f'not a rational: {x!r}')
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise ValueError(f'not a rational: {x!r}')


def rational_str(x: Fraction) -> str:
    '''render a rational as "p/q", or "n" when the denominator is 1'''
    return str(x)


def rational_vector(xs: Iterable[int | str | Fraction]) -> tuple[Fraction, ...]:
    return tuple(rational(x) for x in xs)


@dataclass(frozen=True)
class IntersectionLattice:
    '''
    rank-r lattice with a Q-valued symmetric pairing and named basis vectors

    Fields:
        - ``names`` -- basis labels, one per row of the Gram matrix
        - ``gram`` -- r x r matrix of rationals

    TESTS:
        >>> lat = IntersectionLattice.diagonal(("h", "e1"), (1, -1))
        >>> lat.rank
        2
        >>> lat.pair(lat.basis("h"), lat.basis("h"))
        Fraction(1, 1)
    '''
    names: tuple[str, ...]
    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        assert len(set(self.names)) == len(self.names), 'duplicate basis names'
        assert len(self.gram) == len(self.names)
        assert all(len(row) == len(self.names) for row in self.gram)

    @classmethod
    def from_rows(cls, names: Sequence[str],
                  rows: Sequence[Sequence[int | str | Fraction]]) -> 'IntersectionLattice':
        return cls(tuple(names), tuple(rational_vector(row) for row in rows))

    @classmethod
    def diagonal(cls, names: Sequence[str],
                 entries: Sequence[int | str | Fraction]) -> 'IntersectionLattice':
        ents = rational_vector(entries)
        rows = tuple(tuple(ents[i] if i == j else Fraction(0) for j in range(len(ents)))
                     for i in range(len(ents)))
        return cls(tuple(names), rows)

    @property
    def rank(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f'no basis vector {name!r}; have {list(self.names)}') from None

    def div(self, coords: Sequence[int | str | Fraction]) -> 'DivClass':
        cs = rational_vector(coords)
        if len(cs) != self.rank:
            raise ValueError(f'expected {self.rank} coordinates, got {len(cs)}')
        return DivClass(self, cs)

    def basis(self, name: str) -> 'DivClass':
        i = self.index(name)
        return self.div(tuple(1 if j == i else 0 for j in range(self.rank)))

    def zero(self) -> 'DivClass':
        return self.div((0,) * self.rank)

    def pair(self, a: 'DivClass', b: 'DivClass') -> Fraction:
        return pair(a, b)


@dataclass(frozen=True)
class DivClass:
    '''divisor class: a coordinate vector over an owning lattice'''
    lattice: IntersectionLattice
    coords: tuple[Fraction, ...]

    def _check_mate(self, other: 'DivClass') -> None:
        if self.lattice is not other.lattice and self.lattice != other.lattice:
            raise ValueError('classes live on different lattices')

    def __add__(self, other: 'DivClass') -> 'DivClass':
        self._check_mate(other)
        return DivClass(self.lattice, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: 'DivClass') -> 'DivClass':
        self._check_mate(other)
        return DivClass(self.lattice, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> 'DivClass':
        return DivClass(self.lattice, tuple(-a for a in self.coords))

    def scale(self, k: int | str | Fraction) -> 'DivClass':
        kk = rational(k)
        return DivClass(self.lattice, tuple(kk * a for a in self.coords))

    __mul__ = scale
    __rmul__ = scale

    def dot(self, other: 'DivClass') -> Fraction:
        return pair(self, other)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __repr__(self) -> str:
        terms = [f'{rational_str(c)}*{n}' for c, n in zip(self.coords, self.lattice.names) if c != 0]
        return ' + '.join(terms) if terms else '0'


def pair(a: DivClass, b: DivClass) -> Fraction:
    '''
    intersection number a.b, exact

    TESTS:
        >>> lat = IntersectionLattice.diagonal(("h", "e1", "e2"), (1, -1, -1))
        >>> k = lat.div((-3, 1, 1))
        >>> pair(k, k)
        Fraction(7, 1)
    '''
    a._check_mate(b)
    g = a.lattice.gram
    total = Fraction(0)
    for i, ai in enumerate(a.coords):
        if ai == 0:
            continue
        row = g[i]
        total += ai * sum((row[j] * bj for j, bj in enumerate(b.coords) if bj != 0), Fraction(0))
    return total


@dataclass(frozen=True)
class LatticeReport:
    '''outcome of validate_lattice; empty ``failures`` means the lattice passed'''
    symmetric: bool
    signature: tuple[int, int, int]
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def signature(rows: Sequence[Sequence[Fraction]]) -> tuple[int, int, int]:
    '''
    (positive, negative, zero) inertia of a symmetric rational matrix,
    via exact congruence diagonalization

    TESTS:
        >>> signature([[Fraction(-2), Fraction(1)], [Fraction(1), Fraction(0)]])
        (1, 1, 0)
    '''
    n = len(rows)
    a = [[Fraction(x) for x in row] for row in rows]
    pos = neg = zero = 0
    for k in range(n):
        if a[k][k] == 0:
            for j in range(k + 1, n):
                if a[j][k] == 0:
                    continue
                # symmetric row+column addition keeps the congruence class;
                # one of the two signs always yields a nonzero diagonal entry
                lam = next(s for s in (Fraction(1), Fraction(-1))
                           if s * (2 * a[j][k] + s * a[j][j]) != 0)
                for m in range(n):
                    a[k][m] += lam * a[j][m]
                for m in range(n):
                    a[m][k] += lam * a[m][j]
                break
        p = a[k][k]
        if p == 0:
            zero += 1
            continue
        if p > 0:
            pos += 1
        else:
            neg += 1
        for j in range(k + 1, n):
            if a[j][k] == 0:
                continue
            f = a[j][k] / p
            for m in range(n):
                a[j][m] -= f * a[k][m]
            for m in range(n):
                a[m][j] -= f * a[m][k]
    return pos, neg, zero


def is_negative_definite(rows: Sequence[Sequence[Fraction]]) -> bool:
    n = len(rows)
    return signature(rows) == (0, n, 0)


def validate_lattice(lat: IntersectionLattice) -> LatticeReport:
    '''
    check symmetry and hyperbolic signature (1, rank-1)

    A projective surface lattice must carry one positive direction and
    rank-1 negative ones; anything else is a miscoded Gram matrix.
    '''
    failures: list[str] = []
    symmetric = all(lat.gram[i][j] == lat.gram[j][i]
                    for i in range(lat.rank) for j in range(lat.rank))
    if not symmetric:
        failures.append('gram matrix is not symmetric')
        return LatticeReport(False, (0, 0, 0), tuple(failures))
    sig = signature(lat.gram)
    if sig != (1, lat.rank - 1, 0):
        failures.append(f'signature {sig} is not (1, {lat.rank - 1}, 0)')
    return LatticeReport(symmetric, sig, tuple(failures))


def solve_linear(rows: Sequence[Sequence[Fraction]],
                 rhs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    '''
    exact solution of a square linear system; raises SingularSystem when the
    matrix is singular

    TESTS:
        >>> solve_linear([[Fraction(-2), Fraction(1)], [Fraction(1), Fraction(-2)]],
        ...              [Fraction(-1), Fraction(0)])
        (Fraction(2, 3), Fraction(1, 3))
    '''
    n = len(rows)
    if any(len(row) != n for row in rows) or len(rhs) != n:
        raise ValueError('system is not square')
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise SingularSystem(f'no pivot in column {col}')
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(a[r][n] for r in range(n))
