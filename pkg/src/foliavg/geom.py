"""Tensor calculus on one chart: fields, forms, multivectors, graded brackets.

All tensors are represented by sparse dictionaries of canonical components
over the manifold coordinates of a :class:`~foliavg.symcalc.Chart` (angles
are parameters and carry no components).  Component indices are strictly
increasing tuples of coordinate positions, so two tensors are equal exactly
when their component dictionaries are equal.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    ChartMismatch,
    DegreeOverflow,
    DegreeUnderflow,
    MissingInverse,
    UnsupportedDegree,
)
from .symcalc import Chart, Scalar

Number = Union[int, Fraction]
Index = tuple[int, ...]


def _sort_index(idx: Sequence[int]) -> tuple[Index, int] | None:
    """Sort an index tuple, returning (sorted, sign) or None on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return tuple(idx), sign


def _det(rows: list[list[Scalar]]) -> Scalar:
    if not rows:
        raise ValueError("empty determinant")
    if len(rows) == 1:
        return rows[0][0]
    chart = rows[0][0].chart
    total = Scalar.zero(chart)
    for col in range(len(rows)):
        entry = rows[0][col]
        if entry.is_zero:
            continue
        minor = [[row[c] for c in range(len(rows)) if c != col] for row in rows[1:]]
        cofactor = _det(minor)
        total = total + (entry * cofactor if col % 2 == 0 else -(entry * cofactor))
    return total


def _check_chart(a, b) -> None:
    if a.chart != b.chart:
        raise ChartMismatch(f"{a.chart} vs {b.chart}")


class VectorField:
    """A vector field with one Scalar component per manifold coordinate."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: Chart, comps: Sequence[Scalar]) -> None:
        if len(comps) != chart.dim:
            raise ChartMismatch("component count does not match chart dimension")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "comps", tuple(comps))

    def __setattr__(self, name, value):
        raise AttributeError("VectorField is immutable")

    @staticmethod
    def zero(chart: Chart) -> "VectorField":
        return VectorField(chart, [Scalar.zero(chart)] * chart.dim)

    @staticmethod
    def basis(chart: Chart, name: str) -> "VectorField":
        i = chart.coord_index(name)
        comps = [Scalar.zero(chart)] * chart.dim
        comps[i] = Scalar.one(chart)
        return VectorField(chart, comps)

    @staticmethod
    def from_dict(chart: Chart, comps: Mapping[str, Scalar]) -> "VectorField":
        out = [Scalar.zero(chart)] * chart.dim
        for name, value in comps.items():
            out[chart.coord_index(name)] = value
        return VectorField(chart, out)

    def component(self, name: str) -> Scalar:
        return self.comps[self.chart.coord_index(name)]

    def apply(self, f: Scalar) -> Scalar:
        """Directional derivative of a scalar."""
        total = Scalar.zero(self.chart)
        for i, name in enumerate(self.chart.coords):
            if not self.comps[i].is_zero:
                total = total + self.comps[i] * f.diff(name)
        return total

    def bracket(self, other: "VectorField") -> "VectorField":
        _check_chart(self, other)
        comps = []
        for i in range(self.chart.dim):
            comps.append(self.apply(other.comps[i]) - other.apply(self.comps[i]))
        return VectorField(self.chart, comps)

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_chart(self, other)
        return VectorField(self.chart, [a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_chart(self, other)
        return VectorField(self.chart, [a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, [-a for a in self.comps])

    def __mul__(self, factor: Scalar | Number) -> "VectorField":
        return VectorField(self.chart, [a * factor for a in self.comps])

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return all(a.is_zero for a in self.comps)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and self.comps == other.comps

    def __hash__(self) -> int:
        return hash((self.chart, self.comps))

    def __repr__(self) -> str:
        parts = [
            f"({c})*d/d{name}"
            for c, name in zip(self.comps, self.chart.coords)
            if not c.is_zero
        ]
        return " + ".join(parts) if parts else "0"


class _Graded:
    """Shared container behaviour of forms, multivectors and valued forms."""

    __slots__ = ("chart", "degree", "comps")
    _zero_value = None

    def __init__(self, chart: Chart, degree: int, comps: Mapping[Index, object]) -> None:
        if degree < 0:
            raise DegreeUnderflow("negative degree")
        if degree > chart.dim:
            raise DegreeOverflow(f"degree {degree} exceeds dimension {chart.dim}")
        clean = {}
        for idx, value in comps.items():
            if len(idx) != degree or list(idx) != sorted(set(idx)):
                raise ValueError(f"bad component index {idx}")
            if not value.is_zero:
                clean[idx] = value
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "comps", clean)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def _make(cls, chart: Chart, degree: int, items: Iterable[tuple[Index, object]]):
        acc: dict[Index, object] = {}
        for idx, value in items:
            if idx in acc:
                acc[idx] = acc[idx] + value
            else:
                acc[idx] = value
        return cls(chart, degree, acc)

    @property
    def is_zero(self) -> bool:
        return not self.comps

    def _binop(self, other, sign: int):
        _check_chart(self, other)
        if self.degree != other.degree:
            raise UnsupportedDegree("degrees differ")
        items = list(self.comps.items())
        items += [(i, v if sign > 0 else -v) for i, v in other.comps.items()]
        return type(self)._make(self.chart, self.degree, items)

    def __add__(self, other):
        return self._binop(other, +1)

    def __sub__(self, other):
        return self._binop(other, -1)

    def __neg__(self):
        return type(self)(self.chart, self.degree, {i: -v for i, v in self.comps.items()})

    def __mul__(self, factor):
        return type(self)(
            self.chart, self.degree, {i: v * factor for i, v in self.comps.items()}
        )

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, type(self)):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.degree == other.degree
            and self.comps == other.comps
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.chart, self.degree, tuple(sorted(self.comps.items(), key=lambda kv: kv[0]))))

    def _names(self, idx: Index) -> tuple[str, ...]:
        return tuple(self.chart.coords[i] for i in idx)

    def __repr__(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for idx in sorted(self.comps):
            basis = "^".join(f"d{n}" for n in self._names(idx)) or "1"
            parts.append(f"({self.comps[idx]})*{basis}")
        return " + ".join(parts)


class DiffForm(_Graded):
    """A differential k-form with canonical components on coordinate wedges."""

    @staticmethod
    def zero(chart: Chart, degree: int) -> "DiffForm":
        return DiffForm(chart, degree, {})

    @staticmethod
    def function(chart: Chart, f: Scalar) -> "DiffForm":
        return DiffForm(chart, 0, {(): f})

    @staticmethod
    def d_coord(chart: Chart, name: str) -> "DiffForm":
        return DiffForm(chart, 1, {(chart.coord_index(name),): Scalar.one(chart)})

    @staticmethod
    def from_dict(chart: Chart, degree: int, comps: Mapping[Sequence[str], Scalar]) -> "DiffForm":
        items = []
        for names, value in comps.items():
            idx = tuple(chart.coord_index(n) for n in names)
            sorted_sign = _sort_index(idx)
            if sorted_sign is None:
                raise ValueError(f"repeated coordinate in {names}")
            sidx, sign = sorted_sign
            items.append((sidx, value if sign > 0 else -value))
        return DiffForm._make(chart, degree, items)

    def coefficient(self, *names: str) -> Scalar:
        idx = tuple(self.chart.coord_index(n) for n in names)
        sorted_sign = _sort_index(idx)
        if sorted_sign is None:
            return Scalar.zero(self.chart)
        sidx, sign = sorted_sign
        value = self.comps.get(sidx, Scalar.zero(self.chart))
        return value if sign > 0 else -value

    def evaluate(self, *fields: VectorField) -> Scalar:
        if len(fields) != self.degree:
            raise UnsupportedDegree(
                f"form of degree {self.degree} evaluated on {len(fields)} fields"
            )
        if self.degree == 0:
            return self.comps.get((), Scalar.zero(self.chart))
        total = Scalar.zero(self.chart)
        for idx, coef in self.comps.items():
            rows = [[field.comps[i] for i in idx] for field in fields]
            total = total + coef * _det(rows)
        return total


class Multivector(_Graded):
    """A k-vector field with components on coordinate wedge products."""

    @staticmethod
    def zero(chart: Chart, degree: int) -> "Multivector":
        return Multivector(chart, degree, {})

    @staticmethod
    def from_dict(chart: Chart, degree: int, comps: Mapping[Sequence[str], Scalar]) -> "Multivector":
        items = []
        for names, value in comps.items():
            idx = tuple(chart.coord_index(n) for n in names)
            sorted_sign = _sort_index(idx)
            if sorted_sign is None:
                raise ValueError(f"repeated coordinate in {names}")
            sidx, sign = sorted_sign
            items.append((sidx, value if sign > 0 else -value))
        return Multivector._make(chart, degree, items)

    def coefficient(self, *names: str) -> Scalar:
        idx = tuple(self.chart.coord_index(n) for n in names)
        sorted_sign = _sort_index(idx)
        if sorted_sign is None:
            return Scalar.zero(self.chart)
        sidx, sign = sorted_sign
        value = self.comps.get(sidx, Scalar.zero(self.chart))
        return value if sign > 0 else -value

    def __repr__(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for idx in sorted(self.comps):
            basis = "^".join(f"d/d{n}" for n in self._names(idx)) or "1"
            parts.append(f"({self.comps[idx]})*{basis}")
        return " + ".join(parts)

    def evaluate(self, *forms: DiffForm) -> Scalar:
        if len(forms) != self.degree:
            raise UnsupportedDegree(
                f"multivector of degree {self.degree} contracted with {len(forms)} forms"
            )
        for alpha in forms:
            if alpha.degree != 1:
                raise UnsupportedDegree("contraction requires one-forms")
        total = Scalar.zero(self.chart)
        zero = Scalar.zero(self.chart)
        for idx, coef in self.comps.items():
            rows = [
                [alpha.comps.get((i,), zero) for i in idx]
                for alpha in forms
            ]
            total = total + coef * _det(rows)
        return total


class VecValuedForm(_Graded):
    """A k-form with vector-field values, stored per coordinate wedge."""

    @staticmethod
    def zero(chart: Chart, degree: int) -> "VecValuedForm":
        return VecValuedForm(chart, degree, {})

    @staticmethod
    def from_dict(
        chart: Chart, degree: int, comps: Mapping[Sequence[str], VectorField]
    ) -> "VecValuedForm":
        items = []
        for names, value in comps.items():
            idx = tuple(chart.coord_index(n) for n in names)
            sorted_sign = _sort_index(idx)
            if sorted_sign is None:
                raise ValueError(f"repeated coordinate in {names}")
            sidx, sign = sorted_sign
            items.append((sidx, value if sign > 0 else -value))
        return VecValuedForm._make(chart, degree, items)

    @staticmethod
    def identity(chart: Chart) -> "VecValuedForm":
        comps = {
            (i,): VectorField.basis(chart, name)
            for i, name in enumerate(chart.coords)
        }
        return VecValuedForm(chart, 1, comps)

    @staticmethod
    def vector(chart: Chart, field: VectorField) -> "VecValuedForm":
        return VecValuedForm(chart, 0, {(): field})

    def __repr__(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for idx in sorted(self.comps):
            basis = "^".join(f"d{n}" for n in self._names(idx)) or "1"
            parts.append(f"{basis} (x) [{self.comps[idx]!r}]")
        return " + ".join(parts)

    def evaluate(self, *fields: VectorField) -> VectorField:
        if len(fields) != self.degree:
            raise UnsupportedDegree(
                f"valued form of degree {self.degree} evaluated on {len(fields)} fields"
            )
        total = VectorField.zero(self.chart)
        for idx, vec in self.comps.items():
            if self.degree == 0:
                total = total + vec
                continue
            rows = [[field.comps[i] for i in idx] for field in fields]
            total = total + vec * _det(rows)
        return total

    def apply(self, field: VectorField) -> VectorField:
        if self.degree != 1:
            raise UnsupportedDegree("apply is defined for degree-1 valued forms")
        return self.evaluate(field)


# ----------------------------------------------------------------------
# exterior algebra


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    _check_chart(a, b)
    degree = a.degree + b.degree
    if degree > a.chart.dim:
        raise DegreeOverflow(
            f"wedge degree {degree} exceeds dimension {a.chart.dim}"
        )
    items = []
    for ia, va in a.comps.items():
        for ib, vb in b.comps.items():
            sorted_sign = _sort_index(ia + ib)
            if sorted_sign is None:
                continue
            idx, sign = sorted_sign
            value = va * vb
            items.append((idx, value if sign > 0 else -value))
    return DiffForm._make(a.chart, degree, items)


def exterior_derivative(a: DiffForm) -> DiffForm:
    chart = a.chart
    if a.degree == chart.dim:
        # top forms are closed; keep the degree representable
        return DiffForm.zero(chart, chart.dim)
    items = []
    for idx, value in a.comps.items():
        for c, name in enumerate(chart.coords):
            dv = value.diff(name)
            if dv.is_zero:
                continue
            sorted_sign = _sort_index((c,) + idx)
            if sorted_sign is None:
                continue
            sidx, sign = sorted_sign
            items.append((sidx, dv if sign > 0 else -dv))
    return DiffForm._make(chart, a.degree + 1, items)


def interior_product(field: VectorField, a: DiffForm) -> DiffForm:
    _check_chart(field, a)
    if a.degree == 0:
        raise DegreeUnderflow("interior product of a zero-form")
    items = []
    for idx, value in a.comps.items():
        for t, c in enumerate(idx):
            comp = field.comps[c]
            if comp.is_zero:
                continue
            rest = idx[:t] + idx[t + 1 :]
            contrib = comp * value
            items.append((rest, contrib if t % 2 == 0 else -contrib))
    return DiffForm._make(a.chart, a.degree - 1, items)


def _lie_of_basis_form(field: VectorField, idx: Index) -> DiffForm:
    """Lie derivative of a closed coordinate wedge dx^idx along a field."""
    chart = field.chart
    if not idx:
        return DiffForm.zero(chart, 0)
    basis = DiffForm(chart, len(idx), {idx: Scalar.one(chart)})
    return exterior_derivative(interior_product(field, basis))


def lie_derivative(field: VectorField, target):
    """Lie derivative along a vector field, for any tensor kind here."""
    if isinstance(target, Scalar):
        return field.apply(target)
    if isinstance(target, VectorField):
        return field.bracket(target)
    if isinstance(target, DiffForm):
        if target.degree == 0:
            value = target.comps.get((), Scalar.zero(target.chart))
            return DiffForm.function(target.chart, field.apply(value))
        return exterior_derivative(interior_product(field, target)) + interior_product(
            field, exterior_derivative(target)
        )
    if isinstance(target, Multivector):
        return _lie_multivector(field, target)
    if isinstance(target, VecValuedForm):
        chart = target.chart
        result = VecValuedForm.zero(chart, target.degree)
        for idx, vec in target.comps.items():
            moved = _lie_of_basis_form(field, idx)
            result = result + _tensor(moved, vec)
            result = result + VecValuedForm(
                chart, target.degree, {idx: field.bracket(vec)}
            )
        return result
    raise TypeError(f"cannot Lie-derive {type(target).__name__}")


def _lie_multivector(field: VectorField, target: Multivector) -> Multivector:
    one = Multivector(field.chart, 1, {
        (i,): c for i, c in enumerate(field.comps) if not c.is_zero
    })
    return schouten_bracket(one, target)


def _tensor(form: DiffForm, vec: VectorField) -> VecValuedForm:
    """Distribute (form) ⊗ (vector field) over canonical components."""
    comps = {idx: vec * value for idx, value in form.comps.items()}
    return VecValuedForm._make(form.chart, form.degree, list(comps.items()))


# ----------------------------------------------------------------------
# Schouten bracket


def _vector_from_index(chart: Chart, i: int, coef: Scalar | None = None) -> VectorField:
    comps = [Scalar.zero(chart)] * chart.dim
    comps[i] = Scalar.one(chart) if coef is None else coef
    return VectorField(chart, comps)


def _wedge_vectors(fields: Sequence[VectorField]) -> Multivector:
    chart = fields[0].chart
    degree = len(fields)
    items: list[tuple[Index, Scalar]] = []

    def emit(pos: int, idx: tuple[int, ...], coef: Scalar) -> None:
        if pos == degree:
            sorted_sign = _sort_index(idx)
            if sorted_sign is None:
                return
            sidx, sign = sorted_sign
            items.append((sidx, coef if sign > 0 else -coef))
            return
        for i, comp in enumerate(fields[pos].comps):
            if not comp.is_zero:
                emit(pos + 1, idx + (i,), coef * comp)

    emit(0, (), Scalar.one(chart))
    return Multivector._make(chart, degree, items)


def schouten_bracket(a: Multivector, b: Multivector) -> Multivector:
    """Schouten bracket; on (1, k) it is the Lie derivative.

    Both operands must have degree at least one.  The result degree is
    deg a + deg b - 1.
    """
    _check_chart(a, b)
    if a.degree < 1 or b.degree < 1:
        raise UnsupportedDegree("schouten_bracket needs degrees >= 1")
    chart = a.chart
    degree = a.degree + b.degree - 1
    if degree > chart.dim:
        raise DegreeOverflow("bracket degree exceeds dimension")
    result = Multivector.zero(chart, degree)
    for ia, va in a.comps.items():
        xs = [_vector_from_index(chart, ia[0], va)] + [
            _vector_from_index(chart, i) for i in ia[1:]
        ]
        for ib, vb in b.comps.items():
            ys = [_vector_from_index(chart, ib[0], vb)] + [
                _vector_from_index(chart, i) for i in ib[1:]
            ]
            for k, x in enumerate(xs, start=1):
                for l, y in enumerate(ys, start=1):
                    rest = [f for t, f in enumerate(xs, start=1) if t != k]
                    rest += [f for t, f in enumerate(ys, start=1) if t != l]
                    bracket = x.bracket(y)
                    if bracket.is_zero:
                        continue
                    piece = _wedge_vectors([bracket] + rest) if rest else _wedge_vectors([bracket])
                    if (k + l) % 2:
                        piece = -piece
                    result = result + piece
    return result


# ----------------------------------------------------------------------
# Froelicher-Nijenhuis bracket


def _as_valued_form(k) -> VecValuedForm:
    if isinstance(k, VectorField):
        return VecValuedForm.vector(k.chart, k)
    if isinstance(k, VecValuedForm):
        return k
    raise TypeError("expected a VectorField or VecValuedForm")


def fn_bracket(k_input, l_input) -> VecValuedForm:
    """Froelicher-Nijenhuis bracket of vector-valued forms.

    Supported arities: (k, 0) and (0, l) with a vector field as the
    degree-zero operand, and (k, l) with k + l <= 3.  On a pair of vector
    fields the bracket is the Lie bracket; for a degree-one projection the
    curvature is half the self-bracket.
    """
    K = _as_valued_form(k_input)
    L = _as_valued_form(l_input)
    _check_chart(K, L)
    k, l = K.degree, L.degree
    if k + l > 3 and k > 0 and l > 0:
        raise UnsupportedDegree(f"bracket arity ({k}, {l}) is not implemented")
    chart = K.chart
    if k + l > chart.dim:
        raise DegreeOverflow("bracket degree exceeds dimension")
    result = VecValuedForm.zero(chart, k + l)
    for ia, x in K.comps.items():
        base_a = DiffForm(chart, k, {ia: Scalar.one(chart)}) if k else DiffForm.function(chart, Scalar.one(chart))
        for ib, y in L.comps.items():
            base_b = DiffForm(chart, l, {ib: Scalar.one(chart)}) if l else DiffForm.function(chart, Scalar.one(chart))
            # [phi ox X, psi ox Y] for closed coordinate wedges phi, psi:
            #   phi^psi ox [X,Y] + phi^L_X(psi) ox Y - L_Y(phi)^psi ox X
            result = result + _tensor(_wedge0(base_a, base_b), x.bracket(y))
            moved_b = _lie_of_basis_form(x, ib)
            if not moved_b.is_zero:
                result = result + _tensor(_wedge0(base_a, moved_b), y)
            moved_a = _lie_of_basis_form(y, ia)
            if not moved_a.is_zero:
                result = result - _tensor(_wedge0(moved_a, base_b), x)
    return result


def _wedge0(a: DiffForm, b: DiffForm) -> DiffForm:
    """Wedge that tolerates degree-zero factors."""
    if a.degree == 0:
        value = a.comps.get((), Scalar.zero(a.chart))
        return b * value
    if b.degree == 0:
        value = b.comps.get((), Scalar.zero(b.chart))
        return a * value
    return wedge(a, b)


# ----------------------------------------------------------------------
# pullback along chart maps


class ChartMap:
    """A polynomial coordinate map of the chart into itself.

    ``mapping`` sends each manifold coordinate to its image expression;
    unmapped coordinates stay fixed.  Angles never move, they may only
    appear as parameters of the images.  Pulling back vector fields and
    multivectors requires ``inverse_mapping``.
    """

    __slots__ = ("chart", "mapping", "inverse_mapping")

    def __init__(
        self,
        chart: Chart,
        mapping: Mapping[str, Scalar],
        inverse_mapping: Mapping[str, Scalar] | None = None,
    ) -> None:
        full = {}
        for name in chart.coords:
            full[name] = mapping.get(name, Scalar.var(chart, name))
        for name in mapping:
            chart.require_coord(name)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "mapping", full)
        if inverse_mapping is None:
            object.__setattr__(self, "inverse_mapping", None)
        else:
            inv = {}
            for name in chart.coords:
                inv[name] = inverse_mapping.get(name, Scalar.var(chart, name))
            object.__setattr__(self, "inverse_mapping", inv)

    def __setattr__(self, name, value):
        raise AttributeError("ChartMap is immutable")

    def inverse(self) -> "ChartMap":
        if self.inverse_mapping is None:
            raise MissingInverse("this chart map has no inverse attached")
        return ChartMap(self.chart, self.inverse_mapping, self.mapping)

    def pull_scalar(self, f: Scalar) -> Scalar:
        return f.substitute(self.mapping)

    def _jacobian_of(self, mapping: Mapping[str, Scalar]) -> list[list[Scalar]]:
        coords = self.chart.coords
        return [
            [mapping[c].diff(e) for e in coords]
            for c in coords
        ]

    def _pull_vector_matrix(self) -> list[list[Scalar]]:
        """Matrix M[c][e] = (d(inverse)^c / d e) composed with the map."""
        if self.inverse_mapping is None:
            raise MissingInverse("pulling back vector fields needs the inverse map")
        jac = self._jacobian_of(self.inverse_mapping)
        return [[entry.substitute(self.mapping) for entry in row] for row in jac]

    def pull_vector(self, field: VectorField) -> VectorField:
        matrix = self._pull_vector_matrix()
        chart = self.chart
        comps = []
        for c in range(chart.dim):
            total = Scalar.zero(chart)
            for e in range(chart.dim):
                comp = field.comps[e]
                if comp.is_zero or matrix[c][e].is_zero:
                    continue
                total = total + matrix[c][e] * self.pull_scalar(comp)
            comps.append(total)
        return VectorField(chart, comps)

    def pull_form(self, a: DiffForm) -> DiffForm:
        chart = self.chart
        if a.degree == 0:
            value = a.comps.get((), Scalar.zero(chart))
            return DiffForm.function(chart, self.pull_scalar(value))
        jac = self._jacobian_of(self.mapping)
        differentials = [
            DiffForm(chart, 1, {
                (e,): jac[c][e] for e in range(chart.dim) if not jac[c][e].is_zero
            })
            for c in range(chart.dim)
        ]
        result = DiffForm.zero(chart, a.degree)
        for idx, value in a.comps.items():
            piece = DiffForm.function(chart, self.pull_scalar(value))
            accum = None
            for c in idx:
                accum = differentials[c] if accum is None else wedge(accum, differentials[c])
            result = result + _wedge0(piece, accum)
        return result

    def pull_multivector(self, a: Multivector) -> Multivector:
        matrix = self._pull_vector_matrix()
        chart = self.chart
        basis_images = [
            VectorField(chart, [matrix[c][e] for c in range(chart.dim)])
            for e in range(chart.dim)
        ]
        result = Multivector.zero(chart, a.degree)
        for idx, value in a.comps.items():
            fields = [basis_images[e] for e in idx]
            piece = _wedge_vectors(fields) * self.pull_scalar(value)
            result = result + piece
        return result

    def pull_valued_form(self, a: VecValuedForm) -> VecValuedForm:
        chart = self.chart
        result = VecValuedForm.zero(chart, a.degree)
        for idx, vec in a.comps.items():
            if a.degree == 0:
                form = DiffForm.function(chart, Scalar.one(chart))
            else:
                form = self.pull_form(DiffForm(chart, a.degree, {idx: Scalar.one(chart)}))
            result = result + _tensor(form, self.pull_vector(vec))
        return result


def pullback(phi: ChartMap, target):
    """Pull a tensor back along a chart map (vectors need the inverse)."""
    if isinstance(target, Scalar):
        return phi.pull_scalar(target)
    if isinstance(target, VectorField):
        return phi.pull_vector(target)
    if isinstance(target, DiffForm):
        return phi.pull_form(target)
    if isinstance(target, Multivector):
        return phi.pull_multivector(target)
    if isinstance(target, VecValuedForm):
        return phi.pull_valued_form(target)
    raise TypeError(f"cannot pull back {type(target).__name__}")
