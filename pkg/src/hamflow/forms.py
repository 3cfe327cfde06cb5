"""Exterior calculus over jets.

A :class:`KForm` of degree k on a d-dimensional chart is represented by a
coefficient function: given the seeded coordinate jets of a point batch, it
returns ``{sorted index tuple: Jet}`` for the strictly increasing multi-indices
with nonzero coefficient.  All operators below build new coefficient functions
by closure, so forms compose lazily and every evaluation carries whatever
derivative order the input jets support.

Degrees 0 through 4 are supported on charts of dimension up to 6, which covers
2-forms, their exterior derivatives, volume checks omega ^ omega, and contact
3-forms alpha ^ d(alpha).
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .errors import DegreeOverflow, DegreeUnderflow, DimensionMismatch
from .jets import Jet
from .linalg import solve_spd_jet

Array = np.ndarray
Coeffs = dict[tuple[int, ...], Jet]
VectorField = Callable[[Sequence[Jet]], list[Jet]]
MetricField = Callable[[Sequence[Jet]], list[list[Jet]]]
ScalarField = Callable[[Sequence[Jet]], Jet]

MAX_DEGREE = 4


class KForm:
    """Differential form of fixed degree with lazily evaluated coefficients."""

    __slots__ = ("degree", "dim", "_fn")

    def __init__(self, degree: int, dim: int, coeff_fn: Callable[[Sequence[Jet]], Coeffs]):
        if degree < 0:
            raise DegreeUnderflow(f"form degree {degree} below zero")
        if degree > MAX_DEGREE:
            raise DegreeOverflow(f"form degree {degree} above supported {MAX_DEGREE}")
        if not (1 <= dim <= 6):
            raise DimensionMismatch(f"chart dimension {dim} outside 1..6")
        self.degree = degree
        self.dim = dim
        self._fn = coeff_fn

    def coefficients(self, jet_coords: Sequence[Jet]) -> Coeffs:
        return self._fn(jet_coords)

    def at(self, points: Array, order: int = 0) -> Coeffs:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.coefficients(J.seed(pts, order=order))


def _insert_index(idx: tuple[int, ...], j: int) -> tuple[int, tuple[int, ...]]:
    """Insert j into a sorted tuple; returns (sign, new tuple) or sign 0."""
    if j in idx:
        return 0, idx
    pos = bisect_left(idx, j)
    sign = -1 if pos % 2 else 1
    return sign, idx[:pos] + (j,) + idx[pos:]


def _merge_indices(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Concatenation sign of two sorted disjoint tuples, or sign 0 on overlap."""
    if set(a) & set(b):
        return 0, ()
    sign = 1
    merged = list(a)
    for x in b:
        pos = bisect_left(merged, x)
        if (len(merged) - pos) % 2:
            sign = -sign
        merged.insert(pos, x)
    return sign, tuple(merged)


def _acc(store: Coeffs, key: tuple[int, ...], term: Jet, sign: int) -> None:
    if sign == 0:
        return
    t = term if sign > 0 else -term
    if key in store:
        store[key] = store[key] + t
    else:
        store[key] = t


# ----------------------------------------------------------------------
# operators


def exterior_derivative(form: KForm) -> KForm:
    if form.degree >= MAX_DEGREE:
        raise DegreeOverflow(f"d on degree-{form.degree} form exceeds degree {MAX_DEGREE}")
    dim = form.dim

    def fn(jc: Sequence[Jet]) -> Coeffs:
        out: Coeffs = {}
        for idx, c in form.coefficients(jc).items():
            for j in range(dim):
                sign, key = _insert_index(idx, j)
                if sign == 0:
                    continue
                _acc(out, key, c.partial(j), sign)
        return out

    return KForm(form.degree + 1, dim, fn)


def interior_product(v: VectorField, form: KForm) -> KForm:
    if form.degree == 0:
        raise DegreeUnderflow("interior product of a 0-form")
    dim = form.dim

    def fn(jc: Sequence[Jet]) -> Coeffs:
        comps = v(jc)
        out: Coeffs = {}
        for idx, c in form.coefficients(jc).items():
            for pos, i in enumerate(idx):
                sign = -1 if pos % 2 else 1
                key = idx[:pos] + idx[pos + 1 :]
                _acc(out, key, comps[i] * c, sign)
        return out

    return KForm(form.degree - 1, dim, fn)


def wedge(a: KForm, b: KForm) -> KForm:
    if a.dim != b.dim:
        raise DimensionMismatch(f"wedge of forms on dims {a.dim} and {b.dim}")
    if a.degree + b.degree > MAX_DEGREE:
        raise DegreeOverflow(f"wedge degree {a.degree + b.degree} above {MAX_DEGREE}")

    def fn(jc: Sequence[Jet]) -> Coeffs:
        ca = a.coefficients(jc)
        cb = b.coefficients(jc)
        out: Coeffs = {}
        for ia, va in ca.items():
            for ib, vb in cb.items():
                sign, key = _merge_indices(ia, ib)
                if sign == 0:
                    continue
                _acc(out, key, va * vb, sign)
        return out

    return KForm(a.degree + b.degree, a.dim, fn)


def _det_jet(rows: list[list[Jet]]) -> Jet:
    k = len(rows)
    if k == 1:
        return rows[0][0]
    if k == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = None
    for col in range(k):
        minor = [[rows[r][c] for c in range(k) if c != col] for r in range(1, k)]
        term = rows[0][col] * _det_jet(minor)
        if col % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def compose_jet(coeff: Jet, img: Sequence[Jet]) -> Jet:
    """Chain-rule composition: a jet in target coordinates, composed with a map.

    ``coeff`` carries derivatives with respect to the target chart at the image
    points; ``img`` are the image coordinates as jets over the source chart.
    Returns the composite as a jet over the source chart, at the order both
    operands support.
    """
    value = coeff.value.copy()
    grad = None
    hess = None
    if coeff.grad is not None and all(c.grad is not None for c in img):
        jac = np.stack([c.grad for c in img], axis=1)  # (n, tdim, sdim)
        grad = np.einsum("nt,nts->ns", coeff.grad, jac)
        if coeff.hess is not None and all(c.hess is not None for c in img):
            hess = np.einsum("ntu,nta,nub->nab", coeff.hess, jac, jac)
            for i, c in enumerate(img):
                hess = hess + coeff.grad[:, i, None, None] * c.hess
    return Jet(value, grad, hess)


def pullback(mapping, form: KForm) -> KForm:
    """Pullback of a form on the target chart through a smooth map.

    The target form's coefficients are evaluated on freshly seeded target
    jets at the image points and composed back through the map by the chain
    rule, so nested pullbacks compose correctly.  Coefficient jets of the
    result sit one derivative order below the input jets (the Jacobian
    minors consume one order).
    """
    src_dim = mapping.source.dim
    if form.dim != mapping.target.dim:
        raise DimensionMismatch("form lives on a chart of different dimension than the map target")
    k = form.degree

    def fn(jc: Sequence[Jet]) -> Coeffs:
        img = mapping.forward(jc)
        order = min(j.order for j in img) if img else 0
        pts = np.stack([j.value for j in img], axis=1)
        tj = J.seed(pts, order=max(order, 0))
        coeffs = {idx: compose_jet(c, img) for idx, c in form.coefficients(tj).items()}
        if k == 0:
            return coeffs
        jac = [[img[i].partial(a) for a in range(src_dim)] for i in range(form.dim)]
        out: Coeffs = {}
        from itertools import combinations

        for tgt_idx, c in coeffs.items():
            for src_idx in combinations(range(src_dim), k):
                rows = [[jac[i][a] for a in src_idx] for i in tgt_idx]
                minor = _det_jet(rows)
                _acc(out, src_idx, c * minor, 1)
        return out

    return KForm(k, src_dim, fn)


def lie_derivative(v: VectorField, form: KForm) -> KForm:
    """Cartan formula: L_v = i_v d + d i_v."""
    term1 = interior_product(v, exterior_derivative(form))
    if form.degree == 0:
        return term1
    term2 = exterior_derivative(interior_product(v, form))

    def fn(jc: Sequence[Jet]) -> Coeffs:
        out = dict(term1.coefficients(jc))
        for idx, c in term2.coefficients(jc).items():
            _acc(out, idx, c, 1)
        return out

    return KForm(form.degree, form.dim, fn)


def lie_bracket(v: VectorField, w: VectorField, dim: int) -> VectorField:
    """Commutator vector field [v, w] (component jets one order lower)."""

    def fn(jc: Sequence[Jet]) -> list[Jet]:
        vc = v(jc)
        wc = w(jc)
        out = []
        for i in range(dim):
            acc = None
            for j in range(dim):
                term = vc[j] * wc[i].partial(j) - wc[j] * vc[i].partial(j)
                acc = term if acc is None else acc + term
            out.append(acc)
        return out

    return fn


def metric_gradient(metric: MetricField, scalar: ScalarField, dim: int) -> VectorField:
    """Gradient field of a scalar with respect to a Riemannian metric."""

    def fn(jc: Sequence[Jet]) -> list[Jet]:
        h = scalar(jc)
        dh = [h.partial(i) for i in range(dim)]
        g = metric(jc)
        return solve_spd_jet(g, dh)

    return fn


# ----------------------------------------------------------------------
# evaluation helpers


def form_matrix(form: KForm, jet_coords: Sequence[Jet]) -> Array:
    """Antisymmetric value matrix (n, d, d) of a 2-form at seeded jets."""
    if form.degree != 2:
        raise DimensionMismatch(f"matrix representation needs a 2-form, got degree {form.degree}")
    n = jet_coords[0].n
    d = form.dim
    out = np.zeros((n, d, d))
    for (i, j), c in form.coefficients(jet_coords).items():
        out[:, i, j] += c.value
        out[:, j, i] -= c.value
    return out


def metric_matrix(metric: MetricField, jet_coords: Sequence[Jet]) -> Array:
    g = metric(jet_coords)
    d = len(g)
    n = jet_coords[0].n
    out = np.empty((n, d, d))
    for i in range(d):
        for j in range(d):
            out[:, i, j] = g[i][j].value
    return out


def field_values(v: VectorField, jet_coords: Sequence[Jet]) -> Array:
    comps = v(jet_coords)
    return np.stack([c.value for c in comps], axis=1)


def coeff_residual(a: Coeffs, b: Coeffs) -> Array:
    """Pointwise max abs difference between two coefficient dicts."""
    keys = set(a) | set(b)
    if not keys:
        return np.zeros(1)
    res = None
    for k in keys:
        if k in a and k in b:
            diff = np.abs(a[k].value - b[k].value)
        elif k in a:
            diff = np.abs(a[k].value)
        else:
            diff = np.abs(b[k].value)
        res = diff if res is None else np.maximum(res, diff)
    return res


def form_residual(a: KForm, b: KForm, jet_coords: Sequence[Jet]) -> Array:
    return coeff_residual(a.coefficients(jet_coords), b.coefficients(jet_coords))


def scale_form(form: KForm, factor: float) -> KForm:
    def fn(jc: Sequence[Jet]) -> Coeffs:
        return {k: c * factor for k, c in form.coefficients(jc).items()}

    return KForm(form.degree, form.dim, fn)


def add_forms(a: KForm, b: KForm) -> KForm:
    if a.degree != b.degree or a.dim != b.dim:
        raise DimensionMismatch("can only add forms of equal degree and dimension")

    def fn(jc: Sequence[Jet]) -> Coeffs:
        out = dict(a.coefficients(jc))
        for idx, c in b.coefficients(jc).items():
            _acc(out, idx, c, 1)
        return out

    return KForm(a.degree, a.dim, fn)


def constant_form(degree: int, dim: int, entries: dict[tuple[int, ...], float]) -> KForm:
    def fn(jc: Sequence[Jet]) -> Coeffs:
        anchor = jc[0]
        return {idx: J.constant(v, anchor) for idx, v in entries.items()}

    return KForm(degree, dim, fn)
