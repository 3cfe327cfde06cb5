"""Model container: per-chart Hamiltonian data plus transitions.

A model bundles one or more coordinate charts, each carrying the same
geometric package: the symplectic form, the moment map ("hamiltonian"), the
circle-action generator, the action itself as a family of chart self-maps,
and optionally a Liouville field, a compatible metric, and a stored boundary
1-form.  Charts are glued by transitions (smooth maps with validity
predicates); the structural identities tying all of this together are checked
by :mod:`hamflow.verifier`, not assumed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import forms, jets
from .chart import Chart, SmoothMap
from .forms import KForm, MetricField, ScalarField, VectorField
from .jets import Jet

Array = np.ndarray

ActionFamily = Callable[[float], Callable[[Sequence[Jet]], list[Jet]]]


@dataclass
class ChartData:
    """All model structure expressed in one chart."""

    chart: Chart
    omega: KForm
    hamiltonian: ScalarField
    generator: VectorField
    action: ActionFamily
    liouville: VectorField | None = None
    metric: MetricField | None = None
    boundary_alpha: KForm | None = None
    kernel: VectorField | None = None
    kernel_complement: tuple[int, ...] | None = None
    liouville_domain: tuple[ScalarField, ...] = ()
    boundary_accept: Callable[[Array], bool] | None = None
    note: str = ""

    def action_map(self, theta: float) -> SmoothMap:
        return SmoothMap(source=self.chart, target=self.chart, forward=self.action(theta))

    def gradient_field(self) -> VectorField:
        if self.metric is None:
            raise ValueError(f"chart {self.chart.name!r} carries no metric")
        return forms.metric_gradient(self.metric, self.hamiltonian, self.chart.dim)

    def alpha(self) -> KForm:
        """Stored boundary 1-form, or the contraction of omega with Liouville."""
        if self.boundary_alpha is not None:
            return self.boundary_alpha
        if self.liouville is None:
            raise ValueError(f"chart {self.chart.name!r} has neither alpha nor Liouville field")
        return forms.interior_product(self.liouville, self.omega)


@dataclass
class Transition:
    """Directed chart gluing with a validity predicate on source points."""

    src: int
    dst: int
    map: SmoothMap
    valid: Callable[[Array], Array] | None = None

    def applicable(self, point: Array) -> bool:
        if self.valid is None:
            return True
        return bool(np.all(self.valid(np.atleast_2d(point))))


@dataclass
class HamiltonianModel:
    """A Hamiltonian circle-action model presented in coordinate charts."""

    name: str
    params: dict
    charts: list[ChartData]
    transitions: list[Transition] = field(default_factory=list)
    description: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def spec_string(self) -> str:
        if not self.params:
            return f"{self.name}()"
        args = ",".join(str(v) for v in self.params.values())
        return f"{self.name}({args})"

    def transitions_from(self, i: int) -> list[Transition]:
        return [t for t in self.transitions if t.src == i]

    def map_point(self, src: int, point: Array, dst: int) -> Array | None:
        """Map a point between charts through a declared transition, if any."""
        if src == dst:
            return np.asarray(point, dtype=float)
        for t in self.transitions:
            if t.src == src and t.dst == dst and t.applicable(point):
                q = t.map.apply(point)[0]
                if self.charts[dst].chart.contains(q, slack=1e-9)[0]:
                    return q
        return None

    def to_descriptor(self) -> dict:
        return {
            "name": self.name,
            "params": {k: _plain(v) for k, v in self.params.items()},
            "description": self.description,
            "charts": [
                {
                    "name": cd.chart.name,
                    "coords": list(cd.chart.coords),
                    "periodic": list(cd.chart.periodic),
                    "dim": cd.chart.dim,
                    "has_boundary": cd.chart.boundary is not None,
                    "has_metric": cd.metric is not None,
                    "has_liouville": cd.liouville is not None,
                    "has_kernel": cd.kernel is not None,
                    "note": cd.note,
                }
                for cd in self.charts
            ],
            "transitions": [[t.src, t.dst] for t in self.transitions],
        }


def _plain(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    return v


@dataclass(frozen=True)
class Decomposition:
    """Surface fibration decomposition count (h, k): 2h + k = 1 + genus.

    ``h`` counts handle pieces, ``k`` counts annular pieces of the base
    surface; the constraint ties them to the genus.
    """

    h: int
    k: int


def enumerate_decompositions(genus: int) -> list[Decomposition]:
    """All decompositions (h, k), h >= 0, k >= 1, 2h + k = 1 + genus.

    Ordered by ascending h.  Genus 0 and 1 admit exactly one decomposition
    each: (0, 1) and (0, 2).
    """
    if genus < 0:
        raise ValueError(f"genus must be nonnegative, got {genus}")
    out = []
    for h in range(0, genus // 2 + 1):
        k = 1 + genus - 2 * h
        if k >= 1:
            out.append(Decomposition(h=h, k=k))
    return out


# ----------------------------------------------------------------------
# small helpers shared by the model constructors


def scalar_form(fn: ScalarField, dim: int) -> KForm:
    """Wrap a scalar field as a 0-form so it can be differentiated."""
    return KForm(0, dim, lambda jc: {(): fn(jc)})


def moment_residual(cd: ChartData, points: Array) -> float:
    """Max coefficient residual of (generator contracted into omega) + dH."""
    jc = jets.seed(np.atleast_2d(points), order=2)
    lhs = forms.interior_product(cd.generator, cd.omega)
    dh = forms.exterior_derivative(scalar_form(cd.hamiltonian, cd.chart.dim))
    res = forms.coeff_residual(lhs.coefficients(jc), forms.scale_form(dh, -1.0).coefficients(jc))
    return float(np.max(res)) if res.size else 0.0


def liouville_residual(cd: ChartData, points: Array) -> float:
    """Max coefficient residual of (Lie derivative of omega along Liouville) - omega."""
    if cd.liouville is None:
        return 0.0
    jc = jets.seed(np.atleast_2d(points), order=2)
    lie = forms.lie_derivative(cd.liouville, cd.omega)
    res = forms.coeff_residual(lie.coefficients(jc), cd.omega.coefficients(jc))
    return float(np.max(res)) if res.size else 0.0


def assert_moment(cd: ChartData, points: Array, tol: float = 1e-9) -> None:
    from .errors import MomentMapMismatch

    r = moment_residual(cd, points)
    if not np.isfinite(r) or r > tol:
        raise MomentMapMismatch(
            f"chart {cd.chart.name!r}: generator does not match the hamiltonian "
            f"(residual {r:.3e} > {tol:.1e})"
        )


def self_check_points(cd: ChartData, n: int = 32, seed: int = 11) -> Array:
    from .chart import sample_domain

    rng = np.random.default_rng([seed, 1301])
    return sample_domain(cd.chart, n, rng)


def rotation(theta: float, a: Jet, b: Jet) -> tuple[Jet, Jet]:
    """Rotate the pair (a, b) by a fixed angle."""
    c, s = float(np.cos(theta)), float(np.sin(theta))
    return a * c - b * s, a * s + b * c


def identity_metric(dim: int, scale: float = 1.0) -> MetricField:
    def g(jc: Sequence[Jet]) -> list[list[Jet]]:
        one = jets.constant(scale, jc[0])
        zero = jets.constant(0.0, jc[0])
        return [[one if i == j else zero for j in range(dim)] for i in range(dim)]

    return g


def effective_weights(*weights: int) -> None:
    """Require integer weights generating an effective circle action."""
    import math

    from .errors import IneffectiveAction

    ws = [int(w) for w in weights]
    if all(w == 0 for w in ws):
        raise IneffectiveAction(f"weights {tuple(ws)} act trivially")
    g = 0
    for w in ws:
        g = math.gcd(g, abs(w))
    if g != 1:
        raise IneffectiveAction(
            f"weights {tuple(ws)} have common divisor {g}; the circle acts with a kernel"
        )


def form_matrix_jets(form: KForm, jc: Sequence[Jet]) -> list[list[Jet]]:
    """Full antisymmetric jet matrix of a 2-form."""
    d = form.dim
    zero = jets.constant(0.0, jc[0])
    mat = [[zero for _ in range(d)] for _ in range(d)]
    for (i, j), c in form.coefficients(jc).items():
        mat[i][j] = mat[i][j] + c
        mat[j][i] = mat[j][i] - c
    return mat


def contract_form(coeffs: dict, vectors: list[Array]) -> Array:
    """Evaluate a k-form (coefficient dict of jets) on k value vectors."""
    k = len(vectors)
    n = vectors[0].shape[0]
    out = np.zeros(n)
    for idx, c in coeffs.items():
        sub = np.stack([np.stack([v[:, i] for i in idx], axis=1) for v in vectors], axis=1)
        out += c.value * np.linalg.det(sub)
    return out
