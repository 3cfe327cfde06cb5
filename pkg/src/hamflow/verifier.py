"""Randomized identity checks over chart models, with deterministic reports.

Six checks run per model, each sampling every chart with its own seeded
generator stream ``[seed, check_index, chart_index]`` so reports are
reproducible and prefix-stable in the sample count:

* ``symplectic``: the 2-form is closed and uniformly nondegenerate (on
  charts that declare a degenerate direction, the form must kill exactly
  that direction and be nondegenerate on the complementary coordinates).
* ``liouville``: the expanding field satisfies L_Y omega = omega.
* ``hamiltonian``: the circle generator satisfies i_X omega = -dH.
* ``invariance``: omega, H, the boundary 1-form, the expanding field, and
  the metric are preserved by the action at equispaced angles.
* ``commutation``: [X, grad H] vanishes and X equals J grad H for the
  compatible pointwise complex structure.
* ``contact_boundary``: on boundary samples, alpha wedge d(alpha) is
  uniformly nonvanishing on the kernel of dF with a consistent sign, and
  the expanding field crosses the boundary outward.

Charts missing an ingredient are skipped with a reason; a check is marked
skipped only when no chart could run it.  Fields declared valid away from a
margin (``liouville_domain``) are checked only inside it, per the chart's
own declaration.  Three deliberately corrupted builders at the bottom each
fail exactly one check and pin down the checks' discriminating power.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import basic, forms, handles, jets
from .chart import sample_boundary, sample_domain
from .forms import KForm
from .linalg import compatible_structure, nondegenerate
from .model import HamiltonianModel, contract_form, rotation, scalar_form

Array = np.ndarray

CHECK_IDS = (
    "symplectic",
    "liouville",
    "hamiltonian",
    "invariance",
    "commutation",
    "contact_boundary",
)

DEFAULT_TOLERANCES = {
    "symplectic": 1e-10,
    "liouville": 1e-8,
    "hamiltonian": 1e-10,
    "invariance": 1e-9,
    "commutation": 1e-8,
    "contact_boundary": 1e-8,
}

# scale-free floor for |Pf| and for the contact volume / outward margins
NONDEGENERACY_FLOOR = 1e-6
CONTACT_FLOOR = 1e-6
DEFAULT_ANGLES = 16

_CHECK_INDEX = {cid: k for k, cid in enumerate(CHECK_IDS)}


@dataclass(frozen=True)
class CheckSpec:
    """Sampling and tolerance settings for one named check."""

    check_id: str
    tolerance: float
    sample_count: int
    seed: int

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be at least 1, got {self.sample_count}")


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by a full verification run."""

    seed: int = 0
    samples: int = 500
    angles: int = DEFAULT_ANGLES
    tolerances: Mapping[str, float] = field(default_factory=dict)

    def spec_for(self, check_id: str) -> CheckSpec:
        if check_id not in DEFAULT_TOLERANCES:
            raise KeyError(f"unknown check {check_id!r}")
        tol = float(self.tolerances.get(check_id, DEFAULT_TOLERANCES[check_id]))
        return CheckSpec(check_id, tol, self.samples, self.seed)


@dataclass
class CheckResult:
    """Outcome of one check aggregated over all charts of a model."""

    check_id: str
    max_residual: float
    worst_point: list | None
    passed: bool | None
    skipped: str | None = None
    note: str = ""

    def to_entry(self) -> dict:
        entry: dict = {
            "id": self.check_id,
            "max_residual": float(self.max_residual),
            "worst_point": self.worst_point,
        }
        if self.skipped is not None:
            entry["skipped"] = self.skipped
        else:
            entry["passed"] = bool(self.passed)
        if self.note:
            entry["note"] = self.note
        return entry


@dataclass
class VerificationReport:
    """Full per-model report; serializes to canonical JSON bytes."""

    model: str
    seed: int
    tolerance: dict
    results: list[CheckResult]
    critical: dict | None = None

    @property
    def overall(self) -> bool:
        flags = [r.passed for r in self.results if r.skipped is None]
        return all(flags) if flags else False

    def failures(self) -> list[str]:
        return [r.check_id for r in self.results if r.skipped is None and not r.passed]

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "seed": self.seed,
            "tolerance": dict(self.tolerance),
            "checks": [r.to_entry() for r in self.results],
            "overall": self.overall,
        }
        if self.critical is not None:
            out["critical"] = self.critical
        return out

    def to_json(self) -> bytes:
        return json.dumps(
            self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False
        ).encode("utf-8")

    def lines(self) -> list[str]:
        out = [f"{self.model}  seed={self.seed}"]
        for r in self.results:
            if r.skipped is not None:
                out.append(f"  {r.check_id:<18} skipped   ({r.skipped})")
                continue
            verdict = "pass" if r.passed else "FAIL"
            out.append(f"  {r.check_id:<18} {verdict}   max residual {r.max_residual:.3e}")
        out.append(f"  overall: {'pass' if self.overall else 'FAIL'}")
        return out


class _Worst:
    """Track the largest residual and the point where it occurred."""

    def __init__(self):
        self.value = 0.0
        self.point: Array | None = None
        self.ran = False

    def update(self, res: Array, pts: Array, mask: Array | None = None):
        res = np.asarray(res, dtype=float)
        if mask is not None:
            res, pts = res[mask], pts[mask]
        if res.size == 0:
            return
        self.ran = True
        i = int(np.argmax(res))
        if self.point is None or float(res[i]) > self.value:
            self.value = float(res[i])
            self.point = np.array(pts[i], dtype=float)

    def point_list(self) -> list | None:
        if self.point is None:
            return None
        return [float(x) for x in self.point]


def _rng(seed: int, check_id: str, chart_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, _CHECK_INDEX[check_id], chart_index])


def _margin_mask(cd, pts: Array) -> Array:
    ok = np.ones(pts.shape[0], dtype=bool)
    if cd.liouville_domain:
        jc = jets.seed(pts, order=0)
        for fn in cd.liouville_domain:
            ok &= fn(jc).value <= 0
    return ok


def _sample_inside_margin(cd, n: int, rng: np.random.Generator) -> Array:
    """Interior samples respecting the chart's declared field margins."""
    kept = np.zeros((0, cd.chart.dim))
    for _ in range(20):
        pts = sample_domain(cd.chart, n, rng)
        pts = pts[_margin_mask(cd, pts)]
        kept = np.concatenate([kept, pts], axis=0)
        if kept.shape[0] >= n:
            break
    return kept[:n]


def _finish(check_id, spec, worst, passed, skipped_charts, notes) -> CheckResult:
    note_parts = list(notes)
    note_parts.extend(skipped_charts)
    note = "; ".join(note_parts)
    if not worst.ran:
        reason = "; ".join(skipped_charts) or "no chart provides the required data"
        return CheckResult(check_id, 0.0, None, None, skipped=reason)
    passed = passed and worst.value < spec.tolerance
    return CheckResult(check_id, worst.value, worst.point_list(), passed, note=note)


# ----------------------------------------------------------------------
# the six checks


def check_symplectic(model: HamiltonianModel, spec: CheckSpec) -> CheckResult:
    """Closedness of the 2-form plus a scale-free rank floor."""
    worst = _Worst()
    passed = True
    notes: list[str] = []
    for ci, cd in enumerate(model.charts):
        rng = _rng(spec.seed, "symplectic", ci)
        pts = sample_domain(cd.chart, spec.sample_count, rng)
        jc = jets.seed(pts, order=2)
        res = forms.coeff_residual(forms.exterior_derivative(cd.omega).coefficients(jc), {})
        if cd.kernel is not None:
            contracted = forms.interior_product(cd.kernel, cd.omega).coefficients(jc)
            res = np.maximum(res, forms.coeff_residual(contracted, {}))
        worst.update(res, pts)
        om = forms.form_matrix(cd.omega, jc)
        if cd.kernel_complement is not None:
            sub = np.asarray(cd.kernel_complement)
            om = om[:, sub[:, None], sub[None, :]]
            notes.append(
                f"chart {cd.chart.name!r}: rank floor applied on the complement of the degenerate direction"
            )
        ok, pf = nondegenerate(om, NONDEGENERACY_FLOOR)
        if not ok:
            passed = False
            notes.append(f"chart {cd.chart.name!r}: normalized pairing volume fell to {pf:.3e}")
    return _finish("symplectic", spec, worst, passed, [], notes)


def check_liouville(model: HamiltonianModel, spec: CheckSpec) -> CheckResult:
    """Expansion identity L_Y omega = omega inside declared margins."""
    worst = _Worst()
    skipped: list[str] = []
    for ci, cd in enumerate(model.charts):
        if cd.liouville is None:
            skipped.append(f"chart {cd.chart.name!r}: no expanding field")
            continue
        rng = _rng(spec.seed, "liouville", ci)
        pts = _sample_inside_margin(cd, spec.sample_count, rng)
        if pts.shape[0] == 0:
            skipped.append(f"chart {cd.chart.name!r}: declared field margin left no samples")
            continue
        jc = jets.seed(pts, order=2)
        lie = forms.lie_derivative(cd.liouville, cd.omega)
        worst.update(forms.form_residual(lie, cd.omega, jc), pts)
    return _finish("liouville", spec, worst, True, skipped, [])


def check_hamiltonian(model: HamiltonianModel, spec: CheckSpec) -> CheckResult:
    """Moment identity i_X omega + dH = 0 on every chart."""
    worst = _Worst()
    for ci, cd in enumerate(model.charts):
        rng = _rng(spec.seed, "hamiltonian", ci)
        pts = sample_domain(cd.chart, spec.sample_count, rng)
        jc = jets.seed(pts, order=2)
        total = forms.add_forms(
            forms.interior_product(cd.generator, cd.omega),
            forms.exterior_derivative(scalar_form(cd.hamiltonian, cd.chart.dim)),
        )
        worst.update(forms.coeff_residual(total.coefficients(jc), {}), pts)
    return _finish("hamiltonian", spec, worst, True, [], [])


def check_invariance(
    model: HamiltonianModel, spec: CheckSpec, angles: int = DEFAULT_ANGLES
) -> CheckResult:
    """Action invariance of omega and H, and of alpha, Y, g where present."""
    worst = _Worst()
    notes: list[str] = []
    for ci, cd in enumerate(model.charts):
        rng = _rng(spec.seed, "invariance", ci)
        pts = sample_domain(cd.chart, spec.sample_count, rng)
        jc = jets.seed(pts, order=2)
        h0 = cd.hamiltonian(jc).value
        mask = _margin_mask(cd, pts)
        mpts = pts[mask]
        mjc = jets.seed(mpts, order=2) if mpts.shape[0] else None
        if mpts.shape[0] < pts.shape[0]:
            notes.append(
                f"chart {cd.chart.name!r}: field comparisons on {mpts.shape[0]} of {pts.shape[0]} samples inside the declared margin"
            )
        alpha = None
        if cd.boundary_alpha is not None or cd.liouville is not None:
            alpha = cd.alpha()
        y_vals = None
        if cd.liouville is not None and mjc is not None:
            y_vals = forms.field_values(cd.liouville, mjc)
        g_vals = None
        if cd.metric is not None and mjc is not None:
            g_vals = forms.metric_matrix(cd.metric, mjc)
        for k in range(1, angles + 1):
            amap = cd.action_map(2 * np.pi * k / angles)
            worst.update(forms.form_residual(forms.pullback(amap, cd.omega), cd.omega, jc), pts)
            img_full = amap.forward(jc)
            worst.update(np.abs(cd.hamiltonian(img_full).value - h0), pts)
            if mjc is None:
                continue
            if alpha is not None:
                worst.update(forms.form_residual(forms.pullback(amap, alpha), alpha, mjc), mpts)
            if y_vals is None and g_vals is None:
                continue
            img_jets = amap.forward(mjc)
            img_pts = cd.chart.wrap(np.stack([j.value for j in img_jets], axis=1))
            jac = np.stack([j.grad for j in img_jets], axis=1)
            keep = _margin_mask(cd, img_pts)
            if not keep.any():
                continue
            img_jc = jets.seed(img_pts[keep], order=2)
            if y_vals is not None:
                pushed = np.einsum("nij,nj->ni", jac, y_vals)[keep]
                res = np.abs(pushed - forms.field_values(cd.liouville, img_jc)).max(axis=1)
                worst.update(res, mpts[keep])
            if g_vals is not None:
                g_img = forms.metric_matrix(cd.metric, img_jc)
                pulled = np.einsum("nji,njk,nkl->nil", jac[keep], g_img, jac[keep])
                res = np.abs(pulled - g_vals[keep]).max(axis=(1, 2))
                worst.update(res, mpts[keep])
    return _finish("invariance", spec, worst, True, [], notes)


def check_commutation(model: HamiltonianModel, spec: CheckSpec) -> CheckResult:
    """Bracket [X, grad H] = 0 and the complex-structure relation X = J grad H."""
    worst = _Worst()
    skipped: list[str] = []
    for ci, cd in enumerate(model.charts):
        if cd.metric is None:
            skipped.append(f"chart {cd.chart.name!r}: no metric")
            continue
        rng = _rng(spec.seed, "commutation", ci)
        pts = _sample_inside_margin(cd, spec.sample_count, rng)
        if pts.shape[0] == 0:
            skipped.append(f"chart {cd.chart.name!r}: declared field margin left no samples")
            continue
        jc = jets.seed(pts, order=2)
        grad = cd.gradient_field()
        bracket = forms.lie_bracket(cd.generator, grad, cd.chart.dim)
        worst.update(np.abs(forms.field_values(bracket, jc)).max(axis=1), pts)
        om = forms.form_matrix(cd.omega, jc)
        gm = forms.metric_matrix(cd.metric, jc)
        if cd.kernel_complement is not None:
            skipped.append(f"chart {cd.chart.name!r}: degenerate pairing, no complex structure")
            continue
        j_mat = compatible_structure(om, gm)
        x_vals = forms.field_values(cd.generator, jc)
        g_vals = forms.field_values(grad, jc)
        res = np.abs(x_vals - np.einsum("nij,nj->ni", j_mat, g_vals)).max(axis=1)
        worst.update(res, pts)
    return _finish("commutation", spec, worst, True, skipped, [])


def check_contact_boundary(model: HamiltonianModel, spec: CheckSpec) -> CheckResult:
    """Boundary transversality and uniform nonvanishing of the contact volume."""
    worst = _Worst()
    passed = True
    skipped: list[str] = []
    notes: list[str] = []
    for ci, cd in enumerate(model.charts):
        if cd.chart.boundary is None:
            skipped.append(f"chart {cd.chart.name!r}: no boundary")
            continue
        if cd.boundary_alpha is None and cd.liouville is None:
            skipped.append(f"chart {cd.chart.name!r}: no boundary 1-form data")
            continue
        rng = _rng(spec.seed, "contact_boundary", ci)
        pts = sample_boundary(cd.chart, spec.sample_count, rng, accept=cd.boundary_accept)
        keep = _margin_mask(cd, pts)
        if not keep.any():
            skipped.append(f"chart {cd.chart.name!r}: boundary lies outside the declared margin")
            continue
        pts = pts[keep]
        jc = jets.seed(pts, order=2)
        alpha = cd.alpha()
        fjet = cd.chart.boundary(jc)
        grads = fjet.grad
        gnorm = np.linalg.norm(grads, axis=1)
        basis = np.linalg.svd(grads[:, None, :])[2][:, 1:, :]
        # orient each tangent frame against the outward normal so the
        # contact volume has a comparable sign across samples
        frame = np.concatenate([grads[:, None, :], basis], axis=1)
        basis[np.linalg.det(frame) < 0, -1, :] *= -1.0
        a_co = alpha.coefficients(jc)
        da_co = forms.exterior_derivative(alpha).coefficients(jc)
        vol = contract_form(
            forms.wedge(alpha, forms.exterior_derivative(alpha)).coefficients(jc),
            [basis[:, i, :] for i in range(cd.chart.dim - 1)],
        )
        a_inf = forms.coeff_residual(a_co, {})
        da_inf = forms.coeff_residual(da_co, {})
        scale = np.maximum(a_inf * da_inf, 1e-300)
        margin_vol = np.abs(vol) / scale
        shortfall = np.maximum(CONTACT_FLOOR - margin_vol, 0.0)
        worst.update(shortfall, pts)
        if shortfall.max() > 0:
            passed = False
        signs = np.sign(vol)
        if signs.max() != signs.min():
            passed = False
            notes.append(f"chart {cd.chart.name!r}: contact volume changes sign")
        if cd.liouville is not None:
            y_vals = forms.field_values(cd.liouville, jc)
            outward = np.einsum("nd,nd->n", grads, y_vals)
            scale_y = np.maximum(gnorm * np.linalg.norm(y_vals, axis=1), 1e-300)
            short_out = np.maximum(CONTACT_FLOOR - outward / scale_y, 0.0)
            worst.update(short_out, pts)
            if short_out.max() > 0:
                passed = False
                notes.append(f"chart {cd.chart.name!r}: expanding field not uniformly outward")
        else:
            notes.append(f"chart {cd.chart.name!r}: transversality untested, no expanding field")
        notes.append(
            f"chart {cd.chart.name!r}: min contact volume margin {margin_vol.min():.3e}"
        )
    if not worst.ran:
        reason = "; ".join(skipped) or "no chart provides boundary data"
        return CheckResult("contact_boundary", 0.0, None, None, skipped=reason)
    note = "; ".join(notes + skipped)
    return CheckResult("contact_boundary", worst.value, worst.point_list(), passed, note=note)


_CHECKS = {
    "symplectic": check_symplectic,
    "liouville": check_liouville,
    "hamiltonian": check_hamiltonian,
    "invariance": check_invariance,
    "commutation": check_commutation,
    "contact_boundary": check_contact_boundary,
}


def run_all(model: HamiltonianModel, config: RunConfig | None = None) -> VerificationReport:
    """Run every check and fold the outcomes into one report."""
    config = config or RunConfig()
    results = []
    for cid in CHECK_IDS:
        spec = config.spec_for(cid)
        if cid == "invariance":
            results.append(check_invariance(model, spec, angles=config.angles))
        else:
            results.append(_CHECKS[cid](model, spec))
    tolerance = {cid: config.spec_for(cid).tolerance for cid in CHECK_IDS}
    return VerificationReport(
        model=model.spec_string,
        seed=config.seed,
        tolerance=tolerance,
        results=results,
    )


# ----------------------------------------------------------------------
# negative controls: each breaks exactly one check


def control_nonclosed_omega() -> HamiltonianModel:
    """Solid-torus model whose area term gains a height-dependent factor.

    The added term g dx^dy with g = 0.02 h / (x^2 + y^2) has nonzero exterior
    derivative, yet scales exactly under the original expanding field and is
    killed by the translation generator, so only closedness breaks.  The
    chart excludes a small tube around the symmetry axis where g blows up.
    """
    base = basic.s1_d3(1, 0)
    cd = base.charts[0]

    def away(jc):
        return -(jc[1] * jc[1]) - jc[2] * jc[2] + 0.2

    chart = dataclasses.replace(
        cd.chart, name="tube_bent", domain=cd.chart.domain + (away,)
    )

    def omega(jc):
        g = jc[3] * 0.02 / (jc[1] * jc[1] + jc[2] * jc[2])
        return {(0, 3): jets.constant(-1.0, jc[0]), (1, 2): g + 1.0}

    bent = dataclasses.replace(cd, chart=chart, omega=KForm(2, 4, omega))
    return HamiltonianModel(
        name="control_nonclosed_omega",
        params={},
        charts=[bent],
        description="negative control: non-closed 2-form",
    )


def control_scaled_liouville() -> HamiltonianModel:
    """Ball model with the expanding field doubled.

    Doubling Y turns L_Y omega into 2 omega while staying equivariant and
    outward, and the stored boundary 1-form is kept, so only the expansion
    identity breaks.
    """
    base = basic.disc_d4(1, 1)
    cd = base.charts[0]
    original = cd.liouville

    def doubled(jc):
        return [c * 2.0 for c in original(jc)]

    broken = dataclasses.replace(cd, liouville=doubled)
    return HamiltonianModel(
        name="control_scaled_liouville",
        params={},
        charts=[broken],
        description="negative control: expanding field scaled by 2",
    )


def control_unbalanced_handle() -> HamiltonianModel:
    """Handle block rotated with unequal plane weights.

    The weight-(1, 2) rotation still preserves the 2-form and its own moment
    map, but the stored handle 1-form and the expanding field are built for
    equal weights, so only the invariance check breaks.
    """
    base = handles.weinstein_2handle()
    cd = base.charts[0]

    def hamiltonian(jc):
        return (jc[0] * jc[0] + jc[2] * jc[2]) * 0.5 + (jc[1] * jc[1] + jc[3] * jc[3])

    def generator(jc):
        return [jc[2] * -1.0, jc[3] * -2.0, jc[0] * 1.0, jc[1] * 2.0]

    def action(theta):
        def fwd(jc):
            a, c = rotation(theta, jc[0], jc[2])
            b, d = rotation(2 * theta, jc[1], jc[3])
            return [a, b, c, d]

        return fwd

    lopsided = dataclasses.replace(
        cd, hamiltonian=hamiltonian, generator=generator, action=action
    )
    return HamiltonianModel(
        name="control_unbalanced_handle",
        params={},
        charts=[lopsided],
        description="negative control: handle rotated with weights (1, 2)",
    )


CONTROLS = {
    "control_nonclosed_omega": ("symplectic", control_nonclosed_omega),
    "control_scaled_liouville": ("liouville", control_scaled_liouville),
    "control_unbalanced_handle": ("invariance", control_unbalanced_handle),
}
