"""Gradient-flow machinery: integration, orbit types, boundary censuses.

The central object is the flow of the metric gradient of the moment map.
Trajectories are integrated chart by chart with an adaptive fourth-order
stepper; crossing into another chart goes through the model's declared
transitions, and hitting the boundary hypersurface is resolved by bisection
on the step time.  On top of the integrator sit classifiers: the orbit type
swept by a trajectory under the circle action, the finite stabilizer of a
point, a sign portrait of the moment map on the boundary, and a detector
that finds and groups the closed zero-level orbit sets on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .chart import sample_boundary
from .errors import BoundaryNotFound, ImmediateExit, StiffFlow
from .forms import field_values
from .model import ChartData, HamiltonianModel

Array = np.ndarray

GOLDEN = 0.6180339887498949
SILVER = 0.41421356237309515


@dataclass
class FlowResult:
    """One gradient trajectory, recorded chartwise."""

    times: Array
    points: Array
    chart_indices: list[int]
    termination: str
    h_values: Array
    monotone: bool
    direction: int

    @property
    def end_point(self) -> Array:
        return self.points[-1]

    @property
    def end_chart(self) -> int:
        return self.chart_indices[-1]


def _velocity_fn(cd: ChartData, direction: int):
    grad = cd.gradient_field()

    def vel(p: Array) -> Array:
        jc = jets.seed(p[None, :], order=1)
        return direction * field_values(grad, jc)[0]

    return vel


def _rk4(vel, p: Array, h: float) -> Array:
    k1 = vel(p)
    k2 = vel(p + 0.5 * h * k1)
    k3 = vel(p + 0.5 * h * k2)
    k4 = vel(p + h * k3)
    return p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _in_box(chart, p: Array, slack: float = 1e-9) -> bool:
    lo = np.asarray(chart.box_lo)
    hi = np.asarray(chart.box_hi)
    free = ~np.asarray(chart.periodic)
    return bool(np.all(p[free] >= lo[free] - slack) and np.all(p[free] <= hi[free] + slack))


def _boundary_value(cd: ChartData, p: Array) -> float:
    return float(cd.chart.boundary(jets.seed(p[None, :], order=0)).value[0])


def integrate(
    model: HamiltonianModel,
    chart_index: int,
    start: Array,
    direction: int = 1,
    max_time: float = 60.0,
    max_steps: int = 40000,
    tol: float = 1e-9,
    speed_floor: float = 1e-7,
    gain_floor: float = 1e-14,
    tangent_tol: float = 1e-8,
) -> FlowResult:
    """Integrate the moment-map gradient from one interior point.

    Starts on (or within 1e-9 of) the boundary are refused with
    ``ImmediateExit`` when the initial velocity points outward or is
    tangent within ``tangent_tol``: a tangent start grazes the boundary
    (the boundary value has a strict minimum there along the flow), so
    the maximal trajectory inside the domain is the constant point.
    """
    ci = chart_index
    cd = model.charts[ci]
    p = cd.chart.wrap(np.asarray(start, dtype=float))
    vel = _velocity_fn(cd, direction)

    if cd.chart.boundary is not None:
        f0 = _boundary_value(cd, p)
        if f0 > -1e-9:
            jc = jets.seed(p[None, :], order=1)
            df = cd.chart.boundary(jc).grad[0]
            if float(df @ vel(p)) >= -tangent_tol:
                raise ImmediateExit(
                    f"start lies on the boundary of chart {cd.chart.name!r} "
                    "with outward or grazing initial velocity"
                )

    def h_at(q: Array) -> float:
        return float(cd.hamiltonian(jets.seed(q[None, :], order=0)).value[0])

    times = [0.0]
    pts = [p.copy()]
    charts = [ci]
    hs = [h_at(p)]
    t = 0.0
    h = 1e-3
    monotone = True
    termination = "max_steps"

    for _ in range(max_steps):
        if t >= max_time:
            break
        h = min(h, max_time - t)
        while True:
            full = _rk4(vel, p, h)
            half = _rk4(vel, _rk4(vel, p, 0.5 * h), 0.5 * h)
            err = np.abs(full - half).max()
            if err <= tol * (1.0 + np.abs(p).max()):
                break
            h *= 0.5
            if h < 1e-12:
                raise StiffFlow(
                    f"step size collapsed below 1e-12 in chart {cd.chart.name!r}"
                )
        p_new = half
        crossed = False
        if cd.chart.boundary is not None and _boundary_value(cd, p_new) > 0.0:
            lo_t, hi_t = 0.0, h
            for _ in range(80):
                mid = 0.5 * (lo_t + hi_t)
                q = _rk4(vel, p, mid)
                if _boundary_value(cd, q) > 0.0:
                    hi_t = mid
                else:
                    lo_t = mid
                if hi_t - lo_t < 1e-16:
                    break
            p_new = _rk4(vel, p, lo_t)
            if abs(_boundary_value(cd, p_new)) > 1e-10:
                q = _rk4(vel, p, hi_t)
                if abs(_boundary_value(cd, q)) < abs(_boundary_value(cd, p_new)):
                    p_new = q
            t += lo_t
            crossed = True
        else:
            t += h
            if err < tol / 64.0:
                h *= 2.0
        p_new = cd.chart.wrap(p_new)
        h_new = h_at(p_new)
        gain = direction * (h_new - hs[-1])
        if gain < -1e-12:
            monotone = False
        times.append(t)
        pts.append(p_new.copy())
        charts.append(ci)
        hs.append(h_new)
        if crossed:
            termination = "boundary"
            break
        speed = float(np.abs(vel(p_new)).max())
        if speed < speed_floor and abs(gain) < gain_floor:
            termination = "critical_set"
            p = p_new
            break
        p = p_new
        if not (cd.chart.contains(p, slack=1e-12)[0] and _in_box(cd.chart, p)):
            moved = False
            for tr in model.transitions_from(ci):
                if not tr.applicable(p):
                    continue
                q = tr.map.apply(p)[0]
                if model.charts[tr.dst].chart.contains(q, slack=1e-9)[0]:
                    ci = tr.dst
                    cd = model.charts[ci]
                    vel = _velocity_fn(cd, direction)
                    p = q
                    pts[-1] = p.copy()
                    charts[-1] = ci
                    moved = True
                    break
            if not moved:
                termination = "exited_chart"
                break
    else:
        termination = "max_steps"

    return FlowResult(
        times=np.array(times),
        points=np.array(pts),
        chart_indices=charts,
        termination=termination,
        h_values=np.array(hs),
        monotone=monotone,
        direction=direction,
    )


def integrate_vector_field(
    cd: ChartData, fieldfn, start: Array, total_time: float, steps: int = 2000
) -> Array:
    """Fixed-step fourth-order path of an arbitrary field in one chart."""

    def vel(p: Array) -> Array:
        return field_values(fieldfn, jets.seed(p[None, :], order=1))[0]

    p = np.asarray(start, dtype=float).copy()
    h = total_time / steps
    path = [p.copy()]
    for _ in range(steps):
        p = cd.chart.wrap(_rk4(vel, p, h))
        path.append(p.copy())
    return np.array(path)


def stabilizer_of(
    model: HamiltonianModel,
    chart_index: int,
    point: Array,
    max_order: int = 64,
    tol: float = 1e-9,
) -> int:
    """Order of the finite stabilizer at a point; 0 flags a fixed point."""
    cd = model.charts[chart_index]
    p = cd.chart.wrap(np.asarray(point, dtype=float))

    def moved(theta: float) -> float:
        q = cd.action_map(theta).apply(p)[0]
        return float(cd.chart.distance(p, q))

    if moved(2 * np.pi * GOLDEN) < tol and moved(2 * np.pi * SILVER) < tol:
        return 0
    for k in range(max_order, 1, -1):
        if moved(2 * np.pi / k) < tol:
            return k
    return 1


@dataclass
class OrbitClass:
    """Type of the invariant surface swept by a gradient trajectory."""

    kind: str
    upward: FlowResult | None
    downward: FlowResult | None
    detail: str = ""


def _one_side(model, chart_index, point, direction, **kw):
    try:
        return integrate(model, chart_index, point, direction=direction, **kw), "boundary"
    except ImmediateExit:
        return None, "boundary"


def classify_orbit(
    model: HamiltonianModel, chart_index: int, point: Array, **kw
) -> OrbitClass:
    cd = model.charts[chart_index]
    p = cd.chart.wrap(np.asarray(point, dtype=float))
    jc = jets.seed(p[None, :], order=1)
    if np.abs(field_values(cd.generator, jc)).max() < 1e-8:
        return OrbitClass(kind="fixed_point", upward=None, downward=None)

    ends = {}
    results = {}
    for direction, label in ((1, "up"), (-1, "down")):
        res, fallback = _one_side(model, chart_index, p, direction, **kw)
        results[label] = res
        ends[label] = fallback if res is None else res.termination
    for label in ("up", "down"):
        if ends[label] in ("max_steps", "exited_chart"):
            return OrbitClass(
                kind="unresolved",
                upward=results["up"],
                downward=results["down"],
                detail=f"{label}ward flow ended with {ends[label]}",
            )

    n_boundary = sum(1 for label in ("up", "down") if ends[label] == "boundary")
    if n_boundary == 0:
        kind = "sphere"
    elif n_boundary == 1:
        kind = "disc"
    else:
        kind = "annulus"
        h0 = float(cd.hamiltonian(jc).value[0])
        span = 0.0
        for res in results.values():
            if res is not None and len(res.points) > 0:
                span = max(span, float(np.abs(res.points - res.points[0]).max()))
        if span < 1e-6 and abs(h0) < 1e-8:
            kind = "constant_legendrian"
    return OrbitClass(kind=kind, upward=results["up"], downward=results["down"])


@dataclass
class ChartPortrait:
    chart_index: int
    n_positive: int
    n_negative: int
    n_zero: int
    sign_mismatches: int | None


@dataclass
class BoundaryPortrait:
    charts: list[ChartPortrait]

    @property
    def has_positive(self) -> bool:
        return any(c.n_positive > 0 for c in self.charts)

    @property
    def has_negative(self) -> bool:
        return any(c.n_negative > 0 for c in self.charts)

    @property
    def total_mismatches(self) -> int:
        return sum(c.sign_mismatches or 0 for c in self.charts)


def boundary_sign_portrait(
    model: HamiltonianModel, samples: int = 400, seed: int = 0
) -> BoundaryPortrait:
    """Sample the boundary and compare moment-map signs with exit directions."""
    rows = []
    for ci, cd in enumerate(model.charts):
        if cd.chart.boundary is None:
            continue
        rng = np.random.default_rng([seed, 41, ci])
        try:
            pts = sample_boundary(cd.chart, samples, rng, accept=cd.boundary_accept)
        except BoundaryNotFound:
            continue
        jc = jets.seed(pts, order=1)
        hv = cd.hamiltonian(jc).value
        n_pos = int((hv > 1e-8).sum())
        n_neg = int((hv < -1e-8).sum())
        n_zero = int(len(hv) - n_pos - n_neg)
        mism: int | None = None
        if cd.metric is not None:
            grad = field_values(cd.gradient_field(), jc)
            df = cd.chart.boundary(jc).grad
            out = np.einsum("ni,ni->n", df, grad)
            strong = np.abs(hv) > 1e-6
            mism = int((np.sign(out[strong]) != np.sign(hv[strong])).sum())
        rows.append(
            ChartPortrait(
                chart_index=ci,
                n_positive=n_pos,
                n_negative=n_neg,
                n_zero=n_zero,
                sign_mismatches=mism,
            )
        )
    return BoundaryPortrait(charts=rows)


# ---------------------------------------------------------------------------
# zero-level orbit sets on the boundary
# ---------------------------------------------------------------------------


@dataclass
class LegendrianComponent:
    chart_index: int
    representative: Array
    loop: Array
    closed: bool
    torus_certified: bool
    tangent_pairing: float


@dataclass
class LegendrianSet:
    components: list[LegendrianComponent] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.components)


def _project_to_zero_set(cd: ChartData, p: Array, tol: float = 1e-10, iters: int = 60):
    """Newton steps of least norm onto {boundary = 0, moment = 0}."""
    q = np.asarray(p, dtype=float).copy()
    for _ in range(iters):
        jc = jets.seed(q[None, :], order=1)
        fv = cd.chart.boundary(jc)
        hv = cd.hamiltonian(jc)
        vals = np.array([fv.value[0], hv.value[0]])
        if np.abs(vals).max() < tol:
            return cd.chart.wrap(q), True
        jac = np.stack([fv.grad[0], hv.grad[0]])
        gram = jac @ jac.T
        try:
            lam = np.linalg.solve(gram, -vals)
        except np.linalg.LinAlgError:
            return q, False
        delta = jac.T @ lam
        top = np.abs(delta).max()
        if top > 0.5:
            delta *= 0.5 / top
        q = q + delta
    return cd.chart.wrap(q), False


def _transverse_direction(cd: ChartData, p: Array, prev: Array | None):
    """Unit tangent of the zero set orthogonal to the action generator."""
    jc = jets.seed(p[None, :], order=1)
    jac = np.stack([cd.chart.boundary(jc).grad[0], cd.hamiltonian(jc).grad[0]])
    _, _, vh = np.linalg.svd(jac)
    basis = vh[2:].T
    xv = field_values(cd.generator, jc)[0]
    xk = basis.T @ xv
    norm = np.linalg.norm(xk)
    if norm < 1e-10:
        return None
    w = basis @ (np.array([-xk[1], xk[0]]) / norm)
    w /= np.linalg.norm(w)
    if prev is not None and float(w @ prev) < 0.0:
        w = -w
    return w


def _trace_component(
    model: HamiltonianModel, ci: int, p0: Array, step: float, max_steps: int = 6000
):
    """Predictor-corrector walk along the zero set, switching charts as needed."""
    samples: dict[int, list[Array]] = {ci: [p0.copy()]}
    start_chart, start_point = ci, p0.copy()
    p = p0.copy()
    prev_w: Array | None = None
    closed = False
    for i in range(max_steps):
        cd = model.charts[ci]
        w = _transverse_direction(cd, p, prev_w)
        if w is None:
            break
        cand, ok = _project_to_zero_set(cd, cd.chart.wrap(p + step * w))
        if not ok:
            break
        prev_w = w
        if not (cd.chart.contains(cand, slack=1e-9)[0] and _in_box(cd.chart, cand)):
            moved = False
            for tr in model.transitions_from(ci):
                if not tr.applicable(cand):
                    continue
                q = tr.map.apply(cand)[0]
                if model.charts[tr.dst].chart.contains(q, slack=1e-9)[0]:
                    jmat = tr.map.jacobian(cand[None, :])[0]
                    prev_w = jmat @ w
                    prev_w = prev_w / np.linalg.norm(prev_w)
                    ci = tr.dst
                    p = q
                    moved = True
                    break
            if not moved:
                break
        else:
            p = cand
        samples.setdefault(ci, []).append(p.copy())
        if (
            i > 4
            and ci == start_chart
            and float(model.charts[ci].chart.distance(p, start_point)) < 0.6 * step
        ):
            closed = True
            break
    return {k: np.array(v) for k, v in samples.items()}, closed


def _orbit_min_distance(cd: ChartData, point: Array, cloud: Array, angles: int) -> float:
    thetas = np.linspace(0.0, 2 * np.pi, angles, endpoint=False)
    best = np.inf
    for theta in thetas:
        q = cd.action_map(theta).apply(point)[0]
        best = min(best, float(cd.chart.distance(q, cloud).min()))
    return best


def detect_legendrian_set(
    model: HamiltonianModel,
    seed: int = 0,
    samples: int = 600,
    step: float = 0.04,
    max_candidates: int = 60,
    orbit_angles: int = 128,
) -> LegendrianSet:
    """Find the boundary zero-level orbit sets and group them into components."""
    out = LegendrianSet()
    claimed: dict[int, list[Array]] = {}

    def is_claimed(ci: int, p: Array) -> bool:
        cd = model.charts[ci]
        for cloud in claimed.get(ci, []):
            if _orbit_min_distance(cd, p, cloud, orbit_angles) < 2.5 * step:
                return True
        return False

    for ci, cd in enumerate(model.charts):
        if cd.chart.boundary is None:
            continue
        rng = np.random.default_rng([seed, 97, ci])
        try:
            pts = sample_boundary(cd.chart, samples, rng, accept=cd.boundary_accept)
        except BoundaryNotFound:
            continue
        hv = cd.hamiltonian(jets.seed(pts, order=0)).value
        if hv.min() > 1e-8 or hv.max() < -1e-8:
            continue
        order = np.argsort(np.abs(hv))[:max_candidates]
        for idx in order:
            p, ok = _project_to_zero_set(cd, pts[idx])
            if not ok or not cd.chart.contains(p, slack=1e-6)[0]:
                continue
            jc = jets.seed(p[None, :], order=1)
            xv = field_values(cd.generator, jc)
            if np.abs(xv).max() < 1e-8:
                continue
            if stabilizer_of(model, ci, p) == 0:
                continue
            if is_claimed(ci, p):
                continue
            alpha = cd.alpha().coefficients(jc)
            pairing = sum(
                alpha[key].value[0] * xv[0, key[0]] for key in alpha
            )
            traced, closed = _trace_component(model, ci, p, step)
            for chart_idx, cloud in traced.items():
                claimed.setdefault(chart_idx, []).append(cloud)
            cert = _torus_certificate(cd, p)
            out.components.append(
                LegendrianComponent(
                    chart_index=ci,
                    representative=p,
                    loop=traced.get(ci, np.array([p])),
                    closed=closed,
                    torus_certified=cert,
                    tangent_pairing=float(abs(pairing)),
                )
            )
    return out


def _torus_certificate(cd: ChartData, p: Array, angles: int = 24, tol: float = 1e-7) -> bool:
    """Whole action orbit of a zero-set point stays on the zero set."""
    for theta in np.linspace(0.0, 2 * np.pi, angles, endpoint=False):
        q = cd.action_map(theta).apply(p)
        jc = jets.seed(q, order=0)
        if abs(cd.chart.boundary(jc).value[0]) > tol:
            return False
        if abs(cd.hamiltonian(jc).value[0]) > tol:
            return False
    return True
