"""Model handles and the boundary-surgery construction.

Two standalone handle models (a rotation-invariant saddle block and an
index-zero block with a fixed surface), the explicit identification between
the saddle block's vertical faces and a standard neighborhood of a closed
orbit in a boundary, and the surgery that grafts the saddle block onto a
supported base model along such an orbit.

The saddle block is the symplectization of its face contact structure under
its own scaling field, and the base carries a compatible scaling field, so
the gluing map is an exact match of primitives and moment maps rather than
an approximate interpolation; tests pin this down to roundoff.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jets
from .chart import Chart, SmoothMap
from .errors import CollarTooDeep, NotLegendrian, UnsupportedBase
from .flow import stabilizer_of
from .forms import KForm, constant_form
from .jets import Jet
from .model import (
    ChartData,
    HamiltonianModel,
    Transition,
    assert_moment,
    effective_weights,
    identity_metric,
    rotation,
    self_check_points,
)

Array = np.ndarray

FLARE_BASE = 1.0 / 3.0
FLARE_GAIN = 0.08


def _positive_cube(w: Jet) -> Jet:
    """max(w, 0)^3 with two continuous derivatives at the joint."""
    cube = w * w * w
    mask = (w.value > 0.0).astype(float)
    grad = None if cube.grad is None else mask[:, None] * cube.grad
    hess = None if cube.hess is None else mask[:, None, None] * cube.hess
    return Jet(mask * cube.value, grad, hess)


def flare_profile(u: Jet) -> Jet:
    """Face half-width squared as a function of radial position squared."""
    return _positive_cube((u - 0.5) * 2.0) * FLARE_GAIN + FLARE_BASE


def flare_profile_value(u: float) -> float:
    return FLARE_GAIN * max(0.0, (u - 0.5) * 2.0) ** 3 + FLARE_BASE


# ---------------------------------------------------------------------------
# saddle block (index-2 handle)
# ---------------------------------------------------------------------------


def _saddle_chart_data(scale: float, kappa: float) -> ChartData:
    """Saddle block with all structure tensors multiplied by ``scale``."""
    k2 = kappa * kappa
    ybox = kappa * 0.66

    def out_face(jc):
        x2 = jc[0] * jc[0] + jc[1] * jc[1]
        y2 = jc[2] * jc[2] + jc[3] * jc[3]
        return y2 - flare_profile(x2) * k2

    def x_cap(jc):
        return jc[0] * jc[0] + jc[1] * jc[1] - 1.0

    chart = Chart(
        name="saddle",
        coords=("x1", "x2", "y1", "y2"),
        periodic=(False,) * 4,
        box_lo=(-1.02, -1.02, -ybox, -ybox),
        box_hi=(1.02, 1.02, ybox, ybox),
        domain=(out_face, x_cap),
        boundary=out_face,
    )

    omega = constant_form(2, 4, {(0, 2): scale, (1, 3): scale})

    def hamiltonian(jc):
        return (jc[1] * jc[2] - jc[0] * jc[3]) * scale

    def generator(jc):
        return [jc[1] * -1.0, jc[0] * 1.0, jc[3] * -1.0, jc[2] * 1.0]

    def action(theta):
        def fwd(jc):
            a, b = rotation(theta, jc[0], jc[1])
            c, d = rotation(theta, jc[2], jc[3])
            return [a, b, c, d]

        return fwd

    def liouville(jc):
        return [jc[0] * -1.0, jc[1] * -1.0, jc[2] * 2.0, jc[3] * 2.0]

    def alpha(jc):
        return {
            (0,): jc[2] * (-2.0 * scale),
            (1,): jc[3] * (-2.0 * scale),
            (2,): jc[0] * -scale,
            (3,): jc[1] * -scale,
        }

    return ChartData(
        chart=chart,
        omega=omega,
        hamiltonian=hamiltonian,
        generator=generator,
        action=action,
        liouville=liouville,
        metric=identity_metric(4, scale=scale),
        boundary_alpha=KForm(1, 4, alpha),
        note="saddle block; faces at x1^2 + x2^2 = 1 are gluing faces",
    )


def weinstein_2handle() -> HamiltonianModel:
    """Standalone saddle block with its flared outer face."""
    cd = _saddle_chart_data(scale=1.0, kappa=1.0)
    assert_moment(cd, self_check_points(cd))
    return HamiltonianModel(
        name="weinstein_2handle",
        params={},
        charts=[cd],
        transitions=[],
        description="rotation-invariant saddle block with contact outer face",
        meta={"saddle_index": 2},
    )


# ---------------------------------------------------------------------------
# index-zero block with a fixed surface
# ---------------------------------------------------------------------------


def weinstein_1handle(m: int = 1) -> HamiltonianModel:
    """Block whose critical set is a whole surface of fixed points."""
    m = int(m)
    effective_weights(m)
    fm = float(m)

    def round_face(jc):
        return jc[0] * jc[0] + jc[1] * jc[1] + jc[2] * jc[2] - 1.0

    def y_cap(jc):
        return jc[3] * jc[3] - 1.0

    chart = Chart(
        name="block",
        coords=("x1", "y1", "x2", "y2"),
        periodic=(False,) * 4,
        box_lo=(-1.02,) * 4,
        box_hi=(1.02,) * 4,
        domain=(round_face, y_cap),
        boundary=round_face,
    )
    omega = constant_form(2, 4, {(0, 1): 1.0, (2, 3): 1.0})

    def hamiltonian(jc):
        return (jc[0] * jc[0] + jc[1] * jc[1]) * (fm / 2.0)

    def generator(jc):
        return [jc[1] * -fm, jc[0] * fm, jc[0] * 0.0, jc[0] * 0.0]

    def action(theta):
        def fwd(jc):
            a, b = rotation(fm * theta, jc[0], jc[1])
            return [a, b, jc[2] * 1.0, jc[3] * 1.0]

        return fwd

    def liouville(jc):
        return [jc[0] * 0.5, jc[1] * 0.5, jc[2] * 2.0, jc[3] * -1.0]

    def alpha(jc):
        return {
            (0,): jc[1] * -0.5,
            (1,): jc[0] * 0.5,
            (2,): jc[3] * 1.0,
            (3,): jc[2] * 2.0,
        }

    cd = ChartData(
        chart=chart,
        omega=omega,
        hamiltonian=hamiltonian,
        generator=generator,
        action=action,
        liouville=liouville,
        metric=identity_metric(4),
        boundary_alpha=KForm(1, 4, alpha),
        note="faces at y2 = +-1 are gluing faces",
    )
    assert_moment(cd, self_check_points(cd))
    return HamiltonianModel(
        name="weinstein_1handle",
        params={"m": m},
        charts=[cd],
        transitions=[],
        description="index-zero block whose moment map vanishes on a fixed surface",
        meta={"fixed_surface_dim": 2},
    )


def one_handle_flow(point: Array, t: float) -> Array:
    """Closed-form scaling flow of the index-zero block."""
    p = np.asarray(point, dtype=float)
    return np.array(
        [
            np.exp(t / 2.0) * p[0],
            np.exp(t / 2.0) * p[1],
            np.exp(2.0 * t) * p[2],
            np.exp(-t) * p[3],
        ]
    )


# ---------------------------------------------------------------------------
# face identification
# ---------------------------------------------------------------------------


FACE_CHART = Chart(
    name="saddle_face",
    coords=("T", "y1", "y2"),
    periodic=(True, False, False),
    box_lo=(0.0, -0.66, -0.66),
    box_hi=(2 * np.pi, 0.66, 0.66),
)

ORBIT_CHART = Chart(
    name="orbit_neighborhood",
    coords=("t", "x", "y"),
    periodic=(True, False, False),
    box_lo=(0.0, -0.9, -0.9),
    box_hi=(2 * np.pi, 0.9, 0.9),
)


def contact_form_standard() -> KForm:
    """x dt + dy on the orbit-neighborhood coordinates."""

    def coeffs(jc):
        return {(0,): jc[1] * 1.0, (2,): jets.constant(1.0, jc[0])}

    return KForm(1, 3, coeffs)


def face_embedding() -> SmoothMap:
    """Face coordinates into the saddle block at x1^2 + x2^2 = 1."""

    def fwd(jc):
        return [jets.cos(jc[0]), jets.sin(jc[0]), jc[1] * 1.0, jc[2] * 1.0]

    return SmoothMap(source=FACE_CHART, target=_saddle_chart_data(1.0, 1.0).chart, forward=fwd)


def attaching_map() -> SmoothMap:
    """Identify the saddle face with the standard orbit neighborhood."""

    def fwd(jc):
        T, y1, y2 = jc
        s, c = jets.sin(T), jets.cos(T)
        return [T * 1.0, y1 * s - y2 * c, (y1 * c + y2 * s) * -1.0]

    def inv(jc):
        t, x, y = jc
        s, c = jets.sin(t), jets.cos(t)
        return [t * 1.0, x * s - y * c, (x * c + y * s) * -1.0]

    return SmoothMap(source=FACE_CHART, target=ORBIT_CHART, forward=fwd, inverse=inv)


# ---------------------------------------------------------------------------
# standard neighborhoods of closed boundary orbits
# ---------------------------------------------------------------------------


@dataclass
class OrbitNeighborhood:
    """Chartlike parametrization of a closed orbit's boundary neighborhood."""

    base_kind: str
    reference: Array
    embed: SmoothMap
    flow_time: Callable[[float], SmoothMap]
    tube_coords: Callable[[Array], tuple[Array, Array, Array, Array]]
    contact: KForm


def _neighborhood_s1(base: HamiltonianModel, ref: Array) -> OrbitNeighborhood:
    chart = base.charts[0].chart
    beta0 = float(np.arctan2(ref[2], ref[1]))

    def fwd(jc):
        T, X, Y = jc
        den = X * X + 1.0
        t = T + 2.0 * X * Y / den
        beta = 2.0 * Y / den + beta0
        r = jets.sqrt(1.0 - X * X)
        return [t, r * jets.cos(beta), r * jets.sin(beta), X * 1.0]

    embed = SmoothMap(source=ORBIT_CHART, target=chart, forward=fwd)

    def flow_time(sigma: float) -> SmoothMap:
        half = float(np.exp(sigma / 2.0))
        full = float(np.exp(sigma))

        def flow(jc):
            return [jc[0] * 1.0, jc[1] * half, jc[2] * half, jc[3] * full]

        return SmoothMap(source=chart, target=chart, forward=flow)

    def tube_coords(pts: Array):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        t, x, y, h = pts.T
        r2 = x * x + y * y
        E = 0.5 * (r2 + np.sqrt(r2 * r2 + 4.0 * h * h))
        X = h / E
        beta = np.arctan2(y, x)
        diff = np.arctan2(np.sin(beta - beta0), np.cos(beta - beta0))
        den = 1.0 + X * X
        Y = 0.5 * diff * den
        T = np.mod(t - 2.0 * X * Y / den, 2 * np.pi)
        return T, X, Y, np.log(E)

    return OrbitNeighborhood(
        base_kind="s1_d3",
        reference=np.asarray(ref, dtype=float),
        embed=embed,
        flow_time=flow_time,
        tube_coords=tube_coords,
        contact=contact_form_standard(),
    )


def _neighborhood_disc(base: HamiltonianModel, ref: Array) -> OrbitNeighborhood:
    chart = base.charts[0].chart
    g10 = float(np.arctan2(ref[1], ref[0]))
    g20 = float(np.arctan2(ref[3], ref[2]))

    def fwd(jc):
        T, X, Y = jc
        r1 = jets.sqrt(X + 0.5)
        r2 = jets.sqrt(0.5 - X)
        g1 = T + 2.0 * Y + g10
        g2 = T * -1.0 + 2.0 * Y + g20
        return [r1 * jets.cos(g1), r1 * jets.sin(g1), r2 * jets.cos(g2), r2 * jets.sin(g2)]

    embed = SmoothMap(source=ORBIT_CHART, target=chart, forward=fwd)

    def flow_time(sigma: float) -> SmoothMap:
        half = float(np.exp(sigma / 2.0))

        def flow(jc):
            return [c * half for c in jc]

        return SmoothMap(source=chart, target=chart, forward=flow)

    def tube_coords(pts: Array):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r1sq = pts[:, 0] ** 2 + pts[:, 1] ** 2
        r2sq = pts[:, 2] ** 2 + pts[:, 3] ** 2
        E = r1sq + r2sq
        X = (r1sq - r2sq) / (2.0 * E)
        d1 = np.arctan2(pts[:, 1], pts[:, 0]) - g10
        d2 = np.arctan2(pts[:, 3], pts[:, 2]) - g20
        total = np.arctan2(np.sin(d1 + d2), np.cos(d1 + d2))
        Y = 0.25 * total
        T = np.mod(np.arctan2(np.sin(d1), np.cos(d1)) - 2.0 * Y, 2 * np.pi)
        return T, X, Y, np.log(E)

    return OrbitNeighborhood(
        base_kind="disc_d4",
        reference=np.asarray(ref, dtype=float),
        embed=embed,
        flow_time=flow_time,
        tube_coords=tube_coords,
        contact=contact_form_standard(),
    )


def _base_kind(base: HamiltonianModel) -> str:
    if base.name == "s1_d3" and base.params.get("k") == 1 and base.params.get("m") == 0:
        return "s1_d3"
    if base.name == "disc_d4" and base.params.get("m") == 1 and base.params.get("n") == -1:
        return "disc_d4"
    raise UnsupportedBase(
        "surgery is implemented for the unit-speed rotation-free boundary flow "
        "model and the opposite-weight ball model only"
    )


DEFAULT_ORBIT_REF = {
    "s1_d3": np.array([0.0, 1.0, 0.0, 0.0]),
    "disc_d4": np.array([np.sqrt(0.5), 0.0, np.sqrt(0.5), 0.0]),
}


def standard_neighborhood(base: HamiltonianModel, orbit_ref: Array | None = None) -> OrbitNeighborhood:
    """Standard coordinates around a closed boundary orbit of a supported base."""
    kind = _base_kind(base)
    ref = DEFAULT_ORBIT_REF[kind] if orbit_ref is None else np.asarray(orbit_ref, dtype=float)
    if kind == "s1_d3":
        return _neighborhood_s1(base, ref)
    return _neighborhood_disc(base, ref)


# ---------------------------------------------------------------------------
# surgery
# ---------------------------------------------------------------------------


def attach_2handle(
    base: HamiltonianModel,
    orbit_ref: Array | None = None,
    eps: float = 0.05,
    kappa: float = 0.55,
) -> HamiltonianModel:
    """Graft the saddle block onto a base model along a closed boundary orbit."""
    kind = _base_kind(base)
    if not (0.0 < eps <= 0.2):
        raise CollarTooDeep(f"collar depth must lie in (0, 0.2], got {eps}")
    if not (0.0 < kappa <= 0.6):
        raise ValueError(f"face width factor must lie in (0, 0.6], got {kappa}")
    ref = DEFAULT_ORBIT_REF[kind] if orbit_ref is None else np.asarray(orbit_ref, dtype=float)

    base_cd = base.charts[0]
    jc = jets.seed(ref[None, :], order=0)
    h0 = float(base_cd.hamiltonian(jc).value[0])
    f0 = float(base_cd.chart.boundary(jc).value[0])
    if abs(h0) > 1e-10:
        raise NotLegendrian(f"reference point carries moment value {h0:.3e}")
    if abs(f0) > 1e-8:
        raise NotLegendrian(f"reference point is off the boundary by {f0:.3e}")
    if stabilizer_of(base, 0, ref) != 1:
        raise NotLegendrian("the action is not free along the reference orbit")

    nbhd = standard_neighborhood(base, ref)
    scale = float(np.exp(-eps))
    handle_cd = _saddle_chart_data(scale=scale, kappa=kappa)
    assert_moment(handle_cd, self_check_points(handle_cd))

    inner_x2 = float(np.exp(-2.0 * eps))
    patch_r2 = float(
        np.exp(-4.0 * eps) * kappa * kappa * flare_profile_value(inner_x2)
    )
    face_r2 = kappa * kappa * flare_profile_value(1.0)

    # handle -> base: read face coordinates off the handle point, embed the
    # orbit neighborhood, then run the base scaling flow to the right depth
    def handle_to_base(jc):
        x1, x2, y1, y2 = jc
        r2 = x1 * x1 + x2 * x2
        r = jets.sqrt(r2)
        T = jets.atan2(x2, x1)
        Xc = r * (x2 * y1 - x1 * y2)
        Yc = (r * (x1 * y1 + x2 * y2)) * -1.0
        es = (1.0 / r) * scale  # e^{sigma} with sigma = -ln r - eps
        if kind == "s1_d3":
            den = Xc * Xc + 1.0
            t = T + 2.0 * Xc * Yc / den
            beta = 2.0 * Yc / den + float(np.arctan2(ref[2], ref[1]))
            rho = jets.sqrt(1.0 - Xc * Xc) * jets.sqrt(es)
            return [t, rho * jets.cos(beta), rho * jets.sin(beta), es * Xc]
        g10 = float(np.arctan2(ref[1], ref[0]))
        g20 = float(np.arctan2(ref[3], ref[2]))
        half = jets.sqrt(es)
        r1 = jets.sqrt(Xc + 0.5) * half
        rr2 = jets.sqrt(0.5 - Xc) * half
        g1 = T + 2.0 * Yc + g10
        g2 = T * -1.0 + 2.0 * Yc + g20
        return [r1 * jets.cos(g1), r1 * jets.sin(g1), rr2 * jets.cos(g2), rr2 * jets.sin(g2)]

    # base -> handle: tube coordinates plus scaling depth
    beta0 = float(np.arctan2(ref[2], ref[1]))
    g10 = float(np.arctan2(ref[1], ref[0]))
    g20 = float(np.arctan2(ref[3], ref[2]))

    def base_to_handle(jc):
        if kind == "s1_d3":
            t, x, y, h = jc
            r2 = x * x + y * y
            E = (r2 + jets.sqrt(r2 * r2 + h * h * 4.0)) * 0.5
            X = h / E
            beta = jets.atan2(y, x)
            diff = jets.atan2(jets.sin(beta - beta0), jets.cos(beta - beta0))
            den = X * X + 1.0
            Y = diff * den * 0.5
            T = t - 2.0 * X * Y / den
        else:
            x1, y1c, x2, y2c = jc
            r1sq = x1 * x1 + y1c * y1c
            r2sq = x2 * x2 + y2c * y2c
            E = r1sq + r2sq
            X = (r1sq - r2sq) / (E * 2.0)
            d1 = jets.atan2(y1c, x1) - g10
            d2 = jets.atan2(y2c, x2) - g20
            tot = d1 + d2
            Y = jets.atan2(jets.sin(tot), jets.cos(tot)) * 0.25
            T = jets.atan2(jets.sin(d1), jets.cos(d1)) - Y * 2.0
        emx = (1.0 / E) * scale  # e^{-s} with s = ln E + eps
        e2s = E * E * float(np.exp(2.0 * eps))
        sT, cT = jets.sin(T), jets.cos(T)
        return [
            emx * cT,
            emx * sT,
            e2s * (X * sT - Y * cT),
            e2s * (X * cT + Y * sT) * -1.0,
        ]

    def handle_exit_valid(pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        x2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return x2 > inner_x2

    def base_entry_valid(pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        _, X, Y, logE = nbhd.tube_coords(pts)
        return (logE > -eps) & (X * X + Y * Y < face_r2)

    def outside_patch(pts: Array) -> Array:
        _, X, Y, _ = nbhd.tube_coords(pts)
        return X * X + Y * Y >= patch_r2

    patched = dataclasses.replace(base_cd, boundary_accept=outside_patch)

    base_chart = base_cd.chart
    transitions = [
        Transition(1, 0, SmoothMap(handle_cd.chart, base_chart, handle_to_base),
                   valid=handle_exit_valid),
        Transition(0, 1, SmoothMap(base_chart, handle_cd.chart, base_to_handle),
                   valid=base_entry_valid),
    ]
    return HamiltonianModel(
        name="attach_2handle",
        params={"base": base.spec_string, "eps": float(eps), "kappa": float(kappa)},
        charts=[patched, handle_cd],
        transitions=transitions,
        description="base model with a saddle block grafted along a closed boundary orbit",
        meta={
            "base_kind": kind,
            "patch_radius2": patch_r2,
            "face_radius2": face_r2,
            "new_critical_index": 2,
            "collar": float(eps),
        },
    )
