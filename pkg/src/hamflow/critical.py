"""Critical sets, Morse data, and global extremum structure of chart models.

Fixed points of the circle action coincide with critical points of the
moment map, so they are located by Newton iteration on the generator field
from seeded random starts.  Converged points are merged into clusters three
ways: by chart distance, through transition maps for points visible from
two charts, and by level value for points whose Hessian carries a null
plane (samples scattered along one critical surface all belong to the same
stratum, which has constant moment value).  Each cluster is classified by
the eigenvalues of the moment Hessian: the index counts negative
directions, the nullity counts flat ones (0 for isolated points, 2 for
fixed surfaces).

Gradient ascent and descent from random interior starts reveal the global
structure: which extrema are interior, which sit on the boundary, and
whether both signs of the moment map appear there.  Boundary connectivity
is estimated from boundary samples joined at an adaptive radius scaled to
the sample density, with transition maps providing the cross-chart links.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import flow, jets
from .chart import sample_boundary, sample_domain
from .errors import BoundaryNotFound, ImmediateExit, NotCritical, StiffFlow
from .model import HamiltonianModel

Array = np.ndarray

NULL_TOL = 1e-8
CLUSTER_RADIUS = 0.25
SURFACE_VALUE_TOL = 1e-6
BOUNDARY_TOUCH_TOL = 1e-3


@dataclass
class CriticalCluster:
    """One critical stratum: representative point plus Morse data."""

    chart_index: int
    point: Array
    value: float
    index: int
    nullity: int
    set_dimension: int
    touches_boundary: bool
    members: int


@dataclass
class ExtremaReport:
    """Where gradient ascent and descent end up, aggregated over starts."""

    interior_max_clusters: int
    interior_min_clusters: int
    max_value: float
    min_value: float
    max_on_boundary: bool
    min_on_boundary: bool
    portrait_both_signs: bool
    legendrian_consistent: bool
    unresolved: int


def hessian_data(
    model: HamiltonianModel, chart_index: int, point: Array, null_tol: float = NULL_TOL
) -> tuple[int, int, Array]:
    """Index, nullity, and eigenvalues of the moment Hessian at a critical point."""
    cd = model.charts[chart_index]
    p = np.asarray(point, dtype=float)
    hj = cd.hamiltonian(jets.seed(p[None, :], order=2))
    grad_norm = float(np.linalg.norm(hj.grad[0]))
    if grad_norm > 1e-6:
        raise NotCritical(
            f"moment differential has norm {grad_norm:.3e} at the given point"
        )
    eigs = np.linalg.eigvalsh(0.5 * (hj.hess[0] + hj.hess[0].T))
    index = int((eigs < -null_tol).sum())
    nullity = int((np.abs(eigs) <= null_tol).sum())
    return index, nullity, eigs


def hessian_index(
    model: HamiltonianModel, chart_index: int, point: Array, null_tol: float = NULL_TOL
) -> int:
    return hessian_data(model, chart_index, point, null_tol)[0]


# ----------------------------------------------------------------------
# Newton search for generator zeros


def _generator_at(cd, p: Array) -> tuple[Array, Array]:
    jc = jets.seed(p[None, :], order=1)
    comps = cd.generator(jc)
    vals = np.array([c.value[0] for c in comps])
    jac = np.stack([c.grad[0] for c in comps])
    return vals, jac


def _newton_generator_zero(cd, start: Array, tol: float = 1e-11, iters: int = 60):
    p = np.asarray(start, dtype=float).copy()
    span = float(np.max(np.asarray(cd.chart.box_hi) - np.asarray(cd.chart.box_lo)))
    for _ in range(iters):
        vals, jac = _generator_at(cd, p)
        r = float(np.linalg.norm(vals))
        if r < tol:
            break
        step = -np.linalg.pinv(jac, rcond=1e-10) @ vals
        norm = float(np.linalg.norm(step))
        if norm < 1e-15:
            return None
        if norm > 0.25 * span:
            step *= 0.25 * span / norm
        q = cd.chart.wrap(p + step)
        rq = float(np.linalg.norm(_generator_at(cd, q)[0]))
        shrink = 0
        while rq > r and shrink < 8:
            step *= 0.5
            q = cd.chart.wrap(p + step)
            rq = float(np.linalg.norm(_generator_at(cd, q)[0]))
            shrink += 1
        if rq > r:
            return None
        p = q
    if float(np.linalg.norm(_generator_at(cd, p)[0])) > 1e-9:
        return None
    if not bool(cd.chart.contains(p, slack=1e-6)[0]):
        return None
    lo = np.asarray(cd.chart.box_lo) - 1e-6
    hi = np.asarray(cd.chart.box_hi) + 1e-6
    if not np.all((p >= lo) & (p <= hi)):
        return None
    return p


# ----------------------------------------------------------------------
# clustering converged points across charts


def _map_through(model, ci: int, p: Array) -> dict[int, Array]:
    images: dict[int, Array] = {}
    for tr in model.transitions_from(ci):
        if not tr.applicable(p):
            continue
        img = tr.map.apply(p)[0]
        if bool(model.charts[tr.dst].chart.contains(img, slack=1e-6)[0]):
            images[tr.dst] = img
    return images


def _merge_groups(
    model: HamiltonianModel,
    labeled: list[tuple[int, Array]],
    radius: float,
    value_merge: bool = False,
    surface_null_tol: float = 1e-5,
) -> list[list[tuple[int, Array]]]:
    n = len(labeled)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    mapped = [_map_through(model, ci, p) for ci, p in labeled]
    traits = []
    if value_merge:
        for ci, p in labeled:
            hj = model.charts[ci].hamiltonian(jets.seed(p[None, :], order=2))
            eigs = np.linalg.eigvalsh(0.5 * (hj.hess[0] + hj.hess[0].T))
            flat = int((np.abs(eigs) <= surface_null_tol).sum())
            traits.append((float(hj.value[0]), flat >= 2))
    for i in range(n):
        ci, p = labeled[i]
        for j in range(i + 1, n):
            cj, q = labeled[j]
            d = np.inf
            if ci == cj:
                d = float(model.charts[ci].chart.distance(p, q))
            if cj in mapped[i]:
                d = min(d, float(model.charts[cj].chart.distance(mapped[i][cj], q)))
            if ci in mapped[j]:
                d = min(d, float(model.charts[ci].chart.distance(p, mapped[j][ci])))
            if d < radius:
                union(i, j)
                continue
            if value_merge and traits[i][1] and traits[j][1]:
                if abs(traits[i][0] - traits[j][0]) < SURFACE_VALUE_TOL:
                    union(i, j)
    groups: dict[int, list[tuple[int, Array]]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(labeled[i])
    return list(groups.values())


def find_fixed_points(
    model: HamiltonianModel,
    seed: int = 0,
    starts: int = 40,
    cluster_radius: float = CLUSTER_RADIUS,
) -> list[CriticalCluster]:
    """Locate and classify all zeros of the action generator."""
    found: list[tuple[int, Array]] = []
    for ci, cd in enumerate(model.charts):
        rng = np.random.default_rng([seed, 23, ci])
        pts = sample_domain(cd.chart, starts, rng)
        for p in pts:
            q = _newton_generator_zero(cd, p)
            if q is None:
                continue
            if any(
                cj == ci and float(cd.chart.distance(q, r)) < 1e-4 for cj, r in found
            ):
                continue
            found.append((ci, q))
    clusters = []
    for group in _merge_groups(model, found, cluster_radius, value_merge=True):
        ci, p = group[0]
        cd = model.charts[ci]
        index, nullity, _ = hessian_data(model, ci, p)
        touches = False
        if cd.chart.boundary is not None:
            touches = float(cd.chart.boundary_values(p).value[0]) > -BOUNDARY_TOUCH_TOL
        hj = cd.hamiltonian(jets.seed(p[None, :], order=0))
        clusters.append(
            CriticalCluster(
                chart_index=ci,
                point=p,
                value=float(hj.value[0]),
                index=index,
                nullity=nullity,
                set_dimension=nullity,
                touches_boundary=touches,
                members=len(group),
            )
        )
    clusters.sort(key=lambda c: (c.value, c.chart_index, c.index))
    return clusters


def critical_surface_census(
    model: HamiltonianModel, seed: int = 0, starts: int = 40
) -> int:
    """Number of distinct critical strata with a 2-dimensional null plane."""
    return sum(1 for c in find_fixed_points(model, seed=seed, starts=starts) if c.nullity == 2)


# ----------------------------------------------------------------------
# gradient ascent / descent structure


def _margin_samples(cd, n: int, rng: np.random.Generator) -> Array:
    pts = sample_domain(cd.chart, 4 * n, rng)
    if cd.liouville_domain:
        jc = jets.seed(pts, order=0)
        ok = np.ones(pts.shape[0], dtype=bool)
        for fn in cd.liouville_domain:
            ok &= fn(jc).value <= 0
        pts = pts[ok]
    return pts[:n]


def extrema_analysis(
    model: HamiltonianModel,
    seed: int = 0,
    starts: int = 12,
    portrait_samples: int = 400,
    cluster_radius: float = CLUSTER_RADIUS,
) -> ExtremaReport:
    """Flow the moment gradient both ways and summarize where it ends."""
    interior_up: list[tuple[int, Array]] = []
    interior_down: list[tuple[int, Array]] = []
    best = (-np.inf, False)
    worst = (np.inf, False)
    unresolved = 0
    for ci, cd in enumerate(model.charts):
        if cd.metric is None:
            continue
        rng = np.random.default_rng([seed, 29, ci])
        pts = _margin_samples(cd, starts, rng)
        for p in pts:
            for direction in (1, -1):
                try:
                    res = flow.integrate(model, ci, p, direction=direction)
                except ImmediateExit:
                    unresolved += 1
                    continue
                except StiffFlow:
                    unresolved += 1
                    continue
                h_end = float(res.h_values[-1])
                ended_on_boundary = res.termination == "boundary"
                if res.termination == "critical_set":
                    bucket = interior_up if direction == 1 else interior_down
                    bucket.append((res.end_chart, res.end_point))
                elif res.termination != "boundary":
                    unresolved += 1
                    continue
                if direction == 1 and h_end > best[0]:
                    best = (h_end, ended_on_boundary)
                if direction == -1 and h_end < worst[0]:
                    worst = (h_end, ended_on_boundary)
    up_groups = _merge_groups(model, interior_up, cluster_radius, value_merge=True)
    down_groups = _merge_groups(model, interior_down, cluster_radius, value_merge=True)
    portrait = flow.boundary_sign_portrait(model, samples=portrait_samples, seed=seed)
    both_signs = portrait.has_positive and portrait.has_negative
    both_on_boundary = best[1] and worst[1]
    return ExtremaReport(
        interior_max_clusters=len(up_groups),
        interior_min_clusters=len(down_groups),
        max_value=float(best[0]),
        min_value=float(worst[0]),
        max_on_boundary=best[1],
        min_on_boundary=worst[1],
        portrait_both_signs=both_signs,
        legendrian_consistent=(both_on_boundary == both_signs),
        unresolved=unresolved,
    )


# ----------------------------------------------------------------------
# boundary connectivity


def _adaptive_radius(chart, pts: Array) -> float:
    m = pts.shape[0]
    if m < 2:
        return CLUSTER_RADIUS
    sample = pts[: min(m, 400)]
    nn = np.full(sample.shape[0], np.inf)
    for i0 in range(0, sample.shape[0], 128):
        block = sample[i0 : i0 + 128]
        disp = chart.displacement(block[:, None, :], pts[None, :, :])
        d2 = np.sqrt((disp**2).sum(axis=-1))
        for k in range(block.shape[0]):
            d2[k, i0 + k] = np.inf
        nn[i0 : i0 + 128] = d2.min(axis=1)
    return 3.0 * float(np.median(nn))


def boundary_connectivity(
    model: HamiltonianModel,
    seed: int = 0,
    samples: int = 2000,
    radius: float | None = None,
) -> int:
    """Connected components of the sampled boundary, linked across charts."""
    with_boundary = [
        (ci, cd) for ci, cd in enumerate(model.charts) if cd.chart.boundary is not None
    ]
    if not with_boundary:
        return 0
    per = max(2, samples // len(with_boundary))
    clouds: dict[int, Array] = {}
    radii: dict[int, float] = {}
    for ci, cd in with_boundary:
        rng = np.random.default_rng([seed, 31, ci])
        try:
            pts = sample_boundary(cd.chart, per, rng, accept=cd.boundary_accept)
        except BoundaryNotFound:
            continue
        clouds[ci] = pts
        radii[ci] = radius if radius is not None else _adaptive_radius(cd.chart, pts)
    if not clouds:
        return 0
    offsets: dict[int, int] = {}
    total = 0
    for ci, pts in clouds.items():
        offsets[ci] = total
        total += pts.shape[0]
    parent = list(range(total))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    for ci, pts in clouds.items():
        chart = model.charts[ci].chart
        r = radii[ci]
        m = pts.shape[0]
        base = offsets[ci]
        for i0 in range(0, m, 128):
            block = pts[i0 : i0 + 128]
            disp = chart.displacement(block[:, None, :], pts[None, :, :])
            d2 = (disp**2).sum(axis=-1)
            for bi, row in enumerate(d2 < r * r):
                i = base + i0 + bi
                for j in np.flatnonzero(row):
                    if i != base + j:
                        union(i, base + int(j))
    for tr in model.transitions:
        if tr.src not in clouds or tr.dst not in clouds:
            continue
        src_pts = clouds[tr.src]
        mask = np.ones(src_pts.shape[0], dtype=bool)
        if tr.valid is not None:
            mask = np.asarray(tr.valid(src_pts), dtype=bool)
        if not mask.any():
            continue
        imgs = tr.map.apply(src_pts[mask])
        dst_chart = model.charts[tr.dst].chart
        link_r = max(radii[tr.src], radii[tr.dst])
        dst_pts = clouds[tr.dst]
        src_idx = np.flatnonzero(mask) + offsets[tr.src]
        for i0 in range(0, imgs.shape[0], 128):
            block = imgs[i0 : i0 + 128]
            disp = dst_chart.displacement(block[:, None, :], dst_pts[None, :, :])
            d2 = (disp**2).sum(axis=-1)
            for bi, row in enumerate(d2 < link_r * link_r):
                for j in np.flatnonzero(row):
                    union(int(src_idx[i0 + bi]), offsets[tr.dst] + int(j))
    return len({find(i) for i in range(total)})
