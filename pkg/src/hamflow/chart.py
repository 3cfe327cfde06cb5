"""Coordinate charts, smooth maps between them, and domain sampling.

A chart is a named open box-with-inequalities in R^d (d <= 6), with periodic
flags for angular coordinates.  The domain is the set where every inequality
function is <= 0; an optional scalar ``boundary`` function cuts the model
boundary as its zero level (negative inside).

Sampling is rejection sampling against the domain inequalities with a fixed
candidate stream, so the first n accepted points never depend on how many
points were requested (prefix stability).  Boundary points come from rays cast
from interior samples, bisected onto the zero level of ``boundary``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import BoundaryNotFound, EmptyDomainSuspected
from .jets import Jet

Array = np.ndarray
ScalarField = Callable[[Sequence[Jet]], Jet]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Chart:
    """A coordinate box with inequality constraints and an optional boundary."""

    name: str
    coords: tuple[str, ...]
    periodic: tuple[bool, ...]
    box_lo: tuple[float, ...]
    box_hi: tuple[float, ...]
    domain: tuple[ScalarField, ...] = ()
    boundary: ScalarField | None = None

    def __post_init__(self):
        d = len(self.coords)
        if not (1 <= d <= 6):
            raise ValueError(f"chart dimension {d} outside supported range 1..6")
        if len(self.periodic) != d or len(self.box_lo) != d or len(self.box_hi) != d:
            raise ValueError("coords/periodic/box lengths disagree")

    @property
    def dim(self) -> int:
        return len(self.coords)

    # ------------------------------------------------------------------

    def wrap(self, points: Array) -> Array:
        """Reduce periodic coordinates to [0, 2*pi)."""
        pts = np.array(points, dtype=float, copy=True)
        flat = pts.ndim == 1
        if flat:
            pts = pts[None, :]
        for j, per in enumerate(self.periodic):
            if per:
                pts[:, j] = np.mod(pts[:, j], TWO_PI)
        return pts[0] if flat else pts

    def displacement(self, a: Array, b: Array) -> Array:
        """Componentwise b - a, shortest way around on periodic coordinates."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        for j, per in enumerate(self.periodic):
            if per:
                d[..., j] = (d[..., j] + np.pi) % TWO_PI - np.pi
        return d

    def distance(self, a: Array, b: Array) -> float | Array:
        disp = self.displacement(a, b)
        return np.sqrt((disp**2).sum(axis=-1))

    def contains(self, points: Array, slack: float = 0.0) -> Array:
        """Boolean mask of points satisfying every domain inequality."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.ones(pts.shape[0], dtype=bool)
        if self.domain:
            j = jets.seed(pts, order=0)
            for fn in self.domain:
                ok &= fn(j).value <= slack
        return ok

    def boundary_values(self, points: Array, order: int = 0) -> Jet:
        if self.boundary is None:
            raise ValueError(f"chart {self.name!r} declares no boundary function")
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.boundary(jets.seed(pts, order=order))


@dataclass(frozen=True)
class SmoothMap:
    """A smooth coordinate change between charts, evaluated on jets."""

    source: Chart
    target: Chart
    forward: Callable[[Sequence[Jet]], list[Jet]]
    inverse: "SmoothMap | None" = None

    def apply(self, points: Array, order: int = 0) -> Array:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = self.forward(jets.seed(pts, order=order))
        res = np.stack([j.value for j in out], axis=1)
        return self.target.wrap(res)

    def jacobian(self, points: Array) -> Array:
        """Stack of forward Jacobians, shape (n, target_dim, source_dim)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = self.forward(jets.seed(pts, order=1))
        return np.stack([j.grad for j in out], axis=1)


# ----------------------------------------------------------------------
# sampling

_BATCH = 2048
_MAX_CANDIDATES = 1_000_000
_MIN_ACCEPT_RATIO = 1e-4


def sample_domain(chart: Chart, n: int, rng: np.random.Generator) -> Array:
    """Draw n interior points uniformly from the chart domain.

    Rejection sampling against the domain inequalities.  Candidates are drawn
    in a fixed stream so results are prefix-stable in n.  Raises
    EmptyDomainSuspected when the acceptance ratio stays below 1e-4 after a
    million candidates.
    """
    lo = np.asarray(chart.box_lo, dtype=float)
    hi = np.asarray(chart.box_hi, dtype=float)
    accepted: list[Array] = []
    total = 0
    got = 0
    while got < n:
        cand = rng.uniform(lo, hi, size=(_BATCH, chart.dim))
        total += _BATCH
        mask = chart.contains(cand)
        hit = cand[mask]
        if hit.shape[0]:
            accepted.append(hit)
            got += hit.shape[0]
        if total >= _MAX_CANDIDATES and got < max(1, total * _MIN_ACCEPT_RATIO):
            raise EmptyDomainSuspected(
                f"chart {chart.name!r}: {got} acceptances from {total} candidates"
            )
        if total >= 50 * _MAX_CANDIDATES:
            raise EmptyDomainSuspected(
                f"chart {chart.name!r}: sampling budget exhausted at {got}/{n}"
            )
    return np.concatenate(accepted, axis=0)[:n]


_RAY_BATCH = 256


def _others_violated(chart: Chart, pts: Array) -> Array:
    """Mask of points breaking a domain inequality other than the boundary."""
    bad = np.zeros(pts.shape[0], dtype=bool)
    if chart.domain:
        j = jets.seed(pts, order=0)
        for fn in chart.domain:
            if fn is chart.boundary:
                continue
            bad |= fn(j).value > 0
    return bad


def _bisect_boundary(chart: Chart, inside: Array, outside: Array, tol: float = 1e-10):
    """Bisect segment batches [inside, outside] onto the boundary zero level.

    Returns (points, ok_mask); rows whose final residual exceeds 10*tol are
    flagged out instead of raising.
    """
    a, b = inside.copy(), outside.copy()
    fa = chart.boundary(jets.seed(a, order=0)).value
    for _ in range(80):
        mid = 0.5 * (a + b)
        fm = chart.boundary(jets.seed(mid, order=0)).value
        same = (fm > 0) == (fa > 0)
        a = np.where(same[:, None], mid, a)
        fa = np.where(same, fm, fa)
        b = np.where(same[:, None], b, mid)
    mid = 0.5 * (a + b)
    ok = np.abs(chart.boundary(jets.seed(mid, order=0)).value) < 10 * tol
    return mid, ok


def sample_boundary(
    chart: Chart,
    n: int,
    rng: np.random.Generator,
    accept: Callable[[Array], bool] | None = None,
    max_rays: int = 1000,
) -> Array:
    """Draw n points on the boundary zero level by ray casting.

    Each attempt pairs an interior sample with a random direction and marches
    until the boundary function changes sign (the crossing is then bisected to
    1e-10) or until another domain inequality is violated, which abandons the
    ray.  Rays advance in fixed-size batches so the accepted sequence is
    prefix-stable in n.  ``accept`` optionally filters found points (used by
    glued models to mask regions replaced by a handle).  Raises
    BoundaryNotFound after ``max_rays`` consecutive failed rays.
    """
    if chart.boundary is None:
        raise BoundaryNotFound(f"chart {chart.name!r} has no boundary function")
    lo = np.asarray(chart.box_lo, dtype=float)
    hi = np.asarray(chart.box_hi, dtype=float)
    span = float(np.max(hi - lo))
    step = 0.01 * span
    out: list[Array] = []
    got = 0
    failures = 0
    while got < n:
        if failures >= max_rays:
            raise BoundaryNotFound(
                f"chart {chart.name!r}: {failures} consecutive rays missed the boundary"
            )
        starts = sample_domain(chart, _RAY_BATCH, rng)
        dirs = rng.normal(size=(_RAY_BATCH, chart.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        alive = chart.boundary(jets.seed(starts, order=0)).value <= 0
        pos = starts.copy()
        inner = starts.copy()
        outer = np.zeros_like(starts)
        crossed = np.zeros(_RAY_BATCH, dtype=bool)
        for _ in range(400):
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            nxt = pos[idx] + step * dirs[idx]
            fb = chart.boundary(jets.seed(nxt, order=0)).value
            hit = fb >= 0
            inner[idx[hit]] = pos[idx[hit]]
            outer[idx[hit]] = nxt[hit]
            crossed[idx[hit]] = True
            # a crossing is kept even if another inequality also trips there
            dropped = ~hit & _others_violated(chart, nxt)
            pos[idx] = nxt
            alive[idx] = ~hit & ~dropped
        batch_pts = np.zeros((0, chart.dim))
        if crossed.any():
            found, ok = _bisect_boundary(chart, inner[crossed], outer[crossed])
            found = chart.wrap(found[ok])
            if accept is not None and found.shape[0]:
                keep = np.array([bool(accept(p)) for p in found])
                found = found[keep]
            batch_pts = found
        if batch_pts.shape[0]:
            out.append(batch_pts)
            got += batch_pts.shape[0]
            failures = 0
        else:
            failures += _RAY_BATCH
    return np.concatenate(out, axis=0)[:n]
