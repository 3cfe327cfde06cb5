"""Linear algebra over jets and over batched point values.

Jet-valued matrices are plain nested lists of :class:`~hamflow.jets.Jet`.
The solver below is LU without pivoting, which is backward stable for the
symmetric positive definite matrices it is used on (metrics); a non-positive
pivot raises :class:`~hamflow.errors.SingularMetric` instead of silently
continuing.

Value-level helpers (Pfaffian, linear-algebra polar construction of a
compatible almost complex structure) operate on numpy stacks of shape
``(n, d, d)`` so whole sample batches are processed at once.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateForm, DimensionMismatch, SingularMetric
from .jets import Jet

Array = np.ndarray


def solve_spd_jet(mat: list[list[Jet]], rhs: list[Jet]) -> list[Jet]:
    """Solve ``mat @ x = rhs`` for a symmetric positive definite jet matrix."""
    d = len(mat)
    a = [row[:] for row in mat]
    b = rhs[:]
    for k in range(d):
        piv = a[k][k]
        if np.any(piv.value <= 0.0) or np.any(np.abs(piv.value) < 1e-14):
            raise SingularMetric(f"non-positive pivot at elimination step {k}")
        for i in range(k + 1, d):
            factor = a[i][k] / piv
            for j in range(k + 1, d):
                a[i][j] = a[i][j] - factor * a[k][j]
            b[i] = b[i] - factor * b[k]
    x: list[Jet | None] = [None] * d
    for i in range(d - 1, -1, -1):
        acc = b[i]
        for j in range(i + 1, d):
            acc = acc - a[i][j] * x[j]
        x[i] = acc / a[i][i]
    return x  # type: ignore[return-value]


def mat_vec_jet(mat: list[list[Jet]], vec: list[Jet]) -> list[Jet]:
    out = []
    for row in mat:
        acc = row[0] * vec[0]
        for j in range(1, len(vec)):
            acc = acc + row[j] * vec[j]
        out.append(acc)
    return out


def pfaffian(mats: Array) -> Array:
    """Pfaffian of a batch of antisymmetric matrices, dimensions 2, 4 or 6.

    Closed-form expansions; raises DimensionMismatch for odd or unsupported
    dimensions.
    """
    m = np.asarray(mats, dtype=float)
    if m.ndim == 2:
        m = m[None, :, :]
    d = m.shape[-1]
    if d % 2 == 1 or d < 2 or d > 6:
        raise DimensionMismatch(f"Pfaffian defined here for dimensions 2/4/6, got {d}")
    a = m
    if d == 2:
        return a[:, 0, 1]
    if d == 4:
        return (
            a[:, 0, 1] * a[:, 2, 3]
            - a[:, 0, 2] * a[:, 1, 3]
            + a[:, 0, 3] * a[:, 1, 2]
        )
    # d == 6: expansion along the first row
    def pf4(idx):
        i, j, k, l = idx
        return (
            a[:, i, j] * a[:, k, l]
            - a[:, i, k] * a[:, j, l]
            + a[:, i, l] * a[:, j, k]
        )

    return (
        a[:, 0, 1] * pf4((2, 3, 4, 5))
        - a[:, 0, 2] * pf4((1, 3, 4, 5))
        + a[:, 0, 3] * pf4((1, 2, 4, 5))
        - a[:, 0, 4] * pf4((1, 2, 3, 5))
        + a[:, 0, 5] * pf4((1, 2, 3, 4))
    )


def nondegenerate(omega_mats: Array, floor: float = 1e-6) -> tuple[bool, float]:
    """Whether a batch of 2-form matrices is uniformly nondegenerate.

    Returns ``(ok, worst)`` where ``worst`` is the smallest normalized
    |Pfaffian| over the batch.  Normalization divides by ``norm^(d/2)`` with
    ``norm`` the mean Frobenius scale, so the floor is scale-free.
    """
    m = np.asarray(omega_mats, dtype=float)
    if m.ndim == 2:
        m = m[None, :, :]
    d = m.shape[-1]
    pf = pfaffian(m)
    scale = np.sqrt((m**2).sum(axis=(1, 2)) / d)
    scale = np.maximum(scale, 1e-300)
    normalized = np.abs(pf) / scale ** (d / 2)
    worst = float(normalized.min())
    return worst > floor, worst


def spd_sqrt_and_inv_sqrt(mats: Array) -> tuple[Array, Array]:
    """Batched SPD square root and inverse square root via eigh."""
    w, v = np.linalg.eigh(mats)
    if np.any(w <= 0):
        raise SingularMetric("matrix not positive definite in square-root construction")
    sq = (v * np.sqrt(w)[:, None, :]) @ np.swapaxes(v, 1, 2)
    isq = (v / np.sqrt(w)[:, None, :]) @ np.swapaxes(v, 1, 2)
    return sq, isq


def compatible_structure(omega_mats: Array, metric_mats: Array) -> Array:
    """Pointwise almost complex structure compatible with a 2-form and metric.

    Computes A = -G^{-1} Omega and returns its polar unitary factor taken in
    the metric inner product: J = A (sqrt(A^T_g A))^{-1}.  For matrices coming
    from an exactly compatible pair this returns A itself; in general J
    squares to -identity and is orthogonal for G.

    Raises DegenerateForm if Omega is numerically singular.
    """
    om = np.asarray(omega_mats, dtype=float)
    gm = np.asarray(metric_mats, dtype=float)
    if om.ndim == 2:
        om = om[None, :, :]
    if gm.ndim == 2:
        gm = gm[None, :, :]
    if om.shape != gm.shape:
        raise DimensionMismatch(
            f"form and metric stacks differ in shape: {om.shape} vs {gm.shape}"
        )
    d = om.shape[-1]
    sv = np.linalg.svd(om, compute_uv=False)
    scale = np.maximum(sv[:, 0], 1e-300)
    if np.any(sv[:, -1] / scale < 1e-10):
        raise DegenerateForm("2-form numerically degenerate; no compatible structure")
    g_sq, g_isq = spd_sqrt_and_inv_sqrt(gm)
    a = -np.linalg.solve(gm, om)
    # conjugate into the g-orthonormal frame, where A becomes skew
    b = g_sq @ a @ g_isq
    m = np.swapaxes(b, 1, 2) @ b
    m_sq, m_isq = spd_sqrt_and_inv_sqrt(m)
    j_frame = b @ m_isq
    return g_isq @ j_frame @ g_sq


def jet_matrix_values(mat: list[list[Jet]]) -> Array:
    """Stack the values of a jet matrix into an (n, d, d) array."""
    d = len(mat)
    n = mat[0][0].n
    out = np.empty((n, d, d))
    for i in range(d):
        for j in range(d):
            out[:, i, j] = mat[i][j].value
    return out
