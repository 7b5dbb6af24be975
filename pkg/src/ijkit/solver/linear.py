"""
Linear-algebra helpers shared by the solver and the IJ engine.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
import numpy.typing as npt
from scipy.sparse.linalg import LinearOperator, cg, eigsh, gmres, svds

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]
MatVec = Callable[[Array], Array]

# Operators up to this size are formed densely for σ_min.
DENSE_PROBE_DIM = 16


def iterative_solve(
    matvec: MatVec,
    rhs: Array,
    symmetric: bool,
    rtol: float,
    maxiter: int | None = None,
) -> Array:
    """
    Solve A x = rhs given only x ↦ A x.

    Conjugate gradient for symmetric A, restarted GMRES otherwise.
    A solve that stops early is logged and its last iterate returned.
    """
    dim = rhs.shape[0]
    if not np.any(rhs):
        return np.zeros(dim)
    op = LinearOperator((dim, dim), matvec=matvec, dtype=np.float64)
    maxiter = maxiter or 10 * dim
    if symmetric:
        x, info = cg(op, rhs, rtol=rtol, atol=0.0, maxiter=maxiter)
    else:
        x, info = gmres(
            op, rhs, rtol=rtol, atol=0.0, restart=min(dim, 50), maxiter=maxiter
        )
    if info != 0:
        logger.warning(
            "Iterative solve stopped early (info=%d, residual %.3e)",
            info,
            float(np.linalg.norm(matvec(x) - rhs) / np.linalg.norm(rhs)),
        )
    return np.asarray(x, dtype=np.float64)


def smallest_singular_value(matrix: Array) -> float:
    """σ_min of a dense square matrix."""
    if matrix.size == 0:
        return 1.0
    return float(np.linalg.svd(matrix, compute_uv=False)[-1])


def smallest_singular_value_operator(
    matvec: MatVec, rmatvec: MatVec, dim: int, symmetric: bool
) -> float:
    """
    σ_min of an operator known only through products.

    Small operators are materialised column by column and decomposed
    densely; ARPACK needs dim > 2.
    """
    if dim <= DENSE_PROBE_DIM:
        columns = [matvec(e) for e in np.eye(dim)]
        return smallest_singular_value(np.column_stack(columns))
    op = LinearOperator(
        (dim, dim), matvec=matvec, rmatvec=rmatvec, dtype=np.float64
    )
    if symmetric:
        value = eigsh(op, k=1, which="SA", return_eigenvectors=False)[0]
        return float(abs(value))
    value = svds(op, k=1, which="SM", return_singular_vectors=False)[0]
    return float(value)
