"""
Numerical checks of the two matrix inequalities the error bound rests on.

Both return whether the inequality held on the given inputs; on valid
inputs they must always return True.
"""

import numpy as np
import numpy.typing as npt

from ijkit.core import WeightVector
from ijkit.errors import InputError

# Relative slack for rounding in the equality cases.
_SLACK = 1e-12


def check_holder(w: WeightVector, tensors: npt.ArrayLike) -> bool:
    """
    ‖(1/N) Σ w_n a_n‖₁ ≤ √D_A · (‖w‖₂/√N) · (‖a‖₂/√N).

    Args:
        w: Weights of length N.
        tensors: Array of shape (N, ...) holding the tensors a_n; D_A is
            the number of entries of one a_n.

    Raises:
        InputError: If the first axis of tensors is not N.
    """
    a = np.asarray(tensors, dtype=np.float64)
    n = w.n
    if a.ndim < 1 or a.shape[0] != n:
        raise InputError(f"Expected {n} tensors, got array of shape {a.shape}")
    flat = a.reshape(n, -1)
    size = flat.shape[1]

    lhs = float(np.abs(w.dense() @ flat).sum()) / n
    rhs = (
        np.sqrt(size)
        * (w.l2_norm() / np.sqrt(n))
        * (float(np.linalg.norm(flat)) / np.sqrt(n))
    )
    return lhs <= rhs * (1.0 + _SLACK)


def check_opnorm_continuity(
    a: npt.ArrayLike, b: npt.ArrayLike, c_op: float
) -> bool:
    """
    If ‖A⁻¹‖_op ≤ c_op and ‖A − B‖₁ ≤ 1/(2 c_op) then ‖B⁻¹‖_op ≤ 2 c_op.

    ‖·‖₁ is the entrywise L1 norm. When B is farther from A than the
    budget the implication holds vacuously.

    Raises:
        InputError: Non-square or mismatched matrices, or ‖A⁻¹‖_op > c_op.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise InputError(f"Need equal square matrices, got {a.shape}, {b.shape}")
    if not c_op > 0:
        raise InputError(f"c_op must be > 0, got {c_op}")

    sigma_a = np.linalg.svd(a, compute_uv=False)[-1]
    if sigma_a == 0.0 or 1.0 / sigma_a > c_op * (1.0 + _SLACK):
        raise InputError(f"‖A⁻¹‖_op exceeds c_op={c_op}")

    if np.abs(a - b).sum() > 0.5 / c_op:
        return True

    sigma_b = np.linalg.svd(b, compute_uv=False)[-1]
    if sigma_b == 0.0:
        return False
    return bool(1.0 / sigma_b <= 2.0 * c_op * (1.0 + _SLACK))
