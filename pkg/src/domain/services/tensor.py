"""
Mode-wise application of Kronecker-structured operators to 3-tensors.
"""
from typing import Callable, Sequence, Union

import numpy as np

ModeOperator = Union[None, np.ndarray, Callable[[np.ndarray], np.ndarray], object]


def kron_apply(ops: Sequence[ModeOperator], tensor: np.ndarray) -> np.ndarray:
    """
    Apply ops[0] ⊗ ops[1] ⊗ ops[2] to a C-ordered 3-tensor.

    Each op is None (identity), a matrix (dense or scipy.sparse) acting on the
    leading axis of a 2D array, or a callable doing the same.
    """
    out = np.asarray(tensor, dtype=float)
    for axis, op in enumerate(ops):
        if op is None:
            continue
        moved = np.moveaxis(out, axis, 0)
        lead, rest = moved.shape[0], moved.shape[1:]
        flat = moved.reshape(lead, -1)
        if callable(op) and not hasattr(op, "shape"):
            result = op(flat)
        else:
            result = op @ flat
        result = np.asarray(result)
        out = np.moveaxis(result.reshape((result.shape[0],) + rest), 0, axis)
    return np.ascontiguousarray(out)
