"""Linear output layer trained by Moore-Penrose pseudoinverse (optionally ridge)."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np


@dataclass
class ReadoutWeights:
    values: np.ndarray = dc_field(repr=False)
    ridge: float = 0.0

    @property
    def n_classes(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass
class TaskReport:
    word_success_rate: float
    wsr_std: float = 0.0
    rms_deviation: float = float("nan")
    confusion: np.ndarray | None = dc_field(default=None, repr=False)
    errors: int | None = None
    detail: list = dc_field(default_factory=list, repr=False)


def one_hot_targets(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError("label out of range")
    y = np.zeros((n_classes, labels.size))
    y[labels, np.arange(labels.size)] = 1.0
    return y


def pinv_tolerance(s: np.ndarray, shape) -> float:
    return np.finfo(float).eps * max(shape) * (s[0] if s.size else 0.0)


def compress_columns(S, Y) -> tuple[np.ndarray, np.ndarray]:
    """Reduce ``(S, Y)`` to ``(Sc, Yc)`` with at most ``rows(S)`` columns.

    ``S^T = Q R`` gives ``Sc = R^T`` and ``Yc = Y Q``. Since ``Q`` has
    orthonormal columns, ``Sc`` has the singular values of ``S`` and
    ``Yc Sc^+ = Y S^+``. Column blocks compressed separately can be stacked
    side by side and compressed again.
    """
    S = np.asarray(S, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] != S.shape[1]:
        raise ValueError(f"S has {S.shape[1]} columns but Y has {Y.shape[1]}")
    q, r = np.linalg.qr(S.T)
    return r.T, Y @ q


def train_weights(S, Y, ridge: float = 0.0, tol_shape=None) -> ReadoutWeights:
    """Least-squares weights ``W`` minimising ``||W S - Y||_F (+ ridge ||W||_F^2)``.

    With ``ridge == 0`` this is ``W = Y S^+``, computed from a thin SVD of ``S``
    with singular values below ``eps * max(shape) * s_max`` discarded, which
    makes ``W`` the minimum-norm minimiser when ``S`` is rank-deficient.
    ``shape`` is ``S.shape`` unless ``tol_shape`` gives the shape of the
    uncompressed matrix.
    """
    S = np.asarray(S, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if S.ndim != 2 or S.shape[1] < 1:
        raise ValueError("S must be a 2-D matrix with at least one column")
    if Y.shape[1] != S.shape[1]:
        raise ValueError(f"S has {S.shape[1]} columns but Y has {Y.shape[1]}")
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(Y))):
        raise ValueError("S and Y must be finite")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")

    if ridge > 0:
        gram = S @ S.T + ridge * np.eye(S.shape[0])
        W = np.linalg.solve(gram, S @ Y.T).T
        return ReadoutWeights(W, ridge)

    U, s, Vt = np.linalg.svd(S, full_matrices=False)
    keep = s > pinv_tolerance(s, S.shape if tol_shape is None else tol_shape)
    W = ((Y @ Vt[keep].T) / s[keep]) @ U[:, keep].T
    return ReadoutWeights(W, 0.0)


def reconstruct_outputs(W: ReadoutWeights, S) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.shape[0] != W.n_features:
        raise ValueError(f"weights expect {W.n_features} state rows, got {S.shape[0]}")
    return W.values @ S


def classify_word(Y) -> int:
    """Argmax of the per-class mean over an utterance's columns; ties go to the lowest class."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] == 0:
        raise ValueError("need at least one output column")
    return int(np.argmax(Y.mean(axis=1)))


def rms_deviation(Y, Y_target) -> float:
    Y = np.asarray(Y, dtype=float)
    Y_target = np.asarray(Y_target, dtype=float)
    if Y.shape != Y_target.shape:
        raise ValueError(f"shape mismatch {Y.shape} vs {Y_target.shape}")
    return float(np.sqrt(np.mean((Y - Y_target) ** 2)))
