"""The QSVM workload: splits, feature selection, kernels, SVM, metrics.

The quantum kernel K(x, y) = |<phi(y)|phi(x)>|^2 is estimated per pair as
the all-zeros probability of the compute-uncompute circuit U†(y) U(x);
the training Gram matrix only needs the strict upper triangle (its
diagonal is 1 by construction).  The classifier itself is the classical
dual SVM, solved by sequential minimal optimization over the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .circuits import Circuit, build_zz_feature_map, concat, inverse
from .datasets import Dataset, load_dataset
from .errors import IncompleteResultsError, InvalidArgumentError, NumericError

__all__ = [
    "SplitSpec",
    "SplitData",
    "KernelMatrix",
    "SvmModel",
    "load_and_split",
    "select_features",
    "kernel_circuits",
    "assemble_kernel",
    "train_svm",
    "decision_values",
    "predict",
    "evaluate",
]


@dataclass(frozen=True)
class SplitSpec:
    """Sampling and split policy for the reference dataset."""

    sample_size: int = 100
    train_fraction: float = 0.7
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.sample_size < 2:
            raise InvalidArgumentError("sample_size must be >= 2")
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidArgumentError("train_fraction must be in (0, 1)")


@dataclass(frozen=True)
class SplitData:
    """Scaled features plus bookkeeping for one side of a split."""

    features: np.ndarray
    labels: np.ndarray
    indices: np.ndarray  # row indices into the source dataset


def _largest_remainder(targets: Sequence[float], total: int) -> list[int]:
    floors = [int(np.floor(t)) for t in targets]
    short = total - sum(floors)
    order = np.argsort([f - t for t, f in zip(targets, floors)])
    out = list(floors)
    for i in order[:short]:
        out[i] += 1
    return out


def load_and_split(path=None, spec: SplitSpec = SplitSpec(), dataset: Dataset | None = None):
    """Stratified sample + train/test split, min-max scaled on train stats.

    Returns ``(train, test)`` as :class:`SplitData`.  Stratification keeps
    the class ratio within one count at both stages; features are linearly
    mapped so the training column ranges become [0, 1].
    """
    ds = dataset if dataset is not None else load_dataset(path)
    if spec.sample_size > ds.num_rows:
        raise InvalidArgumentError(
            f"sample_size {spec.sample_size} exceeds dataset rows {ds.num_rows}"
        )
    rng = np.random.default_rng(spec.seed)
    classes = sorted(set(ds.labels.tolist()))
    if spec.stratified:
        fractions = [np.mean(ds.labels == c) * spec.sample_size for c in classes]
        take = _largest_remainder(fractions, spec.sample_size)
    else:
        take = None

    train_idx: list[int] = []
    test_idx: list[int] = []
    if spec.stratified:
        train_targets = [spec.train_fraction * t for t in take]
        n_train_total = int(round(spec.train_fraction * spec.sample_size))
        train_take = _largest_remainder(train_targets, n_train_total)
        for c, n_c, n_tr in zip(classes, take, train_take):
            pool = np.flatnonzero(ds.labels == c)
            chosen = rng.choice(pool, size=n_c, replace=False)
            chosen = rng.permutation(chosen)
            train_idx.extend(chosen[:n_tr].tolist())
            test_idx.extend(chosen[n_tr:].tolist())
    else:
        chosen = rng.choice(ds.num_rows, size=spec.sample_size, replace=False)
        chosen = rng.permutation(chosen)
        n_tr = int(round(spec.train_fraction * spec.sample_size))
        train_idx = chosen[:n_tr].tolist()
        test_idx = chosen[n_tr:].tolist()

    train_idx = sorted(train_idx)
    test_idx = sorted(test_idx)
    x_train = ds.features[train_idx]
    x_test = ds.features[test_idx]
    lo = x_train.min(axis=0)
    hi = x_train.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    scale = lambda x: np.where(hi > lo, (x - lo) / span, 0.0)
    return (
        SplitData(scale(x_train), ds.labels[train_idx], np.array(train_idx)),
        SplitData(scale(x_test), ds.labels[test_idx], np.array(test_idx)),
    )


def select_features(train: SplitData, k: int) -> list[int]:
    """Top-k feature columns by absolute point-biserial correlation.

    Ties break toward the lower column index; constant columns score 0.
    """
    n_feat = train.features.shape[1]
    if not 1 <= k <= n_feat:
        raise InvalidArgumentError(f"k must be in 1..{n_feat}")
    labels = train.labels.astype(float)
    scores = []
    for c in range(n_feat):
        col = train.features[:, c]
        if col.std() == 0 or labels.std() == 0:
            scores.append(0.0)
        else:
            scores.append(abs(float(np.corrcoef(col, labels)[0, 1])))
    order = sorted(range(n_feat), key=lambda c: (-scores[c], c))
    return order[:k]


def kernel_circuits(
    xs: np.ndarray, ys: np.ndarray | None = None, reps: int = 2
) -> list[tuple[tuple[int, int], Circuit]]:
    """Overlap circuits whose all-zeros probability is the kernel entry.

    With ``ys=None`` (the symmetric training case) only strict upper
    triangle pairs are emitted, n(n-1)/2 circuits; otherwise len(xs) *
    len(ys) circuits for the rectangular block K[i, j] = k(xs[i], ys[j]).
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n_dim = xs.shape[1]
    symmetric = ys is None
    ys_arr = xs if symmetric else np.atleast_2d(np.asarray(ys, dtype=float))
    if ys_arr.shape[1] != n_dim:
        raise InvalidArgumentError("xs and ys have different feature dimensions")
    maps_x = [build_zz_feature_map(n_dim, reps, x) for x in xs]
    maps_y = maps_x if symmetric else [build_zz_feature_map(n_dim, reps, y) for y in ys_arr]
    out = []
    for i in range(len(xs)):
        js = range(i + 1, len(xs)) if symmetric else range(len(ys_arr))
        for j in js:
            out.append(((i, j), concat(maps_x[i], inverse(maps_y[j]))))
    return out


@dataclass(frozen=True)
class KernelMatrix:
    """Kernel entries in [0, 1]; train kind is the symmetric Gram matrix."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if self.kind not in ("train", "test"):
            raise InvalidArgumentError("kind must be train or test")
        if self.kind == "train":
            if vals.shape[0] != vals.shape[1]:
                raise InvalidArgumentError("train kernel must be square")
        object.__setattr__(self, "values", vals)

    @property
    def shape(self):
        return self.values.shape


def assemble_kernel(
    results: Mapping[tuple[int, int], float],
    kind: str,
    n: int,
    m: int | None = None,
    psd_tolerance: float = 1e-8,
) -> KernelMatrix:
    """Collect per-pair all-zeros probabilities into a kernel matrix.

    Train kind fills the strict upper triangle, mirrors it, fixes the
    diagonal at 1, clips entries into [0, 1] and clip-repairs negative
    eigenvalues beyond ``psd_tolerance`` (finite-shot noise can push the
    Gram matrix slightly outside the PSD cone).
    """
    if kind == "train":
        k = np.eye(n)
        for i in range(n):
            for j in range(i + 1, n):
                if (i, j) not in results:
                    raise IncompleteResultsError(f"missing kernel entry for pair ({i}, {j})")
                v = float(np.clip(results[(i, j)], 0.0, 1.0))
                k[i, j] = k[j, i] = v
        eigvals = np.linalg.eigvalsh(k)
        if eigvals.min() < -psd_tolerance:
            w, v = np.linalg.eigh(k)
            k = (v * np.clip(w, 0.0, None)) @ v.T
            k = (k + k.T) / 2.0
        return KernelMatrix(k, "train")
    if kind == "test":
        if m is None:
            raise InvalidArgumentError("test kernel needs both dimensions (n rows, m columns)")
        k = np.zeros((n, m))
        for i in range(n):
            for j in range(m):
                if (i, j) not in results:
                    raise IncompleteResultsError(f"missing kernel entry for pair ({i}, {j})")
                k[i, j] = float(np.clip(results[(i, j)], 0.0, 1.0))
        return KernelMatrix(k, "test")
    raise InvalidArgumentError("kind must be train or test")


@dataclass(frozen=True)
class SvmModel:
    """Dual SVM: decision f(x) = sum_i alpha_i y_i K(x, x_i) + bias."""

    alpha: np.ndarray
    bias: float
    box_c: float
    labels: np.ndarray  # training labels in {-1, +1}
    support: np.ndarray  # indices with alpha > 0


def train_svm(
    kernel: KernelMatrix | np.ndarray,
    labels,
    box_c: float = 1.0,
    tol: float = 1e-6,
    max_passes: int = 200_000,
) -> SvmModel:
    """Solve the dual quadratic program by sequential minimal optimization.

    ``labels`` may be {0, 1} or {-1, +1}.  Uses maximal-violating-pair
    working-set selection; stops when the KKT gap drops below ``tol``.
    """
    k = kernel.values if isinstance(kernel, KernelMatrix) else np.asarray(kernel, dtype=float)
    y = np.asarray(labels, dtype=float).copy()
    uniq = set(np.unique(y).tolist())
    if uniq <= {0.0, 1.0}:
        y = 2.0 * y - 1.0
    elif not uniq <= {-1.0, 1.0}:
        raise InvalidArgumentError(f"labels must be binary, got values {sorted(uniq)}")
    n = len(y)
    if k.shape != (n, n):
        raise InvalidArgumentError("kernel and labels sizes disagree")
    if box_c <= 0:
        raise InvalidArgumentError("box parameter C must be positive")
    eigmin = float(np.linalg.eigvalsh(k).min())
    if eigmin < -1e-6:
        raise NumericError(f"training kernel is not PSD (min eigenvalue {eigmin:.2e})")

    q = (y[:, None] * y[None, :]) * k
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a^T Q a - 1^T a

    for _ in range(max_passes):
        yg = -y * grad
        up_mask = ((y > 0) & (alpha < box_c - 1e-12)) | ((y < 0) & (alpha > 1e-12))
        low_mask = ((y < 0) & (alpha < box_c - 1e-12)) | ((y > 0) & (alpha > 1e-12))
        if not up_mask.any() or not low_mask.any():
            break
        i = int(np.flatnonzero(up_mask)[np.argmax(yg[up_mask])])
        j = int(np.flatnonzero(low_mask)[np.argmin(yg[low_mask])])
        m_up, m_low = yg[i], yg[j]
        if m_up - m_low < tol:
            break
        quad = q[i, i] + q[j, j] - 2.0 * y[i] * y[j] * q[i, j]
        if quad <= 0:
            quad = 1e-12
        # solve the two-variable subproblem along the equality constraint
        step = y[i] * (m_up - m_low) / quad
        old_i, old_j = alpha[i], alpha[j]
        s = y[i] * y[j]
        alpha[i] = old_i + step
        alpha[j] = old_j - s * step
        # clip back into the box, preserving y_i a_i + y_j a_j
        if alpha[i] > box_c:
            alpha[i] = box_c
        elif alpha[i] < 0:
            alpha[i] = 0.0
        alpha[j] = old_j - s * (alpha[i] - old_i)
        if alpha[j] > box_c:
            alpha[j] = box_c
            alpha[i] = old_i - s * (alpha[j] - old_j)
        elif alpha[j] < 0:
            alpha[j] = 0.0
            alpha[i] = old_i - s * (alpha[j] - old_j)
        grad += q[:, i] * (alpha[i] - old_i) + q[:, j] * (alpha[j] - old_j)
    else:
        raise NumericError("SMO did not converge within the pass budget")

    yg = -y * grad
    free = (alpha > 1e-8) & (alpha < box_c - 1e-8)
    if free.any():
        bias = float(np.mean(yg[free]))
    else:
        up_mask = ((y > 0) & (alpha < box_c - 1e-12)) | ((y < 0) & (alpha > 1e-12))
        low_mask = ((y < 0) & (alpha < box_c - 1e-12)) | ((y > 0) & (alpha > 1e-12))
        hi = yg[up_mask].max() if up_mask.any() else 0.0
        lo = yg[low_mask].min() if low_mask.any() else 0.0
        bias = float((hi + lo) / 2.0)
    support = np.flatnonzero(alpha > 1e-8 * box_c)
    return SvmModel(alpha=alpha, bias=bias, box_c=box_c, labels=y, support=support)


def decision_values(model: SvmModel, kernel_rows: np.ndarray) -> np.ndarray:
    """f for each row of K(x_new, x_train)."""
    rows = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
    if rows.shape[1] != len(model.alpha):
        raise InvalidArgumentError("kernel rows do not match the training set size")
    return rows @ (model.alpha * model.labels) + model.bias


def predict(model: SvmModel, kernel_rows: np.ndarray) -> np.ndarray:
    """Predicted labels in {-1, +1}; f = 0 resolves to +1."""
    return np.where(decision_values(model, kernel_rows) >= 0.0, 1.0, -1.0)


def evaluate(model: SvmModel, k_test: KernelMatrix | np.ndarray, labels) -> tuple[float, float]:
    """(accuracy, macro F1) of the model on a test kernel block.

    Macro F1 averages the per-class F1 over both classes; a class with an
    undefined F1 (no true and no predicted members) contributes 0.
    """
    k = k_test.values if isinstance(k_test, KernelMatrix) else np.asarray(k_test, dtype=float)
    y = np.asarray(labels, dtype=float).copy()
    if set(np.unique(y).tolist()) <= {0.0, 1.0}:
        y = 2.0 * y - 1.0
    preds = predict(model, k)
    accuracy = float(np.mean(preds == y))
    f1s = []
    for cls in (-1.0, 1.0):
        tp = float(np.sum((preds == cls) & (y == cls)))
        fp = float(np.sum((preds == cls) & (y != cls)))
        fn = float(np.sum((preds != cls) & (y == cls)))
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1s.append(2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0)
    return accuracy, float(np.mean(f1s))
