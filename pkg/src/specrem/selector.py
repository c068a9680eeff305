"""Per-frame choice between the RGB and HSV detectors.

A Gaussian-kernel soft-margin SVM classifies twelve color statistics of a
frame (mean and std of R, G, B, H, S, V). Training labels come from which
detector scores the higher Dice against ground truth on that frame.
"""
import itertools
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .detect_hsv import detect_hsv
from .detect_rgb import detect_rgb
from .errors import ConvergenceError, DataError, TrainingError, UsageError
from .imagecore import ColorSpace, require_space, rgb_to_hsv
from .metrics import dice

N_FEATURES = 12
FEATURE_NAMES = (
    "mean_r", "std_r", "mean_g", "std_g", "mean_b", "std_b",
    "mean_h", "std_h", "mean_s", "std_s", "mean_v", "std_v",
)
GRID_C = (0.1, 1.0, 10.0)
GRID_GAMMA = (1.0 / 48, 1.0 / 12, 1.0 / 3)
MAX_PAIR_UPDATES = 1_000_000
SV_EPS = 1e-12


class Label(IntEnum):
    RGB = 1
    HSV = -1


@dataclass
class TrainingExample:
    features: np.ndarray
    label: Label
    dice_rgb: float = math.nan
    dice_hsv: float = math.nan


def extract_features(img):
    """Mean and population std of each RGB and HSV plane, interleaved."""
    require_space(img, ColorSpace.RGB)
    planes = np.concatenate([img.data, rgb_to_hsv(img).data], axis=2).reshape(-1, 6)
    out = np.empty(N_FEATURES)
    out[0::2] = planes.mean(axis=0)
    out[1::2] = planes.std(axis=0)
    return out


@dataclass(frozen=True)
class FeatureNormalizer:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, features):
        features = np.asarray(features, dtype=np.float64)
        safe = np.where(self.std > 0, self.std, 1.0)
        return np.where(self.std > 0, (features - self.mean) / safe, 0.0)


def fit_normalizer(features):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or len(features) == 0:
        raise UsageError("cannot fit a normalizer on an empty training set")
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    # columns that are constant up to rounding must map to exactly zero
    std[np.ptp(features, axis=0) == 0] = 0.0
    return FeatureNormalizer(mean, std)


def apply_normalizer(normalizer, features):
    return normalizer.apply(features)


def gaussian_kernel(a, b, gamma):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    return np.exp(-gamma * cdist(a, b, "sqeuclidean"))


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    coefficients: np.ndarray
    bias: float
    gamma: float
    c: float
    normalizer: FeatureNormalizer

    def decision_function(self, features):
        """Decision values for raw (unnormalized) feature rows."""
        z = self.normalizer.apply(np.atleast_2d(features))
        return gaussian_kernel(z, self.support_vectors, self.gamma) @ self.coefficients + self.bias


def svm_predict(model, features):
    value = float(model.decision_function(features)[0])
    return (Label.RGB if value > 0 else Label.HSV), value


@dataclass
class DualSolution:
    alpha: np.ndarray
    bias: float
    gap: float
    iterations: int
    gradient: np.ndarray = field(repr=False)


def solve_dual(kernel, y, c, tol=1e-3, max_iter=MAX_PAIR_UPDATES):
    """Soft-margin SVM dual by SMO with maximal-violating-pair selection.

    Minimizes ``0.5 a'Qa - sum(a)`` with ``Q = (y y') * K``, ``0 <= a <= c``
    and ``y'a = 0``. Stops when the violating-pair gap drops below ``tol``,
    which puts every example within ``tol`` of its margin condition.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    q_diag = np.diag(kernel).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    gap = math.inf
    pos, neg = y > 0, y < 0
    iterations = 0
    while True:
        below, above = alpha < c, alpha > 0
        up = (below & pos) | (above & neg)
        low = (below & neg) | (above & pos)
        score = -y * grad
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]
        if gap < tol:
            break
        if iterations >= max_iter:
            raise ConvergenceError(
                f"SMO did not converge after {max_iter} pair updates (gap {gap:.3g})", gap
            )
        iterations += 1

        k_i, k_j = kernel[i], kernel[j]
        q_ij = y[i] * y[j] * k_i[j]
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(q_diag[i] + q_diag[j] + 2.0 * q_ij, 1e-12)
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            a_i, a_j = old_i + delta, old_j + delta
            if diff > 0:
                if a_j < 0:
                    a_j, a_i = 0.0, diff
            elif a_i < 0:
                a_i, a_j = 0.0, -diff
            if diff > 0:
                if a_i > c:
                    a_i, a_j = c, c - diff
            elif a_j > c:
                a_j, a_i = c, c + diff
        else:
            quad = max(q_diag[i] + q_diag[j] - 2.0 * q_ij, 1e-12)
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            a_i, a_j = old_i - delta, old_j + delta
            if total > c:
                if a_i > c:
                    a_i, a_j = c, total - c
            elif a_j < 0:
                a_j, a_i = 0.0, total
            if total > c:
                if a_j > c:
                    a_j, a_i = c, total - c
            elif a_i < 0:
                a_i, a_j = 0.0, total

        alpha[i], alpha[j] = a_i, a_j
        grad += y * (y[i] * k_i * (a_i - old_i) + y[j] * k_j * (a_j - old_j))

    score = -y * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(score[free].mean())
    else:
        up = ((alpha < c) & pos) | ((alpha > 0) & neg)
        low = ((alpha < c) & neg) | ((alpha > 0) & pos)
        bias = 0.5 * (score[up].max() + score[low].min())
    return DualSolution(alpha, bias, float(gap), iterations, grad)


def _as_arrays(examples):
    if not examples:
        raise TrainingError("no training examples")
    x = np.array([np.asarray(ex.features, dtype=np.float64) for ex in examples])
    y = np.array([int(ex.label) for ex in examples], dtype=np.float64)
    return x, y


def svm_train(examples, c=1.0, gamma=1.0 / N_FEATURES, tol=1e-3, seed=0):
    """Fit the feature normalizer and a Gaussian-kernel SVM.

    ``seed`` fixes the scan order the solver uses to break ties between
    equally violating examples.
    """
    if not (c > 0 and gamma > 0 and tol > 0):
        raise UsageError("c, gamma and tol must all be positive")
    x, y = _as_arrays(examples)
    if np.all(y > 0) or np.all(y < 0):
        raise TrainingError("training set holds a single class")
    normalizer = fit_normalizer(x)
    z = normalizer.apply(x)

    perm = np.random.default_rng(seed).permutation(len(y))
    sol = solve_dual(gaussian_kernel(z[perm], z[perm], gamma), y[perm], c, tol)
    alpha = np.empty_like(sol.alpha)
    alpha[perm] = sol.alpha

    keep = np.abs(alpha) > SV_EPS
    return SvmModel(
        support_vectors=z[keep],
        coefficients=alpha[keep] * y[keep],
        bias=sol.bias,
        gamma=float(gamma),
        c=float(c),
        normalizer=normalizer,
    )


def label_examples(dataset, rgb_params=None, hsv_params=None):
    """Label each (image, gt) pair by the detector with the higher Dice; ties go to HSV."""
    if not dataset:
        raise UsageError("empty dataset")
    examples = []
    for img, gt in dataset:
        gt = np.asarray(gt, dtype=bool)
        if gt.shape != img.shape:
            raise DataError(f"ground truth {gt.shape} does not match frame {img.shape}")
        d_rgb = dice(detect_rgb(img, rgb_params), gt)
        d_hsv = dice(detect_hsv(img, hsv_params), gt)
        label = Label.RGB if d_rgb > d_hsv else Label.HSV
        examples.append(TrainingExample(extract_features(img), label, d_rgb, d_hsv))
    return examples


def loo_score(examples, c, gamma, tol=1e-3, seed=0):
    """Mean Dice of the detector picked for each held-out frame."""
    total = 0.0
    for held in range(len(examples)):
        rest = examples[:held] + examples[held + 1:]
        labels = {ex.label for ex in rest}
        if len(labels) == 1:
            choice = labels.pop()
        else:
            choice, _ = svm_predict(svm_train(rest, c, gamma, tol, seed), examples[held].features)
        ex = examples[held]
        total += ex.dice_rgb if choice is Label.RGB else ex.dice_hsv
    return total / len(examples)


def grid_search(examples, tol=1e-3, seed=0):
    """Pick (c, gamma) from the fixed grid by leave-one-out Dice; earlier cells win ties."""
    if any(math.isnan(ex.dice_rgb) or math.isnan(ex.dice_hsv) for ex in examples):
        raise UsageError("grid search needs examples produced by label_examples")
    best = None
    for c, gamma in itertools.product(GRID_C, GRID_GAMMA):
        score = loo_score(examples, c, gamma, tol, seed)
        if best is None or score > best[0]:
            best = (score, c, gamma)
    return best[1], best[2], best[0]


# model file ---------------------------------------------------------------

MAGIC = "svmmodel v1"


def _fmt(value):
    return format(float(value), ".17g")


def save_model(model, path):
    lines = [
        MAGIC,
        f"gamma {_fmt(model.gamma)}",
        f"c {_fmt(model.c)}",
        f"bias {_fmt(model.bias)}",
        "norm " + " ".join(_fmt(v) for v in np.concatenate([model.normalizer.mean, model.normalizer.std])),
        f"nsv {len(model.coefficients)}",
    ]
    for coef, sv in zip(model.coefficients, model.support_vectors):
        lines.append(" ".join(_fmt(v) for v in [coef, *sv]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _floats(tokens, count, lineno):
    if len(tokens) != count:
        raise DataError(f"line {lineno}: expected {count} values, found {len(tokens)}")
    try:
        values = [float(t) for t in tokens]
    except ValueError as exc:
        raise DataError(f"line {lineno}: {exc}") from None
    if not all(math.isfinite(v) for v in values):
        raise DataError(f"line {lineno}: non-finite value")
    return values


def load_model(path):
    lines = Path(path).read_text(encoding="ascii").splitlines()

    def line(lineno):
        if lineno > len(lines):
            raise DataError(f"line {lineno}: unexpected end of file")
        return lines[lineno - 1].split()

    if lines[:1] != [MAGIC]:
        raise DataError(f"line 1: expected header {MAGIC!r}")
    header = {}
    for lineno, (key, count) in enumerate(
        [("gamma", 1), ("c", 1), ("bias", 1), ("norm", 2 * N_FEATURES)], start=2
    ):
        tokens = line(lineno)
        if not tokens or tokens[0] != key:
            raise DataError(f"line {lineno}: expected {key!r}")
        header[key] = _floats(tokens[1:], count, lineno)
    tokens = line(6)
    if len(tokens) != 2 or tokens[0] != "nsv" or not tokens[1].isdigit():
        raise DataError("line 6: expected 'nsv <count>'")
    nsv = int(tokens[1])
    rows = [_floats(line(7 + k), N_FEATURES + 1, 7 + k) for k in range(nsv)]
    if len(lines) > 6 + nsv and any(s.strip() for s in lines[6 + nsv:]):
        raise DataError(f"line {7 + nsv}: trailing content after support vectors")

    gamma, c = header["gamma"][0], header["c"][0]
    if gamma <= 0 or c <= 0:
        raise DataError("gamma and c must be positive")
    norm = np.array(header["norm"])
    table = np.array(rows, dtype=np.float64).reshape(nsv, N_FEATURES + 1)
    return SvmModel(
        support_vectors=table[:, 1:],
        coefficients=table[:, 0],
        bias=header["bias"][0],
        gamma=gamma,
        c=c,
        normalizer=FeatureNormalizer(norm[:N_FEATURES], norm[N_FEATURES:]),
    )
