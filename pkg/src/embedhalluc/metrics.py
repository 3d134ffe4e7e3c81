"""Classification metrics computed from scratch."""

import logging

import numpy as np

from embedhalluc.errors import DataError, DimensionError

logger = logging.getLogger(__name__)


def _check(preds, labels):
    preds = np.asarray(preds, dtype=np.intp)
    labels = np.asarray(labels, dtype=np.intp)
    if preds.shape != labels.shape:
        raise DimensionError(
            f"preds shape {preds.shape} vs labels shape {labels.shape}"
        )
    if preds.size == 0:
        raise DataError("cannot score an empty prediction list")
    return preds, labels


def confusion_matrix(preds, labels, num_classes=None):
    preds, labels = _check(preds, labels)
    if num_classes is None:
        num_classes = int(max(preds.max(), labels.max())) + 1
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (labels, preds), 1)
    return cm


def accuracy(preds, labels):
    preds, labels = _check(preds, labels)
    return float((preds == labels).mean())


def matthews_corr(preds, labels):
    """Multiclass Matthews correlation; degenerate marginals give 0."""
    cm = confusion_matrix(preds, labels)
    n = cm.sum()
    correct = np.trace(cm)
    pred_counts = cm.sum(axis=0)
    true_counts = cm.sum(axis=1)
    numerator = correct * n - float(pred_counts @ true_counts)
    denom_pred = n * n - float(pred_counts @ pred_counts)
    denom_true = n * n - float(true_counts @ true_counts)
    if denom_pred <= 0 or denom_true <= 0:
        return 0.0
    return float(numerator / np.sqrt(denom_pred * denom_true))


def f1_score(preds, labels, positive=1):
    """Binary F1 for the positive class; 0 when precision+recall is 0."""
    preds, labels = _check(preds, labels)
    tp = int(np.sum((preds == positive) & (labels == positive)))
    fp = int(np.sum((preds == positive) & (labels != positive)))
    fn = int(np.sum((preds != positive) & (labels == positive)))
    if tp + fp == 0 and tp + fn == 0:
        logger.warning("f1_score: no predicted and no actual positives")
        return 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return float(2.0 * precision * recall / (precision + recall))


METRIC_FUNCS = {
    "accuracy": accuracy,
    "matthews": matthews_corr,
    "f1": f1_score,
}


def score(metric, preds, labels):
    if metric not in METRIC_FUNCS:
        raise DataError(f"unknown metric {metric!r}")
    return METRIC_FUNCS[metric](preds, labels)
