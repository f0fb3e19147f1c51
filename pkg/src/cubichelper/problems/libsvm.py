"""Dense loader for LibSVM text files (``label idx:val idx:val ...``)."""

import logging
import warnings

import numpy as np

from .base import Dataset

logger = logging.getLogger(__name__)


class LibSVMParseError(ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class LabelMappingWarning(UserWarning):
    pass


def parse_libsvm(stream, n_features=None, binary=True):
    """Parse LibSVM lines from an iterable of strings into a dense ``Dataset``.

    Indices are 1-based and must be strictly ascending within a line.  With
    ``binary=True`` labels are mapped onto {-1, +1}: a {0, 1} file is
    remapped with a ``LabelMappingWarning``, any other pair is mapped by
    order (smaller value -> -1).
    """
    labels = []
    rows = []
    max_index = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibSVMParseError(lineno, f"bad label {tokens[0]!r}") from None
        entries = []
        last = 0
        for tok in tokens[1:]:
            idx_text, sep, val_text = tok.partition(":")
            if not sep:
                raise LibSVMParseError(lineno, f"malformed token {tok!r}")
            try:
                idx = int(idx_text)
                val = float(val_text)
            except ValueError:
                raise LibSVMParseError(lineno, f"malformed token {tok!r}") from None
            if idx < 1:
                raise LibSVMParseError(lineno, f"index {idx} < 1")
            if idx <= last:
                raise LibSVMParseError(lineno, f"index {idx} not ascending after {last}")
            last = idx
            entries.append((idx - 1, val))
        max_index = max(max_index, last)
        labels.append(label)
        rows.append(entries)

    if not rows:
        raise ValueError("no data lines")
    d = max_index if n_features is None else int(n_features)
    if max_index > d:
        raise ValueError(f"feature index {max_index} exceeds n_features={d}")
    X = np.zeros((len(rows), max(d, 1)))
    for i, entries in enumerate(rows):
        for j, val in entries:
            X[i, j] = val
    y = np.asarray(labels)
    if binary:
        y = _to_signed(y)
    return Dataset(X, y)


def _to_signed(y):
    values = np.unique(y)
    if np.all(np.isin(values, (-1.0, 1.0))):
        return y
    if len(values) > 2:
        raise ValueError(f"expected two classes, found labels {values}")
    if np.all(np.isin(values, (0.0, 1.0))):
        warnings.warn("labels given as 0/1, mapped to -1/+1", LabelMappingWarning, stacklevel=3)
        return np.where(y > 0, 1.0, -1.0)
    logger.warning("labels %s mapped to -1/+1 by order", values)
    return np.where(y == values[-1], 1.0, -1.0)


def load_libsvm(path, n_features=None):
    with open(path) as fh:
        return parse_libsvm(fh, n_features=n_features)
