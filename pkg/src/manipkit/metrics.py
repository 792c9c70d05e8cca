"""Scoring: Open-Loop Score, DTW, IoU / ACC@IoU, averaged BLEU, accuracy."""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRectError,
    EmptyError,
    EmptyReferenceError,
    EmptyTraceError,
    LengthMismatchError,
    ShapeError,
)

OLS_THRESHOLDS = (0.1, 0.05, 0.03, 0.01)


@dataclass(frozen=True)
class OlsConfig:
    """tau: per-entry error threshold; theta: chunk-level tolerance in [0,1].

    With per_dim_all_pass=False (default) the pass fraction of a chunk averages
    the indicator over all T*D entries; with True a step counts only if every
    action dimension passes, and the fraction averages over the T steps.
    """

    tau: float
    theta: float = 1.0
    per_dim_all_pass: bool = False


def _as_chunk(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeError(f"action chunk must be a non-empty T x D array, got shape {arr.shape}")
    return arr


def ols(pairs, config: OlsConfig) -> float:
    """Fraction of chunks whose under-threshold entry fraction reaches theta.

    Args:
        pairs: list of (predicted, truth) T x D action chunks.
        config: thresholds; see OlsConfig.

    Raises:
        EmptyError: no pairs.
        ShapeError: a pair's chunks disagree in shape.
    """
    if not pairs:
        raise EmptyError("no chunk pairs")
    passes = 0
    for i, (pred, truth) in enumerate(pairs):
        p, t = _as_chunk(pred), _as_chunk(truth)
        if p.shape != t.shape:
            raise ShapeError(f"pair {i}: prediction {p.shape} vs truth {t.shape}")
        ok = np.abs(p - t) < config.tau
        fraction = float(ok.all(axis=1).mean()) if config.per_dim_all_pass else float(ok.mean())
        if fraction >= config.theta:
            passes += 1
    return passes / len(pairs)


def ols_table(pairs, theta: float = 1.0, per_dim_all_pass: bool = False) -> dict[str, float]:
    """OLS at tau in {0.1, 0.05, 0.03, 0.01} plus their arithmetic mean."""
    table = {
        str(tau): ols(pairs, OlsConfig(tau=tau, theta=theta, per_dim_all_pass=per_dim_all_pass))
        for tau in OLS_THRESHOLDS
    }
    table["mean"] = sum(table.values()) / len(OLS_THRESHOLDS)
    return table


def dtw(a, b) -> float:
    """Classic dynamic-time-warping cost between two pixel traces.

    Euclidean point cost, no window, symmetric match/insert/delete steps.

    Raises:
        EmptyTraceError: either trace has no points.
    """
    pa, pb = np.atleast_2d(np.asarray(a, dtype=float)), np.atleast_2d(np.asarray(b, dtype=float))
    if pa.size == 0 or pb.size == 0:
        raise EmptyTraceError("empty trace")
    n, m = len(pa), len(pb)
    cost = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=2)
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            acc[i, j] = cost[i - 1, j - 1] + min(acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1])
    return float(acc[n, m])


def iou(r1, r2) -> float:
    """Intersection-over-union of two (x1,y1,x2,y2) rectangles.

    Raises:
        DegenerateRectError: inverted rectangle.
    """
    for r in (r1, r2):
        if r[2] < r[0] or r[3] < r[1]:
            raise DegenerateRectError(f"inverted rectangle {tuple(r)}")
    ix = max(0.0, min(r1[2], r2[2]) - max(r1[0], r2[0]))
    iy = max(0.0, min(r1[3], r2[3]) - max(r1[1], r2[1]))
    inter = ix * iy
    union = (r1[2] - r1[0]) * (r1[3] - r1[1]) + (r2[2] - r2[0]) * (r2[3] - r2[1]) - inter
    if union <= 0.0:  # both rectangles degenerate to points/lines
        return 1.0 if tuple(r1) == tuple(r2) else 0.0
    return inter / union


def acc_at_iou(preds, truths, threshold: float = 0.1) -> float:
    """Fraction of prediction boxes with IoU strictly above threshold."""
    if len(preds) != len(truths):
        raise LengthMismatchError(f"{len(preds)} predictions vs {len(truths)} truths")
    if not preds:
        raise EmptyError("no boxes")
    return sum(1 for p, t in zip(preds, truths) if iou(p, t) > threshold) / len(preds)


_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def _tokens(text: str) -> list[str]:
    return text.lower().translate(_PUNCT_TABLE).split()


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_avg(candidate: str, references) -> float:
    """Mean of BLEU-1..4 on a 0-100 scale.

    Each n-gram precision is smoothed add-one (numerator and denominator);
    matches are clipped against the best reference; the standard brevity
    penalty exp(1 - r/c) applies when the candidate is shorter than the
    closest reference.

    Raises:
        EmptyReferenceError: no references given.
    """
    refs = [r for r in references] if not isinstance(references, str) else [references]
    if not refs:
        raise EmptyReferenceError("no references")
    cand = _tokens(candidate)
    ref_tokens = [_tokens(r) for r in refs]
    c = len(cand)
    if c == 0:
        return 0.0
    r = min((len(t) for t in ref_tokens), key=lambda rl: (abs(rl - c), rl))
    bp = 1.0 if c >= r else float(np.exp(1.0 - r / c))

    log_precisions = []
    for n in range(1, 5):
        guess = _ngrams(cand, n)
        total = sum(guess.values())
        matched = 0
        for gram, count in guess.items():
            best = max(_ngrams(t, n).get(gram, 0) for t in ref_tokens)
            matched += min(count, best)
        log_precisions.append(np.log((matched + 1) / (total + 1)))
    bleus = [bp * float(np.exp(np.mean(log_precisions[:k]))) for k in range(1, 5)]
    return 100.0 * sum(bleus) / 4.0


_CHOICE_RE = re.compile(r"^\s*\(?([A-Za-z])[\.\):]\s*")


def canonical_label(text: str) -> str:
    """Trim, case-fold, and extract a leading choice letter when present.

    'A. pick up the cup', '(a)', and 'A' all canonicalize to 'a'; anything
    else is compared as stripped, case-folded text.
    """
    stripped = text.strip()
    if len(stripped) == 1 and stripped.isalpha():
        return stripped.casefold()
    m = _CHOICE_RE.match(stripped)
    if m:
        return m.group(1).casefold()
    return stripped.casefold()


def accuracy(preds, truths) -> float:
    """Exact-match fraction after canonicalization.

    Raises:
        LengthMismatchError: unequal list lengths.
    """
    if len(preds) != len(truths):
        raise LengthMismatchError(f"{len(preds)} predictions vs {len(truths)} truths")
    if not preds:
        raise EmptyError("no labels")
    return sum(
        1 for p, t in zip(preds, truths) if canonical_label(p) == canonical_label(t)
    ) / len(preds)
