import numpy as np
import pytest

from manipkit.errors import (
    DegenerateRectError,
    EmptyError,
    EmptyReferenceError,
    EmptyTraceError,
    LengthMismatchError,
    ShapeError,
)
from manipkit.metrics import (
    OlsConfig,
    acc_at_iou,
    accuracy,
    bleu_avg,
    canonical_label,
    dtw,
    iou,
    ols,
    ols_table,
)


def _ols_oracle(pairs, tau, theta, per_dim_all_pass):
    """Open-loop score via plain nested loops, no numpy."""
    passes = 0
    for pred, truth in pairs:
        rows = len(pred)
        dims = len(pred[0])
        if per_dim_all_pass:
            good_steps = 0
            for t in range(rows):
                if all(abs(pred[t][d] - truth[t][d]) < tau for d in range(dims)):
                    good_steps += 1
            fraction = good_steps / rows
        else:
            good = sum(
                1
                for t in range(rows)
                for d in range(dims)
                if abs(pred[t][d] - truth[t][d]) < tau
            )
            fraction = good / (rows * dims)
        if fraction >= theta:
            passes += 1
    return passes / len(pairs)


def _random_pairs(rng, n_pairs, max_t=8, max_d=7):
    pairs = []
    for _ in range(n_pairs):
        t = int(rng.integers(1, max_t + 1))
        d = int(rng.integers(1, max_d + 1))
        truth = rng.uniform(-1, 1, size=(t, d))
        pred = truth + rng.normal(0.0, 0.05, size=(t, d))
        pairs.append((pred.tolist(), truth.tolist()))
    return pairs


def test_ols_agrees_with_brute_force_oracle():
    rng = np.random.default_rng(42)
    for _ in range(200):
        pairs = _random_pairs(rng, int(rng.integers(1, 11)))
        tau = float(rng.choice([0.01, 0.03, 0.05, 0.1, 0.2]))
        theta = float(rng.choice([0.25, 0.5, 0.75, 1.0]))
        per_dim = bool(rng.integers(0, 2))
        cfg = OlsConfig(tau=tau, theta=theta, per_dim_all_pass=per_dim)
        assert ols(pairs, cfg) == _ols_oracle(pairs, tau, theta, per_dim)


def test_ols_monotone_in_tau_and_theta():
    rng = np.random.default_rng(7)
    taus = (0.01, 0.03, 0.05, 0.1, 0.3)
    thetas = (0.2, 0.5, 0.8, 1.0)
    for _ in range(50):
        pairs = _random_pairs(rng, 6)
        by_tau = [ols(pairs, OlsConfig(tau=t, theta=0.8)) for t in taus]
        assert all(a <= b for a, b in zip(by_tau, by_tau[1:]))
        by_theta = [ols(pairs, OlsConfig(tau=0.05, theta=th)) for th in thetas]
        assert all(a >= b for a, b in zip(by_theta, by_theta[1:]))


def test_ols_accepts_flat_chunks_as_single_dim():
    pairs = [([0.0, 0.1], [0.0, 0.0])]
    assert ols(pairs, OlsConfig(tau=0.05)) == 0.0
    assert ols(pairs, OlsConfig(tau=0.05, theta=0.5)) == 1.0


def test_ols_shape_errors():
    with pytest.raises(EmptyError):
        ols([], OlsConfig(tau=0.1))
    with pytest.raises(ShapeError):
        ols([([[0.0, 0.0]], [[0.0]])], OlsConfig(tau=0.1))
    with pytest.raises(ShapeError):
        ols([([], [])], OlsConfig(tau=0.1))


def test_ols_table_has_fixed_thresholds_and_mean():
    rng = np.random.default_rng(3)
    pairs = _random_pairs(rng, 8)
    table = ols_table(pairs, theta=0.9)
    assert set(table) == {"0.1", "0.05", "0.03", "0.01", "mean"}
    scores = [table["0.1"], table["0.05"], table["0.03"], table["0.01"]]
    assert table["mean"] == pytest.approx(sum(scores) / 4)
    for tau in (0.1, 0.05, 0.03, 0.01):
        assert table[str(tau)] == ols(pairs, OlsConfig(tau=tau, theta=0.9))


def _all_alignment_paths(n, m):
    """Every monotone path of (i, j) cells from (0,0) to (n-1,m-1)."""

    def go(i, j):
        if i == n - 1 and j == m - 1:
            yield ((i, j),)
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            ni, nj = i + di, j + dj
            if ni < n and nj < m:
                for rest in go(ni, nj):
                    yield ((i, j),) + rest

    return go(0, 0)


def _dtw_oracle(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    best = np.inf
    for path in _all_alignment_paths(len(a), len(b)):
        total = sum(float(np.linalg.norm(a[i] - b[j])) for i, j in path)
        best = min(best, total)
    return best


def test_dtw_matches_exhaustive_alignment_search():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        a = rng.uniform(0, 100, size=(n, 2))
        b = rng.uniform(0, 100, size=(m, 2))
        assert dtw(a, b) == pytest.approx(_dtw_oracle(a, b), rel=1e-12, abs=1e-9)


def test_dtw_self_distance_is_zero():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = rng.uniform(0, 100, size=(int(rng.integers(1, 20)), 2))
        assert dtw(a, a) == 0.0


def test_dtw_is_symmetric():
    rng = np.random.default_rng(9)
    a = rng.uniform(0, 100, size=(7, 2))
    b = rng.uniform(0, 100, size=(4, 2))
    assert dtw(a, b) == pytest.approx(dtw(b, a))


def test_dtw_rejects_empty_traces():
    with pytest.raises(EmptyTraceError):
        dtw([], [(0.0, 0.0)])
    with pytest.raises(EmptyTraceError):
        dtw([(0.0, 0.0)], [])


def test_iou_known_quarter_overlap():
    # 5x5 intersection over 100 + 100 - 25 union
    assert abs(iou((0, 0, 10, 10), (5, 5, 15, 15)) - 25 / 175) <= 1e-12


def test_iou_cases():
    assert iou((0, 0, 10, 10), (0, 0, 10, 10)) == 1.0
    assert iou((0, 0, 1, 1), (5, 5, 6, 6)) == 0.0
    assert iou((0, 0, 4, 4), (0, 0, 4, 4)) == 1.0
    # degenerate rectangles compare by identity
    assert iou((3, 3, 3, 3), (3, 3, 3, 3)) == 1.0
    assert iou((3, 3, 3, 3), (4, 4, 4, 4)) == 0.0
    with pytest.raises(DegenerateRectError):
        iou((5, 0, 0, 5), (0, 0, 1, 1))
    with pytest.raises(DegenerateRectError):
        iou((0, 0, 1, 1), (0, 5, 1, 0))


def test_acc_at_iou_threshold_is_strict():
    # iou((0,0,10,1), (0,0,1,1)) is exactly 0.1
    pred = [(0.0, 0.0, 10.0, 1.0), (0.0, 0.0, 2.0, 2.0)]
    truth = [(0.0, 0.0, 1.0, 1.0), (0.0, 0.0, 2.0, 2.0)]
    assert iou(pred[0], truth[0]) == pytest.approx(0.1)
    assert acc_at_iou(pred, truth, threshold=0.1) == 0.5
    with pytest.raises(LengthMismatchError):
        acc_at_iou(pred, truth[:1])
    with pytest.raises(EmptyError):
        acc_at_iou([], [])


def test_bleu_self_score_is_100():
    for text in ("pick up the red cup", "go", "Place the bowl on the left plate."):
        assert bleu_avg(text, [text]) == pytest.approx(100.0)


def test_bleu_ignores_case_and_punctuation():
    assert bleu_avg("Pick up the cup.", ["pick up the cup"]) == pytest.approx(100.0)


def test_bleu_brevity_penalty():
    # candidate matches perfectly but covers half the reference
    score = bleu_avg("pick up", ["pick up the cup"])
    assert score == pytest.approx(100.0 * np.exp(1.0 - 4.0 / 2.0))


def test_bleu_penalizes_repetition_via_clipping():
    assert bleu_avg("the the the", ["the cat"]) < bleu_avg("the cat", ["the cat"])


def test_bleu_edge_inputs():
    assert bleu_avg("", ["anything"]) == 0.0
    with pytest.raises(EmptyReferenceError):
        bleu_avg("something", [])
    # a bare string is one reference, not a char list
    assert bleu_avg("pick up the cup", "pick up the cup") == pytest.approx(100.0)


def test_canonical_label_extracts_choice_letters():
    assert canonical_label("A. pick up the cup") == "a"
    assert canonical_label("(b) move left") == "b"
    assert canonical_label(" C: stop") == "c"
    assert canonical_label("D") == "d"
    assert canonical_label("b)") == "b"
    assert canonical_label("  Pour the tea ") == "pour the tea"
    assert canonical_label("Pour The Tea") == "pour the tea"


def test_accuracy_canonicalizes_before_matching():
    preds = ["A. pick up the cup", "b)", "Pour the tea", "left"]
    truths = ["a", "B", "pour the tea", "right"]
    assert accuracy(preds, truths) == 0.75
    with pytest.raises(LengthMismatchError):
        accuracy(["a"], [])
    with pytest.raises(EmptyError):
        accuracy([], [])
