import copy
import json
from pathlib import Path

import pytest

from manipkit.cli import main as cli_main
from manipkit.config import DEFAULTS
from manipkit.errors import ConfigError, DependencyError, IoError, TooFewEpisodesError
from manipkit.pipeline import (
    STAGE_ORDER,
    RunPlan,
    qc_sample,
    read_predictions,
    run,
    score_family,
    score_items,
    validate_plan,
)
from manipkit.synth import make_corpus, make_episode


@pytest.fixture(scope="module")
def corpus_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    make_corpus(root, n_episodes=6, seed=0)
    return root


def _tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def _full_plan(corpus_root, out, **kwargs):
    return RunPlan(
        stages=STAGE_ORDER, input_root=str(corpus_root), output_root=str(out), **kwargs
    )


def test_full_run_is_deterministic(corpus_root, tmp_path):
    first = tmp_path / "out1"
    second = tmp_path / "out2"
    run(_full_plan(corpus_root, first))
    run(_full_plan(corpus_root, second))
    a, b = _tree_bytes(first), _tree_bytes(second)
    assert list(a) == list(b)
    for name in a:
        assert a[name] == b[name], f"{name} differs between identical runs"


def test_rerun_in_place_changes_nothing(corpus_root, tmp_path):
    out = tmp_path / "out"
    run(_full_plan(corpus_root, out))
    before = _tree_bytes(out)
    run(_full_plan(corpus_root, out))
    assert _tree_bytes(out) == before


def test_report_records_every_stage(corpus_root, tmp_path):
    out = tmp_path / "out"
    report = run(_full_plan(corpus_root, out, seed=5))
    assert [s["name"] for s in report["stages"]] == list(STAGE_ORDER)
    for record in report["stages"]:
        assert record["failed"] == 0 and record["errors"] == {}
        assert record["ok"] > 0
    assert report["seed"] == 5
    assert len(report["config_sha256"]) == 64
    on_disk = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert on_disk == report
    assert (out / "calibration.json").is_file()
    assert (out / "vqa" / "items.jsonl").is_file()
    assert (out / "evaluation.json").is_file()


def test_corrupt_episode_fails_alone(corpus_root, tmp_path):
    damaged = tmp_path / "damaged"
    (damaged / "episodes").mkdir(parents=True)
    for path in (corpus_root / "episodes").glob("*"):
        if path.is_file():
            (damaged / "episodes" / path.name).write_bytes(path.read_bytes())
    (damaged / "robots").mkdir()
    for path in (corpus_root / "robots").glob("*.xml"):
        (damaged / "robots" / path.name).write_bytes(path.read_bytes())
    victim = sorted((damaged / "episodes").glob("*.json"))[0]
    doc = json.loads(victim.read_text(encoding="utf-8"))
    doc["camera"]["width"] = -4
    victim.write_text(json.dumps(doc), encoding="utf-8")

    out = tmp_path / "out"
    report = run(_full_plan(damaged, out))
    ingest = report["stages"][0]
    assert ingest["ok"] == 5 and ingest["failed"] == 1
    (message,) = ingest["errors"].values()
    assert message.startswith("InvariantError:")
    # surviving episodes flow through every later stage untouched
    for record in report["stages"][1:]:
        assert record["failed"] == 0
        assert record["ok"] == 5
        assert victim.stem not in record["errors"]


def test_plan_validation():
    ok = RunPlan(stages=("Ingest", "Derive"), input_root="a", output_root="b")
    validate_plan(ok)
    with pytest.raises(ConfigError, match="no stages"):
        validate_plan(RunPlan(stages=(), input_root="a", output_root="b"))
    with pytest.raises(ConfigError, match="unknown stages"):
        validate_plan(RunPlan(stages=("Teleport",), input_root="a", output_root="b"))
    with pytest.raises(DependencyError):
        validate_plan(
            RunPlan(stages=("Correct", "Calibrate"), input_root="a", output_root="b")
        )
    with pytest.raises(DependencyError):
        validate_plan(
            RunPlan(stages=("Ingest", "Ingest"), input_root="a", output_root="b")
        )


def test_missing_input_propagates(tmp_path):
    plan = RunPlan(
        stages=("Ingest",),
        input_root=str(tmp_path / "nowhere"),
        output_root=str(tmp_path / "out"),
    )
    with pytest.raises(IoError):
        run(plan)


class TestScoreFamily:
    def test_understanding_reports_accuracy(self):
        entry = score_family("contact_decide", [("Yes", "Yes"), ("No", "Yes")])
        assert entry == {"count": 2, "accuracy": 0.5}

    def test_boxes_report_iou_metrics(self):
        same = ((0, 0, 10, 10), (0, 0, 10, 10))
        far = ((0, 0, 10, 10), (20, 20, 30, 30))
        entry = score_family("gripper_detection", [same, far])
        assert entry["count"] == 2
        assert entry["mean_iou"] == pytest.approx(0.5)
        assert entry["acc_at_iou"] == 0.5

    def test_keypoint_reports_pixel_error(self):
        entry = score_family("grasp_affordance_keypoint", [((0, 0), (3, 4))])
        assert entry["mean_point_error"] == pytest.approx(5.0)

    def test_traces_report_dtw_and_ols(self):
        trace = ((0, 0), (5, 5), (10, 10))
        entry = score_family("trace_easy", [(trace, trace)])
        assert entry["mean_dtw"] == 0.0
        assert entry["ols_table"]["mean"] == 1.0
        shorter = ((0, 0), (5, 5))
        entry = score_family("trace_hard", [(trace, shorter)])
        assert entry["mean_dtw"] > 0.0
        assert entry["ols_table"] is None  # no equal-length pairs to tabulate

    def test_free_text_reports_bleu(self):
        entry = score_family("planning_task", [("pick up the cup", "pick up the cup")])
        assert entry["bleu_avg"] == pytest.approx(100.0)

    def test_unknown_family(self):
        with pytest.raises(ConfigError):
            score_family("charades", [("a", "a")])


def test_score_items_routes_by_family(corpus_root, tmp_path):
    out = tmp_path / "out"
    run(_full_plan(corpus_root, out))
    from manipkit.vqa.generate import read_items_jsonl

    items = read_items_jsonl(out / "vqa" / "items.jsonl")
    predictions = {item.item_id: item.answer for item in items}
    report = score_items(items, predictions)
    families = {item.family for item in items}
    assert set(report) == families
    for family, entry in report.items():
        if "accuracy" in entry:
            assert entry["accuracy"] == 1.0
        if "mean_iou" in entry:
            assert entry["mean_iou"] == pytest.approx(1.0)
        if "mean_dtw" in entry:
            assert entry["mean_dtw"] == 0.0


@pytest.fixture(scope="module")
def episodes():
    return [make_episode(f"e{i}", seed=i) for i in range(10)]


class TestQcSample:
    def test_subsets_cover_the_corpus(self, episodes):
        report = qc_sample(episodes, subset_count=5, samples_per_subset=2, seed=0)
        assert len(report["subsets"]) == 5
        sampled = [eid for s in report["subsets"] for eid in s["sampled"]]
        assert sorted(sampled) == sorted(ep.episode_id for ep in episodes)
        assert report["passed"]

    def test_failing_subset_flips_the_verdict(self, episodes):
        report = qc_sample(
            episodes,
            subset_count=5,
            samples_per_subset=2,
            validity=lambda ep: ep.episode_id != "e3",
        )
        failing = [s for s in report["subsets"] if not s["passed"]]
        assert len(failing) == 1
        assert failing[0]["ratio"] == 0.5
        assert not report["passed"]

    def test_same_seed_same_report(self, episodes):
        a = qc_sample(episodes, subset_count=3, samples_per_subset=2, seed=9)
        b = qc_sample(episodes, subset_count=3, samples_per_subset=2, seed=9)
        assert a == b

    def test_size_errors(self, episodes):
        with pytest.raises(TooFewEpisodesError):
            qc_sample(episodes, subset_count=11)
        with pytest.raises(ConfigError):
            qc_sample(episodes, subset_count=0)


def test_read_predictions_turns_lists_into_tuples(tmp_path):
    path = tmp_path / "preds.jsonl"
    path.write_text(
        '{"item_id": "x", "prediction": [[1, 2], [3, 4]]}\n'
        '{"item_id": "y", "prediction": "A"}\n',
        encoding="utf-8",
    )
    assert read_predictions(path) == {"x": ((1, 2), (3, 4)), "y": "A"}


class TestCli:
    def test_stage_chain_exits_zero(self, corpus_root, tmp_path, capsys):
        out = tmp_path / "work"
        base = ["--input", str(corpus_root), "--output", str(out)]
        assert cli_main(["ingest", *base]) == 0
        assert cli_main(["correct", *base]) == 0
        assert cli_main(["derive", *base]) == 0
        assert cli_main(["genvqa", *base]) == 0
        assert cli_main(["evaluate", *base]) == 0
        output = capsys.readouterr().out
        assert "Ingest: ok=6 failed=0" in output
        assert (out / "evaluation.json").is_file()

    def test_unknown_config_key_exits_three(self, corpus_root, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text("nonsense = 1\n", encoding="utf-8")
        code = cli_main(
            [
                "--config",
                str(bad),
                "ingest",
                "--input",
                str(corpus_root),
                "--output",
                str(tmp_path / "out"),
            ]
        )
        assert code == 3
        assert "nonsense" in capsys.readouterr().err

    def test_evaluate_task_mode_requires_files(self, capsys):
        assert cli_main(["evaluate", "--task", "planning_task"]) == 3
        assert "--pred" in capsys.readouterr().err

    def test_evaluate_task_mode_scores_files(self, tmp_path, capsys):
        pred = tmp_path / "pred.jsonl"
        truth = tmp_path / "truth.jsonl"
        report = tmp_path / "report.json"
        truth.write_text(
            '{"item_id": "i1", "answer": "pick up the cup"}\n', encoding="utf-8"
        )
        pred.write_text(
            '{"item_id": "i1", "prediction": "pick up the cup"}\n', encoding="utf-8"
        )
        code = cli_main(
            [
                "evaluate",
                "--task",
                "planning_task",
                "--pred",
                str(pred),
                "--truth",
                str(truth),
                "--report",
                str(report),
            ]
        )
        assert code == 0
        doc = json.loads(report.read_text(encoding="utf-8"))
        assert doc["task"] == "planning_task"
        assert doc["count"] == 1
        assert doc["bleu_avg"] == pytest.approx(100.0)

    def test_qc_flags_damaged_corpus(self, corpus_root, tmp_path, capsys):
        damaged = tmp_path / "damaged"
        (damaged / "episodes").mkdir(parents=True)
        for path in (corpus_root / "episodes").glob("*"):
            if path.is_file():
                (damaged / "episodes" / path.name).write_bytes(path.read_bytes())
        victim = sorted((damaged / "episodes").glob("*.json"))[0]
        victim.write_text("{broken", encoding="utf-8")
        args = ["qc", "--input", str(damaged), "--subset-count", "6"]
        assert cli_main(args) == 2
        healthy = ["qc", "--input", str(corpus_root), "--subset-count", "6"]
        assert cli_main(healthy) == 0

    def test_qc_too_small_corpus_exits_three(self, corpus_root, capsys):
        code = cli_main(["qc", "--input", str(corpus_root), "--subset-count", "50"])
        assert code == 3

    def test_genvqa_family_filter_and_eval_split(self, corpus_root, tmp_path):
        out = tmp_path / "work"
        ids = tmp_path / "eval_ids.txt"
        ids.write_text("ep_0000\n", encoding="utf-8")
        code = cli_main(
            [
                "genvqa",
                "--input",
                str(corpus_root),
                "--output",
                str(out),
                "--families",
                "planning_task,success_positive",
                "--eval-ids",
                str(ids),
            ]
        )
        assert code == 0
        lines = (out / "vqa" / "items.jsonl").read_text(encoding="utf-8").splitlines()
        docs = [json.loads(line) for line in lines]
        assert {d["family"] for d in docs} == {"planning_task", "success_positive"}
        by_split = {d["split"] for d in docs if d["episode_id"] == "ep_0000"}
        assert by_split == {"Eval"}

    def test_correct_honors_video_onset_file(self, corpus_root, tmp_path):
        onsets_path = tmp_path / "onsets.json"
        episode_ids = [p.stem for p in sorted((corpus_root / "episodes").glob("*.json"))]
        onsets_path.write_text(
            json.dumps({eid: 0 for eid in episode_ids}), encoding="utf-8"
        )
        out = tmp_path / "work"
        code = cli_main(
            [
                "correct",
                "--input",
                str(corpus_root),
                "--output",
                str(out),
                "--video-onset-file",
                str(onsets_path),
            ]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        detail = report["stages"][0]["detail"]
        assert set(detail) == set(episode_ids)
        for entry in detail.values():
            assert entry["shift"] <= 0  # onset forced to zero can only pull back


def test_default_config_is_not_mutated_by_cli(corpus_root, tmp_path):
    snapshot = copy.deepcopy(DEFAULTS)
    out = tmp_path / "work"
    cli_main(
        [
            "genvqa",
            "--input",
            str(corpus_root),
            "--output",
            str(out),
            "--families",
            "planning_task",
        ]
    )
    assert DEFAULTS == snapshot
