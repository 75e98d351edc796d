import json

import numpy as np
import pytest

from parkspace.detect import Detection
from parkspace.errors import ParseError, ZeroGroundTruth
from parkspace.evaluate import (
    EvalReport, GroundTruthSpace, ThresholdRecord, aggregate_reports, average_precision, evaluate,
    evaluate_iou_matrix, greedy_match, ground_truth_from_dict, ground_truth_to_dict, match_detections,
    read_ground_truth, read_report,
)
from parkspace.geometry import RotatedRect, rect_to_polygon
from parkspace.mask import FrameGrid

from oracles import brute_force_ap, brute_force_eval


def gt(i, cx, cy, w=10, h=20, angle=0.0):
    return GroundTruthSpace(f"S{i}", rect_to_polygon(RotatedRect(cx, cy, w, h, angle)))


def det(cx, cy, posterior, w=10, h=20, angle=0.0):
    return Detection(RotatedRect(cx, cy, w, h, angle), posterior, w * h, 1)


@pytest.mark.parametrize("labels,num_gt,expected", [
    ([True], 1, 1.0),
    ([False, True], 1, 0.5),
    ([True, False, True], 2, (1.0 + 2 / 3) / 2),
    ([True, True], 4, 0.5),
    ([False, False], 3, 0.0),
    ([], 2, 0.0),
])
def test_average_precision_examples(labels, num_gt, expected):
    assert average_precision(labels, num_gt) == pytest.approx(expected, abs=1e-12)


def test_ap_needs_ground_truth():
    with pytest.raises(ZeroGroundTruth):
        average_precision([True], 0)
    with pytest.raises(ZeroGroundTruth):
        evaluate([], [])


def test_greedy_takes_best_free_column():
    iou = np.array([[0.6, 0.7], [0.65, 0.69], [0.9, 0.0]])
    assert greedy_match(iou, 0.5) == [(True, 1), (True, 0), (False, None)]


def test_greedy_tie_takes_lowest_column():
    assert greedy_match(np.array([[0.5, 0.5]]), 0.5) == [(True, 0)]


def test_threshold_is_inclusive():
    assert greedy_match(np.array([[0.5]]), 0.5) == [(True, 0)]
    assert greedy_match(np.array([[np.nextafter(0.5, 0)]]), 0.5) == [(False, None)]


def test_match_reports_ids():
    gts = [gt(0, 20, 20), gt(1, 60, 20)]
    ms = match_detections([det(60, 20, 0.9), det(200, 200, 0.8)], gts, 0.5)
    assert [(m.is_tp, m.gt_id) for m in ms] == [(True, "S1"), (False, None)]


def test_perfect_detections():
    gts = [gt(i, 20 + 30 * i, 40, angle=15 * i) for i in range(4)]
    dets = [det(20 + 30 * i, 40, 0.9 - 0.1 * i, angle=15 * i) for i in range(4)]
    rep = evaluate(dets, gts)
    for thr in (0.25, 0.5):
        rec = rep.record(thr)
        assert (rec.ap, rec.tp, rec.fp, rec.fn) == (1.0, 4, 0, 0)


def test_no_detections():
    rep = evaluate([], [gt(0, 20, 20)])
    assert rep.ap(0.25) == 0.0 and rep.record(0.5).fn == 1


def test_duplicates_count_as_false_positives():
    gts = [gt(0, 20, 20)]
    rep = evaluate([det(20, 20, 0.9), det(21, 20, 0.8)], gts, [0.5])
    rec = rep.record(0.5)
    assert (rec.tp, rec.fp, rec.ap) == (1, 1, 1.0)


def test_random_instances_match_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(300):
        n_det, n_gt = int(rng.integers(0, 11)), int(rng.integers(1, 6))
        iou = rng.random((n_det, n_gt)) * (rng.random((n_det, n_gt)) < 0.6)
        if rng.random() < 0.3:
            iou = np.round(iou, 1)  # force ties
        rep = evaluate_iou_matrix(iou, n_gt, [0.25, 0.5])
        for thr in (0.25, 0.5):
            labels = brute_force_eval(iou.tolist(), thr)
            rec = rep.record(thr)
            assert rec.ap == pytest.approx(brute_force_ap(labels, n_gt), abs=1e-9)
            assert rec.tp + rec.fp == n_det
            assert rec.tp + rec.fn == n_gt
        assert rep.ap(0.25) >= rep.ap(0.5) - 1e-12


def test_ground_truth_file_round_trip(tmp_path):
    grid = FrameGrid(100, 80)
    gts = [gt(0, 20, 20), gt(1, 50, 40, angle=30)]
    p = tmp_path / "gt.json"
    p.write_text(json.dumps(ground_truth_to_dict(grid, gts)))
    grid2, back = read_ground_truth(p)
    assert grid2 == grid and [g.id for g in back] == ["S0", "S1"]
    np.testing.assert_allclose(back[1].shape.vertices, gts[1].shape.vertices)


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d.pop("spaces"), "spaces"),
    (lambda d: d["spaces"][1].update(id="S0"), "spaces[1].id"),
    (lambda d: d["spaces"][0].update(polygon=[[0, 0], [1, 1]]), "spaces[0].polygon"),
    (lambda d: d["spaces"][0].update(polygon=[[0, 0], [500, 0], [500, 5]]), "spaces[0].polygon"),
    (lambda d: d.update(width=0), "width/height"),
])
def test_ground_truth_errors(mutate, field):
    doc = ground_truth_to_dict(FrameGrid(100, 80), [gt(0, 20, 20), gt(1, 50, 40)])
    mutate(doc)
    with pytest.raises(ParseError) as info:
        ground_truth_from_dict(doc)
    assert info.value.field == field


def _report(ap25, ap50):
    recs = tuple(ThresholdRecord(t, a, 0, 0, 1, ()) for t, a in ((0.25, ap25), (0.5, ap50)))
    return EvalReport(1, recs)


def test_aggregate_mean_and_sample_std():
    out = aggregate_reports([_report(0.8, 0.7), _report(0.9, 0.7)])
    first, second = out["thresholds"]
    assert first["mean_ap"] == pytest.approx(0.85)
    assert first["std_ap"] == pytest.approx(0.070711, abs=1e-6)
    assert second["std_ap"] == 0.0
    assert out["num_reports"] == 2 and first["n"] == 2


def test_report_round_trip(tmp_path):
    rep = evaluate([det(20, 20, 0.9), det(90, 20, 0.5)], [gt(0, 20, 20), gt(1, 60, 20)])
    p = tmp_path / "r.json"
    p.write_text(rep.to_json())
    back = read_report(p)
    assert back.ap(0.25) == pytest.approx(rep.ap(0.25), abs=1e-6)
    assert back.record(0.5).fn == rep.record(0.5).fn
