import csv
import json
import math

import numpy as np
import pytest

from sidr.corpus import Corpus, DocRecord, synth_clusters
from sidr.pipelines import PipelineConfig
from sidr.mds import MdsConfig
from sidr.simeval import (
    ANCHOR_RADIUS,
    LearningCurve,
    SimConfig,
    TimingRow,
    TimingTable,
    class_anchors,
    complexity_exponent,
    export_results,
    export_stage_timers,
    knn_accuracy,
    run_learning_curve,
    run_timing_benchmark,
    simulate_batch,
)

from oracles import knn_brute_force


class TestSimulateBatch:
    def test_four_classes_three_each(self):
        corpus = synth_clusters(4, 10, 8, 0.1, seed=0)
        cfg = SimConfig(per_class=3, jitter=0.02, seed=0)
        batch = simulate_batch(corpus, cfg, np.random.default_rng(0))
        assert len(batch.moves) == 12
        anchors = class_anchors(4)
        labels = corpus.labels_array()
        for m in batch.moves:
            row = corpus.index_of(m.doc_id)
            anchor = anchors[labels[row]]
            assert math.dist((m.x, m.y), anchor) < 0.02 * 6  # within jitter range

    def test_zero_jitter_coincides_at_anchor(self):
        corpus = synth_clusters(3, 5, 8, 0.1, seed=1)
        cfg = SimConfig(per_class=2, jitter=0.0, seed=0)
        batch = simulate_batch(corpus, cfg, np.random.default_rng(1))
        anchors = class_anchors(3)
        labels = corpus.labels_array()
        for m in batch.moves:
            anchor = anchors[labels[corpus.index_of(m.doc_id)]]
            assert (m.x, m.y) == (pytest.approx(anchor[0]), pytest.approx(anchor[1]))

    def test_same_rng_state_identical(self):
        corpus = synth_clusters(3, 6, 8, 0.1, seed=2)
        cfg = SimConfig(per_class=3, seed=0)
        a = simulate_batch(corpus, cfg, np.random.default_rng(9))
        b = simulate_batch(corpus, cfg, np.random.default_rng(9))
        assert a == b

    def test_short_class_flagged_and_ids_distinct(self):
        docs = [DocRecord(id=f"a{i}", label=0, vector=np.array([float(i), 0.0])) for i in range(5)]
        docs.append(DocRecord(id="lone", label=1, vector=np.array([9.0, 9.0])))
        corpus = Corpus(docs)
        cfg = SimConfig(per_class=3, seed=0)
        batch = simulate_batch(corpus, cfg, np.random.default_rng(0))
        assert batch.short_sampled
        ids = [m.doc_id for m in batch.moves]
        assert len(ids) == len(set(ids))

    def test_positions_inside_viewport(self):
        corpus = synth_clusters(4, 10, 8, 0.1, seed=3)
        cfg = SimConfig(per_class=3, jitter=0.5, seed=0)
        batch = simulate_batch(corpus, cfg, np.random.default_rng(3))
        for m in batch.moves:
            assert -1.0 <= m.x <= 1.0 and -1.0 <= m.y <= 1.0

    def test_anchor_geometry(self):
        anchors = class_anchors(4)
        norms = np.linalg.norm(anchors, axis=1)
        assert np.allclose(norms, ANCHOR_RADIUS)
        assert np.allclose(anchors[0], [0.8, 0.0])


class TestKnnAccuracy:
    def test_separated_clusters_score_one(self):
        rng = np.random.default_rng(0)
        positions = np.vstack([rng.normal(c, 0.01, size=(10, 2)) for c in
                               [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)]])
        labels = np.repeat(np.arange(4), 10)
        assert knn_accuracy(positions, labels, 5) == 1.0

    def test_permuted_labels_near_chance(self):
        rng = np.random.default_rng(1)
        positions = rng.normal(size=(40, 2))
        labels = np.repeat([0, 1], 20)
        accs = []
        for _ in range(50):
            perm = rng.permutation(labels)
            accs.append(knn_accuracy(positions, perm, 5))
        assert abs(np.mean(accs) - 0.5) < 0.1

    def test_hand_built_six_point_instance(self):
        positions = np.array(
            [[0.0, 0], [0.1, 0], [0.2, 0], [1.0, 0], [1.1, 0], [2.0, 0]]
        )
        labels = np.array([0, 0, 1, 1, 1, 0])
        # k=3 by hand: predictions 1,1,0,1,1,1 -> 2 correct.
        assert knn_accuracy(positions, labels, 3) == pytest.approx(2 / 6)
        # k=2 exercises the vote-tie -> nearest-neighbor rule: 4 correct.
        assert knn_accuracy(positions, labels, 2) == pytest.approx(4 / 6)
        for k in (1, 2, 3, 4):
            assert knn_accuracy(positions, labels, k) == knn_brute_force(positions, labels, k)

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = int(rng.integers(5, 31))
            k = int(rng.integers(1, min(n, 8)))
            positions = rng.normal(size=(n, 2))
            labels = rng.integers(0, 3, size=n)
            assert knn_accuracy(positions, labels, k) == knn_brute_force(positions, labels, k)

    def test_k_bounds_validated(self):
        with pytest.raises(ValueError):
            knn_accuracy(np.zeros((4, 2)), [0, 0, 1, 1], 4)


class TestLearningCurve:
    def test_zero_iterations_returns_length_one(self):
        corpus = synth_clusters(3, 6, 8, 0.1, seed=0)
        curve = run_learning_curve(
            "neuralsi", corpus, SimConfig(iterations=0, seed=0), PipelineConfig(seed=0)
        )
        assert len(curve.accuracies) == 1

    def test_curve_length_and_range(self):
        corpus = synth_clusters(3, 8, 12, 0.3, seed=1)
        cfg = PipelineConfig(seed=1, epochs_per_update=5)
        curve = run_learning_curve("neuralsi", corpus, SimConfig(iterations=4, seed=1), cfg)
        assert len(curve.accuracies) == 5
        assert all(0.0 <= a <= 1.0 for a in curve.accuracies)

    def test_deterministic_given_seeds(self):
        corpus = synth_clusters(3, 8, 12, 0.3, seed=2)
        cfg = PipelineConfig(seed=2, epochs_per_update=5)
        a = run_learning_curve("deepsi", corpus, SimConfig(iterations=3, seed=2), cfg)
        b = run_learning_curve("deepsi", corpus, SimConfig(iterations=3, seed=2), cfg)
        assert a.accuracies == b.accuracies

    def test_mds_init_beats_random_init_at_iteration_zero(self):
        corpus = synth_clusters(3, 20, 32, 0.3, seed=3)
        sim = SimConfig(iterations=0, seed=3)
        acc_mds = run_learning_curve(
            "neuralsi", corpus, sim, PipelineConfig(seed=3, head_init="mds_based")
        ).accuracies[0]
        acc_rand = run_learning_curve(
            "neuralsi", corpus, sim, PipelineConfig(seed=3, head_init="random")
        ).accuracies[0]
        assert acc_mds >= acc_rand

    @pytest.mark.slow
    def test_reference_curve_reaches_high_accuracy(self):
        corpus = synth_clusters(3, 50, 64, 0.3, seed=0)
        sim = SimConfig(iterations=50, seed=0)
        for pipeline in ("deepsi", "neuralsi"):
            curve = run_learning_curve(pipeline, corpus, sim, PipelineConfig(seed=0))
            assert max(curve.accuracies) >= 0.9, pipeline

    def test_bundled_text_corpus_curve(self):
        # The non-synthetic path: bundled text docs through TF-IDF.
        from sidr.corpus import bundled_corpus, embed_tfidf

        corpus = embed_tfidf(bundled_corpus("notes3"), 64)
        curve = run_learning_curve(
            "neuralsi", corpus, SimConfig(iterations=3, seed=0), PipelineConfig(seed=0)
        )
        assert len(curve.accuracies) == 4
        assert curve.accuracies[-1] >= 0.9


class TestTimingBenchmark:
    def test_rows_and_stages_well_formed(self):
        def family(n):
            return synth_clusters(4, n // 4, 8, 0.1, seed=0)

        table = run_timing_benchmark(
            ["deepsi", "neuralsi"],
            family,
            sizes=(40, 80),
            repeats=2,
            sim_cfg=SimConfig(seed=0),
            pipe_cfg=PipelineConfig(seed=0, epochs_per_update=5, mds=MdsConfig(max_iters=20)),
        )
        assert len(table.rows) == 4
        for row in table.rows:
            assert row.mean_seconds > 0
            assert row.std_seconds >= 0
            assert row.repeats == 2
        deepsi_rows = [r for r in table.rows if r.pipeline == "deepsi"]
        assert all("mds" in r.stage_seconds and "update" in r.stage_seconds for r in deepsi_rows)
        assert isinstance(complexity_exponent(table, "deepsi"), float)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            run_timing_benchmark(["deepsi"], lambda n: None, sizes=(0,), repeats=1)
        with pytest.raises(ValueError):
            run_timing_benchmark(["deepsi"], lambda n: None, sizes=(10,), repeats=0)


class TestExport:
    def test_curve_csv_roundtrip(self, tmp_path):
        curve = LearningCurve(accuracies=[0.25, 0.5, 1 / 3], pipeline="deepsi", seed=4)
        path = tmp_path / "curve.csv"
        export_results(curve, path, fmt="csv")
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iteration", "accuracy"]
        assert [int(r[0]) for r in rows[1:]] == [0, 1, 2]
        assert [float(r[1]) for r in rows[1:]] == curve.accuracies

    def test_curve_json_roundtrip(self, tmp_path):
        curve = LearningCurve(accuracies=[0.1, 0.9999999999999], pipeline="neuralsi", seed=1)
        path = tmp_path / "curve.json"
        export_results(curve, path, fmt="json")
        data = json.loads(path.read_text())
        assert data == {"pipeline": "neuralsi", "seed": 1, "accuracies": curve.accuracies}

    def test_table_csv_schema_and_roundtrip(self, tmp_path):
        table = TimingTable(
            rows=[TimingRow("deepsi", 100, 0.123456789, 0.01, 5)]
        )
        path = tmp_path / "table.csv"
        export_results(table, path, fmt="csv")
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["pipeline", "n", "mean_s", "std_s", "repeats"]
        assert float(rows[1][2]) == 0.123456789

    def test_empty_table_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        export_results(TimingTable(rows=[]), path, fmt="csv")
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows == [["pipeline", "n", "mean_s", "std_s", "repeats"]]

    def test_stage_timer_json(self, tmp_path):
        table = TimingTable(
            rows=[TimingRow("deepsi", 10, 1.0, 0.0, 1, {"update": 0.4, "mds": 0.5})]
        )
        path = tmp_path / "stages.json"
        export_stage_timers(table, path)
        assert json.loads(path.read_text()) == {"deepsi/10": {"update": 0.4, "mds": 0.5}}

    def test_unwritable_path_raises(self, tmp_path):
        curve = LearningCurve(accuracies=[0.5], pipeline="deepsi", seed=0)
        with pytest.raises(OSError):
            export_results(curve, tmp_path / "missing" / "curve.csv", fmt="csv")

    def test_unknown_format_rejected(self, tmp_path):
        curve = LearningCurve(accuracies=[0.5], pipeline="deepsi", seed=0)
        with pytest.raises(ValueError):
            export_results(curve, tmp_path / "x.bin", fmt="bin")
