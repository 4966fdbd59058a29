"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one `ACCEPTANCE <name>: PASS/FAIL` line (run with -s or
-rA to see them live). Criteria marked with a runtime budget assert it.

Run just this gate with:  pytest tests/test_acceptance.py -s
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest
from fastapi.testclient import TestClient

import sidr
from sidr.mds import MdsConfig, mds_project, procrustes_residual
from sidr.nn import (
    BackboneParams,
    HeadParams,
    finite_diff_check,
    grad_pairwise_stress,
    pairwise_stress,
)
from sidr.pipelines import PipelineConfig
from sidr.service import create_app
from sidr.simeval import SimConfig, complexity_exponent, run_timing_benchmark

from oracles import knn_brute_force
from test_service import corpus_jsonl, make_session, square_batch, wait_idle

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(name: str, budget_seconds: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL ({time.perf_counter() - start:.1f}s)")
        raise
    elapsed = time.perf_counter() - start
    print(f"\nACCEPTANCE {name}: PASS ({elapsed:.1f}s, budget {budget_seconds:.0f}s)")
    assert elapsed < budget_seconds


def test_gradient_oracle():
    """Analytic gradients of both pipelines' losses match central finite
    differences (max relative error < 1e-4) on >= 20 random small instances."""
    with criterion("gradient-oracle", 10.0):
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(3, 11))  # N <= 10
            dim = int(rng.integers(2, 9))  # D <= 8
            hidden = int(rng.integers(2, 7))
            backbone = BackboneParams(
                w1=rng.normal(size=(hidden, dim)),
                b1=rng.normal(size=hidden),
                w2=0.5 * rng.normal(size=(dim, hidden)),
                b2=0.1 * rng.normal(size=dim),
            )
            head = HeadParams(w=rng.normal(size=(2, dim)))
            x = rng.normal(size=(n, dim))
            targets = [
                (i, j, float(abs(rng.normal()) + 0.3))
                for i in range(n)
                for j in range(i + 1, n)
            ]

            def loss(out):
                return pairwise_stress(out, targets), grad_pairwise_stress(out, targets)

            worst = max(worst, finite_diff_check(backbone, None, x, loss))  # deepsi loss
            worst = max(worst, finite_diff_check(backbone, head, x, loss))  # neuralsi loss
        assert worst < 1e-4, f"worst relative gradient error {worst}"


def test_mds_recovery():
    """Planar data padded to D=10 is recovered up to a rigid transform with
    Procrustes residual < 1e-3 and stress < 1e-6; the SMACOF stress sequence
    never increases."""
    with criterion("mds-recovery", 5.0):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            z_true = rng.normal(size=(25, 2))
            h = np.hstack([z_true, np.zeros((25, 8))])
            result = mds_project(h, MdsConfig())
            assert result.stress < 1e-6
            assert procrustes_residual(z_true, result.positions) < 1e-3
            hist = result.stress_history
            assert np.all(np.diff(hist) <= 1e-9 * max(1.0, hist[0]))
        # Non-planar instances: descent must still be monotone.
        for seed in range(5):
            rng = np.random.default_rng(100 + seed)
            result = mds_project(rng.normal(size=(20, 6)), MdsConfig())
            hist = result.stress_history
            assert np.all(np.diff(hist) <= 1e-9 * max(1.0, hist[0]))


def test_knn_oracle_equivalence():
    """knn_accuracy equals brute-force neighbor enumeration on 100 random
    instances with N <= 30 (exact match)."""
    with criterion("knn-oracle", 5.0):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(5, 31))
            k = int(rng.integers(1, min(n, 9)))
            n_classes = int(rng.integers(2, 5))
            positions = rng.normal(size=(n, 2))
            if rng.random() < 0.2:  # exercise distance ties
                positions = np.round(positions, 1)
            labels = rng.integers(0, n_classes, size=n)
            got = sidr.knn_accuracy(positions, labels, k)
            expected = knn_brute_force(positions, labels, k)
            assert got == expected


def test_initialization_ordering():
    """MDS-init neuralsi starts at least as accurate as random-init in >= 8
    of 10 seeds for K in {2,3,4}, and its iteration-0 accuracy tracks the
    deepsi (pure MDS) iteration-0 accuracy within 0.05."""
    with criterion("initialization-ordering", 120.0):
        for k in (2, 3, 4):
            wins = 0
            for seed in range(10):
                corpus = sidr.synth_clusters(k, 160 // k, 24, 0.15, seed=seed)
                labels = corpus.labels_array()

                state = sidr.init_state(corpus, "deepsi", PipelineConfig(seed=seed))
                acc_deepsi = sidr.knn_accuracy(sidr.forward(state, corpus), labels, 5)

                state = sidr.init_state(
                    corpus, "neuralsi", PipelineConfig(seed=seed, head_init="mds_based")
                )
                acc_mds = sidr.knn_accuracy(sidr.forward(state, corpus), labels, 5)

                state = sidr.init_state(
                    corpus, "neuralsi", PipelineConfig(seed=seed, head_init="random")
                )
                acc_rand = sidr.knn_accuracy(sidr.forward(state, corpus), labels, 5)

                wins += acc_mds >= acc_rand
                assert abs(acc_mds - acc_deepsi) <= 0.05, (
                    f"K={k} seed={seed}: mds-init {acc_mds:.3f} vs deepsi {acc_deepsi:.3f}"
                )
            assert wins >= 8, f"K={k}: mds-init won only {wins}/10 seeds"


def test_learning_curve_convergence():
    """Both pipelines reach kNN accuracy >= 0.9 within 50 iterations AND gain
    >= 0.2 over iteration 0, in >= 8 of 10 seeds, on 3 clusters with N=150,
    D=64, spread 0.3.

    Known red: the >= 0.9 clause holds on every seed, but the +0.2 clause
    cannot: with unit-separated centers at spread 0.3 the iteration-0 MDS
    layout already scores 0.75-0.90 (verified stable under SMACOF run to
    deep convergence), so a 0.2 gain would need accuracy above 1.0 in most
    seeds. The check is asserted verbatim rather than weakened.
    """
    with criterion("learning-curve", 600.0):
        per_seed = []
        for seed in range(10):
            corpus = sidr.synth_clusters(3, 50, 64, 0.3, seed=seed)
            sim = SimConfig(iterations=50, seed=seed)
            ok = True
            detail = {}
            for pipeline in ("deepsi", "neuralsi"):
                curve = sidr.run_learning_curve(
                    pipeline, corpus, sim, PipelineConfig(seed=seed)
                ).accuracies
                reached = max(curve) >= 0.9
                gained = curve[50] - curve[0] >= 0.2
                detail[pipeline] = (curve[0], curve[50], max(curve), reached, gained)
                ok = ok and reached and gained
            per_seed.append(ok)
            print(f"seed {seed}: " + "  ".join(
                f"{p} a0={d[0]:.3f} a50={d[1]:.3f} max={d[2]:.3f} reach90={d[3]} gain02={d[4]}"
                for p, d in detail.items()
            ))
        passing = sum(per_seed)
        assert passing >= 8, (
            f"only {passing}/10 seeds satisfied both clauses; the +0.2 gain "
            "clause is unattainable here because iteration-0 layouts already "
            "score ~0.85 on this data construction (see this test's docstring)"
        )


def test_complexity_trend():
    """Cycle time grows ~linearly for neuralsi (log-log slope < 1.3) and
    ~quadratically for deepsi (slope > 1.5); the MDS stage accounts for
    >= 60% of the deepsi cycle at N=1000."""
    with criterion("complexity-trend", 900.0):
        def family(n):
            return sidr.synth_clusters(4, n // 4, 32, 0.1, seed=0)

        table = run_timing_benchmark(
            ["deepsi", "neuralsi"],
            family,
            sizes=(100, 200, 500, 1000),
            repeats=5,
            sim_cfg=SimConfig(seed=0),
            pipe_cfg=PipelineConfig(seed=0),
        )
        deepsi_exp = complexity_exponent(table, "deepsi")
        neuralsi_exp = complexity_exponent(table, "neuralsi")
        print(f"deepsi exponent {deepsi_exp:.2f}, neuralsi exponent {neuralsi_exp:.2f}")
        assert neuralsi_exp < 1.3
        assert deepsi_exp > 1.5

        def mean_of(pipeline, n):
            return next(r for r in table.rows if r.pipeline == pipeline and r.n == n).mean_seconds

        # the deepsi/neuralsi cost gap must widen with data size
        assert mean_of("deepsi", 1000) / mean_of("neuralsi", 1000) > mean_of(
            "deepsi", 100
        ) / mean_of("neuralsi", 100)

        for n in (500, 1000):
            row = next(r for r in table.rows if r.pipeline == "deepsi" and r.n == n)
            mds_fraction = row.stage_seconds["mds"] / sum(row.stage_seconds.values())
            print(f"deepsi N={n} MDS stage fraction {mds_fraction:.2f}")
            assert mds_fraction >= 0.60


def test_determinism_and_replay(tmp_path):
    """Identical seeds reproduce learning curves bit-exactly; a session
    saved and loaded mid-run continues exactly like an uninterrupted one."""
    with criterion("determinism-replay", 300.0):
        corpus = sidr.synth_clusters(3, 12, 16, 0.3, seed=2)
        sim = SimConfig(iterations=5, seed=2)
        for pipeline in ("deepsi", "neuralsi"):
            cfg = PipelineConfig(seed=2, epochs_per_update=10)
            a = sidr.run_learning_curve(pipeline, corpus, sim, cfg).accuracies
            b = sidr.run_learning_curve(pipeline, corpus, sim, cfg).accuracies
            assert a == b  # bit-exact, not approximate

        client = TestClient(create_app())
        resp = client.post(
            "/corpora", json={"name": "accept", "jsonl": corpus_jsonl(
                sidr.synth_clusters(4, 8, 12, 0.2, seed=3))}
        )
        corpus_id = resp.json()["corpus_id"]
        config = {"seed": 3, "epochs_per_update": 8}

        # Uninterrupted: two rounds.
        a = make_session(client, corpus_id, "neuralsi", config)
        sid_a = a["session_id"]
        client.post(f"/sessions/{sid_a}/interactions", json=square_batch(a))
        client.post(f"/sessions/{sid_a}/update")
        wait_idle(client, sid_a)
        mid_a = client.get(f"/sessions/{sid_a}/projection").json()
        client.post(f"/sessions/{sid_a}/interactions", json=square_batch(mid_a))
        client.post(f"/sessions/{sid_a}/update")
        wait_idle(client, sid_a)
        final_a = client.get(f"/sessions/{sid_a}/projection").json()["positions"]

        # Paused twin: one round, save, load elsewhere, second round.
        b = make_session(client, corpus_id, "neuralsi", config)
        sid_b = b["session_id"]
        client.post(f"/sessions/{sid_b}/interactions", json=square_batch(b))
        client.post(f"/sessions/{sid_b}/update")
        wait_idle(client, sid_b)
        snap = tmp_path / "mid.json"
        client.post(f"/sessions/{sid_b}/save", json={"path": str(snap)})

        other = TestClient(create_app())
        sid_c = other.post("/sessions/load", json={"path": str(snap)}).json()["session_id"]
        mid_c = other.get(f"/sessions/{sid_c}/projection").json()
        other.post(f"/sessions/{sid_c}/interactions", json=square_batch(mid_c))
        other.post(f"/sessions/{sid_c}/update")
        wait_idle(other, sid_c)
        final_c = other.get(f"/sessions/{sid_c}/projection").json()["positions"]
        assert final_c == final_a
