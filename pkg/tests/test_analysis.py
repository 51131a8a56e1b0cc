import dataclasses

import numpy as np
import pytest

from utidrift.analysis import (SimilarityMatrix, detect_change_points,
                               mean_image, session_stats, similarity_matrix)
from utidrift.ingest import (Session, SyntheticSpec, Utterance,
                             generate_synthetic_session)

import oracles


def utt(frames, uid="u0", ts=0.0):
    return Utterance(id=uid, timestamp=ts,
                     frames=np.asarray(frames, dtype=np.uint8))


def synthetic(seed, n=6, frames=3, w=24, h=20, bounds=(), noise=0.0):
    spec = SyntheticSpec(n_utterances=n, frames_per_utterance=frames,
                         width=w, height=h, shift_boundaries=bounds,
                         noise_sigma=noise, texture_seed=seed)
    return generate_synthetic_session(spec)


class TestMeanImage:
    def test_two_point_mean(self):
        u = utt([[[0]], [[2]]])
        assert mean_image(u) == pytest.approx(np.array([[1.0]]))

    def test_single_frame_identity(self):
        frames = np.arange(12, dtype=np.uint8).reshape(1, 3, 4)
        u = utt(frames)
        assert np.array_equal(mean_image(u), frames[0].astype(float))

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(3)
        frames = rng.integers(0, 256, size=(10, 8, 8), dtype=np.uint8)
        got = mean_image(utt(frames))
        want = oracles.mean_image_loop(frames)
        assert np.abs(got - want).max() < 1e-12

    def test_frame_order_invariance_exact(self):
        rng = np.random.default_rng(4)
        frames = rng.integers(0, 256, size=(7, 6, 5), dtype=np.uint8)
        perm = rng.permutation(7)
        a = mean_image(utt(frames))
        b = mean_image(utt(frames[perm]))
        assert np.array_equal(a, b)


class TestSimilarityMatrix:
    def test_single_utterance_nan(self):
        s = synthetic(0, n=1)
        m = similarity_matrix(s, "MSE")
        assert m.values.shape == (1, 1)
        assert np.isnan(m.values[0, 0])

    def test_identical_utterances_zero_mse(self):
        s = synthetic(1, n=3, noise=0.0)
        m = similarity_matrix(s, "MSE")
        off = ~np.eye(3, dtype=bool)
        assert np.all(m.values[off] == 0.0)

    def test_block_structure_from_shift(self):
        s = synthetic(2, n=8, bounds=((4, 3, 0),))
        m = similarity_matrix(s, "MSE")
        v = m.values
        within = np.concatenate([
            v[:4, :4][np.triu_indices(4, 1)],
            v[4:, 4:][np.triu_indices(4, 1)],
        ])
        cross = v[:4, 4:].ravel()
        assert within.mean() < cross.mean()

    def test_invariants(self):
        s = synthetic(3, n=5, noise=1.0)
        for name in ("MSE", "SSIM", "CW-SSIM"):
            m = similarity_matrix(s, name)
            m.validate()
            assert np.isnan(np.diag(m.values)).all()
            off = ~np.eye(m.n, dtype=bool)
            assert np.isfinite(m.values[off]).all()
            assert np.array_equal(m.values[off], m.values.T[off])

    def test_permutation_equivariance_exact(self):
        s = synthetic(4, n=6, bounds=((3, 2, 1),), noise=1.0)
        m = similarity_matrix(s, "MSE")
        rng = np.random.default_rng(0)
        perm = rng.permutation(6)
        permuted = Session(
            s.speaker_id, s.session_id,
            [dataclasses.replace(s.utterances[p], timestamp=float(k))
             for k, p in enumerate(perm)],
        )
        m2 = similarity_matrix(permuted, "MSE")
        want = m.values[np.ix_(perm, perm)]
        off = ~np.eye(6, dtype=bool)
        assert np.array_equal(m2.values[off], want[off])
        assert m2.utterance_ids == [m.utterance_ids[p] for p in perm]

    def test_parallel_matches_serial(self):
        s = synthetic(5, n=6, bounds=((3, 2, 0),), noise=1.0)
        for name in ("MSE", "CW-SSIM"):
            serial = similarity_matrix(s, name, jobs=1)
            parallel = similarity_matrix(s, name, jobs=2)
            off = ~np.eye(6, dtype=bool)
            assert np.array_equal(serial.values[off], parallel.values[off])

    def test_unknown_metric(self):
        with pytest.raises(ValueError, match="unknown metric"):
            similarity_matrix(synthetic(6, n=2), "PSNR")

    def test_fingerprint_depends_on_params(self):
        from utidrift.metrics import SsimParams
        s = synthetic(7, n=2)
        a = similarity_matrix(s, "SSIM", SsimParams())
        b = similarity_matrix(s, "SSIM", SsimParams(window_size=9))
        assert a.params_fingerprint != b.params_fingerprint


class TestSessionStats:
    def test_two_by_two(self):
        m = SimilarityMatrix("MSE", ["a", "b"],
                             np.array([[np.nan, 100.0], [100.0, np.nan]]), "f")
        st = session_stats(m)
        assert st.mean == 100.0
        assert st.std == 0.0
        assert st.n_pairs == 1

    def test_analytic_three_values(self):
        v = np.full((3, 3), np.nan)
        v[0, 1] = v[1, 0] = 1.0
        v[0, 2] = v[2, 0] = 2.0
        v[1, 2] = v[2, 1] = 3.0
        st = session_stats(SimilarityMatrix("MSE", list("abc"), v, "f"))
        assert st.mean == pytest.approx(2.0)
        assert st.std == pytest.approx(np.sqrt(2.0 / 3.0))

    def test_matches_flat_loop_oracle(self):
        s = synthetic(8, n=7, bounds=((3, 2, 2),), noise=1.0)
        m = similarity_matrix(s, "MSE")
        st = session_stats(m)
        mean, std = oracles.offdiag_stats_loop(m.values)
        assert st.mean == pytest.approx(mean, rel=1e-9)
        assert st.std == pytest.approx(std, rel=1e-9)

    def test_needs_two_utterances(self):
        m = SimilarityMatrix("MSE", ["a"], np.array([[np.nan]]), "f")
        with pytest.raises(ValueError, match="at least 2"):
            session_stats(m)


class TestChangePoints:
    def test_identical_session_no_boundaries(self):
        s = synthetic(9, n=6, noise=0.0)
        r = detect_change_points(similarity_matrix(s, "MSE"))
        assert r.boundaries == ()
        assert len(r.block_means) == 1

    def test_single_boundary_recovered(self):
        s = synthetic(10, n=10, bounds=((5, 3, 0),), noise=2.0)
        r = detect_change_points(similarity_matrix(s, "MSE"))
        assert r.boundaries == (5,)
        assert len(r.block_means) == 2

    def test_two_boundaries_recovered(self):
        s = synthetic(7000, n=14, bounds=((4, 0, 8), (9, 3, 0)), noise=1.0)
        r = detect_change_points(similarity_matrix(s, "MSE"))
        assert r.boundaries == (4, 9)

    def test_similarity_metric_converted_to_dissimilarity(self):
        s = synthetic(11, n=10, bounds=((5, 4, 0),), noise=1.0)
        r = detect_change_points(similarity_matrix(s, "SSIM"))
        assert r.boundaries == (5,)

    def test_needs_four_utterances(self):
        s = synthetic(12, n=3)
        with pytest.raises(ValueError, match="at least 4"):
            detect_change_points(similarity_matrix(s, "MSE"))

    def test_block_means_reflect_segments(self):
        s = synthetic(13, n=8, bounds=((4, 3, 0),), noise=0.0)
        m = similarity_matrix(s, "MSE")
        r = detect_change_points(m)
        assert r.boundaries == (4,)
        assert r.block_means[0] == pytest.approx(0.0)
        assert r.block_means[1] == pytest.approx(0.0)
        assert r.threshold_used > 0

    def test_no_false_boundaries_statistics(self):
        clean = 0
        for t in range(100):
            s = synthetic(20_000 + t, n=12, frames=4, w=48, h=40, noise=2.0)
            r = detect_change_points(similarity_matrix(s, "MSE"))
            clean += not r.boundaries
        assert clean >= 95

    def test_single_boundary_recovery_statistics(self):
        hits = 0
        for t in range(100):
            s = synthetic(30_000 + t, n=12, frames=4, w=48, h=40,
                          bounds=((5, 2, 0),), noise=2.0)
            r = detect_change_points(similarity_matrix(s, "MSE"))
            hits += any(abs(b - 5) <= 1 for b in r.boundaries)
        assert hits >= 95
