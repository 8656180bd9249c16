import numpy as np
import pytest

from finspect import DegenerateBeliefError, ParameterError, ShapeError
from finspect import fusion


WORKED_PROFILE = np.array([
    [0.70, 0.30],
    [0.75, 0.25],
    [0.47, 0.53],
    [0.50, 0.50],
])
TEMPLATE_0 = np.array([
    [0.70, 0.30],
    [0.90, 0.10],
    [0.89, 0.11],
    [0.80, 0.20],
])
TEMPLATE_1 = np.array([
    [0.30, 0.70],
    [0.40, 0.60],
    [0.30, 0.70],
    [0.20, 0.80],
])


def worked_templates():
    return fusion.DecisionTemplates(np.stack([TEMPLATE_0, TEMPLATE_1]), np.array([1, 1]))


def fuse_by_hand(profile, matrices):
    """Re-derivation with plain loops, independent of the library internals."""
    n_classes = matrices.shape[0]
    raw = np.ones(n_classes)
    for i in range(profile.shape[0]):
        dists = [np.linalg.norm(matrices[j, i] - profile[i]) for j in range(n_classes)]
        w = np.array([1.0 / (1.0 + d) for d in dists])
        lam = w / w.sum()
        pi = np.empty(n_classes)
        for j in range(n_classes):
            others = 1.0
            for r in range(n_classes):
                if r != j:
                    others *= 1.0 - lam[r]
            pi[j] = lam[j] * others / (1.0 - lam[j] * (1.0 - others))
        raw *= pi
    return raw


class TestProfileChecks:
    def test_row_sum_enforced(self):
        with pytest.raises(ParameterError):
            fusion.compute_templates([np.array([[0.9, 0.3]])], [0], 1)

    def test_range_enforced(self):
        with pytest.raises(ParameterError):
            fusion.compute_templates([np.array([[1.5, -0.5]])], [0], 1)

    def test_one_dimensional_rejected(self):
        with pytest.raises(ShapeError):
            fusion.fuse(np.array([0.5, 0.5]), worked_templates())


class TestTemplates:
    def test_per_class_mean(self):
        p0 = np.array([[1.0, 0.0], [0.8, 0.2]])
        p1 = np.array([[0.6, 0.4], [0.4, 0.6]])
        p2 = np.array([[0.0, 1.0], [0.1, 0.9]])
        t = fusion.compute_templates([p0, p1, p2], [0, 0, 1], 2)
        assert np.allclose(t.matrices[0], (p0 + p1) / 2)
        assert np.allclose(t.matrices[1], p2)
        assert t.counts.tolist() == [2, 1]

    def test_empty_class_rejected(self):
        with pytest.raises(ParameterError):
            fusion.compute_templates([np.array([[1.0, 0.0]])], [0], 2)

    def test_label_count_mismatch(self):
        with pytest.raises(ShapeError):
            fusion.compute_templates([np.array([[1.0, 0.0]])], [0, 1], 2)

    def test_counts_must_be_positive(self):
        with pytest.raises(ParameterError):
            fusion.DecisionTemplates(np.zeros((1, 2, 2)), np.array([0]))


class TestProximity:
    def test_normalized_and_ordered(self):
        lam = fusion.proximity(np.stack([TEMPLATE_0[0], TEMPLATE_1[0]]), WORKED_PROFILE[0])
        assert lam.sum() == pytest.approx(1.0)
        assert lam[0] == pytest.approx(0.610, abs=5e-4)  # exact row match wins

    def test_exact_match_dominates(self):
        rows = np.array([[1.0, 0.0], [0.0, 1.0]])
        lam = fusion.proximity(rows, np.array([1.0, 0.0]))
        assert lam[0] > lam[1]

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            fusion.proximity(np.eye(2), np.zeros(3))


class TestBelief:
    def test_certain_evidence(self):
        out = fusion.belief(np.array([1.0, 0.0, 0.0]))
        assert np.allclose(out, [1.0, 0.0, 0.0])

    def test_zero_evidence_gives_zero(self):
        assert fusion.belief(np.array([0.0, 0.5]))[0] == 0.0

    def test_uniform_stays_uniform(self):
        out = fusion.belief(np.full(4, 0.25))
        assert np.allclose(out, out[0])

    def test_total_conflict_degenerate(self):
        with pytest.raises(DegenerateBeliefError):
            fusion.belief(np.array([1.0, 1.0]))


class TestFuse:
    def test_worked_example_values(self):
        result = fusion.fuse(WORKED_PROFILE, worked_templates())
        assert result.predicted == 0
        assert not result.total_conflict
        assert result.raw[0] == pytest.approx(0.01676355, abs=1e-6)
        assert result.raw[1] == pytest.approx(0.0074236, abs=1e-6)
        assert result.support[0] == pytest.approx(0.693, abs=1e-3)
        assert result.support.sum() == pytest.approx(1.0)

    def test_matches_hand_recomputation(self, rng):
        for _ in range(20):
            l, k = int(rng.integers(1, 5)), int(rng.integers(2, 5))
            profile = rng.random((l, k))
            profile /= profile.sum(axis=1, keepdims=True)
            mats = rng.random((k, l, k))
            mats /= mats.sum(axis=2, keepdims=True)
            templates = fusion.DecisionTemplates(mats, np.ones(k, dtype=int))
            result = fusion.fuse(profile, templates)
            oracle = fuse_by_hand(profile, mats)
            assert np.allclose(result.raw, oracle, atol=1e-12)

    def test_class_permutation_symmetry(self, rng):
        profile = rng.random((3, 4))
        profile /= profile.sum(axis=1, keepdims=True)
        mats = rng.random((4, 3, 4))
        mats /= mats.sum(axis=2, keepdims=True)
        templates = fusion.DecisionTemplates(mats, np.ones(4, dtype=int))
        base = fusion.fuse(profile, templates)
        perm = np.array([2, 0, 3, 1])
        # permute class columns and template order together
        mats_p = mats[perm][:, :, perm]
        templates_p = fusion.DecisionTemplates(mats_p, np.ones(4, dtype=int))
        result = fusion.fuse(profile[:, perm], templates_p)
        assert np.allclose(result.raw, base.raw[perm], atol=1e-12)

    def test_classifier_count_mismatch(self):
        with pytest.raises(ParameterError):
            fusion.fuse(WORKED_PROFILE[:2], worked_templates())

    def test_all_zero_supports_fall_back_to_uniform(self, monkeypatch):
        # proximity weights are strictly positive, so an all-zero product
        # can only arise from degenerate belief values; stub them in
        monkeypatch.setattr(fusion, "belief", lambda lam: np.zeros_like(lam))
        result = fusion.fuse(WORKED_PROFILE, worked_templates())
        assert result.total_conflict
        assert np.allclose(result.support, [0.5, 0.5])
        assert np.allclose(result.raw, 0.0)
        assert result.predicted == 0


class TestTwoStage:
    def test_single_row_profiles(self):
        # l = 1 degenerates to template matching on each stage
        t0 = np.array([[[0.9, 0.1]], [[0.2, 0.8]]])
        stage1 = fusion.DecisionTemplates(t0, np.array([1, 1]))
        stage2 = fusion.DecisionTemplates(t0.copy(), np.array([1, 1]))
        final, per_ext = fusion.two_stage_fuse([np.array([[0.88, 0.12]])],
                                               [stage1], stage2)
        assert len(per_ext) == 1
        assert per_ext[0].predicted == 0
        assert final.predicted == 0

    def test_identical_one_hot_rows_all_stages(self):
        # every classifier of every extractor is certain of class 1
        row = np.array([[0.0, 1.0]] * 3)
        mats = np.stack([np.full((3, 2), 0.5), row.astype(float)])
        mats[0] = np.array([[1.0, 0.0]] * 3)
        stage1 = fusion.DecisionTemplates(mats, np.array([1, 1]))
        stage2_mats = np.stack([np.array([[1.0, 0.0]] * 3), np.array([[0.0, 1.0]] * 3)])
        stage2 = fusion.DecisionTemplates(stage2_mats, np.array([1, 1]))
        final, per_ext = fusion.two_stage_fuse([row, row, row],
                                               [stage1, stage1, stage1], stage2)
        assert all(s.predicted == 1 for s in per_ext)
        assert final.predicted == 1
        assert final.support[1] > 0.9

    def test_template_count_mismatch(self):
        stage2 = worked_templates()
        with pytest.raises(ParameterError):
            fusion.two_stage_fuse([WORKED_PROFILE], [], stage2)
