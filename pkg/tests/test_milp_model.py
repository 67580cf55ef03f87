"""Disagreement-model construction, feasibility auditing, and decoding."""

import numpy as np
import pytest

from drifttrack.milp import (
    branch_and_bound,
    build_model,
    check_solution,
    decode_hypothesis,
    export_lp,
    make_tiebreak_model,
)
from drifttrack.polytope import BoxDomain, CoeffBox

DOMAIN = BoxDomain([0.0, 0.0], [1.0, 1.0])
FREE2 = CoeffBox.symmetric(2, 2, 4.0, 4.0)


def small_model(points, labels, n_f=2, coeffs=None, **kwargs):
    return build_model(
        points=points,
        labels=labels,
        n_f=n_f,
        domain=DOMAIN,
        coeffs=coeffs or CoeffBox.symmetric(n_f, 2, 4.0, 4.0),
        **kwargs,
    )


class TestConstruction:
    def test_variable_counts(self):
        # m=3 with one 0-label, two facets, free rows in the plane
        model = small_model([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]], [1, 0, 1])
        names = [v.name for v in model.variables]
        assert sum(n.startswith("s_") for n in names) == 6  # m * n_f
        assert sum(n.startswith("z_") for n in names) == 2  # |I_0| * n_f
        assert sum(n.startswith("v_") for n in names) == 3  # m
        assert sum(n.startswith(("a_", "b_")) for n in names) == 6  # n_f * (n + 1)
        assert model.n_binary == 5

    def test_fixed_rows_have_no_facet_matrix_variables(self):
        A = np.array([[1.0, 0.0], [0.0, 1.0]])
        coeffs = CoeffBox.for_fixed_rows(A, b_lower=[-2.0, -2.0], b_upper=[2.0, 2.0])
        model = small_model([[0.1, 0.2]], [1], coeffs=coeffs, fixed_A=A)
        names = [v.name for v in model.variables]
        assert not any(n.startswith("a_") for n in names)
        assert sum(n.startswith("b_") for n in names) == 2

    def test_row_order_is_deterministic(self):
        points = [[0.1, 0.9], [0.8, 0.2], [0.4, 0.4]]
        labels = [0, 1, 0]
        first = export_lp(small_model(points, labels))
        second = export_lp(small_model(points, labels))
        assert first == second

    def test_slack_bounds_follow_big_m(self):
        model = small_model([[0.5, 0.5], [0.25, 0.25]], [1, 0])
        by_name = {v.name: v for v in model.variables}
        for j in range(2):
            assert by_name[f"s_0_{j}"].upper == pytest.approx(model.big_m.upper[j])
            assert by_name[f"s_1_{j}"].upper == pytest.approx(
                model.rho - model.big_m.lower[j]
            )

    def test_input_validation(self):
        with pytest.raises(ValueError, match="at least one sample"):
            small_model(np.empty((0, 2)), [])
        with pytest.raises(ValueError, match="origin"):
            build_model(
                points=[[0.1, 0.2]],
                labels=[1],
                n_f=1,
                domain=DOMAIN,
                coeffs=CoeffBox(lower=[[0.0, -1.0, -1.0]], upper=[[1.0, 1.0, 1.0]]),
            )
        with pytest.raises(ValueError, match="degenerate"):
            build_model(
                points=[[0.1, 0.2]],
                labels=[1],
                n_f=1,
                domain=DOMAIN,
                coeffs=CoeffBox.symmetric(1, 2, 1.0, 1.0),
                fixed_A=np.array([[1.0, 0.0]]),
            )
        with pytest.raises(ValueError, match="rho"):
            small_model([[0.1, 0.2]], [1], rho=-1e-3)


class TestOptima:
    def test_single_covered_sample_costs_nothing(self):
        model = small_model([[0.3, 0.3]], [1], n_f=1)
        result = branch_and_bound(model)
        assert result.objective == pytest.approx(0.0)
        assert result.nodes == 1  # integral at the root

    def test_identical_points_opposite_labels_cost_one(self):
        # no labeler can agree with both, and ignoring one sample achieves 1
        model = small_model([[0.5, 0.5], [0.5, 0.5]], [1, 0])
        result = branch_and_bound(model)
        assert result.objective == pytest.approx(1.0)
        audit = check_solution(model, result.assignment)
        assert audit.feasible
        assert audit.true_disagreements == 1

    def test_removing_a_sample_never_hurts(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 7))
            points = rng.uniform(0, 1, size=(n, 2))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                continue
            full = branch_and_bound(small_model(points, labels)).objective
            drop = int(rng.integers(0, n))
            reduced_pts = np.delete(points, drop, axis=0)
            reduced_lbl = np.delete(labels, drop)
            if reduced_lbl.size == 0:
                continue
            reduced = branch_and_bound(small_model(reduced_pts, reduced_lbl)).objective
            assert reduced <= full + 1e-9

    def test_encoding_soundness_on_solver_output(self, rng):
        for _ in range(8):
            n = int(rng.integers(3, 8))
            points = rng.uniform(0, 1, size=(n, 2))
            labels = rng.integers(0, 2, size=n)
            model = small_model(points, labels)
            result = branch_and_bound(model)
            a = result.assignment
            hyp = decode_hypothesis(model, a)
            for i in range(n):
                if a[f"v_{i}"] > 0.5:
                    continue
                margins = hyp.margins(points[i])
                if labels[i] == 1:
                    assert np.all(margins <= model.rho + 1e-7)
                else:
                    assert margins.max() >= model.rho - 1e-7


class TestCheckSolution:
    def test_flags_cardinality_violation(self):
        model = small_model([[0.5, 0.5]], [0])
        assignment = {v.name: 0.0 for v in model.variables}
        assignment["z_0_0"] = 1.0
        assignment["z_0_1"] = 1.0  # violates sum z <= n_f - 1
        audit = check_solution(model, assignment)
        assert any(name == "card_0" for name, _ in audit.constraint_violations)

    def test_missing_variable_rejected(self):
        model = small_model([[0.5, 0.5]], [1])
        with pytest.raises(ValueError, match="missing"):
            check_solution(model, {"b_0": 0.0})

    def test_tolerance_flagged_slack_without_disagreement(self):
        # a 0-labeled point placed within rho of the threshold carries slack
        # although its decoded label still agrees
        A = np.array([[1.0]])
        coeffs = CoeffBox.for_fixed_rows(A, b_lower=[-2.0], b_upper=[2.0])
        model = build_model(
            points=[[0.5 + 2e-7]],
            labels=[0],
            n_f=1,
            domain=BoxDomain([0.0], [1.0]),
            coeffs=coeffs,
            fixed_A=A,
            rho=1e-6,
        )
        assignment = {
            "b_0": -0.5,
            "z_0_0": 0.0,
            "s_0_0": 1e-6 - 2e-7,
            "v_0": 1.0,
        }
        audit = check_solution(model, assignment)
        assert audit.feasible
        assert audit.sum_v == 1.0
        assert audit.true_disagreements == 0
        assert audit.tolerance_flags == (0,)

    def test_low_norm_facets_reported(self):
        model = small_model([[0.5, 0.5]], [1])
        assignment = {v.name: 0.0 for v in model.variables}
        audit = check_solution(model, assignment)
        assert audit.low_norm_facets == (0, 1)
        # all-zero rows label the whole space 1
        assert audit.hypothesis.label([0.9, 0.9]) == 1


class TestDecode:
    def test_fixed_rows_pass_through(self):
        A = np.array([[1.0, 0.0], [0.0, 1.0]])
        coeffs = CoeffBox.for_fixed_rows(A, b_lower=[-2.0, -2.0], b_upper=[2.0, 2.0])
        model = small_model([[0.1, 0.2]], [1], coeffs=coeffs, fixed_A=A)
        hyp = decode_hypothesis(model, {"b_0": -0.7, "b_1": -0.9})
        assert np.array_equal(hyp.A, A)
        assert np.allclose(hyp.b, [-0.7, -0.9])

    def test_separable_instance_decodes_to_consistent_labeler(self):
        points = np.array(
            [[0.4, 0.4], [0.5, 0.6], [0.6, 0.45], [0.1, 0.1], [0.9, 0.9], [0.05, 0.95]]
        )
        labels = np.array([1, 1, 1, 0, 0, 0])
        model = small_model(points, labels)
        result = branch_and_bound(model)
        assert result.objective == pytest.approx(0.0)
        audit = check_solution(model, result.assignment)
        assert audit.true_disagreements == 0

    def test_missing_offset_rejected(self):
        model = small_model([[0.1, 0.2]], [1])
        with pytest.raises(ValueError, match="missing"):
            decode_hypothesis(model, {})


class TestTieBreak:
    def test_second_stage_holds_count_and_shrinks(self):
        points = np.array([[0.2, 0.2], [0.4, 0.5], [0.9, 0.9]])
        labels = np.array([1, 1, 0])
        model = small_model(points, labels)
        stage1 = branch_and_bound(model)
        assert stage1.objective == pytest.approx(0.0)
        stage2_model = make_tiebreak_model(model, 0)
        assert not stage2_model.objective_is_integral
        stage2 = branch_and_bound(stage2_model)
        audit = check_solution(model, stage2.assignment)
        assert audit.feasible
        assert audit.sum_v == 0.0
        # offset-sum surrogate can only improve from stage 1 to stage 2
        surrogate1 = -sum(stage1.assignment[f"b_{j}"] for j in range(2))
        surrogate2 = -sum(stage2.assignment[f"b_{j}"] for j in range(2))
        assert surrogate2 <= surrogate1 + 1e-7
