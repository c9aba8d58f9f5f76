"""Jacobians, singular spectra, and gradient-subspace extraction."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import effparam.geometry as geo
from effparam.errors import ConfigurationError, NumericError
from effparam.models import ModelDefinition, ObservationProtocol, get_model

# frozen reference: singular values of the singpert response Jacobian at
# (eps, y0) = (0.3, 4), cross-checked against a direct scipy integration
SINGPERT_SV_03 = np.array([4.11721256, 0.05304993])
SINGPERT_RATIO_03 = 1.288491e-2
SINGPERT_RATIO_1E3 = 1.743260e-5
CASCADE_EPS = (0.3, 0.1, 0.03, 0.01, 0.003, 0.001)


def _constant_model():
    def evaluate(inputs, protocol=None):
        arr = np.atleast_2d(np.asarray(inputs, dtype=float))
        return np.ones((len(arr), 3))

    return ModelDefinition(
        model_id="flat3",
        input_names=("a", "b"),
        admissible_ranges=((-1.0, 1.0), (-1.0, 1.0)),
        solver_kind="closed-form",
        default_protocol=ObservationProtocol(variable="c", times=(1.0,)),
        evaluate=evaluate,
    )


class TestJacobian:
    def test_toy_analytic_rows_at_unit_point(self):
        toy = get_model("toy")
        J = geo.jacobian(toy, (1.0, 1.0))
        assert J.method == "analytic"
        expect = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
        assert np.abs(J.matrix - expect).max() < 1e-12

    def test_toy_symbolic_rows_elsewhere(self):
        # rows follow (p2, p1), (1/p1, 1/p2), (2 p1 p2^2, 2 p1^2 p2)
        toy = get_model("toy")
        J = geo.jacobian(toy, (2.0, 0.5))
        expect = np.array([[0.5, 2.0], [0.5, 2.0], [1.0, 4.0]])
        assert np.abs(J.matrix - expect).max() < 1e-12

    def test_null_direction_kills_fd_jacobian(self):
        toy = get_model("toy")
        J = geo.jacobian(toy, (1.0, 1.0), method="finite-difference")
        v = np.array([1.0, -1.0])  # tangent to the level set p1*p2 = 1
        assert np.linalg.norm(J.matrix @ v) < 1e-5

    def test_fd_matches_analytic(self):
        for model_id, point in [("toy", (0.7, 1.4)), ("singpert", (0.3, 4.0))]:
            model = get_model(model_id)
            Ja = geo.jacobian(model, point, method="analytic")
            Jf = geo.jacobian(model, point, method="finite-difference")
            scale = np.abs(Ja.matrix).max()
            assert np.abs(Ja.matrix - Jf.matrix).max() < 1e-5 * scale

    def test_constant_model_gives_zero_matrix(self):
        model = _constant_model()
        J = geo.jacobian(model, (0.2, -0.3))
        assert J.method == "finite-difference"
        assert np.all(J.matrix == 0.0)

    def test_method_selection(self):
        regpert = get_model("regpert")
        assert geo.jacobian(regpert, (1.5, 0.01)).method == "finite-difference"
        with pytest.raises(ConfigurationError):
            geo.jacobian(regpert, (1.5, 0.01), method="analytic")
        with pytest.raises(ConfigurationError):
            geo.jacobian(regpert, (1.5, 0.01), method="symbolic")

    def test_validation(self):
        toy = get_model("toy")
        with pytest.raises(ConfigurationError):
            geo.jacobian(toy, (1.0, 1.0, 1.0))
        with pytest.raises(ConfigurationError):
            geo.JacobianMatrix(matrix=np.ones((3, 2)), point=np.ones(3),
                               method="analytic")
        with pytest.raises(NumericError):
            geo.JacobianMatrix(matrix=np.array([[np.nan, 1.0]]),
                               point=np.ones(2), method="analytic")

    @settings(max_examples=20, deadline=None)
    @given(eps=st.floats(0.05, 1.0), y0=st.floats(3.0, 5.0))
    def test_fd_analytic_agreement_property(self, eps, y0):
        sing = get_model("singpert")
        Ja = geo.jacobian(sing, (eps, y0), method="analytic")
        Jf = geo.jacobian(sing, (eps, y0), method="finite-difference")
        scale = np.abs(Ja.matrix).max()
        assert np.abs(Ja.matrix - Jf.matrix).max() < 1e-5 * scale


class TestSensitivitySummary:
    def test_identity(self):
        J = geo.JacobianMatrix(matrix=np.eye(2), point=np.zeros(2),
                               method="analytic")
        summ = geo.sensitivity_summary(J)
        assert np.allclose(summ.singular_values, [1.0, 1.0])
        assert np.allclose(summ.metric, np.eye(2))
        assert summ.rank == 2

    def test_singpert_reference_spectrum(self):
        sing = get_model("singpert")
        summ = geo.sensitivity_summary(geo.jacobian(sing, (0.3, 4.0)))
        assert np.abs(summ.singular_values / SINGPERT_SV_03 - 1.0).max() < 1e-6
        ratio = summ.singular_values[1] / summ.singular_values[0]
        assert abs(ratio / SINGPERT_RATIO_03 - 1.0) < 1e-4
        # two directions survive the default threshold, one a stricter one
        assert summ.rank == 2
        strict = geo.sensitivity_summary(geo.jacobian(sing, (0.3, 4.0)),
                                         rank_ratio=0.05)
        assert strict.rank == 1

    def test_singpert_stiff_limit_rank_deficient(self):
        sing = get_model("singpert")
        summ = geo.sensitivity_summary(geo.jacobian(sing, (1e-3, 4.0)))
        ratio = summ.singular_values[1] / summ.singular_values[0]
        assert ratio < 1e-2
        assert abs(ratio / SINGPERT_RATIO_1E3 - 1.0) < 1e-3
        assert summ.rank == 1

    def test_ratio_cascade_strictly_decreasing(self):
        sing = get_model("singpert")
        ratios = []
        for eps in CASCADE_EPS:
            sv = geo.sensitivity_summary(
                geo.jacobian(sing, (eps, 4.0))).singular_values
            ratios.append(sv[1] / sv[0])
        assert np.all(np.diff(ratios) < 0)

    def test_zero_matrix_rank_zero(self):
        J = geo.JacobianMatrix(matrix=np.zeros((3, 2)), point=np.zeros(2),
                               method="analytic")
        assert geo.sensitivity_summary(J).rank == 0

    def test_rank_ratio_validation(self):
        J = geo.JacobianMatrix(matrix=np.eye(2), point=np.zeros(2),
                               method="analytic")
        with pytest.raises(ConfigurationError):
            geo.sensitivity_summary(J, rank_ratio=0.0)
        with pytest.raises(ConfigurationError):
            geo.sensitivity_summary(J, rank_ratio=1.5)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10 ** 6), rows=st.integers(2, 6),
           cols=st.integers(1, 4))
    def test_metric_eigenvalues_match_squared_sv(self, seed, rows, cols):
        rng = np.random.default_rng(seed)
        mat = rng.normal(size=(max(rows, cols), cols))
        J = geo.JacobianMatrix(matrix=mat, point=np.zeros(cols),
                               method="analytic")
        summ = geo.sensitivity_summary(J)
        eig = np.sort(np.linalg.eigvalsh(summ.metric))[::-1]
        sv2 = summ.singular_values ** 2
        assert np.abs(eig - sv2).max() <= 1e-8 * max(sv2[0], 1e-30)


class TestActiveSubspace:
    @staticmethod
    def _grid(n=21):
        axis = np.linspace(-1.0, 1.0, n)
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def test_exponential_ridge(self):
        pts = self._grid()
        grads = np.exp(pts[:, 0] + pts[:, 1])[:, None] * np.ones((1, 2))
        sub = geo.active_subspace(pts, grads)
        w1 = sub.eigenvectors[:, 0]
        assert np.abs(w1 - np.array([1.0, 1.0]) / np.sqrt(2.0)).max() < 1e-6
        assert sub.eigenvalues[1] < 1e-12 * sub.eigenvalues[0]
        assert np.allclose(sub.first_scores,
                           (pts[:, 0] + pts[:, 1]) / np.sqrt(2.0))

    def test_linear_function(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(-1.0, 1.0, size=(50, 2))
        grads = np.tile([3.0, 0.0], (50, 1))
        sub = geo.active_subspace(pts, grads)
        assert np.allclose(sub.eigenvalues, [9.0, 0.0])
        assert np.allclose(sub.eigenvectors[:, 0], [1.0, 0.0])

    def test_callable_supplier_matches_array(self):
        pts = self._grid(9)

        def grad(x):
            return np.exp(x[0] + x[1]) * np.ones(2)

        grads = np.exp(pts[:, 0] + pts[:, 1])[:, None] * np.ones((1, 2))
        a = geo.active_subspace(pts, grad)
        b = geo.active_subspace(pts, grads)
        assert np.allclose(a.covariance, b.covariance)
        assert np.allclose(a.first_scores, b.first_scores)

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(17)
        pts = rng.normal(size=(200, 3))
        grads = rng.normal(size=(200, 3)) * np.array([2.0, 0.5, 0.1])
        base = geo.active_subspace(pts, grads)
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        rot = geo.active_subspace(pts @ Q.T, grads @ Q.T)
        expect = Q @ base.eigenvectors
        # align signs column by column before comparing
        flip = np.sign(np.sum(expect * rot.eigenvectors, axis=0))
        assert np.abs(rot.eigenvectors * flip - expect).max() < 1e-8
        assert np.abs(rot.eigenvalues - base.eigenvalues).max() < 1e-10

    def test_sign_convention(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(40, 3))
        grads = rng.normal(size=(40, 3))
        sub = geo.active_subspace(pts, grads)
        for col in sub.eigenvectors.T:
            assert col[np.argmax(np.abs(col))] > 0

    def test_orthonormal_eigenvectors(self):
        rng = np.random.default_rng(6)
        sub = geo.active_subspace(rng.normal(size=(30, 4)),
                                  rng.normal(size=(30, 4)))
        gram = sub.eigenvectors.T @ sub.eigenvectors
        assert np.abs(gram - np.eye(4)).max() < 1e-12

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            geo.active_subspace(np.empty((0, 2)), np.empty((0, 2)))
        with pytest.raises(ConfigurationError):
            geo.active_subspace(np.ones((5, 2)), np.ones((4, 2)))
        with pytest.raises(NumericError):
            geo.active_subspace(np.ones((2, 2)),
                                np.array([[1.0, np.nan], [1.0, 1.0]]))


class TestFiniteDifferenceGradient:
    def test_quadratic(self):
        grad = geo.finite_difference_gradient(
            lambda x: float(np.sum(x ** 2)), [1.0, 2.0])
        assert np.abs(grad - [2.0, 4.0]).max() < 1e-8

    def test_nonfinite_raises(self):
        with pytest.raises(NumericError):
            geo.finite_difference_gradient(
                lambda x: float("nan"), [1.0, 2.0])
