import math
import pickle

import numpy as np
import pytest

from hpaxis import (
    ModelInstance,
    ModelParameters,
    constant_feedback,
    custom_feedback,
    eval_hill,
    integrate,
    jacobian,
    model_from_dict,
    model_to_dict,
    vector_field,
)
from hpaxis.errors import AdmissibilityError, ConfigError
from hpaxis.model import hill_derivative


def make_model(b1, b2, b3, g1, g2, f1, f2):
    return ModelInstance(ModelParameters(b1, b2, b3, g1, g2), f1, f2)


class TestHill:
    def test_zero_concentration_gives_gain(self):
        assert eval_hill(20.0, 20.0, 20.0, 0.0) == 20.0

    def test_symmetric_midpoint(self):
        assert eval_hill(1.0, 1.0, 1.0, 1.0) == 0.5

    def test_reference_production_rate(self):
        # production that balances clearing at the published equilibrium:
        # b1 * R0 = 0.1 * 0.0098
        assert eval_hill(20.0, 20.0, 20.0, 1.4143) == pytest.approx(0.1 * 0.0098, rel=1e-2)

    def test_strictly_decreasing(self):
        grid = np.linspace(0.0, 5.0, 200)
        vals = [eval_hill(2.0, 3.0, 4.0, t) for t in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            eval_hill(20.0, 20.0, 20.0, -1.0)
        for bad in [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)]:
            with pytest.raises(ValueError):
                eval_hill(*bad, 1.0)

    def test_deep_saturation_underflows_to_zero(self):
        # log-space evaluation: beta*T**n overflows double range, value is
        # the correct limit 0 rather than NaN
        v = eval_hill(1.0, 1.0, 100.0, 1e9)
        assert v == 0.0
        d = hill_derivative(1.0, 1.0, 100.0, 1e9)
        assert d == 0.0 or d == -0.0
        # just inside the representable range stays finite and positive
        v2 = eval_hill(1.0, 1.0, 20.0, 1e10)
        assert 0.0 < v2 < 1e-190

    def test_derivative_matches_finite_differences(self):
        cases = [(20.0, 20.0, 20.0, 1.4), (1.0, 1.0, 1.0, 0.5), (5.0, 0.3, 8.0, 2.2), (2.0, 7.0, 3.5, 0.04)]
        for K, beta, n, T in cases:
            h = 1e-6 * (1.0 + T)
            fd = (eval_hill(K, beta, n, T + h) - eval_hill(K, beta, n, T - h)) / (2 * h)
            assert hill_derivative(K, beta, n, T) == pytest.approx(fd, rel=1e-6)

    def test_derivative_nonpositive(self):
        for T in np.linspace(0.0, 10.0, 50):
            assert hill_derivative(3.0, 2.0, 6.0, T) <= 0.0


class TestFeedbackSpec:
    def test_constant_feedback(self):
        f = constant_feedback(2.5)
        assert f(0.0) == 2.5 and f(100.0) == 2.5 and f.deriv(3.0) == 0.0
        assert f.strictly_positive
        assert not constant_feedback(0.0).strictly_positive
        with pytest.raises(ValueError):
            constant_feedback(-1.0)

    def test_custom_requires_monotonicity(self):
        with pytest.raises(AdmissibilityError):
            custom_feedback(lambda t: 1.0 + t, lambda t: 1.0)

    def test_custom_requires_positivity(self):
        with pytest.raises(AdmissibilityError):
            custom_feedback(lambda t: 1.0 - t, lambda t: -1.0, strictly_positive=True, t_max=10.0)
        # the same shape is fine when only nonnegativity is demanded and the
        # sampled window stays nonnegative
        f = custom_feedback(lambda t: max(1.0 - t, 0.0), lambda t: -1.0 if t < 1 else 0.0,
                            strictly_positive=False, t_max=10.0, grid_size=100)
        assert f(0.5) == 0.5

    def test_custom_accepts_exponential_decay(self):
        f = custom_feedback(lambda t: 3.0 * math.exp(-0.5 * t), lambda t: -1.5 * math.exp(-0.5 * t))
        assert f(0.0) == 3.0
        assert f.deriv(0.0) == -1.5

    def test_specs_pickle(self, extended_model):
        clone = pickle.loads(pickle.dumps(extended_model))
        assert clone.f1(1.3) == extended_model.f1(1.3)
        assert clone.params == extended_model.params


class TestVectorField:
    def test_trivial_substitution(self):
        m = make_model(1, 1, 1, 1, 1, constant_feedback(1.0), constant_feedback(0.0))
        assert np.array_equal(vector_field(m, (0.0, 0.0, 0.0)), [1.0, 0.0, 0.0])

    def test_accepts_state_tuples(self, extended_model):
        from hpaxis import State

        s = State(R=0.01, L=3.0, T=1.4)
        assert np.array_equal(vector_field(extended_model, s), vector_field(extended_model, (0.01, 3.0, 1.4)))
        traj = integrate(extended_model, State(0.0, 0.0, 0.0), 1.0)
        assert traj.states.shape[1] == 3

    def test_published_equilibrium_annihilates_field(self, extended_model):
        f = vector_field(extended_model, (0.0094, 3.2589, 1.4169))
        assert np.abs(f).max() <= 1e-5

    def test_classical_reduction_bit_identical(self, classic_model):
        p = classic_model.params
        f1 = classic_model.f1

        def classical_rhs(state):
            R, L, T = state
            return np.array([-p.b1 * R + f1(T), p.g1 * R - p.b2 * L, p.g2 * L - p.b3 * T])

        rng = np.random.default_rng(7)
        for _ in range(20):
            s = rng.uniform(0.0, 5.0, 3)
            ours = vector_field(classic_model, s)
            theirs = classical_rhs(s)
            assert ours[0] == theirs[0] and ours[2] == theirs[2]
            # f2 == 0 contributes exactly +0.0
            assert ours[1] == theirs[1]


class TestJacobian:
    def test_constant_feedbacks_lower_triangular(self):
        m = make_model(0.3, 0.4, 0.5, 1.0, 2.0, constant_feedback(1.0), constant_feedback(0.5))
        J = jacobian(m, (1.0, 1.0, 1.0))
        assert np.array_equal(np.diag(J), [-0.3, -0.4, -0.5])
        assert J[0, 2] == 0.0 and J[1, 2] == 0.0

    def test_matches_finite_differences(self, extended_model, rng):
        # central-difference oracle for the full matrix at random states
        for _ in range(10):
            s = rng.uniform(0.05, 4.0, 3)
            J = jacobian(extended_model, s)
            fd = np.empty((3, 3))
            for j in range(3):
                h = 1e-6 * (1.0 + abs(s[j]))
                sp, sm = s.copy(), s.copy()
                sp[j] += h
                sm[j] -= h
                fd[:, j] = (vector_field(extended_model, sp) - vector_field(extended_model, sm)) / (2 * h)
            assert np.allclose(J, fd, rtol=1e-6, atol=1e-9)

    def test_characteristic_coefficients_positive_at_equilibrium(self, extended_model):
        from hpaxis.equilibria import find_equilibrium
        from hpaxis.stability import characteristic_coefficients

        eq = find_equilibrium(extended_model)
        c2, c1, c0 = characteristic_coefficients(extended_model, eq)
        assert c2 > 0 and c1 > 0 and c0 > 0


class TestForwardInvariance:
    @pytest.mark.parametrize("x0", [(0.0, 0.0, 0.0), (0.0, 3.0, 1.4), (0.01, 0.0, 1.4), (0.01, 3.0, 0.0)])
    def test_boundary_starts_stay_nonnegative(self, extended_model, x0):
        traj = integrate(extended_model, x0, 100.0)
        assert traj.states.min() >= -1e-9

    def test_production_positive_on_R_boundary(self, extended_model):
        f = vector_field(extended_model, (0.0, 1.0, 1.0))
        assert f[0] > 0.0


class TestConfig:
    def doc(self):
        return {
            "b1": 0.1, "b2": 0.015, "b3": 0.023, "g1": 5, "g2": 0.01,
            "f1": {"kind": "hill", "K": 20, "beta": 20, "n": 20},
            "f2": {"kind": "constant", "c": 0},
        }

    def test_round_trip(self):
        m = model_from_dict(self.doc())
        again = model_from_dict(model_to_dict(m))
        assert again.params == m.params
        assert again.f1.params == m.f1.params
        assert m.rate_unit == "1/min"

    def test_declared_unit_is_recorded_not_converted(self):
        doc = self.doc()
        doc["rate_unit"] = "1/h"
        m = model_from_dict(doc)
        assert m.rate_unit == "1/h"
        assert m.params.b1 == 0.1  # numbers untouched

    @pytest.mark.parametrize("mutate", [
        lambda d: d.pop("b1"),
        lambda d: d.__setitem__("b1", -0.1),
        lambda d: d.__setitem__("extra", 1),
        lambda d: d["f1"].__setitem__("kind", "tanh"),
        lambda d: d["f1"].pop("K"),
        lambda d: d["f1"].__setitem__("bogus", 3),
        lambda d: d.__setitem__("f1", {"kind": "constant", "c": 0}),  # f1 must stay positive
        lambda d: d.__setitem__("f2", {"kind": "constant", "c": -1}),
    ])
    def test_invalid_documents_rejected(self, mutate):
        doc = self.doc()
        mutate(doc)
        with pytest.raises(ConfigError):
            model_from_dict(doc)

    def test_load_model_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            from hpaxis import load_model

            load_model(tmp_path / "nope.json")

    def test_load_model_malformed_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            from hpaxis import load_model

            load_model(p)


def test_parameters_validate():
    with pytest.raises(ValueError):
        ModelParameters(0.0, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        ModelParameters(1, 1, 1, 1, math.inf)


def test_model_requires_strictly_positive_f1():
    with pytest.raises(AdmissibilityError):
        ModelInstance(ModelParameters(1, 1, 1, 1, 1), constant_feedback(0.0), constant_feedback(0.0))
