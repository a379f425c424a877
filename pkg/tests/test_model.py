"""Parameter validation, the vector field, and its analytic Jacobian."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tripatch.model import (
    BOUNDARY_TOL,
    PARAM_TOKENS,
    ModelParams,
    ParameterError,
    as_state,
    growth_terms,
    jacobian,
    rhs,
    with_param,
)
from tripatch.topology import permute_params

rates = st.floats(0.1, 5.0)
capacities = st.floats(0.1, 5.0)
migrations = st.floats(0.0, 2.0)
populations = st.floats(0.0, 10.0)


def build(r, k, m6):
    m = np.zeros((3, 3))
    (m[0, 1], m[0, 2], m[1, 0], m[1, 2], m[2, 0], m[2, 1]) = m6
    return ModelParams(np.array(r), np.array(k), m)


params_st = st.builds(
    build,
    st.tuples(rates, rates, rates),
    st.tuples(capacities, capacities, capacities),
    st.tuples(*(migrations,) * 6),
)
state_st = st.tuples(*(populations,) * 3).map(np.array)


def hollow(v):
    """3x3 rate matrix with constant off-diagonal value ``v``."""
    return np.full((3, 3), float(v)) * (1.0 - np.eye(3))


class TestModelParams:
    def test_rejects_nonpositive_growth(self):
        with pytest.raises(ParameterError, match="r\\[1\\]"):
            ModelParams(np.array([1.0, 0.0, 1.0]), np.ones(3), hollow(1))

    def test_rejects_nonpositive_capacity(self):
        with pytest.raises(ParameterError, match="k\\[2\\]"):
            ModelParams(np.ones(3), np.array([1.0, 1.0, -2.0]), hollow(1))

    def test_rejects_bad_shapes(self):
        with pytest.raises(ParameterError, match="shape"):
            ModelParams(np.ones(2), np.ones(3), hollow(1))
        with pytest.raises(ParameterError, match="shape"):
            ModelParams(np.ones(3), np.ones(3), np.zeros((2, 3)))

    def test_rejects_negative_rate(self):
        m = hollow(1)
        m[0, 2] = -0.5
        with pytest.raises(ParameterError, match="m\\[0\\]\\[2\\]"):
            ModelParams(np.ones(3), np.ones(3), m)

    def test_rejects_nonzero_diagonal(self):
        m = hollow(1)
        m[1, 1] = 1e-9
        with pytest.raises(ParameterError, match="m\\[1\\]\\[1\\]"):
            ModelParams(np.ones(3), np.ones(3), m)

    def test_rejects_non_finite(self):
        with pytest.raises(ParameterError, match="non-finite"):
            ModelParams(np.array([1.0, np.nan, 1.0]), np.ones(3), hollow(1))

    def test_arrays_are_frozen(self):
        p = ModelParams(np.ones(3), np.ones(3), hollow(1))
        with pytest.raises(ValueError):
            p.r[0] = 2.0
        with pytest.raises(ValueError):
            p.m[0, 1] = 2.0

    def test_equality_and_hash(self):
        a = ModelParams(np.ones(3), np.ones(3), hollow(1))
        b = ModelParams(np.ones(3), np.ones(3), hollow(1))
        c = ModelParams(np.ones(3), np.ones(3), hollow(2))
        assert a == b and hash(a) == hash(b)
        assert a != c
        assert a != "not params"

    def test_unchecked_skips_validation(self):
        p = ModelParams.unchecked(np.zeros(3), np.ones(3), hollow(1))
        assert np.all(p.r == 0.0), "unchecked must allow r = 0"

    def test_with_param_replaces_each_token(self):
        p = ModelParams(np.ones(3), np.ones(3), hollow(1))
        for token in PARAM_TOKENS:
            q = with_param(p, token, 0.75)
            if token[0] == "r":
                assert q.r[int(token[1]) - 1] == 0.75
            elif token[0] == "k":
                assert q.k[int(token[1]) - 1] == 0.75
            else:
                assert q.m[int(token[1]) - 1, int(token[2]) - 1] == 0.75

    def test_with_param_rejects_unknown_token(self):
        p = ModelParams(np.ones(3), np.ones(3), hollow(1))
        with pytest.raises(ParameterError, match="m11"):
            with_param(p, "m11", 1.0)

    def test_with_param_revalidates(self):
        p = ModelParams(np.ones(3), np.ones(3), hollow(1))
        with pytest.raises(ParameterError):
            with_param(p, "r2", 0.0)


class TestAsState:
    def test_rejects_negative_beyond_tolerance(self):
        with pytest.raises(ValueError, match="p2"):
            as_state([1.0, -1e-9, 1.0])

    def test_accepts_roundoff_negative(self):
        p = as_state([1.0, -0.5 * BOUNDARY_TOL, 1.0])
        assert p[1] == -0.5 * BOUNDARY_TOL

    def test_rejects_bad_shape_and_nan(self):
        with pytest.raises(ValueError, match="shape"):
            as_state([1.0, 2.0])
        with pytest.raises(ValueError, match="non-finite"):
            as_state([1.0, np.inf, 1.0])


class TestRhs:
    def test_migration_direction_is_into_from(self):
        # Growth off; only the rate into patch 2 from patch 1 is set.
        m = np.zeros((3, 3))
        m[1, 0] = 1.0
        p = ModelParams.unchecked(np.zeros(3), np.ones(3), m)
        f = rhs(p, [2.0, 0.0, 0.0])
        assert np.allclose(f, [-2.0, 2.0, 0.0]), (
            f"m[1][0] must move mass from patch 1 into patch 2, got {f}"
        )

    def test_single_patch_logistic(self):
        p = ModelParams(np.array([2.0, 1.0, 1.0]), np.array([4.0, 1.0, 1.0]),
                        np.zeros((3, 3)))
        f = rhs(p, [1.0, 0.0, 0.0])
        assert f[0] == pytest.approx(2.0 * 1.0 * (1.0 - 0.25))
        assert f[1] == f[2] == 0.0

    @given(params_st, state_st)
    @settings(max_examples=200, deadline=None)
    def test_uncoupled_patches_grow_logistically(self, p, x):
        decoupled = ModelParams(p.r, p.k, np.zeros((3, 3)))
        expect = decoupled.r * x * (1.0 - x / decoupled.k)
        assert np.allclose(rhs(decoupled, x), expect, atol=1e-12)

    @given(params_st, state_st)
    @settings(max_examples=200, deadline=None)
    def test_migration_conserves_mass_when_growth_off(self, p, x):
        frozen = ModelParams.unchecked(np.zeros(3), p.k, p.m)
        total = float(np.sum(rhs(frozen, x)))
        scale = max(1.0, float(np.max(x)) * float(np.max(p.m)))
        assert abs(total) <= 1e-12 * scale, (
            f"sum(rhs) = {total} for rates {p.m.tolist()} at {x.tolist()}"
        )

    @given(params_st, state_st, st.permutations([0, 1, 2]))
    @settings(max_examples=200, deadline=None)
    def test_equivariant_under_patch_relabeling(self, p, x, perm):
        perm = tuple(perm)
        q = permute_params(p, perm)
        lhs = rhs(q, x[list(perm)])
        assert np.allclose(lhs, rhs(p, x)[list(perm)], atol=1e-12)


class TestJacobian:
    @given(params_st, state_st)
    @settings(max_examples=150, deadline=None)
    def test_matches_central_differences(self, p, x):
        x = x + 1e-3  # keep the downward probe inside the orthant
        jac = jacobian(p, x)
        fd = np.empty((3, 3))
        for j in range(3):
            h = 1e-6 * (1.0 + abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            fd[:, j] = (rhs(p, xp) - rhs(p, xm)) / (2.0 * h)
        scale = max(1.0, float(np.max(np.abs(jac))))
        gap = float(np.max(np.abs(jac - fd))) / scale
        assert gap <= 1e-5, f"relative FD gap {gap} at state {x.tolist()}"

    @given(params_st, state_st)
    @settings(max_examples=100, deadline=None)
    def test_offdiagonal_equals_rate_matrix(self, p, x):
        jac = jacobian(p, x)
        off = jac - np.diag(np.diag(jac))
        m_off = p.m - np.diag(np.diag(p.m))
        assert np.array_equal(off, m_off), (
            "off-diagonal Jacobian entries must be the migration rates"
        )

    @given(params_st)
    @settings(max_examples=100, deadline=None)
    def test_growth_terms_landmarks(self, p):
        assert np.allclose(growth_terms(p, np.zeros(3)), p.r)
        assert np.allclose(growth_terms(p, p.k / 2.0), np.zeros(3), atol=1e-12)
        assert np.allclose(growth_terms(p, p.k), -p.r)
