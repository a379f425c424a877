"""Eigenvalue machinery, sign tests, and the condition catalog."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import draw_params
from tripatch.equilibria import EquilibriumRecord, find_all_equilibria
from tripatch.model import ModelParams, with_param
from tripatch.stability import (
    CharacteristicCoefficients,
    StaleEquilibriumError,
    characteristic,
    classify,
    classify_matrix,
    eigenvalues_3x3,
    origin_never_stable_scan,
    routh_hurwitz,
    sign_conditions,
)
from tripatch.topology import TOPOLOGIES, apply_topology


def sorted_eigs(j):
    e = sorted(np.linalg.eigvals(j), key=lambda z: (-z.real, -z.imag))
    return np.array(e)


class TestCharacteristic:
    def test_known_matrix(self):
        j = np.array([[2.0, 0, 0], [0, 3.0, 0], [0, 0, 5.0]])
        co = characteristic(j)
        assert (co.trace, co.m_j, co.det) == (10.0, 31.0, 30.0)

    def test_shape_is_checked(self):
        with pytest.raises(ValueError, match="3x3"):
            characteristic(np.eye(2))


class TestEigenvalues:
    def test_matches_numpy_on_random_matrices(self):
        rng = np.random.default_rng(42)
        for i in range(300):
            j = rng.normal(0.0, 3.0, (3, 3))
            ours = np.array(eigenvalues_3x3(j))
            ref = sorted_eigs(j)
            scale = 1.0 + float(np.max(np.abs(ref)))
            err = float(np.max(np.abs(ours - ref))) / scale
            assert err < 1e-9, f"matrix {i}: eigenvalue error {err:.2e}"

    def test_double_root_is_not_split(self):
        # Symmetric coupling makes the Jacobian have spectrum (-1, -4, -4);
        # the repeated root must not be torn apart by the polish step.
        j = np.array([[-3.0, 1, 1], [1, -3.0, 1], [1, 1, -3.0]])
        eig = eigenvalues_3x3(j)
        assert eig[0] == pytest.approx(-1.0, abs=1e-12)
        assert eig[1] == pytest.approx(-4.0, abs=1e-7)
        assert eig[2] == pytest.approx(-4.0, abs=1e-7)
        assert sum(z.real for z in eig) == pytest.approx(-9.0, abs=1e-9)

    def test_complex_pair_detected(self):
        # Companion matrix of λ³ + λ² + λ + 1 = (λ + 1)(λ² + 1).
        j = np.array([[0.0, 1, 0], [0, 0, 1.0], [-1.0, -1, -1]])
        eig = eigenvalues_3x3(j)
        assert eig[0] == pytest.approx(1j, abs=1e-12)
        assert eig[1] == pytest.approx(-1j, abs=1e-12)
        assert eig[2] == pytest.approx(-1.0, abs=1e-12)

    def test_real_roots_have_zero_imaginary_part(self):
        j = np.diag([-1.0, -2.0, -3.0]) + 0.1
        for z in eigenvalues_3x3(j):
            assert z.imag == 0.0


class TestSignTests:
    def test_imaginary_pair_fools_sign_test_but_not_routh_hurwitz(self):
        # λ³ + λ² + λ + 1 has roots {-1, ±i}: every coefficient sign is
        # right, yet a1·a2 = a3 sits exactly on the oscillation boundary.
        co = CharacteristicCoefficients(trace=-1.0, m_j=1.0, det=-1.0)
        assert sign_conditions(co) == (True, True, True)
        assert not routh_hurwitz(co)

    def test_agreement_on_strictly_stable_spectrum(self):
        co = characteristic(np.diag([-1.0, -2.0, -3.0]))
        assert all(sign_conditions(co))
        assert routh_hurwitz(co)

    def test_routh_hurwitz_matches_spectrum(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            j = rng.normal(0.0, 2.0, (3, 3))
            ref = sorted_eigs(j)
            margin = 1e-9 * (1.0 + float(np.max(np.abs(ref))))
            if abs(float(np.max(ref.real))) < margin:
                continue  # too close to the boundary to call
            assert routh_hurwitz(characteristic(j)) == bool(
                np.max(ref.real) < 0.0
            )


class TestClassifyMatrix:
    def test_three_way_vocabulary(self):
        assert classify_matrix(np.diag([-1.0, -2, -3]))[0] == "STABLE"
        assert classify_matrix(np.diag([-1.0, -2, 3]))[0] == "UNSTABLE"
        assert classify_matrix(np.diag([-1.0, -2, 0]))[0] == "MARGINAL"

    def test_marginal_band_is_relative(self):
        # A real part at 1e-12 against eigenvalues of size ~1 is noise,
        # not instability.
        assert classify_matrix(np.diag([-1.0, -2.0, 1e-12]))[0] == "MARGINAL"


class TestClassify:
    def symmetric_full(self):
        m = np.full((3, 3), 1.0) * (1 - np.eye(3))
        return ModelParams(np.ones(3), np.ones(3), m)

    def test_symmetric_coexistence_is_stable(self):
        p = self.symmetric_full()
        recs = {r.label: r for r in find_all_equilibria("FULL", p)}
        rep = classify("FULL", recs["COEX"], p)
        assert rep.classification == "STABLE"
        by_cid = {row.cid: row for row in rep.conditions}
        assert set(by_cid) >= {"traceJ", "MJ", "detJ"}
        assert all(by_cid[cid].holds for cid in ("traceJ", "MJ", "detJ"))
        assert rep.eigenvalues[0] == pytest.approx(-1.0, abs=1e-10)

    def test_symmetric_origin_is_unstable(self):
        p = self.symmetric_full()
        recs = {r.label: r for r in find_all_equilibria("FULL", p)}
        rep = classify("FULL", recs["ORIGIN"], p)
        assert rep.classification == "UNSTABLE"
        assert not all(row.holds for row in rep.conditions
                       if row.kind == "sign_test")

    def test_single_patch_landmark_conditions(self):
        # One-source parameters where the closed-form rows for the
        # boundary state (k1, 0, 0) are known to hold.
        p = ModelParams(
            np.array([3.0759202711002276, 1.1929939285255269,
                      0.7565369458169573]),
            np.array([1.713517945887594, 0.5709313242879205,
                      1.8926155818722006]),
            np.array([
                [0.0, 1.4520278555845525, 1.740698495204055],
                [0.0, 0.0, 1.4541977791699672],
                [0.0, 0.2816153631316659, 0.0],
            ]),
        )
        recs = {r.label: r for r in find_all_equilibria("EX8", p)}
        assert "M2_EX8" in recs
        assert np.allclose(recs["M2_EX8"].point, [p.k[0], 0.0, 0.0],
                           atol=1e-12)
        rep = classify("EX8", recs["M2_EX8"], p)
        assert rep.classification == "STABLE"
        by_cid = {row.cid: row for row in rep.conditions}
        for cid in ("stab_82_1", "stab_82_2"):
            assert by_cid[cid].holds, f"{cid} should hold for this draw"
            assert by_cid[cid].kind == "stability"

    def test_exact_threshold_gives_exact_zero_eigenvalue(self):
        # r2 = m12 + m32 makes one eigenvalue of the patch-2-free states
        # exactly zero in floating point, so the branch point is MARGINAL.
        rng = np.random.default_rng(606)
        p = apply_topology(draw_params(rng, m_lo=0.2), "EX6")
        p = with_param(p, "r2", float(p.m[0, 1] + p.m[2, 1]))
        partner = "I2" if p.r[2] < p.m[0, 2] else "I3"
        recs = {r.label: r for r in find_all_equilibria("EX6", p)}
        rep = classify("EX6", recs[partner], p)
        smallest = min(abs(z.real) for z in rep.eigenvalues)
        assert smallest <= 1e-12, f"expected an exact zero, got {smallest}"
        assert rep.classification != "STABLE"

    def test_stale_record_is_rejected(self):
        p = self.symmetric_full()
        fake = EquilibriumRecord(point=np.array([0.5, 0.5, 0.5]),
                                 label="COEX", feasible=True,
                                 residual=1e-3)
        with pytest.raises(StaleEquilibriumError, match="residual 1.00e-03"):
            classify("FULL", fake, p)

    def test_stability_rows_match_spectrum(self):
        # The conjunction of "stability" rows is the closed-form version
        # of "all eigenvalues in the left half-plane"; away from the
        # boundary the two must agree for every cataloged *feasible*
        # pair (the rows assume the state actually exists).
        rng = np.random.default_rng(99)
        checked = 0
        for topo in TOPOLOGIES:
            for _ in range(20):
                p = apply_topology(draw_params(rng), topo)
                for rec in find_all_equilibria(topo, p):
                    if not rec.feasible:
                        continue
                    rep = classify(topo, rec, p)
                    rows = [r for r in rep.conditions if r.kind == "stability"]
                    if not rows:
                        continue
                    margin = max(1e-9, 1e-6 * max(
                        abs(z) for z in rep.eigenvalues))
                    if min(abs(z.real) for z in rep.eigenvalues) <= margin:
                        continue
                    if any(abs(r.lhs - r.rhs) <= 1e-6 * (1 + abs(r.lhs))
                           for r in rows):
                        continue
                    checked += 1
                    assert all(r.holds for r in rows) == (
                        rep.classification == "STABLE"
                    ), f"{topo}/{rec.label}: rows disagree with spectrum"
        assert checked > 100, f"only {checked} interior cases exercised"


class TestOriginScan:
    @pytest.mark.parametrize("topo", ("FULL", "EX6", "CHAIN", "DIVERGE"))
    def test_no_stabilizing_draw_exists(self, topo):
        assert origin_never_stable_scan(topo, 3000, seed=1) is None

    def test_rejects_empty_scan(self):
        with pytest.raises(ValueError, match="n_draws"):
            origin_never_stable_scan("FULL", 0, seed=0)
