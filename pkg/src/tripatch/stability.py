"""Eigenvalue classification and the closed-form stability catalog.

Ground truth is always the spectrum of the 3×3 Jacobian, computed by an
explicit Cardano/trigonometric cubic solver.  Alongside it, every
equilibrium gets the literature's algebraic tests evaluated numerically:
the coarse trace/minor-sum/determinant sign test (which is necessary but
not sufficient — see the ``{-1, ±i}`` counterexample in the tests), the
full cubic Routh–Hurwitz criterion, and the per-topology closed-form
inequalities keyed by stable condition-id tokens.

Two of the transcribed inequalities are *corrected* relative to their
printed source: the patch-2-at-capacity conditions for the EX2N
topology use m23 where the print had m32 (which is identically zero in
that topology), and the X1 condition for CONVERGE compares r1 — not
r2 — against m21 (the explicit Jacobian entry at X1 is r1 − m21).  Both
corrections are forced by the 2×2 blocks the conditions summarize, and
the classifier-consistency tests would fail with the printed versions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, _coeffs, _jac
from .equilibria import EquilibriumRecord

__all__ = [
    "CharacteristicCoefficients",
    "ConditionRow",
    "StabilityReport",
    "StaleEquilibriumError",
    "characteristic",
    "classify",
    "classify_matrix",
    "eigenvalues_3x3",
    "origin_never_stable_scan",
    "sign_conditions",
    "routh_hurwitz",
]

#: Relative half-width of the MARGINAL band around zero real part.
MARGINAL_BAND = 1e-9
MARGINAL_FLOOR = 1e-12

#: classify() refuses records whose residual exceeds this.
RESIDUAL_LIMIT = 1e-8


class StaleEquilibriumError(ValueError):
    """classify() was handed a record whose residual exceeds 1e-8."""


@dataclass(frozen=True)
class CharacteristicCoefficients:
    """Invariants of a 3×3 matrix: char. poly is λ³ − trace·λ² + m_j·λ − det."""

    trace: float
    m_j: float
    det: float


@dataclass(frozen=True)
class ConditionRow:
    """One evaluated inequality: ``cid`` holds iff comparing lhs to rhs succeeds.

    ``kind`` is ``"stability"`` for rows whose conjunction is the
    closed-form stability criterion of the (topology, label) pair,
    ``"feasibility"`` for existence-range rows, and ``"sign_test"`` for
    the generic trace/minor/determinant rows computed everywhere.
    """

    cid: str
    holds: bool
    lhs: float
    rhs: float
    kind: str


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: tuple[complex, complex, complex]
    coefficients: CharacteristicCoefficients
    classification: str
    conditions: tuple[ConditionRow, ...]


def characteristic(j) -> CharacteristicCoefficients:
    """Trace, principal 2×2 minor sum, and determinant of a 3×3 matrix."""
    a = np.asarray(j, dtype=float)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    tr = a[0, 0] + a[1, 1] + a[2, 2]
    m_j = (
        a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    )
    det = (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )
    return CharacteristicCoefficients(trace=float(tr), m_j=float(m_j), det=float(det))


def _cubic_roots(b: float, c: float, d: float) -> list[complex]:
    """Roots of λ³ + bλ² + cλ + d via depressed-cubic Cardano/trig formulas."""
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0.0:
        s = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
        v = math.copysign(abs(-q / 2.0 - s) ** (1.0 / 3.0), -q / 2.0 - s)
        t1 = u + v
        # Remaining quadratic factor t² + t1·t + (t1² + p) = 0.
        quad_disc = t1 * t1 - 4.0 * (t1 * t1 + p)
        rt = cmath.sqrt(quad_disc)
        roots = [complex(t1), (-t1 + rt) / 2.0, (-t1 - rt) / 2.0]
    elif p == 0.0:
        roots = [0j, 0j, 0j]  # triple root (disc ≤ 0 with p = 0 forces q = 0)
    else:
        rho = math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (2.0 * p * rho)))
        theta = math.acos(arg)
        roots = [
            complex(2.0 * rho * math.cos((theta - 2.0 * math.pi * kk) / 3.0))
            for kk in range(3)
        ]
    return [t - shift for t in roots]


def eigenvalues_3x3(j) -> tuple[complex, complex, complex]:
    """Spectrum of a 3×3 matrix from its characteristic cubic.

    Closed-form (Cardano / trigonometric) roots, each polished by one
    Newton step on the polynomial, returned sorted by descending real
    part (ties broken by descending imaginary part).
    """
    co = characteristic(j)
    b, c, d = -co.trace, co.m_j, -co.det
    roots = _cubic_roots(b, c, d)
    polished = []
    for z in roots:
        f = ((z + b) * z + c) * z + d
        fp = (3.0 * z + 2.0 * b) * z + c
        if abs(fp) > 0.0:
            zn = z - f / fp
            fn = ((zn + b) * zn + c) * zn + d
            # The step refines a simple root; at a repeated root fp is
            # roundoff noise and the step would fling the root away, so
            # keep it only when the residual actually shrinks.
            if abs(fn) < abs(f):
                z = zn
        if abs(z.imag) < 1e-14 * (1.0 + abs(z.real)):
            z = complex(z.real, 0.0)
        polished.append(z)
    polished.sort(key=lambda z: (-z.real, -z.imag))
    return tuple(polished)


def sign_conditions(c: CharacteristicCoefficients) -> tuple[bool, bool, bool]:
    """The coarse sign test: trace < 0, minor sum > 0, determinant < 0.

    Necessary for stability but not sufficient — it omits the
    Routh–Hurwitz product condition, so purely imaginary pairs can slip
    through (see :func:`routh_hurwitz`).
    """
    return (c.trace < 0.0, c.m_j > 0.0, c.det < 0.0)


def routh_hurwitz(c: CharacteristicCoefficients) -> bool:
    """Full cubic Routh–Hurwitz criterion: all roots in the open left half-plane."""
    a1, a2, a3 = -c.trace, c.m_j, -c.det
    return a1 > 0.0 and a3 > 0.0 and a1 * a2 > a3


def _classification(eigenvalues) -> str:
    margin = max(MARGINAL_FLOOR, MARGINAL_BAND * max(abs(z) for z in eigenvalues))
    res = [z.real for z in eigenvalues]
    if all(x < -margin for x in res):
        return "STABLE"
    if any(x > margin for x in res):
        return "UNSTABLE"
    return "MARGINAL"


def classify_matrix(j) -> tuple[str, tuple[complex, ...], CharacteristicCoefficients]:
    """Classify an arbitrary Jacobian; shared by classify() and the sweeps."""
    eig = eigenvalues_3x3(j)
    return _classification(eig), eig, characteristic(j)


# ---------------------------------------------------------------------------
# Closed-form condition catalog, keyed by (topology, equilibrium label).
#
# Each entry maps to a list of (condition id, kind, row builder); a row
# builder takes the flat coefficient tuple and the equilibrium point and
# returns (lhs, rhs, holds).  The conjunction of the "stability" rows of a
# pair is equivalent to all eigenvalues having negative real part, which the
# classifier-consistency suite checks against the spectrum.
# ---------------------------------------------------------------------------


def _gt(lhs, rhs):
    return lhs, rhs, lhs > rhs


def _lt(lhs, rhs):
    return lhs, rhs, lhs < rhs


def _rows_ex2n_x(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [
        ("X_stab_mod7bis_1", "stability", _gt(m31 + m13 + m23, r1 + r3)),
        ("X_stab_mod7bis_2", "stability",
         _gt((m31 - r1) * (m13 + m23 - r3), m13 * m31)),
    ]


def _rows_ex7_origin(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [
        ("stab_orig_mod7bis_1", "stability", _gt(m12 + m32, r2)),
        ("stab_orig_mod7bis_2", "stability", _gt(m13 + m31, r1 + r3)),
        ("stab_orig_mod7bis_3", "stability", _gt(r1 * r3, r1 * m13 + r3 * m31)),
    ]


def _rows_ex7_coex(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [
        ("stab_1_mod7bis", "stability",
         _gt(m12 + m32 + 2.0 * r2 * p[1] / k2, r2)),
    ]


def _rows_ex7_q1(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [("Q1_stab_mod7bis", "stability", _lt(r2, m12 + m32))]


def _rows_ex8_coex(c, p):
    k1 = c[3]
    return [("Stab_8_coex", "stability", _lt(k1, 2.0 * p[0]))]


def _rows_ex8_m2(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [
        ("stab_82_1", "stability", _lt(r2 + r3, m12 + m32 + m13 + m23)),
        ("stab_82_2", "stability",
         _gt((r2 - m12) * (r3 - m13), (r2 - m12) * m23 + (r3 - m13) * m32)),
    ]


def _rows_ex6_coex(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [("ce4", "stability", _gt(r2, m12 + m32))]


def _rows_ex6_i2(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [
        ("stab_I2_1", "stability", _lt(r2, m12 + m32)),
        ("stab_I2_2", "stability", _lt(r3, m13)),
    ]


def _rows_ex6_i3(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [
        ("stab_I2_1", "stability", _lt(r2, m12 + m32)),
        ("feas_I3", "feasibility", _gt(r3, m13)),
    ]


def _rows_chain_w2(c, p):
    r1, r2, r3, k1, k2, k3, m12, m13, m21, m23, m31, m32 = c[:12]
    return [
        ("stab_Q2_1", "stability", _lt(r1, m21)),
        ("stab_Q2_2", "stability", _lt(r2, m32)),
    ]


def _rows_chain_w3(c, p):
    r1, m21 = c[0], c[8]
    return [("stab_Q2_1", "stability", _lt(r1, m21))]


def _rows_conv_x1(c, p):
    r1, r3, m21, m23 = c[0], c[2], c[8], c[9]
    return [
        ("stab_X1_1", "stability", _lt(r1, m21)),
        ("stab_X1_2", "stability", _lt(r3, m23)),
    ]


def _rows_conv_x2(c, p):
    r3, m23 = c[2], c[9]
    return [("feas_X2", "stability", _lt(r3, m23))]


def _rows_conv_y3(c, p):
    r1, m21 = c[0], c[8]
    return [("feas_Y3", "stability", _lt(r1, m21))]


def _rows_conv_coex(c, p):
    r1, r3, m21, m23 = c[0], c[2], c[8], c[9]
    return [
        ("feas_P*_n2_1", "stability", _gt(r1, m21)),
        ("feas_P*_n2_2", "stability", _gt(r3, m23)),
    ]


def _rows_div_z3(c, p):
    r2, m12, m32 = c[1], c[6], c[11]
    return [("stab_Z3", "stability", _lt(r2, m12 + m32))]


def _rows_div_coex(c, p):
    r2, m12, m32 = c[1], c[6], c[11]
    return [("feas_P*_16", "stability", _gt(r2, m12 + m32))]


_CONDITION_TABLE = {
    ("EX2N", "X_EX2N"): _rows_ex2n_x,
    ("EX7", "ORIGIN"): _rows_ex7_origin,
    ("EX7N", "ORIGIN"): _rows_ex7_origin,
    ("EX7", "COEX"): _rows_ex7_coex,
    ("EX7N", "COEX"): _rows_ex7_coex,
    ("EX7", "Q1"): _rows_ex7_q1,
    ("EX7N", "Q1"): _rows_ex7_q1,
    ("EX8", "COEX"): _rows_ex8_coex,
    ("EX8", "M2_EX8"): _rows_ex8_m2,
    ("EX6", "COEX"): _rows_ex6_coex,
    ("EX6", "I2"): _rows_ex6_i2,
    ("EX6", "I3"): _rows_ex6_i3,
    ("CHAIN", "W2"): _rows_chain_w2,
    ("CHAIN", "W3"): _rows_chain_w3,
    ("CONVERGE", "X1"): _rows_conv_x1,
    ("CONVERGE", "X2"): _rows_conv_x2,
    ("CONVERGE", "Y3"): _rows_conv_y3,
    ("CONVERGE", "COEX"): _rows_conv_coex,
    ("DIVERGE", "Z3"): _rows_div_z3,
    ("DIVERGE", "COEX"): _rows_div_coex,
}

#: (topology, label) pairs whose instability is carried by one explicit
#: positive eigenvalue regardless of parameters (an empty patch with an
#: intact growth rate).  Used by the consistency tests.
ALWAYS_UNSTABLE = {
    ("EX2N", "ORIGIN"): "r2",
    ("EX8", "ORIGIN"): "r1",
    ("EX6", "ORIGIN"): "r1",
    ("CHAIN", "ORIGIN"): "r3",
    ("CONVERGE", "ORIGIN"): "r2",
    ("DIVERGE", "ORIGIN"): "r1",
    ("DIVERGE", "Z1"): "r3",
    ("DIVERGE", "Z2"): "r1",
}


def classify(topo: str, eq: EquilibriumRecord, params: ModelParams) -> StabilityReport:
    """Full stability report for one equilibrium of one topology.

    Classifies by the spectrum of the analytic Jacobian at ``eq.point``
    and evaluates every catalog inequality applicable to
    ``(topo, eq.label)``, plus the generic sign-test rows.  Raises
    :class:`StaleEquilibriumError` if the record's residual exceeds
    1e-8 (the point is not actually an equilibrium).
    """
    if eq.residual > RESIDUAL_LIMIT:
        raise StaleEquilibriumError(
            f"record {eq.label} has residual {eq.residual:.2e} > {RESIDUAL_LIMIT:.0e}"
        )
    c = _coeffs(params)
    p = eq.point
    jac = np.array(_jac(c, float(p[0]), float(p[1]), float(p[2]))).reshape(3, 3)
    classification, eig, co = classify_matrix(jac)
    rows = [
        ConditionRow("traceJ", co.trace < 0.0, co.trace, 0.0, "sign_test"),
        ConditionRow("MJ", co.m_j > 0.0, co.m_j, 0.0, "sign_test"),
        ConditionRow("detJ", co.det < 0.0, co.det, 0.0, "sign_test"),
    ]
    builder = _CONDITION_TABLE.get((topo, eq.label))
    if builder is not None:
        for cid, kind, (lhs, rhs, holds) in builder(c, p):
            rows.append(ConditionRow(cid, bool(holds), float(lhs), float(rhs), kind))
    return StabilityReport(
        eigenvalues=eig,
        coefficients=co,
        classification=classification,
        conditions=tuple(rows),
    )


def origin_never_stable_scan(topo: str, n_draws: int, seed: int):
    """Random search for parameters that stabilize the origin under ``topo``.

    Draws r, k uniform in [0.1, 5] and rates uniform in [0, 2] (zeroed
    per topology), classifies the origin of each draw in a vectorized
    batch, and returns the first stabilizing ModelParams — or None,
    which is the expected outcome: every admissible topology keeps some
    escape route from total extinction.
    """
    from .topology import zeroed_rates

    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.1, 5.0, (n_draws, 3))
    k = rng.uniform(0.1, 5.0, (n_draws, 3))
    m = rng.uniform(0.0, 2.0, (n_draws, 3, 3))
    m[:, range(3), range(3)] = 0.0
    for i, j in zeroed_rates(topo):
        m[:, i, j] = 0.0
    jac = m.copy()
    outflow = m.sum(axis=1)  # column sums: total outflow of each patch
    for i in range(3):
        jac[:, i, i] = r[:, i] - outflow[:, i]
    eig = np.linalg.eigvals(jac)
    margins = np.maximum(MARGINAL_FLOOR,
                         MARGINAL_BAND * np.max(np.abs(eig), axis=1))
    stable = np.all(eig.real < -margins[:, None], axis=1)
    idx = np.flatnonzero(stable)
    if idx.size == 0:
        return None
    i = int(idx[0])
    return ModelParams(r[i], k[i], m[i])
