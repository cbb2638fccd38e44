"""Closed-form singular structure of the meridian system.

For one species the singular locus is {det(F1, [F1,F0]) = 0} =
{y * (gamma - 2*delta*z) = 0}: the vertical axis y = 0 and the horizontal
line z = z0 = gamma/(2*delta).  The singular control solves
D' + u*D = 0 with D = det(F1, [[F1,F0],F1]) and D' = det(F1, [[F1,F0],F0]),
and the collinear set is {D'' = det(F1, F0) = 0}.  For the two-spin system
the same objects become 4x4 determinants against F0, F1 and the brackets.
"""

from dataclasses import dataclass

import numpy as np

from .model import DEFAULT_BOUND, as_state_array, eval_bracket, eval_field

# membership band for "state on the singular set"
TOL_LOCUS = 1e-9
# below this, -D'/D is left to the saturation analysis
TOL_DIV = 1e-12
TOL_DEGENERATE = 1e-12


class GeometryError(RuntimeError):
    """Degenerate or out-of-domain request on the singular structure."""


@dataclass(frozen=True)
class SingularLocusReport:
    """Evaluation of det(F1, [F1,F0]) with locus-membership flags."""

    det_value: float
    on_vertical: bool
    on_horizontal: bool
    z0: float


@dataclass(frozen=True)
class DeterminantPair:
    """Singular-control determinants; d_second only exists for one spin."""

    d: float
    d_prime: float
    d_second: float = None


def _det2(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _det3(m):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _det4(cols):
    """4x4 determinant by first-column minor expansion (no pivoting)."""
    m = [[cols[j][i] for j in range(4)] for i in range(4)]
    out = 0.0
    sign = 1.0
    for i in range(4):
        minor = [row[1:] for k, row in enumerate(m) if k != i]
        out += sign * m[i][0] * _det3(minor)
        sign = -sign
    return out


def singular_locus(state, params):
    """det(F1, [F1,F0]) at a planar single-spin state, with locus flags."""
    q = as_state_array(state)
    if q.size != 2:
        raise GeometryError("singular_locus is a single-spin diagnostic")
    det = _det2(eval_field("F1", q, params), eval_bracket("ad1", q, params))
    delta = params.delta
    z0 = params.gamma / (2.0 * delta) if abs(delta) > TOL_DEGENERATE else np.nan
    return SingularLocusReport(
        det_value=det,
        on_vertical=bool(abs(q[0]) < TOL_LOCUS),
        on_horizontal=bool(np.isfinite(z0) and abs(q[1] - z0) < TOL_LOCUS),
        z0=z0,
    )


def horizontal_line(params):
    """(z0, admissible) for the horizontal singular line z = z0.

    z0 = gamma/(2*delta); the line meets the open unit disk iff
    big_gamma > 3*gamma/2, i.e. -1 < z0 < 0.
    """
    delta = params.delta
    if abs(delta) < TOL_DEGENERATE:
        raise GeometryError("T1 = T2 species: no horizontal singular line")
    z0 = params.gamma / (2.0 * delta)
    return z0, params.big_gamma > 1.5 * params.gamma


def determinant_pair(state, params):
    """D, D', D'' for one spin, or the 4x4 D, D' for a spin pair."""
    q = as_state_array(state)
    if q.size == 2:
        f1 = eval_field("F1", q, params)
        return DeterminantPair(
            d=_det2(f1, eval_bracket("ad101", q, params)),
            d_prime=_det2(f1, eval_bracket("ad100", q, params)),
            d_second=_det2(f1, eval_field("F0", q, params)),
        )
    return two_spin_determinants(q, params)


def two_spin_determinants(state, params):
    """4x4 determinants det(F0, F1, [F1,F0], *) for the product system.

    d uses [[F1,F0],F1] in the last column, d_prime uses [[F1,F0],F0]; both
    are expanded directly (fixed size, no pivoting).  Zero values are
    legitimate outputs.
    """
    q = as_state_array(state)
    if q.size != 4:
        raise GeometryError("two_spin_determinants needs a 4-component state")
    f0 = eval_field("F0", q, params)
    f1 = eval_field("F1", q, params)
    ad1 = eval_bracket("ad1", q, params)
    return DeterminantPair(
        d=_det4((f0, f1, ad1, eval_bracket("ad101", q, params))),
        d_prime=_det4((f0, f1, ad1, eval_bracket("ad100", q, params))),
    )


def singular_control_2d(state, params):
    """Feedback singular control -D'/D at a planar state on the locus.

    Equals 0 on the vertical axis and gamma*(2*big_gamma - gamma)/(2*delta*y)
    on the horizontal line; |u| diverges as y -> 0 there.
    """
    report = singular_locus(state, params)
    if abs(report.det_value) > TOL_LOCUS:
        raise GeometryError(
            f"state off the singular locus (det = {report.det_value:.3e})"
        )
    pair = determinant_pair(state, params)
    if abs(pair.d) < TOL_DIV:
        raise GeometryError("singular control undefined: |D| below 1e-12")
    return -pair.d_prime / pair.d


def classify_singular_line(state, params):
    """'fast' iff D*D'' > 0 at a locus point, 'slow' iff D*D'' < 0."""
    report = singular_locus(state, params)
    if abs(report.det_value) > TOL_LOCUS:
        raise GeometryError("state off the singular locus")
    pair = determinant_pair(state, params)
    prod = pair.d * pair.d_second
    if abs(prod) < 1e-14:
        raise GeometryError("undetermined: |D*D''| below 1e-14")
    return "fast" if prod > 0.0 else "slow"


def clock_form_sign(state, params):
    """Sign of the clock-form area density y*(gamma - 2*delta*z).

    Defined away from the collinear set {D'' = 0}; returns 0 on the singular
    locus itself.
    """
    q = as_state_array(state)
    pair = determinant_pair(q, params)
    if abs(pair.d_second) <= TOL_DIV:
        raise GeometryError("clock form undefined on the collinear set")
    expr = q[0] * (params.gamma - 2.0 * params.delta * q[1])
    if abs(expr) < 1e-14:
        return 0
    return 1 if expr > 0.0 else -1


def saturation_point(params, m=DEFAULT_BOUND):
    """|y| at which the horizontal singular control reaches the bound m.

    |y_B| = gamma*(2*big_gamma - gamma) / (2*|delta|*m).
    """
    _, admissible = horizontal_line(params)
    if not admissible:
        raise GeometryError("horizontal singular line outside the disk")
    if m <= 0.0:
        raise GeometryError("control bound must be positive")
    g, bg = params.gamma, params.big_gamma
    return g * (2.0 * bg - g) / (2.0 * abs(params.delta) * m)
