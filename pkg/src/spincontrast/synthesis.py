"""Time-minimal saturation policies for one spin species.

The target is the origin of the meridian disk, reached from the north pole.
When the horizontal singular line z0 = gamma/(2*delta) cuts the disk
(big_gamma > 3*gamma/2) and the control bound is large enough, the minimal
policy is a four-arc concatenation

    bang(+m)  ->  horizontal singular  ->  bang (bridge)  ->  vertical singular

with the bridge landing on the axis y = 0 below the origin and the final arc
pure relaxation (singular control 0) through z = 0.  The exit point of the
horizontal arc is the single free parameter; it is optimized here by a
bounded derivative-free search.  The classical inversion-recovery sequence
(inverting bang plus vertical relaxation) is provided as the baseline.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from . import geometry
from .extremal_flow import (
    FlowError,
    bang,
    coordinate_event,
    integrate_arc,
    singular_affine,
    switch_event,
    ExtremalSystem,
)
from .model import DEFAULT_BOUND

TARGET_TOL = 1e-6
LINE_TOL = 1e-8
EXIT_XATOL = 1e-10


class SynthesisError(RuntimeError):
    """Policy construction failed (degenerate species or control bound)."""


@dataclass
class SynthesisArc:
    label: str
    duration: float
    start: np.ndarray
    end: np.ndarray
    trajectory: object          # ArcResult
    control_description: str

    def to_dict(self):
        return {
            "label": self.label,
            "duration": self.duration,
            "start": [float(v) for v in self.start],
            "end": [float(v) for v in self.end],
            "control": self.control_description,
        }


@dataclass
class SynthesisPolicy:
    """Ordered arcs with junction states and the realized total time."""

    arcs: list
    total_time: float
    target_error: float
    params: object
    m: float
    z0: float = None
    diagnostics: dict = field(default_factory=dict)

    def labels(self):
        return [a.label for a in self.arcs]

    def spin_samples(self):
        """Concatenated (t, y, z, u, arc_index) samples over all arcs."""
        rows = []
        t_off = 0.0
        for k, arc in enumerate(self.arcs):
            tr = arc.trajectory
            start = 1 if k > 0 else 0   # drop duplicated junction sample
            for i in range(start, len(tr.t)):
                rows.append((t_off + tr.t[i], tr.x[i, 0], tr.x[i, 1], tr.u[i], k))
            t_off += tr.t[-1]
        return np.asarray(rows)

    def to_dict(self):
        return {
            "arcs": [a.to_dict() for a in self.arcs],
            "total_time": self.total_time,
            "target_error": self.target_error,
            "m": self.m,
            "z0": self.z0,
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()
                            if np.isscalar(v)},
        }


# ---------------------------------------------------------------------------
# closed-form pieces (bang propagation, line times); used by the optimizer
# ---------------------------------------------------------------------------

def _bang_closed_form(q0, u, params):
    """Return q(t) for the constant-control affine flow, as a callable.

    The system dq/dt = A q + b with A = [[-G, -u], [u, -g]], b = (0, g) has
    the explicit solution q(t) = q* + exp(A t) (q0 - q*), with exp(A t)
    reduced to trig/hyperbolic form through A = mu*I + B, B^2 = (nu^2-u^2) I.
    """
    G, g = params.rates
    mu = -(G + g) / 2.0
    nu = (g - G) / 2.0
    det = G * g + u * u
    qs = np.array([-u * g / det, g * G / det])
    d0 = np.asarray(q0, float) - qs
    B = np.array([[nu, -u], [u, -nu]])
    disc = u * u - nu * nu

    def q(t):
        if disc > 0.0:
            w = math.sqrt(disc)
            E = math.cos(w * t) * np.eye(2) + math.sin(w * t) / w * B
        elif disc < 0.0:
            w = math.sqrt(-disc)
            E = math.cosh(w * t) * np.eye(2) + math.sinh(w * t) / w * B
        else:
            E = np.eye(2) + t * B
        return qs + math.exp(mu * t) * (E @ d0)

    return q, disc


def _horizontal_speed_constant(params):
    """c in ydot = -G*y - c/y along the horizontal singular line."""
    G, g = params.rates
    return g * g * (2.0 * G - g) / (4.0 * params.delta**2)


def _horizontal_time(y_from, y_to, params):
    """Travel time along the horizontal singular line (|y| decreasing)."""
    G = params.big_gamma
    c = _horizontal_speed_constant(params)
    a0, a1 = y_from * y_from + c / G, y_to * y_to + c / G
    return math.log(a0 / a1) / (2.0 * G)


def _vertical_time(z_from, z_to, gamma):
    """Relaxation time along y = 0 from z_from up to z_to (< 1)."""
    return math.log((1.0 - z_from) / (1.0 - z_to)) / gamma


def _bridge_closed_form(y_exit, z0v, u, params):
    """(duration, landing z) of a bang arc from the line to the axis y = 0."""
    q, disc = _bang_closed_form((y_exit, z0v), u, params)
    if disc <= 0.0:
        return None
    period = 2.0 * math.pi / math.sqrt(disc)
    ts = np.linspace(0.0, 1.05 * period, 256)
    ys = np.array([q(t)[0] for t in ts])
    idx = np.nonzero(ys[:-1] * ys[1:] < 0.0)[0]
    if idx.size == 0:
        return None
    t_land = brentq(lambda t: q(t)[0], ts[idx[0]], ts[idx[0] + 1], xtol=1e-12)
    z_land = q(t_land)[1]
    if z_land >= 0.0:
        return None
    return t_land, z_land


# ---------------------------------------------------------------------------
# costate lifts on the singular lines
# ---------------------------------------------------------------------------

def horizontal_costate(y, z0v):
    """Unit costate with H1 = H10 = 0 on z = z0 and H0 > 0."""
    p = -np.array([y, z0v])
    return p / np.linalg.norm(p)


def vertical_costate():
    """Unit costate with H1 = H10 = 0 on y = 0 and H0 > 0 (z < 1)."""
    return np.array([0.0, 1.0])


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _require_admissible(params):
    z0v, admissible = geometry.horizontal_line(params)
    if not admissible:
        raise SynthesisError(
            "horizontal singular line does not cut the disk (need big_gamma > 3*gamma/2)"
        )
    return z0v


def _bang_arc_to_line(params, m, dense_min_dt=None):
    z0v = _require_admissible(params)
    G, g = params.rates
    nu = (g - G) / 2.0
    disc = m * m - nu * nu
    if disc <= 0.0:
        raise SynthesisError("control bound too small: bang arc cannot rotate")
    cap = 1.5 * 2.0 * math.pi / math.sqrt(disc)
    arc = integrate_arc(
        ((0.0, 1.0), (0.0, 0.0)), bang(+1, m), cap, params,
        events=[coordinate_event(1, z0v, "reach_horizontal", direction=-1)],
        dense_min_dt=dense_min_dt,
    )
    if arc.termination != "target":
        raise SynthesisError(
            "bang arc from the north pole never crosses the horizontal singular line "
            f"(m = {m:g} too small)"
        )
    return arc, z0v


def bang_to_horizontal(params, m=DEFAULT_BOUND):
    """First crossing of the horizontal singular line by the u = +m bang arc.

    Returns (point_A, t1) with point_A = (y_A, z0); raises SynthesisError when
    the bound is too small for the crossing to exist.
    """
    arc, _ = _bang_arc_to_line(params, m)
    return arc.x[-1].copy(), float(arc.t[-1])


def _exit_objective(y_exit, y_a, z0v, params, m):
    """bang-exit total of horizontal + bridge + vertical times; inf if infeasible."""
    best = math.inf
    t2 = _horizontal_time(y_a, y_exit, params)
    for sign in (+1, -1):
        bridge = _bridge_closed_form(y_exit, z0v, sign * m, params)
        if bridge is None:
            continue
        t3, z_land = bridge
        total = t2 + t3 + _vertical_time(z_land, 0.0, params.gamma)
        if total < best:
            best = total
    return best


@lru_cache(maxsize=None)
def _tmin_scalars(params, m):
    """(t1, y_a, z0, y_exit, total_time) of the optimized policy."""
    arc1, z0v = _bang_arc_to_line(params, m)
    t1 = float(arc1.t[-1])
    y_a = float(arc1.x[-1, 0])
    y_b = -geometry.saturation_point(params, m)

    lo, hi = y_a * (1.0 - 1e-12), y_b
    grid = -np.geomspace(-lo, -hi, 65)
    vals = [_exit_objective(y, y_a, z0v, params, m) for y in grid]
    k = int(np.argmin(vals))
    if not math.isfinite(vals[k]):
        raise SynthesisError("no feasible exit point on the horizontal arc")
    blo = grid[max(k - 1, 0)]
    bhi = grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(
        lambda y: _exit_objective(y, y_a, z0v, params, m),
        bounds=(min(blo, bhi), max(blo, bhi)), method="bounded",
        options={"xatol": EXIT_XATOL},
    )
    y_exit = float(res.x)
    return t1, y_a, z0v, y_exit, t1 + float(res.fun)


def tmin_time(params, m=DEFAULT_BOUND):
    """Minimal saturation time (north pole -> origin) under |u| <= m."""
    return _tmin_scalars(params, m)[4]


def tmin_synthesis(params, m=DEFAULT_BOUND, dense_min_dt=None):
    """Construct the optimized four-arc saturation policy.

    Arc labels are bang1 / horizontal_singular / bridge / vertical_singular.
    The singular arcs are integrated as genuine extremals (affine singular
    feedback with the exact costate lift); the exit point minimizes the total
    time, and the bridge sign is chosen by feasibility (landing with z < 0),
    ties by speed.
    """
    t1, y_a, z0v, y_exit, _ = _tmin_scalars(params, m)
    arc1, _ = _bang_arc_to_line(params, m, dense_min_dt=dense_min_dt)

    # horizontal singular arc, projected exactly onto the line at entry
    start2 = np.array([y_a, z0v])
    p2 = horizontal_costate(y_a, z0v)
    t2_est = _horizontal_time(y_a, y_exit, params)
    arc2 = integrate_arc(
        (start2, p2), singular_affine(), 3.0 * t2_est + 1.0, params,
        events=[coordinate_event(0, y_exit, "exit", direction=1)],
        dense_min_dt=dense_min_dt,
    )
    if arc2.termination != "target":
        raise SynthesisError(f"horizontal arc failed to reach the exit point "
                             f"({arc2.termination})")

    # bridge bang: pick the feasible/faster sign
    best = None
    for sign in (+1, -1):
        closed = _bridge_closed_form(y_exit, z0v, sign * m, params)
        if closed is None:
            continue
        t3, z_land = closed
        total_tail = t3 + _vertical_time(z_land, 0.0, params.gamma)
        if best is None or total_tail < best[0]:
            best = (total_tail, sign, t3)
    if best is None:
        raise SynthesisError("bridge bang cannot land on the axis with z < 0")
    _, sign3, t3_est = best
    start3 = np.array([y_exit, z0v])
    arc3 = integrate_arc(
        (start3, horizontal_costate(y_exit, z0v)), bang(sign3, m),
        1.5 * t3_est + 0.5, params,
        events=[coordinate_event(0, 0.0, "land", direction=1)],
        dense_min_dt=dense_min_dt,
    )
    if arc3.termination != "target":
        raise SynthesisError("bridge bang did not cross the vertical axis")
    z_d = float(arc3.x[-1, 1])
    if z_d >= 0.0:
        raise SynthesisError(f"bridge landed above the origin (z = {z_d:.3e})")

    # vertical singular arc: pure relaxation up through the origin
    t4_est = _vertical_time(z_d, 0.0, params.gamma)
    arc4 = integrate_arc(
        ((0.0, z_d), vertical_costate()), singular_affine(), 2.0 * t4_est + 1.0,
        params, events=[coordinate_event(1, 0.0, "origin", direction=1)],
        dense_min_dt=dense_min_dt,
    )
    if arc4.termination != "target":
        raise SynthesisError("vertical arc failed to reach the origin")

    arcs = [
        SynthesisArc("bang1", float(arc1.t[-1]), arc1.x[0].copy(), arc1.x[-1].copy(),
                     arc1, f"u = +{m:g}"),
        SynthesisArc("horizontal_singular", float(arc2.t[-1]), arc2.x[0].copy(),
                     arc2.x[-1].copy(), arc2, "singular feedback on z = z0"),
        SynthesisArc("bridge", float(arc3.t[-1]), arc3.x[0].copy(), arc3.x[-1].copy(),
                     arc3, f"u = {sign3 * m:+g}"),
        SynthesisArc("vertical_singular", float(arc4.t[-1]), arc4.x[0].copy(),
                     arc4.x[-1].copy(), arc4, "u = 0 (relaxation)"),
    ]
    total = sum(a.duration for a in arcs)
    target_error = float(np.linalg.norm(arc4.x[-1]))
    h1_at_landing = ExtremalSystem(params, bang(sign3, m)).lift_values(
        np.concatenate([arc3.x[-1], arc3.p[-1]]))[1][0]
    return SynthesisPolicy(
        arcs=arcs, total_time=total, target_error=target_error, params=params,
        m=m, z0=z0v,
        diagnostics={
            "y_exit": y_exit,
            "y_saturation": -geometry.saturation_point(params, m),
            "z_landing": z_d,
            "bridge_switch_h1": float(h1_at_landing),
        },
    )


def inversion_recovery(params, m=DEFAULT_BOUND, dense_min_dt=None):
    """Baseline policy: inverting bang then vertical relaxation to the origin."""
    G, g = params.rates
    nu = (g - G) / 2.0
    disc = m * m - nu * nu
    if disc <= 0.0:
        raise SynthesisError("control bound too small to invert the magnetization")
    cap = 1.5 * 2.0 * math.pi / math.sqrt(disc)
    arc1 = integrate_arc(
        ((0.0, 1.0), (0.0, 0.0)), bang(+1, m), cap, params,
        events=[coordinate_event(0, 0.0, "inverted", direction=1)],
        dense_min_dt=dense_min_dt,
    )
    if arc1.termination != "target" or arc1.x[-1, 1] >= 0.0:
        raise SynthesisError("inverting bang did not reach the lower axis")
    z_inv = float(arc1.x[-1, 1])
    t2_est = _vertical_time(z_inv, 0.0, g)
    arc2 = integrate_arc(
        ((0.0, z_inv), vertical_costate()), singular_affine(), 2.0 * t2_est + 1.0,
        params, events=[coordinate_event(1, 0.0, "origin", direction=1)],
        dense_min_dt=dense_min_dt,
    )
    if arc2.termination != "target":
        raise SynthesisError("vertical relaxation failed to reach the origin")
    arcs = [
        SynthesisArc("bang1", float(arc1.t[-1]), arc1.x[0].copy(), arc1.x[-1].copy(),
                     arc1, f"u = +{m:g}"),
        SynthesisArc("vertical_singular", float(arc2.t[-1]), arc2.x[0].copy(),
                     arc2.x[-1].copy(), arc2, "u = 0 (relaxation)"),
    ]
    total = sum(a.duration for a in arcs)
    return SynthesisPolicy(
        arcs=arcs, total_time=total,
        target_error=float(np.linalg.norm(arc2.x[-1])), params=params, m=m,
        diagnostics={"z_inversion": z_inv},
    )


def l1_l2_diagnostic(params, m, y_start, y_ends):
    """Running cost integrals along the horizontal singular arc.

    Integrates |u| and u^2 in time along the singular feedback from |y| =
    y_start down to each requested |y| = y_end (all on one branch; the other
    is symmetric).  The u^2 totals grow like (2*big_gamma - gamma)*ln(1/y_end)
    while the |u| totals converge.
    """
    z0v = _require_admissible(params)
    del m  # the diagnostic follows the singular feedback past saturation
    y_ends = [float(v) for v in y_ends]
    y_max = math.sqrt(1.0 - z0v * z0v)
    if not all(0.0 < v < y_start for v in y_ends) or not y_start <= y_max:
        raise SynthesisError("need 0 < y_end < y_start <= sqrt(1 - z0^2)")

    G, g = params.rates
    c = _horizontal_speed_constant(params)
    k = g * (2.0 * G - g) / (2.0 * abs(params.delta))

    def rhs(t, s):
        y = s[0]
        absu = k / y
        return [-(G * y + c / y), absu, absu * absu]

    events = []
    for v in sorted(y_ends):
        def make(v=v):
            def ev(t, s):
                return s[0] - v
            ev.terminal = v == min(y_ends)
            ev.direction = -1
            return ev
        events.append(make())
    horizon = 2.0 * _horizontal_time(y_start, min(y_ends), params) + 1.0
    sol = solve_ivp(rhs, (0.0, horizon), [y_start, 0.0, 0.0], events=events,
                    rtol=1e-12, atol=1e-14)
    rows = []
    for ev_states, v in zip(sol.y_events, sorted(y_ends)):
        if len(ev_states) == 0:
            raise SynthesisError(f"singular arc never reached y_end = {v}")
        _, l1, l2 = ev_states[0]
        rows.append({"y_end": v, "l1": float(l1), "l2": float(l2)})
    rows.sort(key=lambda r: -r["y_end"])
    return rows


def switching_loci(params, m=DEFAULT_BOUND, n_samples=24):
    """Sampled switching-locus curves of the optimal synthesis (diagnostics).

    sigma1: the bang arc from the pole to the line; sigma2: the admissible
    horizontal segment; sigma3: first-return switch points of bang arcs
    leaving the singular line (sampled over exit points); sigma4: the
    vertical segment from the bridge landing to the origin.  Informational
    output only; the policy itself is built from the arc structure.
    """
    policy = tmin_synthesis(params, m)
    z0v = policy.z0
    arc1 = policy.arcs[0].trajectory
    y_a = policy.arcs[0].end[0]
    y_b = policy.diagnostics["y_saturation"]
    sigma1 = np.column_stack([arc1.x[:, 0], arc1.x[:, 1]])
    seg = np.linspace(y_a, y_b, n_samples)
    sigma2 = np.column_stack([seg, np.full_like(seg, z0v)])
    pts = []
    for y_s in -np.geomspace(-y_a, -y_b, n_samples):
        z0p = np.concatenate([[y_s, z0v], horizontal_costate(y_s, z0v)])
        sysb = ExtremalSystem(params, bang(+1, m))
        try:
            arc = integrate_arc(z0p, bang(+1, m), 2.0, params,
                                events=[switch_event(sysb, min_time=1e-3)])
        except FlowError:
            continue
        if arc.termination == "switch":
            pts.append(arc.x[-1])
    sigma3 = np.asarray(pts) if pts else np.zeros((0, 2))
    z_d = policy.diagnostics["z_landing"]
    zseg = np.linspace(z_d, 0.0, n_samples)
    sigma4 = np.column_stack([np.zeros_like(zseg), zseg])
    return {"sigma1": sigma1, "sigma2": sigma2, "sigma3": sigma3, "sigma4": sigma4}
