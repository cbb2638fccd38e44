"""Pseudo-Hamiltonian machinery for the meridian spin systems.

The extremal state is z = (x, p) with x the spin state(s) and p the adjoint.
With lifts H_i = <p, F_i> the flow under a feedback control u(z) is

    dx/dt =  F0(x) + u*F1(x)
    dp/dt = -p . (DF0(x) + u*DF1(x))

Control laws: constant bang u = +/-m; the affine singular feedback
u = -{{H1,H0},H0}/{{H1,H0},H1} valid on {H1 = {H1,H0} = 0}; and the interior
maximizer of H0 + u*H1 - (1-lam)*|u|^k clipped to [-m, m] for the penalized
problems (k = 2 quadratic, k = 2-lam power).

Arcs are integrated with an adaptive embedded Runge-Kutta 5(4) pair
(rtol 1e-10, atol 1e-12); events are located on the dense output by
bracketing and root refinement to 1e-10 in time; singular arcs restore the
constraints after each accepted step by a linear costate projection.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from . import model
from .model import DEFAULT_BOUND, rate_table

RTOL = 1e-10
ATOL = 1e-12
EVENT_TIME_TOL = 1e-10
TOL_ORDER = 1e-10
TOL_CONSTRAINT = 1e-8
PROJECTION_DRIFT_TOL = 1e-6
EXPLOSION_BOUND = 1e5


class FlowError(RuntimeError):
    """Integration, projection or control-law failure."""


class NonMinimalOrderError(FlowError):
    """{{H1,H0},H1} vanishes: the affine singular control is undefined."""


# ---------------------------------------------------------------------------
# extremal points and control laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtremalPoint:
    """State-costate pair along an extremal."""

    x: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def as_w(self):
        return np.concatenate([np.asarray(self.x, float).ravel(),
                               np.asarray(self.p, float).ravel()])


@dataclass(frozen=True)
class ControlLaw:
    variant: str                 # 'bang' | 'singular' | 'regularized'
    sign: int = 1                # bang only
    kind: str = "quadratic"      # regularized only: 'quadratic' | 'power'
    lam: float = 0.0
    m: float = DEFAULT_BOUND

    def describe(self):
        if self.variant == "bang":
            return f"bang({self.sign:+d}, m={self.m:g})"
        if self.variant == "singular":
            return "singular_affine"
        return f"regularized({self.kind}, lambda={self.lam:g}, m={self.m:g})"


def bang(sign=1, m=DEFAULT_BOUND):
    if sign not in (-1, 1):
        raise FlowError("bang sign must be +1 or -1")
    return ControlLaw(variant="bang", sign=sign, m=m)


def singular_affine():
    return ControlLaw(variant="singular")


def regularized(kind="quadratic", lam=0.0, m=DEFAULT_BOUND):
    if kind not in ("quadratic", "power"):
        raise FlowError(f"unknown regularization kind {kind!r}")
    if not 0.0 <= lam < 1.0:
        raise FlowError("lambda must lie in [0, 1)")
    return ControlLaw(variant="regularized", kind=kind, lam=lam, m=m)


def as_w(z, n=None):
    """Coerce ExtremalPoint / (x, p) / flat array to a flat (2n,) vector."""
    if isinstance(z, ExtremalPoint):
        w = z.as_w()
    elif isinstance(z, tuple) and len(z) == 2:
        w = np.concatenate([np.asarray(z[0], float).ravel(),
                            np.asarray(z[1], float).ravel()])
    else:
        w = np.asarray(z, float).ravel()
    if n is not None and w.size != 2 * n:
        raise FlowError(f"extremal point must have {2 * n} components, got {w.size}")
    return w


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------

def lifts(z, params):
    """(H0, H1, H10, H100, H101) at an extremal point.

    H10 = {H1, H0} and the second-order brackets follow from the rule
    {H_X, H_Y} = H_[X,Y], so each lift is <p, field> with the bracket fields
    of the model.
    """
    w = as_w(z)
    n = w.size // 2
    x, p = w[:n], w[n:]
    return (
        float(p @ model.eval_field("F0", x, params)),
        float(p @ model.eval_field("F1", x, params)),
        float(p @ model.eval_bracket("ad1", x, params)),
        float(p @ model.eval_bracket("ad100", x, params)),
        float(p @ model.eval_bracket("ad101", x, params)),
    )


def singular_control_affine(z, params):
    """u = -H100/H101, defined when |H101| >= 1e-10 (minimal order)."""
    _, _, _, h100, h101 = lifts(z, params)
    if abs(h101) < TOL_ORDER:
        raise NonMinimalOrderError(f"|H101| = {abs(h101):.3e} below 1e-10")
    return -h100 / h101


def glc_check(z, params):
    """'satisfied' iff H101 >= 0 (non-strict), else 'violated'."""
    h101 = lifts(z, params)[4]
    return "satisfied" if h101 >= 0.0 else "violated"


def interior_maximizer(h1, kind, lam, m):
    """Maximizer of u*h1 - (1-lam)*|u|^k over [-m, m].

    quadratic: u = h1/(2*(1-lam)); power (k = 2-lam):
    u = sign(h1)*(|h1|/((1-lam)*(2-lam)))**(1/(1-lam)); both clipped.
    """
    h1 = np.asarray(h1, dtype=float)
    if kind == "quadratic":
        u = h1 / (2.0 * (1.0 - lam))
    elif kind == "power":
        scale = (1.0 - lam) * (2.0 - lam)
        with np.errstate(over="ignore"):
            u = np.sign(h1) * np.abs(h1 / scale) ** (1.0 / (1.0 - lam))
    else:
        raise FlowError(f"unknown regularization kind {kind!r}")
    return np.clip(u, -m, m)


def regularized_control(z, params, kind, lam, m=DEFAULT_BOUND):
    """Penalized control at an extremal point (clipped interior maximizer)."""
    if not 0.0 <= lam < 1.0:
        raise FlowError("lambda must lie in [0, 1)")
    h1 = lifts(z, params)[1]
    return float(interior_maximizer(h1, kind, lam, m))


def order_zero_direction(h1, h2):
    """Unit-disk maximizer (u1, u2) = (h1, h2)/sqrt(h1^2 + h2^2)."""
    norm2 = h1 * h1 + h2 * h2
    if norm2 <= 1e-20:
        raise FlowError("on the switching surface H1 = H2 = 0")
    norm = math.sqrt(norm2)
    return h1 / norm, h2 / norm


def bi_input_order_zero(z, params):
    """Order-zero control of the full two-input model at a 3D/6D point.

    Maximizes H0 + u1*H1 + u2*H2 over the unit control disk; the resulting
    true Hamiltonian is H0 + sqrt(H1^2 + H2^2).
    """
    w = as_w(z)
    n = w.size // 2
    x, p = w[:n], w[n:]
    h1 = float(p @ model.eval_field3("F1", x, params))
    h2 = float(p @ model.eval_field3("F2", x, params))
    return order_zero_direction(h1, h2)


# ---------------------------------------------------------------------------
# extremal system (vectorized over stacked copies)
# ---------------------------------------------------------------------------

class ExtremalSystem:
    """Extremal flow of the meridian model under a fixed control law.

    ``rhs`` accepts a flat (2n,) vector or a (k, 2n) stack and vectorizes
    over the stack, which the shooting Jacobian exploits.
    """

    def __init__(self, params, law, n_spins=None):
        if n_spins is None:
            n_spins = 1 if isinstance(params, model.RelaxationParams) else len(params)
        self.params = params
        self.law = law
        self.n_spins = n_spins
        self.n = 2 * n_spins
        self.dim = 2 * self.n
        self.big, self.small = rate_table(params, n_spins)
        self.delta = self.small - self.big
        self._scalar_rhs = _make_scalar_rhs(self.big, self.small, law)

    # -- raw views ---------------------------------------------------------
    def _blocks(self, w):
        W = np.atleast_2d(np.asarray(w, dtype=float))
        n = self.n
        x, p = W[:, :n], W[:, n:]
        return x[:, 0::2], x[:, 1::2], p[:, 0::2], p[:, 1::2]

    def lift_values(self, w):
        """Vectorized (H0, H1, H10, H100, H101), one row per stacked copy."""
        y, z, py, pz = self._blocks(w)
        G, g, d = self.big, self.small, self.delta
        h0 = (-G * y * py + g * (1.0 - z) * pz).sum(axis=1)
        h1 = (-z * py + y * pz).sum(axis=1)
        h10 = ((-g + d * z) * py + d * y * pz).sum(axis=1)
        h100 = ((g * (g - 2.0 * G) - d**2 * z) * py + d**2 * y * pz).sum(axis=1)
        h101 = (2.0 * d * y * py + (g - 2.0 * d * z) * pz).sum(axis=1)
        return h0, h1, h10, h100, h101

    def control(self, w):
        """Control value(s) of the law at w; scalar for a flat input."""
        scalar = np.asarray(w).ndim == 1
        law = self.law
        if law.variant == "bang":
            k = 1 if scalar else np.asarray(w).shape[0]
            u = np.full(k, law.sign * law.m)
        elif law.variant == "singular":
            _, _, _, h100, h101 = self.lift_values(w)
            with np.errstate(divide="ignore", invalid="ignore"):
                u = -h100 / h101
        else:
            h1 = self.lift_values(w)[1]
            u = interior_maximizer(h1, law.kind, law.lam, law.m)
        return float(u[0]) if scalar else u

    def rhs(self, t, w):
        w = np.asarray(w)
        if w.ndim == 1:
            # scalar fast path: adaptive stepping calls this millions of times
            return self._scalar_rhs(w)
        y, z, py, pz = self._blocks(w)
        law = self.law
        if law.variant == "bang":
            u = law.sign * law.m
        else:
            u = self.control(np.atleast_2d(w))[:, None]
        G, g = self.big, self.small
        dy = -G * y - u * z
        dz = g * (1.0 - z) + u * y
        dpy = G * py - u * pz
        dpz = g * pz + u * py
        out = np.empty(np.atleast_2d(w).shape)
        n = self.n
        out[:, 0:n:2], out[:, 1:n:2] = dy, dz
        out[:, n::2], out[:, n + 1::2] = dpy, dpz
        return out.reshape(w.shape)

    def hamiltonian(self, w):
        """Value of the (plugged-in, penalized if applicable) Hamiltonian."""
        scalar = np.asarray(w).ndim == 1
        h0, h1 = self.lift_values(w)[:2]
        u = self.control(np.atleast_2d(w))
        h = h0 + u * h1
        law = self.law
        if law.variant == "regularized":
            k = 2.0 if law.kind == "quadratic" else 2.0 - law.lam
            h = h - (1.0 - law.lam) * np.abs(u) ** k
        return float(h[0]) if scalar else h

    def singular_residual(self, w):
        _, h1, h10, _, _ = self.lift_values(w)
        return float(np.abs(h1).max()), float(np.abs(h10).max())

    def project_singular(self, w):
        """Shift p to restore H1 = H10 = 0 exactly (constraints linear in p)."""
        w = np.asarray(w, dtype=float).copy()
        n = self.n
        x, p = w[:n], w[n:]
        grads = np.column_stack([
            model.eval_field("F1", x, self.params),
            model.eval_bracket("ad1", x, self.params),
        ])
        c = grads.T @ p
        # minimal-norm shift solving grads.T @ dp = -c; on the planar locus the
        # two gradients are parallel, so least squares replaces a direct solve
        dp, *_ = np.linalg.lstsq(grads.T, -c, rcond=None)
        w[n:] = p + dp
        return w


def _make_scalar_rhs(big, small, law):
    """Plain-float right-hand side for one or two spins (flat input only)."""
    variant, kind, lam, m, sgn = law.variant, law.kind, law.lam, law.m, law.sign
    if variant == "regularized":
        if kind == "quadratic":
            scale = 2.0 * (1.0 - lam)
        else:
            scale = (1.0 - lam) * (2.0 - lam)
            expo = 1.0 / (1.0 - lam)

    if len(big) == 1:
        G1, g1 = float(big[0]), float(small[0])
        d1 = g1 - G1

        def rhs1(w):
            y1, z1, py1, pz1 = w
            if variant == "bang":
                u = sgn * m
            else:
                h1 = -z1 * py1 + y1 * pz1
                if variant == "singular":
                    h100 = (g1 * (g1 - 2.0 * G1) - d1 * d1 * z1) * py1 + d1 * d1 * y1 * pz1
                    h101 = 2.0 * d1 * y1 * py1 + (g1 - 2.0 * d1 * z1) * pz1
                    u = -h100 / h101 if h101 != 0.0 else math.inf
                elif kind == "quadratic":
                    u = min(m, max(-m, h1 / scale))
                else:
                    au = abs(h1) / scale
                    u = math.copysign(min(m, au**expo if au < 1e3 else m), h1)
            return np.array([
                -G1 * y1 - u * z1, g1 * (1.0 - z1) + u * y1,
                G1 * py1 - u * pz1, g1 * pz1 + u * py1,
            ])

        return rhs1

    G1, g1 = float(big[0]), float(small[0])
    G2, g2 = float(big[1]), float(small[1])
    d1, d2 = g1 - G1, g2 - G2

    def rhs2(w):
        y1, z1, y2, z2, py1, pz1, py2, pz2 = w
        if variant == "bang":
            u = sgn * m
        else:
            h1 = -z1 * py1 + y1 * pz1 - z2 * py2 + y2 * pz2
            if variant == "singular":
                h100 = ((g1 * (g1 - 2.0 * G1) - d1 * d1 * z1) * py1 + d1 * d1 * y1 * pz1
                        + (g2 * (g2 - 2.0 * G2) - d2 * d2 * z2) * py2 + d2 * d2 * y2 * pz2)
                h101 = (2.0 * d1 * y1 * py1 + (g1 - 2.0 * d1 * z1) * pz1
                        + 2.0 * d2 * y2 * py2 + (g2 - 2.0 * d2 * z2) * pz2)
                u = -h100 / h101 if h101 != 0.0 else math.inf
            elif kind == "quadratic":
                u = min(m, max(-m, h1 / scale))
            else:
                au = abs(h1) / scale
                u = math.copysign(min(m, au**expo if au < 1e3 else m), h1)
        return np.array([
            -G1 * y1 - u * z1, g1 * (1.0 - z1) + u * y1,
            -G2 * y2 - u * z2, g2 * (1.0 - z2) + u * y2,
            G1 * py1 - u * pz1, g1 * pz1 + u * py1,
            G2 * py2 - u * pz2, g2 * pz2 + u * py2,
        ])

    return rhs2


class ReplicatedSystem:
    """k independent copies of a base system, integrated as one vector."""

    def __init__(self, base, copies):
        self.base = base
        self.copies = copies
        self.dim = copies * base.dim

    def rhs(self, t, w):
        W = np.asarray(w).reshape(self.copies, self.base.dim)
        return self.base.rhs(t, W).ravel()

    def hamiltonian(self, w):
        return self.base.hamiltonian(np.asarray(w)[: self.base.dim])


# ---------------------------------------------------------------------------
# events and arc results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    """Scalar crossing detector g(w) = 0 checked along the arc.

    direction: +1 rising only, -1 falling only, 0 both.  min_time ignores
    crossings before that arc time (e.g. when starting on the surface).
    """

    name: str
    fn: object
    kind: str = "target"
    direction: int = 0
    terminal: bool = True
    min_time: float = 0.0


@dataclass(frozen=True)
class ArcEvent:
    name: str
    kind: str
    time: float
    w: np.ndarray


@dataclass
class ArcResult:
    """Dense solution of one arc with its event log.

    x, p hold one row per sample; u is the feedback control along the arc.
    termination is 'duration' or the kind of the terminal event.
    """

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    u: np.ndarray
    events: list
    termination: str
    system: ExtremalSystem
    law: ControlLaw = None
    requested_duration: float = 0.0

    @property
    def w0(self):
        return np.concatenate([self.x[0], self.p[0]])

    @property
    def w_final(self):
        return np.concatenate([self.x[-1], self.p[-1]])

    @property
    def duration(self):
        return float(self.t[-1] - self.t[0])

    @property
    def final(self):
        return ExtremalPoint(x=self.x[-1].copy(), p=self.p[-1].copy(), t=float(self.t[-1]))

    def hamiltonian_samples(self):
        W = np.column_stack([self.x, self.p])
        return self.system.hamiltonian(W)

    def hamiltonian_drift(self):
        h = self.hamiltonian_samples()
        return float(np.abs(h - h[0]).max() / (1.0 + abs(h[0])))

    def constraint_drift(self):
        W = np.column_stack([self.x, self.p])
        _, h1, h10, _, _ = self.system.lift_values(W)
        return float(np.abs(h1).max()), float(np.abs(h10).max())


def switch_event(system, name="switch", terminal=True, min_time=0.0, direction=0):
    """H1 = 0 crossing."""
    def fn(w):
        return float(system.lift_values(w)[1][0])
    return Event(name=name, fn=fn, kind="switch", direction=direction,
                 terminal=terminal, min_time=min_time)


def saturation_event(system, m=DEFAULT_BOUND, name="saturation", terminal=True):
    """|u| = m crossing of a singular feedback."""
    def fn(w):
        return abs(system.control(np.asarray(w))) - m
    return Event(name=name, fn=fn, kind="saturation", direction=1, terminal=terminal)


def explosion_event(system, bound=EXPLOSION_BOUND, name="explosion"):
    """|u| exceeding the divergence reporting threshold."""
    def fn(w):
        u = system.control(np.asarray(w))
        if not np.isfinite(u):
            return 1.0
        return abs(u) - bound
    return Event(name=name, fn=fn, kind="explosion", direction=1, terminal=True)


def coordinate_event(index, value, name, direction=0, terminal=True, min_time=0.0,
                     kind="target"):
    """Crossing of one state coordinate through a value."""
    def fn(w):
        return float(w[index] - value)
    return Event(name=name, fn=fn, kind=kind, direction=direction,
                 terminal=terminal, min_time=min_time)


def radius_event(spin, value, name, direction=-1, terminal=True, kind="target"):
    """|q_spin| crossing a radius (spin = 0 or 1 selects the state block)."""
    i = 2 * spin
    def fn(w):
        return float(math.hypot(w[i], w[i + 1]) - value)
    return Event(name=name, fn=fn, kind=kind, direction=direction, terminal=terminal)


# ---------------------------------------------------------------------------
# integration core
# ---------------------------------------------------------------------------

def integrate_system(system, w0, duration, events=(), rtol=RTOL, atol=ATOL,
                     max_step=np.inf, dense_min_dt=None, project=False,
                     record=True):
    """Integrate dw/dt = system.rhs over [0, duration] with event location.

    duration may be negative (backward integration).  When ``project`` is
    set, system.project_singular restores the singular constraints after each
    accepted step; a residual above 1e-6 after projection is an error.
    Returns an ArcResult; termination is the kind of the first terminal
    event, or 'duration'.
    """
    w0 = np.asarray(w0, dtype=float).copy()
    if duration == 0.0:
        raise FlowError("arc duration must be nonzero")
    solver = RK45(system.rhs, 0.0, w0, t_bound=float(duration),
                  rtol=rtol, atol=atol, max_step=max_step)
    ts, ws = [0.0], [w0.copy()]
    g_prev = [ev.fn(w0) for ev in events]
    event_log = []
    termination = "duration"
    fwd = 1.0 if duration > 0 else -1.0

    while solver.status == "running":
        t_prev = solver.t
        message = solver.step()
        if solver.status == "failed":
            raise FlowError(f"integrator failure: {message or 'step size underflow'}")
        t_new, w_new = solver.t, solver.y
        sol = solver.dense_output()

        # --- event scan on this step ---------------------------------------
        hit = None  # (t_ev, event)
        crossings = []
        for j, ev in enumerate(events):
            g_new = ev.fn(w_new)
            g_old = g_prev[j]
            rising = g_old < 0.0 < g_new
            falling = g_old > 0.0 > g_new
            crossed = (rising and ev.direction >= 0) or (falling and ev.direction <= 0)
            if crossed and fwd * t_new > ev.min_time:
                t_ev = brentq(lambda tt: ev.fn(sol(tt)),
                              min(t_prev, t_new), max(t_prev, t_new),
                              xtol=EVENT_TIME_TOL)
                if fwd * t_ev >= ev.min_time:
                    crossings.append((t_ev, ev))
            g_prev[j] = g_new
        for t_ev, ev in sorted(crossings, key=lambda c: fwd * c[0]):
            if ev.terminal:
                hit = (t_ev, ev)
                break
            event_log.append(ArcEvent(ev.name, ev.kind, t_ev, sol(t_ev).copy()))

        if hit is not None:
            t_ev, ev = hit
            w_ev = sol(t_ev).copy()
            if project:
                w_ev = system.project_singular(w_ev)
            event_log.append(ArcEvent(ev.name, ev.kind, t_ev, w_ev.copy()))
            _record_samples(system, sol, ts, ws, t_prev, t_ev, dense_min_dt, record)
            ts.append(t_ev)
            ws.append(w_ev)
            termination = ev.kind
            break

        # --- constraint projection -----------------------------------------
        if project:
            w_proj = system.project_singular(w_new)
            r1, r10 = system.singular_residual(w_proj)
            if max(r1, r10) > PROJECTION_DRIFT_TOL:
                raise FlowError(
                    f"projection failure: residual {max(r1, r10):.3e} after projection"
                )
            if not np.array_equal(w_proj, w_new):
                solver.y = w_proj
                solver.f = solver.fun(solver.t, w_proj)
                for j, ev in enumerate(events):
                    g_prev[j] = ev.fn(w_proj)
                w_new = w_proj

        _record_samples(system, sol, ts, ws, t_prev, t_new, dense_min_dt, record)
        ts.append(t_new)
        ws.append(w_new.copy())

    t = np.asarray(ts)
    W = np.asarray(ws)
    n = system.dim // 2
    ufun = getattr(system, "control", None)
    if record and ufun is not None:
        u = np.asarray([ufun(w) for w in W])
    else:
        u = np.zeros(len(ts))
    return ArcResult(
        t=t, x=W[:, :n], p=W[:, n:], u=u,
        events=event_log, termination=termination, system=system,
        law=getattr(system, "law", None), requested_duration=float(duration),
    )


def _record_samples(system, sol, ts, ws, t_a, t_b, dense_min_dt, record):
    """Emit interior dense-output samples so gaps stay below dense_min_dt."""
    if not record or dense_min_dt is None:
        return
    gap = abs(t_b - t_a)
    if gap <= dense_min_dt:
        return
    k = int(math.ceil(gap / dense_min_dt))
    for tt in np.linspace(t_a, t_b, k + 1)[1:-1]:
        ts.append(tt)
        ws.append(sol(tt).copy())


def integrate_arc(z0, law, max_duration, params, events=(), rtol=RTOL, atol=ATOL,
                  max_step=np.inf, dense_min_dt=None, extra_events=None):
    """Integrate one arc of the spin extremal flow under a control law.

    z0 is an ExtremalPoint, an (x, p) pair or a flat vector.  Singular arcs
    require |H1|, |H10| <= 1e-8 at z0, are re-projected onto the constraint
    set after every accepted step, and automatically watch for control
    explosion (|u| > 1e5).
    """
    system = ExtremalSystem(params, law)
    w0 = as_w(z0, system.n)
    events = list(events) + (list(extra_events) if extra_events else [])
    project = law.variant == "singular"
    if project:
        r1, r10 = system.singular_residual(w0)
        if max(r1, r10) > TOL_CONSTRAINT:
            raise FlowError(
                f"singular arc start violates H1 = H10 = 0 (residual {max(r1, r10):.3e})"
            )
        if not any(ev.kind == "explosion" for ev in events):
            events.append(explosion_event(system))
    return integrate_system(system, w0, max_duration, events=events, rtol=rtol,
                            atol=atol, max_step=max_step, dense_min_dt=dense_min_dt,
                            project=project)


# ---------------------------------------------------------------------------
# switching-point classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchClassification:
    kind: str                   # 'ordinary' | 'hyperbolic' | 'elliptic' | 'parabolic'
    successor: str = None       # ordinary: '-+' or '+-'
    admissible_forms: tuple = ()
    phi_ddot_plus: float = None
    phi_ddot_minus: float = None


def classify_switch_point(z, params, m=DEFAULT_BOUND):
    """Classify a point of the switching surface {H1 = 0}.

    Ordinary when H10 != 0, with successor '-+' if H10 > 0 else '+-'.  At a
    fold (H10 = 0 too) the second derivatives Phi''_± = H100 ± m*H101 decide:
    (+,-) hyperbolic, (-,+) elliptic, equal signs parabolic (at most two
    switchings, forms '+-+' and '-+-').
    """
    _, h1, h10, h100, h101 = lifts(z, params)
    if abs(h1) >= TOL_CONSTRAINT:
        raise FlowError(f"not a switching point: |H1| = {abs(h1):.3e}")
    if abs(h10) > TOL_CONSTRAINT:
        successor = "-+" if h10 > 0 else "+-"
        return SwitchClassification(kind="ordinary", successor=successor,
                                    admissible_forms=(successor,))
    plus = h100 + m * h101
    minus = h100 - m * h101
    if max(abs(plus), abs(minus)) < 1e-12:
        raise FlowError("degenerate fold: both second derivatives vanish")
    if plus > 0.0 and minus < 0.0:
        kind, forms = "hyperbolic", ("+s+", "-s-", "+s-", "-s+")
    elif plus < 0.0 and minus > 0.0:
        kind, forms = "elliptic", ()
    else:
        kind, forms = "parabolic", ("+-+", "-+-")
    return SwitchClassification(kind=kind, admissible_forms=forms,
                                phi_ddot_plus=plus, phi_ddot_minus=minus)
