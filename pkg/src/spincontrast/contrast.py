"""Indirect shooting for the two-species saturation-contrast problem.

Both spins start at the north pole and share the control.  For a fixed
transfer time T the terminal conditions are q1(T) = 0 (first species
saturated) together with the transversality p2(T) = q2(T) of the penalized
Mayer cost -|q2(T)|^2 + (1-lam) * integral |u|^k dt, so the shooting unknown
is the initial costate p0 in R^4 and the residual is

    R(p0) = (y1(T), z1(T), p_y2(T) - y2(T), p_z2(T) - z2(T)).

R is driven to zero by a damped Newton iteration with a forward-difference
Jacobian (all difference columns integrated jointly with the base copy), and
families of problems are solved by discrete continuation in lam, in T, or in
the second species' relaxation times, with adaptive step bisection.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import synthesis
from .extremal_flow import (
    ExtremalSystem,
    ReplicatedSystem,
    integrate_system,
    interior_maximizer,
    regularized,
)
from .model import DEFAULT_BOUND, RelaxationParams

NEWTON_TOL = 1e-8
NEWTON_MAX_ITER = 50
FD_STEP = 1e-7
MIN_CONTINUATION_STEP = 1e-4
SEARCH_RTOL = 1e-6
SEARCH_ATOL = 1e-9
RTOL = 1e-10
ATOL = 1e-12

X0 = np.array([0.0, 1.0, 0.0, 1.0])


class ContrastError(RuntimeError):
    """Invalid shooting problem."""


@dataclass(frozen=True)
class ShootingProblem:
    """One penalized contrast instance (fixed species, time and cost)."""

    pair: tuple                   # (spin1, spin2) RelaxationParams
    transfer_time: float
    lam: float = 0.0
    kind: str = "quadratic"
    m: float = DEFAULT_BOUND

    def __post_init__(self):
        if len(self.pair) != 2:
            raise ContrastError("problem needs a (spin1, spin2) pair")
        if not 0.0 <= self.lam < 1.0:
            raise ContrastError("lambda must lie in [0, 1)")
        if self.transfer_time <= 0.0:
            raise ContrastError("transfer time must be positive")

    def law(self):
        return regularized(self.kind, self.lam, self.m)

    def system(self):
        return ExtremalSystem(tuple(self.pair), self.law())


@dataclass
class ShootingSolution:
    p0: np.ndarray
    residual: np.ndarray
    residual_norm: float
    terminal_w: np.ndarray
    contrast: float
    accepted: bool
    iterations: int
    problem: ShootingProblem
    trajectory: object = None     # ArcResult when requested
    rtol: float = RTOL            # integration tolerances the solve used
    atol: float = ATOL


@dataclass
class PathNode:
    lam: float
    transfer_time: float
    solution: ShootingSolution


@dataclass
class ContinuationPath:
    nodes: list
    log: list = field(default_factory=list)

    @property
    def solutions(self):
        return [n.solution for n in self.nodes]

    def best_contrast(self):
        accepted = [n for n in self.nodes if n.solution.accepted]
        if not accepted:
            return None
        return max(accepted, key=lambda n: n.solution.contrast)


def tmin_reference(problem):
    """Minimal saturation time of the first species (cached by synthesis)."""
    return synthesis.tmin_time(problem.pair[0], problem.m)


def _terminal_states(problem, P0, rtol=RTOL, atol=ATOL):
    """Terminal (k, 8) extremal states for a (k, 4) block of initial costates."""
    P0 = np.atleast_2d(np.asarray(P0, dtype=float))
    k = P0.shape[0]
    W0 = np.empty((k, 8))
    W0[:, :4] = X0
    W0[:, 4:] = P0
    base = problem.system()
    if k == 1:
        arc = integrate_system(base, W0[0], problem.transfer_time,
                               rtol=rtol, atol=atol, record=False)
        return arc.w_final[None, :]
    rep = ReplicatedSystem(base, k)
    arc = integrate_system(rep, W0.ravel(), problem.transfer_time,
                           rtol=rtol, atol=atol, record=False)
    return arc.w_final.reshape(k, 8)


def _residual_of_terminal(WT):
    """Residual rows (y1, z1, p_y2 - y2, p_z2 - z2) from terminal states."""
    WT = np.atleast_2d(WT)
    return np.column_stack([
        WT[:, 0], WT[:, 1], WT[:, 6] - WT[:, 2], WT[:, 7] - WT[:, 3],
    ])


def shooting_residual(p0, problem, rtol=RTOL, atol=ATOL):
    """Shooting residual for one initial costate (4-vector)."""
    WT = _terminal_states(problem, np.asarray(p0, float), rtol=rtol, atol=atol)
    return _residual_of_terminal(WT)[0]


def terminal_contrast(WT):
    """sqrt(y2^2 + z2^2) at the terminal state."""
    return float(math.hypot(WT[2], WT[3]))


def contrast_value(solution):
    """Terminal modulus of the second species for an accepted solution."""
    return terminal_contrast(solution.terminal_w)


def _norm(r):
    return float(np.abs(r).max())


def _joint_jacobian(problem, p, fd_step=FD_STEP, rtol=RTOL, atol=ATOL):
    """Forward-difference residual Jacobian, all columns in one integration."""
    h = fd_step * np.maximum(1.0, np.abs(p))
    P = np.vstack([p, p + np.diag(h)])
    R = _residual_of_terminal(_terminal_states(problem, P, rtol=rtol, atol=atol))
    return (R[1:] - R[0]).T / h


def solve_contrast(problem, seed=None, rng=None, tol=NEWTON_TOL,
                   max_iter=NEWTON_MAX_ITER, want_trajectory=False,
                   check_tmin=True, fd_step=FD_STEP, n_search=10000):
    """Newton-type (Levenberg-Marquardt) shooting solve.

    ``seed`` is an initial costate guess; without one, a crude search over
    random unit costates picks the smallest-residual start, with the
    decoupled single-species solve (p2 = 0) as a second candidate.  The
    Jacobian uses forward differences (step 1e-7), all columns integrated
    jointly with the base copy.  Solutions are accepted at max-norm residual
    below 1e-8; non-convergence returns the best iterate flagged unaccepted.
    ``check_tmin`` refuses transfer times below the minimal saturation time
    of the first species.
    """
    from scipy.optimize import least_squares

    if check_tmin and problem.transfer_time < tmin_reference(problem) * (1.0 - 1e-9):
        raise ContrastError(
            f"transfer time {problem.transfer_time:g} below the minimal saturation "
            f"time {tmin_reference(problem):g} of the first species"
        )
    if seed is None:
        def _candidates():
            try:
                yield decoupled_seed(problem)
            except ContrastError:
                pass
            yield seed_search(problem, n=n_search, rng=rng)
        seeds = _candidates()
    else:
        seed = np.asarray(seed, dtype=float).copy()
        if seed.shape != (4,):
            raise ContrastError("initial costate must be a 4-vector")
        seeds = [seed]

    best = None
    best_tols = (RTOL, ATOL)
    iterations = 0
    for p_start in seeds:
        res = least_squares(
            lambda p: shooting_residual(p, problem),
            x0=p_start,
            jac=lambda p: _joint_jacobian(problem, p, fd_step),
            method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
            max_nfev=3 * max_iter,
        )
        iterations += res.nfev
        tols = (RTOL, ATOL)
        if tol <= _norm(res.fun) < 1e-3:
            # the stall sits in the integrator's step-noise floor: retry on a
            # tighter tolerance so the residual map is smooth at 1e-8 scale
            tight = (1e-12, 1e-14)
            res2 = least_squares(
                lambda p: shooting_residual(p, problem, rtol=tight[0], atol=tight[1]),
                x0=res.x,
                jac=lambda p: _joint_jacobian(problem, p, fd_step,
                                              rtol=tight[0], atol=tight[1]),
                method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                max_nfev=2 * max_iter,
            )
            iterations += res2.nfev
            if _norm(res2.fun) < _norm(res.fun):
                res, tols = res2, tight
        if best is None or _norm(res.fun) < _norm(best.fun):
            best, best_tols = res, tols
        if _norm(best.fun) < tol:
            break

    p, r = best.x, best.fun
    WT = _terminal_states(problem, p, rtol=best_tols[0], atol=best_tols[1])[0]
    accepted = _norm(r) < tol
    solution = ShootingSolution(
        p0=p, residual=r, residual_norm=_norm(r), terminal_w=WT,
        contrast=terminal_contrast(WT), accepted=accepted,
        iterations=iterations, problem=problem,
        rtol=best_tols[0], atol=best_tols[1],
    )
    if want_trajectory and accepted:
        solution.trajectory = solution_trajectory(solution)
    return solution


def decoupled_seed(problem, seed2d=(-0.1, 0.0)):
    """Structured seed: solve the single-species saturation alone, set p2 = 0.

    With p2(0) = 0 the control only sees the first species, so the reduced
    two-dimensional shooting problem (y1(T), z1(T)) = 0 is cheap; its
    solution usually sits in the Newton basin of the coupled problem.
    """
    from scipy.optimize import least_squares

    spin1 = problem.pair[0]
    law = problem.law()
    base = ExtremalSystem(spin1, law)

    def reduced(p1):
        w0 = np.array([0.0, 1.0, p1[0], p1[1]])
        arc = integrate_system(base, w0, problem.transfer_time,
                               rtol=RTOL, atol=ATOL, record=False)
        return arc.w_final[:2]

    res = least_squares(reduced, x0=np.asarray(seed2d, float), method="lm",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
    if _norm(res.fun) > NEWTON_TOL:
        raise ContrastError("decoupled single-species solve did not converge")
    return np.array([res.x[0], res.x[1], 0.0, 0.0])


def solution_trajectory(solution, dense_min_dt=None):
    """Densely sampled extremal of an accepted solution."""
    problem = solution.problem
    if dense_min_dt is None:
        dense_min_dt = problem.transfer_time / 2000.0
    w0 = np.concatenate([X0, solution.p0])
    return integrate_system(problem.system(), w0, problem.transfer_time,
                            rtol=solution.rtol, atol=solution.atol,
                            dense_min_dt=dense_min_dt)


def seed_search(problem, n=10000, rng=None, batch=250):
    """Best-of-n random unit costates by residual norm (coarse integration)."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    best_p, best_norm = None, np.inf
    remaining = n
    while remaining > 0:
        k = min(batch, remaining)
        remaining -= k
        P = rng.standard_normal((k, 4))
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        WT = _terminal_states(problem, P, rtol=SEARCH_RTOL, atol=SEARCH_ATOL)
        R = _residual_of_terminal(WT)
        norms = np.abs(R).max(axis=1)
        i = int(np.argmin(norms))
        if norms[i] < best_norm:
            best_norm = float(norms[i])
            best_p = P[i].copy()
    return best_p


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------

def _interp_problem(pa, pb, s):
    """Problem on the segment [pa, pb]: linear in lam, T and spin2 times."""
    if s <= 0.0:
        return pa
    if s >= 1.0:
        return pb
    lam = (1.0 - s) * pa.lam + s * pb.lam
    T = (1.0 - s) * pa.transfer_time + s * pb.transfer_time
    s2a, s2b = pa.pair[1], pb.pair[1]
    spin2 = RelaxationParams(
        (1.0 - s) * s2a.t1 + s * s2b.t1,
        (1.0 - s) * s2a.t2 + s * s2b.t2,
        s2a.omega_max,
    )
    return replace(pa, pair=(pa.pair[0], spin2), lam=lam, transfer_time=T)


def continue_path(problems, start_seed, max_iter=NEWTON_MAX_ITER,
                  min_step=MIN_CONTINUATION_STEP, log=None):
    """March a schedule of problems, each solution seeding the next.

    Between consecutive schedule entries the parameters are interpolated
    linearly; a failed solve halves the step (down to 1e-4 of the segment),
    after which the partial path is returned with a stall note in the log.
    Secant prediction over the last two accepted nodes seeds each attempt.
    """
    log = [] if log is None else log
    nodes = []
    prev = None          # (s_global, p0)
    prev2 = None
    seed = np.asarray(start_seed, dtype=float)

    for k in range(len(problems)):
        if k == 0:
            sol = solve_contrast(problems[0], seed=seed, max_iter=max_iter,
                                 check_tmin=False)
            if not sol.accepted:
                log.append(f"node 0: seed solve failed (residual {sol.residual_norm:.2e})")
                return ContinuationPath(nodes=nodes, log=log)
            nodes.append(PathNode(problems[0].lam, problems[0].transfer_time, sol))
            prev = (0.0, sol.p0)
            continue
        pa, pb = problems[k - 1], problems[k]
        s, step = 0.0, 1.0
        while s < 1.0 - 1e-12:
            s_try = min(1.0, s + step)
            target = _interp_problem(pa, pb, s_try)
            s_glob = k - 1 + s_try
            if prev2 is not None and prev[0] > prev2[0] + 1e-12:
                pred = prev[1] + (prev[1] - prev2[1]) * (
                    (s_glob - prev[0]) / (prev[0] - prev2[0])
                )
            else:
                pred = prev[1]
            sol = solve_contrast(target, seed=pred, max_iter=max_iter,
                                 check_tmin=False)
            if sol.accepted:
                s = s_try
                prev2, prev = prev, (k - 1 + s, sol.p0)
                if s >= 1.0 - 1e-12:
                    nodes.append(PathNode(target.lam, target.transfer_time, sol))
                step = min(1.0 - s, step * 2.0) if s < 1.0 else step
            else:
                step *= 0.5
                log.append(
                    f"segment {k}: bisecting at s={s_try:.4f} "
                    f"(residual {sol.residual_norm:.2e})"
                )
                if step < min_step:
                    log.append(f"segment {k}: stalled (step underflow)")
                    return ContinuationPath(nodes=nodes, log=log)
    return ContinuationPath(nodes=nodes, log=log)


# ---------------------------------------------------------------------------
# relaxation-time sweep (contrast map over the second species)
# ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    samples: list                 # dicts: ray, s, t1_ms, t2_ms, contrast, accepted
    probes: dict                  # (t1_ms, t2_ms) -> contrast (or None)
    polygon: np.ndarray           # admissible (T1, T2) polygon vertices, ms
    spin1_ms: tuple
    transfer_time: float
    tmin: float
    log: list


def _clip_polytope(x_min, x_max, y_min, y_max):
    """Rectangle clipped by the physical halfplane T2 <= 2*T1 (CCW vertices)."""
    poly = [(x_min, y_min), (x_max, y_min), (x_max, y_max), (x_min, y_max)]
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        ia, ib = a[1] <= 2.0 * a[0] + 1e-9, b[1] <= 2.0 * b[0] + 1e-9
        if ia:
            out.append(a)
        if ia != ib:
            # intersection with y = 2x
            dx, dy = b[0] - a[0], b[1] - a[1]
            t = (2.0 * a[0] - a[1]) / (dy - 2.0 * dx)
            out.append((a[0] + t * dx, a[1] + t * dy))
    if len(out) < 3:
        raise ContrastError("polytope entirely outside T2 <= 2*T1")
    return np.asarray(out)


def _boundary_targets(polygon, n_rays):
    """n_rays points evenly spaced (by arclength) along the polygon boundary."""
    closed = np.vstack([polygon, polygon[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    targets = []
    for k in range(n_rays):
        d = total * k / n_rays
        i = int(np.searchsorted(cum, d, side="right") - 1)
        i = min(i, len(seg) - 1)
        frac = (d - cum[i]) / seg[i] if seg[i] > 0 else 0.0
        targets.append(closed[i] + frac * (closed[i + 1] - closed[i]))
    return [tuple(t) for t in targets]


def _boundary_through(polygon, origin, probe):
    """Boundary exit point of the ray origin -> probe (extended)."""
    d = np.asarray(probe, float) - np.asarray(origin, float)
    if np.linalg.norm(d) == 0.0:
        raise ContrastError("probe coincides with the spin-1 point")
    best_t = None
    closed = np.vstack([polygon, polygon[:1]])
    for i in range(len(polygon)):
        a, b = closed[i], closed[i + 1]
        e = b - a
        M = np.column_stack([d, -e])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        t, s = np.linalg.solve(M, a - np.asarray(origin, float))
        if t > 1e-9 and -1e-9 <= s <= 1.0 + 1e-9:
            if best_t is None or t > best_t:
                best_t = t
    if best_t is None:
        raise ContrastError("probe ray never leaves the polytope")
    return tuple(np.asarray(origin, float) + best_t * d)


def _ray_problem(spin1, origin, target, s, transfer_time, lam, kind, m):
    ms = np.asarray(origin) + s * (np.asarray(target) - np.asarray(origin))
    spin2 = RelaxationParams.from_ms(ms[0], ms[1], spin1.omega_max)
    return ShootingProblem(pair=(spin1, spin2), transfer_time=transfer_time,
                           lam=lam, kind=kind, m=m), ms


def _solve_ray(args):
    """Continuation along one sweep ray; module-level for process pools."""
    (spin1_tup, target_ms, s_nodes, p0_seed, transfer_time, lam, kind, m) = args
    spin1 = RelaxationParams(*spin1_tup)
    origin = (spin1.t1 * 1000.0, spin1.t2 * 1000.0)
    log = []
    out = []
    prev_s, prev_p = 0.0, np.asarray(p0_seed, float)
    older = None          # (s, p0) before prev, for secant prediction
    for s in s_nodes:
        prob, ms = _ray_problem(spin1, origin, target_ms, s, transfer_time,
                                lam, kind, m)
        if older is not None and prev_s > older[0] + 1e-12:
            seed = prev_p + (prev_p - older[1]) * ((s - prev_s) / (prev_s - older[0]))
        else:
            seed = prev_p
        sol = solve_contrast(prob, seed=seed, check_tmin=False)
        if not sol.accepted and older is not None:
            sol = solve_contrast(prob, seed=prev_p, check_tmin=False)
        if not sol.accepted:
            # bisect the segment [prev_s, s] with the generic continuation
            prob_a, _ = _ray_problem(spin1, origin, target_ms, prev_s,
                                     transfer_time, lam, kind, m)
            path = continue_path([prob_a, prob], prev_p, log=log)
            if len(path.nodes) == 2 and path.nodes[-1].solution.accepted:
                sol = path.nodes[-1].solution
        out.append({
            "s": float(s), "t1_ms": float(ms[0]), "t2_ms": float(ms[1]),
            "contrast": float(sol.contrast) if sol.accepted else float("nan"),
            "accepted": bool(sol.accepted),
        })
        if sol.accepted:
            older = (prev_s, prev_p)
            prev_s, prev_p = s, sol.p0
        else:
            log.append(f"ray to ({target_ms[0]:.0f}, {target_ms[1]:.0f}) ms: "
                       f"stalled at s={s:.3f}, ray dropped")
            break
    return out, log


def sweep_contrast_map(spin1, polytope, n_rays=8, samples_per_ray=8,
                       t_factor=1.5, lam=0.9, kind="power", m=DEFAULT_BOUND,
                       probes=(), rng=None, workers=1):
    """Contrast over second-species relaxation times by radial continuation.

    From S = (T1, T2) of the fixed first species (where the contrast is zero
    by symmetry), linear homotopies run to n_rays boundary points of the
    polytope (x_min, x_max, y_min, y_max) in ms, clipped by T2 <= 2*T1; each
    ray is solved by discrete continuation at fixed transfer time
    t_factor * T_min and fixed penalty.  Each probe point gets a dedicated
    ray through it with a node landing exactly on it.
    """
    log = []
    tmin = synthesis.tmin_time(spin1, m)
    T = t_factor * tmin
    origin = (spin1.t1 * 1000.0, spin1.t2 * 1000.0)
    polygon = _clip_polytope(*polytope)

    # seed at S: identical species make the 4D Jacobian singular, so the
    # reduced single-species solve (p2 = 0) is the exact S-solution
    base = ShootingProblem(pair=(spin1, spin1), transfer_time=T, lam=0.0,
                           kind=kind, m=m)
    p_s = decoupled_seed(base)
    ramp = continue_path(
        [replace(pb, pair=(spin1, spin1)) for pb in lambda_schedule(base, lam)],
        p_s, log=log)
    if not ramp.nodes or abs(ramp.nodes[-1].lam - lam) > 1e-9:
        raise ContrastError(f"lambda ramp at S stalled: {log}")
    p_s = ramp.nodes[-1].solution.p0

    targets = _boundary_targets(polygon, n_rays)
    s_grid = [k / samples_per_ray for k in range(1, samples_per_ray + 1)]
    jobs = []
    for tgt in targets:
        jobs.append((tuple((spin1.t1, spin1.t2, spin1.omega_max)), tgt,
                     list(s_grid), p_s, T, lam, kind, m))
    probe_spec = []
    for probe in probes:
        f_k = _boundary_through(polygon, origin, probe)
        s_probe = np.linalg.norm(np.asarray(probe) - np.asarray(origin)) / \
            np.linalg.norm(np.asarray(f_k) - np.asarray(origin))
        nodes = sorted(set(s_grid) | {round(s_probe, 12)})
        probe_spec.append((tuple(probe), round(s_probe, 12)))
        jobs.append((tuple((spin1.t1, spin1.t2, spin1.omega_max)), f_k,
                     nodes, p_s, T, lam, kind, m))

    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_ray, jobs))
    else:
        results = [_solve_ray(j) for j in jobs]

    samples = [{"ray": -1, "s": 0.0, "t1_ms": origin[0], "t2_ms": origin[1],
                "contrast": 0.0, "accepted": True}]
    for k, (rows, ray_log) in enumerate(results):
        log.extend(ray_log)
        for row in rows:
            row["ray"] = k
            samples.append(row)

    probe_values = {}
    for idx, (probe, s_probe) in enumerate(probe_spec):
        rows, _ = results[n_rays + idx]
        hit = [r for r in rows if abs(r["s"] - s_probe) < 1e-9 and r["accepted"]]
        probe_values[probe] = hit[0]["contrast"] if hit else None

    return SweepResult(samples=samples, probes=probe_values, polygon=polygon,
                       spin1_ms=origin, transfer_time=T, tmin=tmin, log=log)


# ---------------------------------------------------------------------------
# embedding checks (two-input lift, decoupled-adjoint lift)
# ---------------------------------------------------------------------------

def embed_planar(w8):
    """Insert zero x-components and x-costates: R^8 -> R^12 extremal point."""
    w8 = np.asarray(w8, float)
    w12 = np.zeros(12)
    w12[[1, 2, 4, 5]] = w8[:4]
    w12[[7, 8, 10, 11]] = w8[4:]
    return w12


def bi_input_rhs(w12, pair, kind, lam, m=DEFAULT_BOUND):
    """Extremal vector field of the full two-input penalized problem.

    State blocks (x_i, y_i, z_i), costate blocks (px_i, py_i, pz_i); the
    control maximizes u1*H1 + u2*H2 - (1-lam)*|u|^k over the disk |u| <= m,
    i.e. it points along (H1, H2) with the scalar interior maximizer applied
    to sqrt(H1^2 + H2^2).
    """
    w = np.asarray(w12, float)
    x, y, z = w[0:6:3], w[1:6:3], w[2:6:3]
    px, py, pz = w[6:12:3], w[7:12:3], w[8:12:3]
    big = np.array([p.big_gamma for p in pair])
    small = np.array([p.gamma for p in pair])
    h1 = float(-(z * py).sum() + (y * pz).sum())
    h2 = float((z * px).sum() - (x * pz).sum())
    rho = math.hypot(h1, h2)
    if rho < 1e-300:
        u1 = u2 = 0.0
    else:
        mag = float(interior_maximizer(rho, kind, lam, m))
        u1, u2 = mag * h1 / rho, mag * h2 / rho
    dx = -big * x + u2 * z
    dy = -big * y - u1 * z
    dz = small * (1.0 - z) + u1 * y - u2 * x
    dpx = big * px + u2 * pz
    dpy = big * py - u1 * pz
    dpz = small * pz + u1 * py - u2 * px
    out = np.empty(12)
    out[0:6:3], out[1:6:3], out[2:6:3] = dx, dy, dz
    out[6:12:3], out[7:12:3], out[8:12:3] = dpx, dpy, dpz
    return out


def bi_input_embedding_residual(solution, n_samples=100):
    """Max defect of the zero-extended extremal in the two-input system.

    Samples the accepted planar extremal, lifts each point with zero
    x-components and x-costates, and compares the lifted planar vector field
    with the two-input extremal field at the same point.
    """
    problem = solution.problem
    arc = solution.trajectory or solution_trajectory(solution)
    system = problem.system()
    idx = np.linspace(0, len(arc.t) - 1, n_samples).astype(int)
    worst = 0.0
    for i in idx:
        w8 = np.concatenate([arc.x[i], arc.p[i]])
        lhs = embed_planar(system.rhs(arc.t[i], w8))
        rhs12 = bi_input_rhs(embed_planar(w8), problem.pair, problem.kind,
                             problem.lam, problem.m)
        worst = max(worst, float(np.abs(lhs - rhs12).max()))
    return worst


def lambda_schedule(problem, lam_target, coarse=None):
    """Schedule of problems ramping lambda from 0 to lam_target."""
    if coarse is None:
        coarse = [0.0, 0.3, 0.5, 0.65, 0.75, 0.82, 0.87, 0.9, 0.93]
    lams = [v for v in coarse if v < lam_target - 1e-12] + [lam_target]
    return [replace(problem, lam=lam) for lam in lams]


def time_schedule(problem, times):
    return [replace(problem, transfer_time=float(T)) for T in times]


def contrast_vs_time(pair, t_factors, lam_target=0.9, kind="quadratic",
                     m=DEFAULT_BOUND, seed_t_factor=1.5, rng=None, log=None):
    """Solve the contrast problem across a grid of transfer times.

    Starts at T = seed_t_factor * T_min with a lambda ramp 0 -> lam_target,
    then marches the sorted time grid downward and upward from the seed.  A
    node whose continuation stalls (e.g. across a policy bifurcation) is
    retried from scratch and from already-solved neighbors in a repair pass,
    so an unreachable branch segment does not abort the sweep; unconverged
    nodes are kept, flagged unaccepted.  Returns (path over T, T_min).
    """
    log = [] if log is None else log
    tmin = synthesis.tmin_time(pair[0], m)
    t_seed = seed_t_factor * tmin
    base = ShootingProblem(pair=tuple(pair), transfer_time=t_seed, kind=kind, m=m)
    ramp = continue_path(lambda_schedule(base, lam_target),
                         decoupled_seed(base), log=log)
    if not ramp.nodes or ramp.nodes[-1].lam < lam_target - 1e-9:
        raise ContrastError(f"lambda ramp stalled: {log}")
    seed_sol = ramp.nodes[-1].solution
    at_target = replace(base, lam=lam_target)

    times = sorted(float(f) * tmin for f in t_factors)
    solved = {}    # T -> ShootingSolution
    failed = {}

    def attempt(T, seeds):
        prob = replace(at_target, transfer_time=T)
        for sd in seeds:
            sol = solve_contrast(prob, seed=sd, check_tmin=False)
            if sol.accepted:
                return sol
        # fine continuation from the nearest solved time
        anchors = sorted(solved, key=lambda Ta: abs(Ta - T))
        if anchors:
            Ta = anchors[0]
            path = continue_path(time_schedule(at_target, [Ta, T]),
                                 solved[Ta].p0, log=log)
            if len(path.nodes) == 2 and path.nodes[-1].solution.accepted:
                return path.nodes[-1].solution
        return sol

    for leg in ([t for t in times if t <= t_seed][::-1],
                [t for t in times if t > t_seed]):
        anchor = seed_sol
        older = None
        for T in leg:
            seeds = []
            if older is not None:
                dT = anchor.problem.transfer_time - older.problem.transfer_time
                if abs(dT) > 1e-12:
                    seeds.append(anchor.p0 + (anchor.p0 - older.p0) *
                                 (T - anchor.problem.transfer_time) / dT)
            seeds.append(anchor.p0)
            sol = attempt(T, seeds)
            if sol.accepted:
                solved[T] = sol
                older, anchor = anchor, sol
            else:
                failed[T] = sol
                log.append(f"T = {T:.6g}: unconverged "
                           f"(residual {sol.residual_norm:.2e}), marching on")

    # repair pass: retry failures seeded from both solved neighbors
    for T in sorted(failed):
        neighbors = sorted(solved, key=lambda Ta: abs(Ta - T))[:2]
        sol = attempt(T, [solved[Ta].p0 for Ta in neighbors])
        if sol.accepted:
            solved[T] = sol
            del failed[T]
            log.append(f"T = {T:.6g}: recovered in the repair pass")

    nodes = [PathNode(lam_target, T, solved[T]) for T in sorted(solved)]
    nodes += [PathNode(lam_target, T, failed[T]) for T in sorted(failed)]
    nodes.sort(key=lambda n: n.transfer_time)
    return ContinuationPath(nodes=nodes, log=log), tmin
