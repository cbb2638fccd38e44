"""Jacobi fields along extremal arcs and first geometric conjugate times.

A Jacobi field solves the variational equation d(dz)/dt = dH(z(t)) dz along a
reference extremal and is vertical at t = 0 (dx(0) = 0).  The first conjugate
time is the first t > 0 at which the projected fields lose rank.  For regular
(smooth true Hamiltonian) references the test matrix collects n vertical
fields; for singular references the initial dp are restricted to directions
tangent to {H1 = H10 = 0}, the radial direction p(0) is dropped (it generates
the trivial field of the p-homogeneity), and dx/dt joins the rank test.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .extremal_flow import ATOL, RTOL, FlowError, integrate_system

EXCEPTIONAL_TOL = 1e-10
TC_TIME_TOL = 1e-8
HOVER_TOL = 1e-12
FD_REL_STEP = 1e-6


class ConjugateError(FlowError):
    """Conjugate-point test not applicable or undecidable."""


@dataclass
class JacobiSolution:
    """Reference trajectory and variational fields sampled together."""

    t: np.ndarray          # (N,)
    z: np.ndarray          # (N, dim)
    fields: np.ndarray     # (N, k, dim)
    system: object

    @property
    def delta_x(self):
        n = self.system.dim // 2
        return self.fields[:, :, :n]


@dataclass
class ConjugateReport:
    first_conjugate_time: float
    times: np.ndarray
    indicator: np.ndarray
    sigma: np.ndarray
    mode: str


def fd_jacobian(system, t, z, rel_step=FD_REL_STEP):
    """Jacobian of system.rhs at z by batched central differences."""
    z = np.asarray(z, dtype=float)
    dim = z.size
    h = rel_step * np.maximum(1.0, np.abs(z))
    P = np.repeat(z[None, :], 2 * dim, axis=0)
    idx = np.arange(dim)
    P[idx, idx] += h
    P[dim + idx, idx] -= h
    F = system.rhs(t, P)
    return (F[:dim] - F[dim:]).T / (2.0 * h)


class _AugmentedSystem:
    """Reference flow plus k linearized fields as one stacked vector."""

    def __init__(self, base, k):
        self.base = base
        self.k = k
        self.dim = base.dim * (1 + k)

    def rhs(self, t, w):
        w = np.asarray(w, dtype=float)
        d = self.base.dim
        z = w[:d]
        fields = w[d:].reshape(self.k, d)
        A = fd_jacobian(self.base, t, z)
        dz = self.base.rhs(t, z)
        return np.concatenate([np.asarray(dz).ravel(), (fields @ A.T).ravel()])

    def hamiltonian(self, w):
        return self.base.hamiltonian(np.asarray(w)[: self.base.dim])


def vertical_deltas(system):
    """Canonical basis of vertical variations (0, e_i), one per state dim."""
    n = system.dim // 2
    deltas = np.zeros((n, system.dim))
    deltas[:, n:] = np.eye(n)
    return deltas


def singular_vertical_deltas(system, w0):
    """Vertical variations tangent to {H1 = H10 = 0}, radial excluded.

    The tangent dp satisfy <F1(x0), dp> = <[F1,F0](x0), dp> = 0; p(0) lies in
    that space and generates an identically-vanishing projected field, so it
    is projected out.
    """
    from . import model as _model

    n = system.dim // 2
    x0, p0 = np.asarray(w0[:n]), np.asarray(w0[n:])
    rows = np.vstack([
        _model.eval_field("F1", x0, system.params),
        _model.eval_bracket("ad1", x0, system.params),
    ])
    _, s, vt = np.linalg.svd(rows)
    rank = int((s > 1e-12 * max(1.0, s[0])).sum())
    tangent = vt[rank:].T                      # (n, n-rank)
    if tangent.shape[1] == 0:
        return np.zeros((0, system.dim))
    phat = p0 / np.linalg.norm(p0)
    reduced = tangent - np.outer(phat, phat @ tangent)
    q, r = np.linalg.qr(reduced)
    keep = np.abs(np.diag(r)) > 1e-10
    basis = q[:, keep]
    deltas = np.zeros((basis.shape[1], system.dim))
    deltas[:, n:] = basis.T
    return deltas


def jacobi_propagate(reference, initial_deltas, rtol=RTOL, atol=ATOL,
                     dense_min_dt=None):
    """Propagate variational fields jointly with the reference arc.

    ``reference`` is an ArcResult; the arc is re-integrated from its initial
    point for its realized duration, with each row of ``initial_deltas``
    (shape (k, 2n)) carried through the linearized dynamics.
    """
    system = reference.system
    deltas = np.atleast_2d(np.asarray(initial_deltas, dtype=float))
    if deltas.shape[1] != system.dim:
        raise ConjugateError(
            f"initial deltas must have {system.dim} components, got {deltas.shape[1]}"
        )
    aug = _AugmentedSystem(system, deltas.shape[0])
    w0 = np.concatenate([reference.w0, deltas.ravel()])
    arc = integrate_system(aug, w0, reference.duration, rtol=rtol, atol=atol,
                           dense_min_dt=dense_min_dt)
    W = np.column_stack([arc.x, arc.p])
    d = system.dim
    return JacobiSolution(
        t=arc.t,
        z=W[:, :d],
        fields=W[:, d:].reshape(len(arc.t), deltas.shape[0], d),
        system=system,
    )


def _test_matrix(solution, i, mode):
    """Columns tested for rank loss at sample i."""
    n = solution.system.dim // 2
    cols = [solution.fields[i, j, :n] for j in range(solution.fields.shape[1])]
    if mode == "singular":
        zdot = solution.system.rhs(solution.t[i], solution.z[i])
        cols.append(np.asarray(zdot).ravel()[:n])
    return np.column_stack(cols)


def _completion(mat):
    """Fixed orthonormal complement of the column span of mat."""
    n, k = mat.shape
    if k >= n:
        return np.zeros((n, 0))
    q, _ = np.linalg.qr(np.column_stack([mat, np.eye(n)]))
    return q[:, k:n]


def first_conjugate_time(reference, mode="regular", deltas=None, rtol=RTOL,
                         atol=ATOL, dense_min_dt=None):
    """First time the projected Jacobi fields lose rank along the reference.

    The signed determinant of the projected field matrix (completed to a
    square matrix by a frame frozen early on the arc) is the bracketing
    signal; its first sign change is refined to 1e-8 in time.  The smallest
    singular value is reported alongside; a zero is also declared when it
    crosses 1e-10 times its running maximum.  Returns a ConjugateReport with
    first_conjugate_time None when no rank loss occurs before the arc end.
    """
    system = reference.system
    if abs(system.hamiltonian(reference.w0)) <= EXCEPTIONAL_TOL:
        raise ConjugateError("exceptional extremal (H = 0): test not applicable")
    if mode not in ("regular", "singular"):
        raise ConjugateError(f"unknown mode {mode!r}")

    if deltas is None:
        if mode == "regular":
            deltas = vertical_deltas(system)
        else:
            deltas = singular_vertical_deltas(system, reference.w0)
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))

    if dense_min_dt is None:
        dense_min_dt = abs(reference.duration) / 512.0
    sol = jacobi_propagate(reference, deltas, rtol=rtol, atol=atol,
                           dense_min_dt=dense_min_dt)
    N = len(sol.t)

    mats = [_test_matrix(sol, i, mode) for i in range(N)]
    n_rows, n_cols = mats[1].shape
    if n_cols == 0 or n_cols > n_rows:
        raise ConjugateError("no admissible variations for the rank test")

    # freeze the completion frame once the fields have left zero
    i_ref = 1
    while i_ref < N - 1 and np.linalg.norm(mats[i_ref]) == 0.0:
        i_ref += 1
    comp = _completion(mats[i_ref])

    indicator = np.empty(N)
    sigma = np.empty(N)
    for i, M in enumerate(mats):
        indicator[i] = np.linalg.det(np.column_stack([M, comp]))
        sigma[i] = np.linalg.svd(M, compute_uv=False)[-1]

    tc = _locate_zero(sol, indicator, sigma, deltas, mode, comp, rtol, atol)
    if tc is None:
        peak = sigma[1:].max() if N > 1 else 0.0
        if peak < HOVER_TOL:
            raise ConjugateError(
                "indeterminate: rank indicator hovers below 1e-12 without crossing"
            )
    return ConjugateReport(first_conjugate_time=tc, times=sol.t,
                           indicator=indicator, sigma=sigma, mode=mode)


def _locate_zero(sol, indicator, sigma, deltas, mode, comp, rtol, atol):
    """Bracket the first indicator sign change and refine it by root-solving."""
    system = sol.system
    d = system.dim
    aug = _AugmentedSystem(system, deltas.shape[0])
    run_max = 0.0
    for i in range(1, len(sol.t) - 1):
        run_max = max(run_max, sigma[i])
        sign_change = indicator[i] * indicator[i + 1] < 0.0
        sigma_zero = run_max > 0.0 and sigma[i + 1] < 1e-10 * run_max
        if not (sign_change or sigma_zero):
            continue
        anchor = np.concatenate([sol.z[i], sol.fields[i].ravel()])
        t_a, t_b = sol.t[i], sol.t[i + 1]

        def value(tt):
            if tt == t_a:
                w = anchor
            else:
                arc = integrate_system(aug, anchor, tt - t_a, rtol=rtol,
                                       atol=atol, record=False)
                w = arc.w_final
            fields = w[d:].reshape(deltas.shape[0], d)
            cols = [f[: d // 2] for f in fields]
            if mode == "singular":
                cols.append(np.asarray(system.rhs(tt, w[:d])).ravel()[: d // 2])
            return np.linalg.det(np.column_stack(cols + [comp]))

        if sign_change:
            return float(t_a + brentq(lambda s: value(t_a + s), 0.0, t_b - t_a,
                                      xtol=TC_TIME_TOL))
        return float(sol.t[i + 1])
    return None
