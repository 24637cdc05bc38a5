"""Charged-particle dynamics in a uniform magnetic field.

Full phase space is (q^1..q^3, u^1..u^3) with the Lorentz field
Gamma = u^i d/dq^i + (u x B)^s d/du^s.  Under the minimal-coupling chart the
planar sector (Q^1, Q^2, U^1, U^2) closes on itself and the transported field
is linear, xi' = G xi, with closed-form trigonometric propagator F(t).

The q^3/u^3 pair is free motion and is kept out of the 4x4 reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from . import numcore as nc
from .numcore import DomainError, Tolerance

TRAJECTORY_COLUMNS = ("t", "Q1", "Q2", "U1", "U2", "chi1", "chi2", "H")


@dataclass(frozen=True)
class PhaseFlow:
    b: float
    G: np.ndarray
    F: Callable
    Omega_D: np.ndarray


@dataclass(frozen=True)
class MotionConstants:
    chi1: float
    chi2: float


def omega_d_matrix() -> np.ndarray:
    eye = np.eye(2)
    zero = np.zeros((2, 2))
    return np.block([[zero, eye], [-eye, zero]])


def metric_g() -> np.ndarray:
    return np.diag([1.0, 1.0, -1.0, -1.0])


def generator_matrix(b: float) -> np.ndarray:
    b = float(b)
    return np.array(
        [
            [0.0, b / 2.0, 1.0, 0.0],
            [-b / 2.0, 0.0, 0.0, 1.0],
            [-b * b / 4.0, 0.0, 0.0, b / 2.0],
            [0.0, -b * b / 4.0, -b / 2.0, 0.0],
        ]
    )


def propagator_matrix(b: float, t: float) -> np.ndarray:
    """Closed-form exp(t G); entries are 2 pi / B periodic."""
    b = float(b)
    if b == 0.0:
        raise DomainError("closed-form propagator needs B != 0")
    bt = b * float(t)
    cos_bt = math.cos(bt)
    s = math.sin(bt)
    c = 0.5 * (1.0 + cos_bt)
    one_minus = 1.0 - cos_bt
    return np.array(
        [
            [c, s / 2.0, s / b, one_minus / b],
            [-s / 2.0, c, -one_minus / b, s / b],
            [-b * s / 4.0, -b * one_minus / 4.0, c, s / 2.0],
            [b * one_minus / 4.0, -b * s / 4.0, -s / 2.0, c],
        ]
    )


def flow_generator(b: float) -> PhaseFlow:
    b = float(b)
    if b == 0.0:
        raise DomainError("reduction to the 4x4 flow needs B != 0")
    return PhaseFlow(
        b=b,
        G=generator_matrix(b),
        F=lambda t: propagator_matrix(b, t),
        Omega_D=omega_d_matrix(),
    )


def transported_generator(b: float) -> np.ndarray:
    """g G^T g: the generator of the operator-side evolution, i.e. the
    derivative of heisenberg_matrix at t = 0.  Distinct from the plain
    transpose that enters the symplectic identity G^T Omega + Omega G = 0."""
    g = metric_g()
    return g @ generator_matrix(b).T @ g


def heisenberg_matrix(b: float, t: float) -> np.ndarray:
    """g F(t)^T g; one-parameter group with derivative g G^T g at t = 0."""
    g = metric_g()
    return g @ propagator_matrix(b, t).T @ g


def generator_symplectic_check(
    flow: PhaseFlow,
    tol: Tolerance = Tolerance(absolute=1e-11),
    t_samples: Sequence[float] | None = None,
) -> dict:
    """Residuals for G^T Omega + Omega G = 0 and F^T Omega F = Omega.

    The generator identity holds exactly in floats: the entries of G^T Omega
    and Omega G are the same stored values with opposite signs.
    """
    omega = flow.Omega_D
    gen_residual = float(np.max(np.abs(flow.G.T @ omega + omega @ flow.G)))
    if t_samples is None:
        t_samples = np.linspace(0.1, 10.0, 25)
    prop_residual = 0.0
    for t in t_samples:
        f = flow.F(float(t))
        prop_residual = max(
            prop_residual, float(np.max(np.abs(f.T @ omega @ f - omega)))
        )
    checks = [
        {"name": "generator_identity", "residual": gen_residual},
        {"name": "propagator_symplectic", "residual": prop_residual},
    ]
    for c in checks:
        c["tolerance"] = tol.absolute
        c["pass"] = bool(c["residual"] <= tol.absolute)
    return {"b": flow.b, "checks": checks, "passed": all(c["pass"] for c in checks)}


def gamma_magnetic(b_vec: Sequence[float]) -> geo.VectorField:
    """Lorentz field on R^6: dq = u, du = u x B, for a constant field B."""
    b1, b2, b3 = (float(c) for c in b_vec)

    def comps(x):
        u1, u2, u3 = x[3], x[4], x[5]
        return nc.pack(
            u1,
            u2,
            u3,
            u2 * b3 - u3 * b2,
            u3 * b1 - u1 * b3,
            u1 * b2 - u2 * b1,
        )

    return geo.VectorField(6, comps)


def reduced_hamiltonian(b: float) -> Callable:
    """H on (Q1, Q2, U1, U2): half the squared planar velocity."""
    b = float(b)

    def h(xi):
        v1 = xi[2] + 0.5 * b * xi[1]
        v2 = xi[3] - 0.5 * b * xi[0]
        return 0.5 * (v1 * v1 + v2 * v2)

    return h


def constants_chi(b: float, state: Sequence[float]) -> MotionConstants:
    b = float(b)
    q1, q2, u1, u2 = (float(c) for c in state)
    return MotionConstants(chi1=u1 - 0.5 * b * q2, chi2=u2 + 0.5 * b * q1)


def larmor_orbit(b: float, state: Sequence[float], t_grid: Sequence[float]) -> dict:
    """Orbit decomposition center + circle from the exact linear flow.

    The guiding center is (chi2/B, -chi1/B); the radial part rotates at
    angular frequency B with constant radius |planar velocity| / B.
    """
    b = float(b)
    if b == 0.0:
        raise DomainError("Larmor decomposition needs B != 0")
    state = np.asarray(state, dtype=float)
    chi = constants_chi(b, state)
    center = np.array([chi.chi2 / b, -chi.chi1 / b])
    v1 = state[2] + 0.5 * b * state[1]
    v2 = state[3] - 0.5 * b * state[0]
    radius = math.hypot(v1, v2) / abs(b)
    t_grid = np.asarray(t_grid, dtype=float)
    states = np.empty((t_grid.shape[0], 4))
    for k, t in enumerate(t_grid):
        states[k] = propagator_matrix(b, t) @ state
    positions = states[:, :2]
    return {
        "b": b,
        "t": t_grid,
        "center": center,
        "radius": radius,
        "states": states,
        "positions": positions,
        "radial": positions - center[None, :],
    }


def pushforward_gamma(vector_potential: Callable) -> geo.VectorField:
    """Transported dynamics (U - A)^i d/dQ^i + (U - A)^k dA_k/dQ^i d/dU^i.

    No longer second order: the position part is U - A, not U.
    """

    def comps(x):
        x = np.asarray(x, dtype=float)
        a, jac = geo.jacobian_at(vector_potential, x[:3], 3)
        v = x[3:] - a
        return np.concatenate([v, jac.T @ v])

    return geo.VectorField(6, comps)


def trajectory_rows(
    b: float,
    state: Sequence[float],
    t_grid: Sequence[float],
    method: str = "exact",
) -> np.ndarray:
    """Rows (t, Q1, Q2, U1, U2, chi1, chi2, H) along the planar flow."""
    b = float(b)
    state = np.asarray(state, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    h = reduced_hamiltonian(b)
    gen = generator_matrix(b)
    rows = np.empty((t_grid.shape[0], 8))
    if method == "exact":
        states = [propagator_matrix(b, t) @ state for t in t_grid]
    elif method == "rk4":
        if t_grid.shape[0] < 2 or not np.allclose(np.diff(t_grid, 2), 0.0, atol=1e-12):
            raise ValueError("rk4 trajectories need a uniform grid of >= 2 times")
        dt = float(t_grid[1] - t_grid[0])
        states = [state.copy()]
        x = state.copy()
        for _ in range(t_grid.shape[0] - 1):
            x = nc.rk4_step(lambda y: gen @ y, x, dt)
            states.append(x)
    else:
        raise ValueError(f"unknown method '{method}'")
    for k, (t, xi) in enumerate(zip(t_grid, states)):
        chi = constants_chi(b, xi)
        rows[k] = (t, xi[0], xi[1], xi[2], xi[3], chi.chi1, chi.chi2, h(xi))
    return rows
