"""Darboux frames from regular Lagrangians on velocity phase space.

Coordinates are x = (q^1..q^n, u^1..u^n).  From a regular L the module
builds the momentum one-form theta = (dL/du^i) dq^i, the symplectic
two-form, and the adapted frame

    X_j = d/dq^j + (X_j)^k d/du^k,   H (X_j)^. = -M_.j
    Y^j = (H^-1)_j^k d/du^k

with H the velocity Hessian and M the mixed velocity/position Hessian,
together with the dual forms alpha^i = dq^i and beta_i = d(dL/du^i).

Sign convention: the two-form used for Hamiltonian pairings is
OMEGA_SIGN * d(theta); the default makes i_Gamma omega = +dH for the
minimal-coupling examples.  The frame/wedge identity beta_i wedge alpha^i =
d(theta) is orientation-free and is checked against d(theta) directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from . import numcore as nc
from .linstruct import Diffeomorphism
from .numcore import DomainError, Series, Tolerance

OMEGA_SIGN = -1.0

HESSIAN_CONDITION_LIMIT = 1e8


class DegenerateLagrangianError(ValueError):
    """Velocity Hessian is singular (or numerically unusable) at the point."""


@dataclass(frozen=True)
class Lagrangian:
    n: int
    L: Callable
    name: str = ""

    @property
    def dim(self) -> int:
        return 2 * self.n


@dataclass(frozen=True)
class AdaptedFrame:
    lagrangian: Lagrangian
    X: list
    Y: list
    alpha: list
    beta: list


def _unit(dim: int, i: int) -> tuple[int, ...]:
    return tuple(1 if k == i else 0 for k in range(dim))


def _L_series(lag: Lagrangian, vals: Sequence[float], order: int) -> Series:
    out = lag.L(nc.jet_seed(vals, order))
    if not isinstance(out, Series):
        out = Series.constant(float(out), 2 * lag.n, order)
    return out


def momentum(lag: Lagrangian, i: int) -> Callable:
    """Scalar field dL/du^i, evaluable on floats and on series seeds."""

    def p_i(x):
        dim = 2 * lag.n
        if any(isinstance(c, Series) for c in x):
            order = max(c.order for c in x if isinstance(c, Series))
            vals = [nc.value_of(c) for c in x]
            return _L_series(lag, vals, order + 1).deriv(_unit(dim, lag.n + i))
        jet = nc.jet_eval(lag.L, np.asarray(x, dtype=float), order=1)
        return jet.partial(_unit(dim, lag.n + i))

    return p_i


def cartan_form(lag: Lagrangian, x=None) -> geo.OneForm:
    """Momentum one-form (dL/du^1, ..., dL/du^n, 0, ..., 0).

    If a point is supplied, regularity of the velocity Hessian is verified
    there before the form is returned.
    """
    if x is not None:
        hessian_blocks(lag, x)
    n, dim = lag.n, 2 * lag.n
    momenta = [momentum(lag, i) for i in range(n)]

    def comps(x):
        ps = [p(x) for p in momenta]
        if any(isinstance(p, Series) for p in ps):
            zero = ps[0] * 0.0
            return ps + [zero] * n
        return np.concatenate([np.asarray(ps, dtype=float), np.zeros(n)])

    return geo.OneForm(dim, comps)


def hessian_blocks(lag: Lagrangian, x) -> tuple[np.ndarray, np.ndarray]:
    """(H, M) with H_ik = d2L/du^i du^k and M_ij = d2L/du^i dq^j; raises on
    a degenerate or ill-conditioned H."""
    n, dim = lag.n, 2 * lag.n
    jet = nc.jet_eval(lag.L, np.asarray(x, dtype=float), order=2)
    h = np.zeros((n, n))
    m = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            a = [0] * dim
            a[n + i] += 1
            a[n + k] += 1
            h[i, k] = jet.partial(tuple(a))
            b = [0] * dim
            b[n + i] += 1
            b[k] += 1
            m[i, k] = jet.partial(tuple(b))
    _require_regular(h)
    return h, m


def _require_regular(h: np.ndarray) -> None:
    cond = np.linalg.cond(h)
    if not np.isfinite(cond) or cond > HESSIAN_CONDITION_LIMIT:
        raise DegenerateLagrangianError(
            f"velocity Hessian condition {cond:.3e} exceeds {HESSIAN_CONDITION_LIMIT:.1e}"
        )


def symplectic_form(lag: Lagrangian, x=None) -> geo.TwoForm:
    """OMEGA_SIGN * d(theta); evaluation raises on a degenerate Hessian."""
    if x is not None:
        hessian_blocks(lag, x)
    dtheta = geo.exterior_d(cartan_form(lag))

    def comps(x):
        hessian_blocks(lag, x)
        return OMEGA_SIGN * dtheta(np.asarray(x, dtype=float))

    return geo.TwoForm(2 * lag.n, comps)


def _frame_solution(lag: Lagrangian, x):
    """Velocity components of the frame at x.

    Float path: (sol_X, sol_Y) as n x n arrays, column j belonging to the
    j-th field.  Series path: same layout with order-1 series entries.
    """
    n, dim = lag.n, 2 * lag.n
    if any(isinstance(c, Series) for c in x):
        order = max(c.order for c in x if isinstance(c, Series))
        vals = [nc.value_of(c) for c in x]
        ls = _L_series(lag, vals, order + 2)
        h = [[None] * n for _ in range(n)]
        m = [[None] * n for _ in range(n)]
        for i in range(n):
            for k in range(n):
                a = [0] * dim
                a[n + i] += 1
                a[n + k] += 1
                h[i][k] = ls.deriv(tuple(a))
                b = [0] * dim
                b[n + i] += 1
                b[k] += 1
                m[i][k] = ls.deriv(tuple(b))
        rhs = [
            [-m[i][j] for j in range(n)]
            + [Series.constant(1.0 if i == j else 0.0, dim, order) for j in range(n)]
            for i in range(n)
        ]
        try:
            sol = nc.solve_linear_generic(h, rhs)
        except DomainError as err:
            raise DegenerateLagrangianError(str(err)) from err
        sol_x = [[sol[k][j] for j in range(n)] for k in range(n)]
        sol_y = [[sol[k][n + j] for j in range(n)] for k in range(n)]
        return sol_x, sol_y
    h, m = hessian_blocks(lag, x)
    sol_x = np.linalg.solve(h, -m)
    sol_y = np.linalg.solve(h, np.eye(n))
    return sol_x, sol_y


def adapted_frame(lag: Lagrangian, x=None) -> AdaptedFrame:
    """Frame (X_j, Y^j) and dual forms (alpha^i, beta_i).

    If a point is supplied, the construction is validated there (regular
    Hessian) before the frame is returned.
    """
    if x is not None:
        hessian_blocks(lag, x)
    n, dim = lag.n, 2 * lag.n

    def x_field(j: int) -> geo.VectorField:
        def comps(x):
            sol_x, _ = _frame_solution(lag, x)
            if isinstance(sol_x, np.ndarray):
                e = np.zeros(dim)
                e[j] = 1.0
                e[n:] = sol_x[:, j]
                return e
            order = max(c.order for c in x if isinstance(c, Series))
            out = [Series.constant(1.0 if a == j else 0.0, dim, order) for a in range(n)]
            return out + [sol_x[k][j] for k in range(n)]

        return geo.VectorField(dim, comps)

    def y_field(j: int) -> geo.VectorField:
        def comps(x):
            _, sol_y = _frame_solution(lag, x)
            if isinstance(sol_y, np.ndarray):
                e = np.zeros(dim)
                e[n:] = sol_y[:, j]
                return e
            order = max(c.order for c in x if isinstance(c, Series))
            out = [Series.constant(0.0, dim, order) for _ in range(n)]
            return out + [sol_y[k][j] for k in range(n)]

        return geo.VectorField(dim, comps)

    def alpha_form(i: int) -> geo.OneForm:
        def comps(x):
            if any(isinstance(c, Series) for c in x):
                order = max(c.order for c in x if isinstance(c, Series))
                return [
                    Series.constant(1.0 if a == i else 0.0, dim, order) for a in range(dim)
                ]
            e = np.zeros(dim)
            e[i] = 1.0
            return e

        return geo.OneForm(dim, comps)

    frame = AdaptedFrame(
        lagrangian=lag,
        X=[x_field(j) for j in range(n)],
        Y=[y_field(j) for j in range(n)],
        alpha=[alpha_form(i) for i in range(n)],
        beta=[geo.exact_form(momentum(lag, i), dim) for i in range(n)],
    )
    return frame


def darboux_check(
    lag: Lagrangian,
    n_samples: int = 100,
    tol: Tolerance = Tolerance(absolute=1e-8),
    seed: int = 0,
    sampler: Callable | None = None,
    box: float = 1.5,
) -> dict:
    """Flatness report for the adapted frame on sampled points.

    Per point, one order-3 expansion of L supplies the frame components and
    their first derivatives; the two-form d(theta) it is compared against is
    recomputed through the generic exterior-derivative path.
    """
    n, dim = lag.n, 2 * lag.n
    rng = np.random.default_rng(seed)
    if sampler is not None:
        pts = np.asarray(sampler(n_samples, rng), dtype=float)
    else:
        pts = rng.uniform(-box, box, size=(dim, n_samples))

    frame = adapted_frame(lag)
    dtheta_generic = geo.exterior_d(cartan_form(lag))
    dbeta_generic = [geo.exterior_d(beta) for beta in frame.beta]

    max_bracket = 0.0
    max_duality = 0.0
    max_closed = 0.0
    max_wedge = 0.0
    max_cond = 0.0

    for idx in range(pts.shape[1]):
        x = pts[:, idx]
        seeds = nc.jet_seed(x, 1)
        sol_x, sol_y = _frame_solution(lag, seeds)

        # frame component values and Jacobians from the order-1 series
        vals = np.zeros((2 * n, dim))
        jacs = np.zeros((2 * n, dim, dim))
        for j in range(n):
            vals[j, j] = 1.0
            for k in range(n):
                s = sol_x[k][j]
                vals[j, n + k] = s.value
                jacs[j, n + k] = [s.coefficient(_unit(dim, a)) for a in range(dim)]
            for k in range(n):
                s = sol_y[k][j]
                vals[n + j, n + k] = s.value
                jacs[n + j, n + k] = [s.coefficient(_unit(dim, a)) for a in range(dim)]

        for a in range(2 * n):
            for b in range(a + 1, 2 * n):
                br = jacs[b] @ vals[a] - jacs[a] @ vals[b]
                max_bracket = max(max_bracket, float(np.max(np.abs(br))))

        # beta rows (d of the momenta) from one order-3 expansion
        ls = _L_series(lag, x, 3)
        beta_rows = np.zeros((n, dim))
        for i in range(n):
            p_series = ls.deriv(_unit(dim, n + i))
            beta_rows[i] = [p_series.partial(_unit(dim, a)) for a in range(dim)]
            max_closed = max(max_closed, float(np.max(np.abs(dbeta_generic[i](x)))))
        h = np.array([[beta_rows[i][n + k] for k in range(n)] for i in range(n)])
        max_cond = max(max_cond, float(np.linalg.cond(h)))

        # duality pairings
        for i in range(n):
            for j in range(n):
                d = 1.0 if i == j else 0.0
                max_duality = max(
                    max_duality,
                    abs(float(vals[j][i]) - d),                       # alpha^i(X_j)
                    abs(float(vals[n + j][i])),                       # alpha^i(Y^j)
                    abs(float(beta_rows[i] @ vals[j])),               # beta_i(X_j)
                    abs(float(beta_rows[i] @ vals[n + j]) - d),       # beta_i(Y^j)
                )

        # beta_i wedge alpha^i against the generic-path d(theta)
        wedge = np.zeros((dim, dim))
        for i in range(n):
            e_i = np.zeros(dim)
            e_i[i] = 1.0
            wedge += np.outer(beta_rows[i], e_i) - np.outer(e_i, beta_rows[i])
        max_wedge = max(max_wedge, float(np.max(np.abs(wedge - dtheta_generic(x)))))
        # alpha closedness is exact (constant coefficient forms), not re-measured

    checks = [
        {"name": "frame_brackets", "residual": max_bracket},
        {"name": "duality_pairings", "residual": max_duality},
        {"name": "dual_forms_closed", "residual": max_closed},
        {"name": "cartan_two_form_vs_frame_wedge", "residual": max_wedge},
    ]
    for c in checks:
        c["tolerance"] = tol.absolute
        c["pass"] = bool(c["residual"] <= tol.absolute)
    checks.append(
        {
            "name": "hessian_condition",
            "residual": max_cond,
            "tolerance": HESSIAN_CONDITION_LIMIT,
            "pass": bool(max_cond <= HESSIAN_CONDITION_LIMIT),
        }
    )
    return {
        "lagrangian": lag.name or "anonymous",
        "n_samples": int(n_samples),
        "checks": checks,
        "passed": all(c["pass"] for c in checks),
    }


def magnetic_chart(vector_potential: Callable) -> Diffeomorphism:
    """Minimal-coupling chart (q, u) -> (q, u + A(q)) as a Diffeomorphism;
    its pullback of the flat two-form is the Lagrangian one (sign per
    OMEGA_SIGN)."""

    def forward(w):
        a = vector_potential([w[0], w[1], w[2]])
        return nc.pack(w[0], w[1], w[2], w[3] + a[0], w[4] + a[1], w[5] + a[2])

    def inverse(x):
        a = vector_potential([x[0], x[1], x[2]])
        return nc.pack(x[0], x[1], x[2], x[3] - a[0], x[4] - a[1], x[5] - a[2])

    return Diffeomorphism(6, forward, inverse, name="magnetic_chart")


def energy(lag: Lagrangian) -> Callable:
    """E = u^i dL/du^i - L; float/series evaluable."""
    n, dim = lag.n, 2 * lag.n
    momenta = [momentum(lag, i) for i in range(n)]

    def value(x):
        ps = [p(x) for p in momenta]
        lv = lag.L(x)
        acc = None
        for i in range(n):
            term = x[n + i] * ps[i]
            acc = term if acc is None else acc + term
        return acc - lv

    return value


def lagrangian_catalog(name: str, **params) -> Lagrangian:
    """standard | magnetic-symmetric (b) | magnetic-general"""
    if name == "standard":
        n = int(params.get("n", 3))

        def l_std(x):
            acc = x[n] * x[n]
            for i in range(1, n):
                acc = acc + x[n + i] * x[n + i]
            return 0.5 * acc

        return Lagrangian(n, l_std, name="standard")
    if name == "magnetic-symmetric":
        b = float(params.get("b", 1.0))

        def l_sym(x):
            q1, q2, u1, u2, u3 = x[0], x[1], x[3], x[4], x[5]
            kinetic = 0.5 * (u1 * u1 + u2 * u2 + u3 * u3)
            return kinetic + u1 * (-0.5 * b * q2) + u2 * (0.5 * b * q1)

        return Lagrangian(3, l_sym, name=f"magnetic-symmetric(b={b})")
    if name == "magnetic-general":
        def l_gen(x):
            q1, q3, u1, u2, u3 = x[0], x[2], x[3], x[4], x[5]
            kinetic = 0.5 * (u1 * u1 + u2 * u2 + u3 * u3)
            return kinetic + u2 * (q1 * q3)

        return Lagrangian(3, l_gen, name="magnetic-general")
    raise ValueError(f"unknown Lagrangian '{name}'")
