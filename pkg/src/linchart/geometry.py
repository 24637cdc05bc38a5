"""Coordinate tensor calculus on a single chart.

Fields and forms are thin wrappers around component callables.  A component
callable must accept either a float vector (``numpy`` array) or a list of
``Series`` seeds, writing any transcendental functions through the
``numcore`` namespace; derivatives are then extracted with jets, never with
finite differences.

Point operations that require an inverse map (``pushforward``) are float-only:
inverse charts are point evaluations by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import numcore as nc
from .numcore import Series


@dataclass(frozen=True)
class VectorField:
    dim: int
    components: Callable

    def __call__(self, x):
        out = self.components(x)
        if len(out) != self.dim:
            raise ValueError("component count does not match dim")
        if any(isinstance(c, Series) for c in out):
            return list(out)
        return np.asarray(out, dtype=float)


@dataclass(frozen=True)
class OneForm:
    dim: int
    components: Callable

    def __call__(self, x):
        out = self.components(x)
        if len(out) != self.dim:
            raise ValueError("component count does not match dim")
        if any(isinstance(c, Series) for c in out):
            return list(out)
        return np.asarray(out, dtype=float)


@dataclass(frozen=True)
class TwoForm:
    """Antisymmetric matrix-valued field; evaluation returns the matrix."""

    dim: int
    components: Callable

    def __call__(self, x) -> np.ndarray:
        m = np.asarray(self.components(x), dtype=float)
        if m.shape != (self.dim, self.dim):
            raise ValueError("two-form matrix has wrong shape")
        return m


@dataclass(frozen=True)
class OneOneTensor:
    """Mixed tensor; matrix element [i][j] is the i-th component of the image
    of the j-th basis vector, so the pointwise action on vectors is ``M @ v``."""

    dim: int
    components: Callable

    def __call__(self, x) -> np.ndarray:
        m = np.asarray(self.components(x), dtype=float)
        if m.shape != (self.dim, self.dim):
            raise ValueError("tensor matrix has wrong shape")
        return m

    def apply(self, field: VectorField) -> VectorField:
        if field.dim != self.dim:
            raise ValueError("dimension mismatch")

        def comps(x):
            return self(np.asarray(x, dtype=float)) @ field(x)

        return VectorField(self.dim, comps)


def constant_one_one(matrix: np.ndarray) -> OneOneTensor:
    m = np.asarray(matrix, dtype=float)
    return OneOneTensor(m.shape[0], lambda x: m)


def standard_J(n: int = 1) -> OneOneTensor:
    """Complex structure of the flat phase space (q_1..q_n, p_1..p_n):
    J maps the p-translations onto q-translations, J^2 = -I."""
    m = np.block(
        [[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]]
    )
    return OneOneTensor(2 * n, lambda x: m)


def standard_omega(n: int = 1) -> TwoForm:
    """Canonical two-form sum_i dq^i wedge dp_i on (q_1..q_n, p_1..p_n)."""
    m = np.block(
        [[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]]
    )
    return TwoForm(2 * n, lambda x: m)


def jacobian_at(components: Callable, x: np.ndarray, dim_out: int) -> tuple[np.ndarray, np.ndarray]:
    """(values, J) with J[i, j] = d component_i / d x_j, via order-1 jets."""
    seeds = nc.jet_seed(x, order=1)
    out = components(seeds)
    dim_in = x.shape[0]
    vals = np.zeros(dim_out)
    jac = np.zeros((dim_out, dim_in))
    for i, comp in enumerate(out):
        if isinstance(comp, Series):
            vals[i] = comp.value
            for j in range(dim_in):
                e_j = tuple(1 if k == j else 0 for k in range(dim_in))
                jac[i, j] = comp.coefficient(e_j)
        else:
            vals[i] = float(comp)
    return vals, jac


def pushforward(phi, field: VectorField) -> VectorField:
    """Transport a field through a diffeomorphism-like object.

    ``phi`` needs ``forward``, ``inverse`` callables and a ``dim`` attribute
    (structural typing; the concrete class lives in ``linstruct``).  The
    result evaluates as Dphi(w) @ X(w) at w = phi.inverse(y); float points
    only, since the inverse is a point evaluation.
    """

    def comps(y):
        if any(isinstance(c, Series) for c in y):
            raise TypeError("pushforward evaluation is float-only")
        w = np.asarray(phi.inverse(np.asarray(y, dtype=float)), dtype=float)
        _, jac = jacobian_at(phi.forward, w, field.dim)
        return jac @ np.asarray(field(w), dtype=float)

    return VectorField(field.dim, comps)


def lie_bracket(x_field: VectorField, y_field: VectorField) -> VectorField:
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i, derivatives from jets."""
    if x_field.dim != y_field.dim:
        raise ValueError("dimension mismatch")
    n = x_field.dim

    def comps(x):
        if any(isinstance(c, Series) for c in x):
            raise TypeError("lie_bracket evaluation is float-only")
        x = np.asarray(x, dtype=float)
        xv, xj = jacobian_at(x_field.components, x, n)
        yv, yj = jacobian_at(y_field.components, x, n)
        return yj @ xv - xj @ yv

    return VectorField(n, comps)


def exterior_d(alpha: OneForm) -> TwoForm:
    """(d alpha)_ij = d_i alpha_j - d_j alpha_i."""
    n = alpha.dim

    def comps(x):
        x = np.asarray(x, dtype=float)
        _, jac = jacobian_at(alpha.components, x, n)
        # jac[j, i] = d_i alpha_j
        return jac.T - jac

    return TwoForm(n, comps)


def interior_product(field: VectorField, omega: TwoForm) -> OneForm:
    """(i_X omega)_j = X^i omega_ij."""
    if field.dim != omega.dim:
        raise ValueError("dimension mismatch")

    def comps(x):
        xv = np.asarray(field(x), dtype=float)
        return xv @ omega(x)

    return OneForm(omega.dim, comps)


def pairing(alpha: OneForm, field: VectorField) -> Callable:
    """Scalar field alpha(X)."""
    if alpha.dim != field.dim:
        raise ValueError("dimension mismatch")

    def value(x):
        av = np.asarray(alpha(x), dtype=float)
        xv = np.asarray(field(x), dtype=float)
        # fsum keeps the contraction FMA-free, so omega(X, X) cancels exactly
        return math.fsum(float(a) * float(b) for a, b in zip(av, xv))

    return value


def d_S(f: Callable, s_tensor: OneOneTensor) -> OneForm:
    """(d_S f)(X) = df(S X); components (d_S f)_i = (d_j f) S^j_i."""
    n = s_tensor.dim

    def comps(x):
        x = np.asarray(x, dtype=float)
        jet = nc.jet_eval(f, x, order=1)
        return s_tensor(x).T @ jet.gradient()

    return OneForm(n, comps)


def exact_form(f: Callable, dim: int) -> OneForm:
    """df as a OneForm (gradient components via jets).

    When the components are themselves probed with series seeds, f is
    re-expanded one order higher at the same point before the derivative
    shift; valid because all seeds are coordinate-aligned identity jets.
    """

    def comps(x):
        if any(isinstance(c, Series) for c in x):
            order = max(c.order for c in x if isinstance(c, Series))
            vals = [nc.value_of(c) for c in x]
            full = f(nc.jet_seed(vals, order + 1))
            return [
                full.deriv(tuple(1 if k == j else 0 for k in range(dim)))
                for j in range(dim)
            ]
        jet = nc.jet_eval(f, np.asarray(x, dtype=float), order=1)
        return jet.gradient()

    return OneForm(dim, comps)


def compose_J_omega(j_tensor: OneOneTensor, omega: TwoForm) -> OneOneTensor:
    """Metric-like composition g(.,.) = omega(J., .); matrix J^T Omega."""
    if j_tensor.dim != omega.dim:
        raise ValueError("dimension mismatch")

    def comps(x):
        return j_tensor(x).T @ omega(x)

    return OneOneTensor(omega.dim, comps)
