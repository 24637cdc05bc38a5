"""Numerical core: truncated Taylor arithmetic, jets, and small solvers.

The differentiation scheme used throughout the package is forward-mode
arithmetic on truncated multivariate Taylor series.  A ``Series`` stores the
coefficients ``c[alpha] = (partial^alpha f)(x0) / alpha!`` for all multi-indices
``|alpha| <= order`` and implements ring operations by truncated convolution.
Analytic functions (``exp``, ``sin``, ``atan2``, ...) are provided in this
module's namespace and dispatch on the argument type, so the same callable can
be evaluated on floats, on numpy arrays (vectorised sampling), and on series
(jet extraction).

Jet evaluation always seeds coordinate-aligned identity jets: ``jet_eval``
differentiates with respect to the components of the evaluation point itself.
Derivatives through an inverse map are never requested; inverse maps are point
evaluations only.  The jet order is capped at 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _cartesian
from typing import Callable, Iterable, Sequence

import numpy as np

Matrix = np.ndarray

MAX_ORDER = 4


class DomainError(ValueError):
    """Raised when an operation is requested outside its chart domain."""


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair used by the check APIs."""

    absolute: float = 1e-12
    relative: float = 0.0

    def bound(self, scale: float = 0.0) -> float:
        return self.absolute + self.relative * abs(scale)

    def ok(self, residual: float, scale: float = 0.0) -> bool:
        return abs(residual) <= self.bound(scale)


def _multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    out = [idx for idx in _cartesian(range(order + 1), repeat=dim) if sum(idx) <= order]
    out.sort(key=lambda idx: (sum(idx), idx))
    return out


def _mi_factorial(alpha: tuple[int, ...]) -> float:
    out = 1.0
    for a in alpha:
        out *= math.factorial(a)
    return out


class Series:
    """Multivariate Taylor polynomial truncated at total degree ``order``."""

    __slots__ = ("dim", "order", "c")

    # Let numpy scalars defer to our right-operand methods instead of
    # broadcasting a Series into an object array.
    __array_ufunc__ = None

    def __init__(self, dim: int, order: int, coeffs: dict[tuple[int, ...], float] | None = None):
        self.dim = dim
        self.order = order
        self.c: dict[tuple[int, ...], float] = dict(coeffs) if coeffs else {}

    @classmethod
    def constant(cls, value: float, dim: int, order: int) -> "Series":
        return cls(dim, order, {(0,) * dim: float(value)})

    @classmethod
    def variable(cls, i: int, value: float, dim: int, order: int) -> "Series":
        s = cls.constant(value, dim, order)
        if order >= 1:
            e_i = tuple(1 if j == i else 0 for j in range(dim))
            s.c[e_i] = 1.0
        return s

    @property
    def value(self) -> float:
        return self.c.get((0,) * self.dim, 0.0)

    def coefficient(self, alpha: tuple[int, ...]) -> float:
        return self.c.get(tuple(alpha), 0.0)

    def partial(self, alpha: tuple[int, ...]) -> float:
        """The partial derivative d^alpha f evaluated at the expansion point."""
        return self.coefficient(alpha) * _mi_factorial(tuple(alpha))

    def deriv(self, gamma: tuple[int, ...]) -> "Series":
        """Series of d^gamma f, valid to order ``order - |gamma|``.

        Coefficient shift: the beta-coefficient of d^gamma f is
        c[beta+gamma] * (beta+gamma)! / beta!.
        """
        gamma = tuple(gamma)
        drop = sum(gamma)
        if drop == 0:
            return Series(self.dim, self.order, self.c)
        new_order = self.order - drop
        if new_order < 0:
            raise DomainError(f"derivative order {drop} exceeds series order {self.order}")
        out = Series(self.dim, new_order)
        for alpha, coeff in self.c.items():
            beta = tuple(a - g for a, g in zip(alpha, gamma))
            if any(b < 0 for b in beta) or sum(beta) > new_order:
                continue
            out.c[beta] = coeff * _mi_factorial(alpha) / _mi_factorial(beta)
        return out

    # ring operations ------------------------------------------------------

    def _like(self) -> "Series":
        return Series(self.dim, self.order)

    def _coerce(self, other) -> "Series | None":
        if isinstance(other, Series):
            if other.dim != self.dim or other.order != self.order:
                raise ValueError("series shape mismatch")
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return Series.constant(float(other), self.dim, self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = Series(self.dim, self.order, self.c)
        for k, v in o.c.items():
            out.c[k] = out.c.get(k, 0.0) + v
        return out

    __radd__ = __add__

    def __neg__(self):
        return Series(self.dim, self.order, {k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = self._like()
        order = self.order
        oc = out.c
        for a, va in self.c.items():
            if va == 0.0:
                continue
            da = sum(a)
            for b, vb in o.c.items():
                if da + sum(b) > order or vb == 0.0:
                    continue
                k = tuple(x + y for x, y in zip(a, b))
                oc[k] = oc.get(k, 0.0) + va * vb
        return out

    __rmul__ = __mul__

    def reciprocal(self) -> "Series":
        v = self.value
        if v == 0.0:
            raise DomainError("series reciprocal at zero constant term")
        # 1/(v + h) = (1/v) * sum_k (-h/v)^k with h nilpotent past the order.
        h = (self - v) * (-1.0 / v)
        out = Series.constant(1.0 / v, self.dim, self.order)
        term = Series.constant(1.0 / v, self.dim, self.order)
        for _ in range(self.order):
            term = term * h
            out = out + term
        return out

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.reciprocal()

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)) or (isinstance(k, float) and k.is_integer()):
            k = int(k)
            if k < 0:
                return self.reciprocal() ** (-k)
            out = Series.constant(1.0, self.dim, self.order)
            base = self
            while k:
                if k & 1:
                    out = out * base
                base = base * base
                k >>= 1
            return out
        # fractional exponent: positive base required
        return exp(float(k) * log(self))

    def compose_univariate(self, derivs: Sequence[float]) -> "Series":
        """Evaluate an analytic F on this series given F' s derivative values.

        ``derivs[k] = F^(k)(v0)`` at ``v0 = self.value``; Horner evaluation in
        ``h = self - v0``, which is nilpotent past the truncation order.
        """
        h = self - self.value
        out = Series.constant(derivs[self.order] / math.factorial(self.order), self.dim, self.order)
        for k in range(self.order - 1, -1, -1):
            out = out * h + derivs[k] / math.factorial(k)
        return out

    def __repr__(self) -> str:  # debugging aid only
        return f"Series(dim={self.dim}, order={self.order}, value={self.value:.6g})"


# analytic function namespace ---------------------------------------------
#
# Each function dispatches: Series -> univariate composition with the
# derivative table at the constant term; anything else -> numpy.


def _series_or_none(x):
    return x if isinstance(x, Series) else None


def exp(x):
    s = _series_or_none(x)
    if s is None:
        return np.exp(x)
    e = math.exp(s.value)
    return s.compose_univariate([e] * (s.order + 1))


def log(x):
    s = _series_or_none(x)
    if s is None:
        return np.log(x)
    v = s.value
    if v <= 0.0:
        raise DomainError("log requires a positive constant term")
    d = [math.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4]
    return s.compose_univariate(d[: s.order + 1])


def sqrt(x):
    s = _series_or_none(x)
    if s is None:
        return np.sqrt(x)
    v = s.value
    if v <= 0.0:
        raise DomainError("sqrt series requires a positive constant term")
    r = math.sqrt(v)
    d = [r, 0.5 / r, -0.25 / (r * v), 0.375 / (r * v * v), -0.9375 / (r * v**3)]
    return s.compose_univariate(d[: s.order + 1])


def cbrt(x):
    s = _series_or_none(x)
    if s is None:
        return np.cbrt(x)
    v = s.value
    if v == 0.0:
        raise DomainError("cbrt series is singular at zero")
    c = math.copysign(abs(v) ** (1.0 / 3.0), v)
    # powers of the root keep the sign bookkeeping consistent for v < 0
    d = [
        c,
        1.0 / (3.0 * c**2),
        -2.0 / (9.0 * c**5),
        10.0 / (27.0 * c**8),
        -80.0 / (81.0 * c**11),
    ]
    return s.compose_univariate(d[: s.order + 1])


def sin(x):
    s = _series_or_none(x)
    if s is None:
        return np.sin(x)
    sv, cv = math.sin(s.value), math.cos(s.value)
    return s.compose_univariate([sv, cv, -sv, -cv, sv][: s.order + 1])


def cos(x):
    s = _series_or_none(x)
    if s is None:
        return np.cos(x)
    sv, cv = math.sin(s.value), math.cos(s.value)
    return s.compose_univariate([cv, -sv, -cv, sv, cv][: s.order + 1])


def tan(x):
    s = _series_or_none(x)
    if s is None:
        return np.tan(x)
    t = math.tan(s.value)
    u = 1.0 + t * t
    d = [t, u, 2.0 * t * u, u * (2.0 + 6.0 * t * t), u * (16.0 * t + 24.0 * t**3)]
    return s.compose_univariate(d[: s.order + 1])


def tanh(x):
    s = _series_or_none(x)
    if s is None:
        return np.tanh(x)
    h = math.tanh(s.value)
    u = 1.0 - h * h
    d = [h, u, -2.0 * h * u, u * (6.0 * h * h - 2.0), u * (16.0 * h - 24.0 * h**3)]
    return s.compose_univariate(d[: s.order + 1])


def atanh(x):
    s = _series_or_none(x)
    if s is None:
        return np.arctanh(x)
    v = s.value
    if not -1.0 < v < 1.0:
        raise DomainError("atanh series requires |constant term| < 1")
    w = 1.0 - v * v
    d = [
        math.atanh(v),
        1.0 / w,
        2.0 * v / w**2,
        (2.0 + 6.0 * v * v) / w**3,
        (24.0 * v + 24.0 * v**3) / w**4,
    ]
    return s.compose_univariate(d[: s.order + 1])


def atan(x):
    s = _series_or_none(x)
    if s is None:
        return np.arctan(x)
    v = s.value
    w = 1.0 + v * v
    d = [
        math.atan(v),
        1.0 / w,
        -2.0 * v / w**2,
        (6.0 * v * v - 2.0) / w**3,
        (24.0 * v - 24.0 * v**3) / w**4,
    ]
    return s.compose_univariate(d[: s.order + 1])


def atan2(y, x):
    sy, sx = _series_or_none(y), _series_or_none(x)
    if sy is None and sx is None:
        return np.arctan2(y, x)
    if sy is None:
        sy = Series.constant(float(y), sx.dim, sx.order)
    if sx is None:
        sx = Series.constant(float(x), sy.dim, sy.order)
    xv, yv = sx.value, sy.value
    # branch by quadrant: within each half-plane atan2 differs from the
    # smooth expression below only by an additive constant
    if xv > 0.0:
        return atan(sy / sx)
    if xv < 0.0:
        shift = math.pi if yv >= 0.0 else -math.pi
        return atan(sy / sx) + shift
    if yv == 0.0:
        raise DomainError("atan2 series undefined at the origin")
    shift = math.pi / 2.0 if yv > 0.0 else -math.pi / 2.0
    return shift - atan(sx / sy)


def value_of(x) -> float:
    """Constant term of a series, or the float itself."""
    return x.value if isinstance(x, Series) else float(x)


def pack(*components):
    """Bundle chart outputs: a list when any component is a Series, else
    a stacked float array (broadcasting scalars over batch components)."""
    if any(isinstance(c, Series) for c in components):
        dims = [(c.dim, c.order) for c in components if isinstance(c, Series)]
        dim, order = dims[0]
        return [
            c if isinstance(c, Series) else Series.constant(float(c), dim, order)
            for c in components
        ]
    arrs = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in components])
    return np.stack(arrs)


# jets ---------------------------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """Taylor data of a scalar function at a point.

    ``partials[alpha]`` holds the plain partial derivative d^alpha f (the
    order-0 key holds the value itself, duplicated in ``value``).
    """

    value: float
    partials: dict[tuple[int, ...], float]
    order: int
    dim: int

    def partial(self, alpha: Sequence[int]) -> float:
        return self.partials[tuple(alpha)]

    def gradient(self) -> np.ndarray:
        g = np.zeros(self.dim)
        for i in range(self.dim):
            e_i = tuple(1 if j == i else 0 for j in range(self.dim))
            g[i] = self.partials[e_i]
        return g

    def hessian(self) -> np.ndarray:
        if self.order < 2:
            raise ValueError("hessian needs a jet of order >= 2")
        h = np.zeros((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                alpha = [0] * self.dim
                alpha[i] += 1
                alpha[j] += 1
                h[i, j] = self.partials[tuple(alpha)]
        return h


def _series_to_jet(s: Series) -> Jet:
    partials = {alpha: s.partial(alpha) for alpha in _multi_indices(s.dim, s.order)}
    return Jet(value=s.value, partials=partials, order=s.order, dim=s.dim)


def jet_seed(x: Sequence[float], order: int) -> list[Series]:
    """Identity-jet seed at x: the i-th entry is the coordinate series x^i."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"jet order must lie in [0, {MAX_ORDER}], got {order}")
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    return [Series.variable(i, x[i], dim, order) for i in range(dim)]


def jet_eval(f: Callable, x: Sequence[float], order: int):
    """Evaluate f on identity-jet seeds at x.

    Returns a ``Jet`` when f produces a single series, or a list of jets when
    f produces a sequence (one per output component).
    """
    seeds = jet_seed(x, order)
    out = f(seeds)
    if isinstance(out, Series):
        return _series_to_jet(out)
    if isinstance(out, (int, float, np.integer, np.floating)):
        return _series_to_jet(Series.constant(float(out), len(seeds), order))
    jets = []
    for comp in out:
        if isinstance(comp, Series):
            jets.append(_series_to_jet(comp))
        else:
            jets.append(_series_to_jet(Series.constant(float(comp), len(seeds), order)))
    return jets


# solvers ------------------------------------------------------------------


def mat_exp(a: Matrix, tol: Tolerance = Tolerance(absolute=1e-12)) -> Matrix:
    """Matrix exponential by scaling-and-squaring with a Taylor tail.

    The Taylor sum runs until the term norm drops below the absolute
    tolerance times a small safety factor, so the result is accurate to
    roughly ``tol.absolute`` for well-scaled inputs.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("mat_exp expects a square matrix")
    n = a.shape[0]
    nrm = np.linalg.norm(a, np.inf)
    s = 0
    if nrm > 0.5:
        s = int(math.ceil(math.log2(nrm / 0.5)))
    b = a / (2.0**s)
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, 60):
        term = term @ b / k
        out = out + term
        if np.linalg.norm(term, np.inf) < tol.absolute * 1e-2:
            break
    for _ in range(s):
        out = out @ out
    return out


def solve_K(lam: float, r2):
    """Positive root K of  lam * r2 * K^3 + K - 1 = 0,  K in (0, 1].

    Vectorised over ``r2``.  Point evaluation only: series input is
    rejected, because inverse charts are never differentiated through.
    """
    if isinstance(r2, Series) or (
        isinstance(r2, (list, tuple)) and any(isinstance(v, Series) for v in r2)
    ):
        raise TypeError("solve_K is a point evaluation; series input is not allowed")
    lam = float(lam)
    if lam < 0.0:
        raise DomainError("solve_K requires lam >= 0")
    r2 = np.asarray(r2, dtype=float)
    if np.any(r2 < 0.0):
        raise DomainError("solve_K requires r2 >= 0")
    scalar = r2.ndim == 0
    r2 = np.atleast_1d(r2)
    lo = np.zeros_like(r2)
    hi = np.ones_like(r2)
    # g(0) = -1 < 0 <= g(1) = lam*r2, so the root is bracketed by [0, 1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        g = lam * r2 * mid**3 + mid - 1.0
        lo = np.where(g < 0.0, mid, lo)
        hi = np.where(g < 0.0, hi, mid)
    k = 0.5 * (lo + hi)
    for _ in range(3):
        g = lam * r2 * k**3 + k - 1.0
        dg = 3.0 * lam * r2 * k**2 + 1.0
        k = k - g / dg
    return float(k[0]) if scalar else k


def rk4_step(field: Callable, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = np.asarray(field(x), dtype=float)
    k2 = np.asarray(field(x + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(field(x + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(field(x + dt * k3), dtype=float)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_flow(field: Callable, x0: Sequence[float], t: float, steps: int) -> np.ndarray:
    """Integrate  dx/dt = field(x)  from x0 over time t with classic RK4."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = np.asarray(x0, dtype=float).copy()
    dt = float(t) / steps
    for _ in range(steps):
        x = rk4_step(field, x, dt)
    return x


def rk4_path(field: Callable, x0: Sequence[float], t: float, steps: int):
    """Like rk4_flow but returns (times, states) including the endpoints."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = np.asarray(x0, dtype=float).copy()
    dt = float(t) / steps
    times = np.linspace(0.0, float(t), steps + 1)
    states = np.empty((steps + 1, x.shape[0]))
    states[0] = x
    for i in range(steps):
        x = rk4_step(field, x, dt)
        states[i + 1] = x
    return times, states


def fd_gradient(f: Callable, x: Sequence[float], h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function; test-grade accuracy."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def solve_linear_generic(a_rows: list[list], b_cols: list[list]) -> list[list]:
    """Gaussian elimination with partial pivoting over floats or series.

    Solves A X = B for the columns of B.  Pivoting compares constant terms,
    which is the right notion of magnitude for jet-valued entries.
    """
    n = len(a_rows)
    a = [list(row) for row in a_rows]
    b = [list(row) for row in b_cols]
    m = len(b[0])
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value_of(a[r][col])))
        if abs(value_of(a[piv][col])) == 0.0:
            raise DomainError("singular linear system")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        inv = (
            a[col][col].reciprocal()
            if isinstance(a[col][col], Series)
            else 1.0 / a[col][col]
        )
        for r in range(n):
            if r == col:
                continue
            factor = a[r][col] * inv
            for c in range(col, n):
                a[r][c] = a[r][c] - factor * a[col][c]
            for c in range(m):
                b[r][c] = b[r][c] - factor * b[col][c]
    out = []
    for r in range(n):
        inv = (
            a[r][r].reciprocal() if isinstance(a[r][r], Series) else 1.0 / a[r][r]
        )
        out.append([b[r][c] * inv for c in range(m)])
    return out
