"""Lattice Weyl operators, operator evolution, measures, and Moyal products.

The lattice regime is deliberately exact: position shifts are restricted to
multiples of the grid spacing and momentum shifts to multiples of the
momentum quantum 2 pi hbar / (N h), so the Weyl exchange relation holds to
roundoff instead of being polluted by interpolation error.

Phase convention: with (W(x, pi) psi)(Q) = exp(-(i/hbar) pi (Q + x/2))
psi(Q + x) one gets W(e1) W(e2) = exp(-(i/hbar) omega(e1, e2)) W(e2) W(e1),
omega((x1, p1), (x2, p2)) = x1 p2 - x2 p1.  The sign of the exponent is
exposed as PHASE_ORIENTATION for callers that use the opposite convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import numcore as nc
from .dynamics import omega_d_matrix, propagator_matrix, transported_generator
from .numcore import DomainError, Series, Tolerance

PHASE_ORIENTATION = -1.0

LATTICE_SNAP = 1e-9


class OrthogonalFiducialError(ValueError):
    """A requested composition term annihilates the fiducial vector."""


# ---------------------------------------------------------------------------
# lattice types


@dataclass(frozen=True)
class LatticeGrid:
    n_points: int
    spacing: float
    offset: float = 0.0
    d: int = 1

    def __post_init__(self):
        n = self.n_points
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError("n_points must be a power of two >= 2")
        if self.spacing <= 0.0:
            raise ValueError("spacing must be positive")
        if self.d not in (1, 2):
            raise ValueError("dimension must be 1 or 2")

    @property
    def box_length(self) -> float:
        return self.n_points * self.spacing

    def positions(self) -> np.ndarray:
        return self.offset + self.spacing * np.arange(self.n_points)

    def mesh(self) -> tuple[np.ndarray, ...]:
        pos = self.positions()
        if self.d == 1:
            return (pos,)
        return tuple(np.meshgrid(pos, pos, indexing="ij"))

    def momentum_quantum(self, hbar: float = 1.0) -> float:
        return 2.0 * math.pi * hbar / (self.n_points * self.spacing)


def centered_grid(n_points: int, box_length: float, d: int = 1) -> LatticeGrid:
    h = box_length / n_points
    return LatticeGrid(n_points=n_points, spacing=h, offset=-box_length / 2.0, d=d)


def _csum(values: np.ndarray) -> complex:
    flat = np.ravel(values, order="C")
    return complex(math.fsum(flat.real), math.fsum(flat.imag))


@dataclass(frozen=True)
class LatticeState:
    grid: LatticeGrid
    amplitudes: np.ndarray
    measure_weights: np.ndarray | None = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        shape = (self.grid.n_points,) * self.grid.d
        if amps.shape != shape:
            raise ValueError(f"amplitudes must have shape {shape}")
        object.__setattr__(self, "amplitudes", amps)
        if self.measure_weights is not None:
            w = np.asarray(self.measure_weights, dtype=float)
            if w.shape != shape:
                raise ValueError(f"weights must have shape {shape}")
            if np.any(w <= 0.0):
                raise ValueError("measure weights must be positive")
            object.__setattr__(self, "measure_weights", w)

    def weights(self) -> np.ndarray:
        if self.measure_weights is None:
            return np.ones((self.grid.n_points,) * self.grid.d)
        return self.measure_weights

    def inner(self, other: "LatticeState") -> complex:
        if other.grid != self.grid:
            raise ValueError("states live on different grids")
        cell = self.grid.spacing**self.grid.d
        return _csum(self.weights() * np.conj(self.amplitudes) * other.amplitudes) * cell

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def normalized(self) -> "LatticeState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return LatticeState(self.grid, self.amplitudes / n, self.measure_weights)


def gaussian_state(
    grid: LatticeGrid,
    center: Sequence[float] | float = 0.0,
    sigma: float = 1.0,
    boost: Sequence[float] | float = 0.0,
    hbar: float = 1.0,
) -> LatticeState:
    """Normalized Gaussian amplitude exp(-(q-c)^2 / (2 sigma^2)) with an
    optional plane-wave boost exp(i k q / hbar)."""
    centers = np.atleast_1d(np.asarray(center, dtype=float))
    boosts = np.atleast_1d(np.asarray(boost, dtype=float))
    if centers.shape[0] == 1 and grid.d == 2:
        centers = np.repeat(centers, 2)
    if boosts.shape[0] == 1 and grid.d == 2:
        boosts = np.repeat(boosts, 2)
    mesh = grid.mesh()
    expo = np.zeros_like(mesh[0], dtype=complex)
    for axis in range(grid.d):
        q = mesh[axis]
        expo = expo - (q - centers[axis]) ** 2 / (2.0 * sigma**2)
        expo = expo + 1j * boosts[axis] * q / hbar
    return LatticeState(grid, np.exp(expo)).normalized()


def state_csv_rows(state: LatticeState) -> list[tuple[int, float, float]]:
    """(site index, Re psi, Im psi) with sites flattened in C order."""
    flat = np.ravel(state.amplitudes, order="C")
    return [(k, float(a.real), float(a.imag)) for k, a in enumerate(flat)]


# ---------------------------------------------------------------------------
# Weyl operators


def _lattice_multiple(value: float, quantum: float, label: str) -> int:
    ratio = float(value) / quantum
    snapped = round(ratio)
    if abs(ratio - snapped) > LATTICE_SNAP:
        raise DomainError(
            f"{label} = {value!r} is not a lattice multiple of {quantum!r}; "
            "interpolation is refused"
        )
    return int(snapped)


def weyl_apply(
    x: Sequence[float] | float,
    pi: Sequence[float] | float,
    state: LatticeState,
    hbar: float = 1.0,
) -> LatticeState:
    """(W(x, pi) psi)(Q) = exp(-(i/hbar) pi (Q + x/2)) psi(Q + x).

    x must be a multiple of the spacing and pi a multiple of the momentum
    quantum; both are snapped to the lattice, anything else is refused.
    """
    grid = state.grid
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ps = np.atleast_1d(np.asarray(pi, dtype=float))
    if xs.shape[0] != grid.d or ps.shape[0] != grid.d:
        raise ValueError(f"shift vectors must have {grid.d} components")
    p0 = grid.momentum_quantum(hbar)
    shifts = [_lattice_multiple(xs[a], grid.spacing, "position shift") for a in range(grid.d)]
    for a in range(grid.d):
        _lattice_multiple(ps[a], p0, "momentum shift")
    amps = state.amplitudes
    for axis, a in enumerate(shifts):
        amps = np.roll(amps, -a, axis=axis)
    mesh = grid.mesh()
    phase_arg = np.zeros_like(mesh[0])
    for axis in range(grid.d):
        phase_arg = phase_arg + ps[axis] * (mesh[axis] + xs[axis] / 2.0)
    amps = np.exp(-1j * phase_arg / hbar) * amps
    return LatticeState(grid, amps, state.measure_weights)


def expected_weyl_phase(
    e1: Sequence[float],
    e2: Sequence[float],
    hbar: float = 1.0,
    orientation: float | None = None,
) -> complex:
    """exp(orientation * i * omega(e1, e2) / hbar) for 1D labels (x, pi)."""
    if orientation is None:
        orientation = PHASE_ORIENTATION
    omega = float(e1[0]) * float(e2[1]) - float(e2[0]) * float(e1[1])
    return complex(np.exp(1j * orientation * omega / hbar))


def weyl_commutation_check(
    e1: Sequence[float],
    e2: Sequence[float],
    grid: LatticeGrid,
    hbar: float = 1.0,
    state: LatticeState | None = None,
    orientation: float | None = None,
    tol: Tolerance = Tolerance(absolute=1e-11),
) -> dict:
    """Measured exchange phase W(e1)W(e2) psi vs phase * W(e2)W(e1) psi.

    The two products differ by a constant phase, so the ratio is read off as
    <psi21, psi12> / <psi21, psi21> on a generic Gaussian test state.
    """
    if grid.d != 1:
        raise DomainError("the exchange-phase check runs on a 1D lattice")
    if state is None:
        state = gaussian_state(
            grid,
            center=grid.offset + grid.box_length / 2.0,
            sigma=grid.box_length / 8.0,
            hbar=hbar,
        )
    psi12 = weyl_apply(e1[0], e1[1], weyl_apply(e2[0], e2[1], state, hbar), hbar)
    psi21 = weyl_apply(e2[0], e2[1], weyl_apply(e1[0], e1[1], state, hbar), hbar)
    denom = psi21.inner(psi21)
    measured = psi21.inner(psi12) / denom
    expected = expected_weyl_phase(e1, e2, hbar, orientation)
    residual = abs(measured - expected)
    check = {
        "name": "weyl_phase_residual",
        "residual": float(residual),
        "tolerance": tol.absolute,
        "pass": bool(residual <= tol.absolute),
    }
    return {
        "measured": measured,
        "expected": expected,
        "checks": [check],
        "passed": check["pass"],
    }


# ---------------------------------------------------------------------------
# Heisenberg evolution of Weyl labels


def heisenberg_evolve(e: Sequence[float], t: float, b: float) -> np.ndarray:
    """Label evolution xi(t) = F(t) xi on (x1, x2, pi1, pi2)."""
    return propagator_matrix(b, t) @ np.asarray(e, dtype=float)


def symplectic_product(e1: Sequence[float], e2: Sequence[float]) -> float:
    return float(np.asarray(e1, float) @ omega_d_matrix() @ np.asarray(e2, float))


# ---------------------------------------------------------------------------
# discrete Hamiltonian commutators


def hamiltonian_comm_check(
    b: float,
    grid: LatticeGrid,
    hbar: float = 1.0,
    tol: Tolerance = Tolerance(absolute=2e-1),
    band_fraction: float = 0.5,
    states: Sequence[LatticeState] | None = None,
) -> dict:
    """Residuals of (i/hbar)[X, H] = sum_b M[a,b] X_b for X in (U1, U2, Q1, Q2).

    RHS rows are g G^T g; the t = 0 limit of the evolved operators fixes the
    signs.  U is the central difference -i hbar d, Q is multiplication, and
    H = (v1 v1 + v2 v2)/2 is built compositionally from v1 = U1 + (b/2) Q2,
    v2 = U2 - (b/2) Q1, so residuals are pure discretization error and shrink
    at second order in the spacing.  Measured on an interior band to keep
    periodic wrap-around of Q out of the comparison.  The default tolerance
    is a coarse structural bound; the sharp statement is the second-order
    shrink of the residuals as the grid is refined.
    """
    if grid.d != 2:
        raise DomainError("the Hamiltonian commutator check needs a 2D lattice")
    b = float(b)
    h = grid.spacing
    q1_mesh, q2_mesh = grid.mesh()

    def deriv(psi: np.ndarray, axis: int) -> np.ndarray:
        return (np.roll(psi, -1, axis=axis) - np.roll(psi, 1, axis=axis)) / (2.0 * h)

    def u1(psi):
        return -1j * hbar * deriv(psi, 0)

    def u2(psi):
        return -1j * hbar * deriv(psi, 1)

    def q1(psi):
        return q1_mesh * psi

    def q2(psi):
        return q2_mesh * psi

    def v1(psi):
        return u1(psi) + 0.5 * b * q2(psi)

    def v2(psi):
        return u2(psi) - 0.5 * b * q1(psi)

    def ham(psi):
        return 0.5 * (v1(v1(psi)) + v2(v2(psi)))

    ops = [u1, u2, q1, q2]
    names = ["commutator_U1", "commutator_U2", "commutator_Q1", "commutator_Q2"]
    m = transported_generator(b)

    if states is None:
        center = grid.offset + grid.box_length / 2.0
        states = [
            gaussian_state(grid, center=center, sigma=1.0, boost=(0.0, 0.0), hbar=hbar),
            gaussian_state(grid, center=center, sigma=1.0, boost=(1.0, -0.5), hbar=hbar),
            gaussian_state(grid, center=center, sigma=1.2, boost=(0.7, 1.2), hbar=hbar),
        ]

    half = band_fraction * grid.box_length / 2.0
    mid = grid.offset + grid.box_length / 2.0
    band = (np.abs(q1_mesh - mid) <= half) & (np.abs(q2_mesh - mid) <= half)

    residuals = [0.0] * 4
    canonical = 0.0
    for st in states:
        psi = st.amplitudes
        hpsi = ham(psi)
        for a, op in enumerate(ops):
            lhs = (1j / hbar) * (op(hpsi) - ham(op(psi)))
            rhs = np.zeros_like(psi)
            for bb, other in enumerate(ops):
                if m[a, bb] != 0.0:
                    rhs = rhs + m[a, bb] * other(psi)
            residuals[a] = max(
                residuals[a], float(np.max(np.abs((lhs - rhs)[band])))
            )
        for i, qop in enumerate((q1, q2)):
            for j, uop in enumerate((u1, u2)):
                comm = qop(uop(psi)) - uop(qop(psi))
                target = 1j * hbar * psi if i == j else 0.0
                canonical = max(
                    canonical, float(np.max(np.abs((comm - target)[band])))
                )

    checks = [
        {"name": name, "residual": res, "tolerance": tol.absolute, "pass": bool(res <= tol.absolute)}
        for name, res in zip(names, residuals)
    ]
    checks.append(
        {
            "name": "canonical_pairs",
            "residual": canonical,
            "tolerance": tol.absolute,
            "pass": bool(canonical <= tol.absolute),
        }
    )
    return {
        "b": b,
        "n_points": grid.n_points,
        "spacing": h,
        "checks": checks,
        "passed": all(c["pass"] for c in checks),
    }


# ---------------------------------------------------------------------------
# inequivalent measures and ladder operators


def coordinate_map(lam: float, q: np.ndarray) -> np.ndarray:
    """Q(q) = q K(lam, q^2): the flat coordinate expressed through the
    deformed one on the 1D Lagrangian slice."""
    q = np.asarray(q, dtype=float)
    return q * nc.solve_K(lam, q * q)


def measure_norm(
    profile: Callable,
    lam: float,
    which: str,
    half_width: float = 16.0,
    n: int = 2001,
) -> float:
    """Norm of a 1D profile under dq ("mu") or under dQ ("mu_prime").

    dq = (1 + 3 lam Q^2) dQ along Q(q) = q K(q), so the dQ weights are
    1 / (1 + 3 lam Q(q)^2) on the q-grid.
    """
    q = np.linspace(-half_width, half_width, n)
    h = q[1] - q[0]
    amps = np.asarray([complex(profile(float(v))) for v in q])
    if which == "mu":
        w = np.ones_like(q)
    elif which == "mu_prime":
        big_q = coordinate_map(lam, q)
        w = 1.0 / (1.0 + 3.0 * lam * big_q * big_q)
    else:
        raise DomainError(f"unknown measure '{which}'")
    total = math.fsum(w * np.abs(amps) ** 2) * h
    return math.sqrt(total)


def ladder_apply(
    which: str,
    state: LatticeState,
    lam: float = 0.0,
    hbar: float = 1.0,
) -> LatticeState:
    """Apply a ladder operator on a 1D lattice with central differences.

    "a" / "a_dag" are the oscillator pair (q +/- hbar d/dq) / sqrt(2 hbar);
    "A_prime" / "A_prime_dag" replace q by K(r) q and the derivative
    coefficient by hbar (1 + 3 lam K^2 q^2), reducing to the plain pair at
    lam = 0.
    """
    grid = state.grid
    if grid.d != 1:
        raise DomainError("ladder operators act on 1D states")
    q = grid.positions()
    h = grid.spacing
    psi = state.amplitudes
    dpsi = (np.roll(psi, -1) - np.roll(psi, 1)) / (2.0 * h)
    scale = 1.0 / math.sqrt(2.0 * hbar)
    if which in ("a", "a_dag"):
        sign = 1.0 if which == "a" else -1.0
        amps = scale * (q * psi + sign * hbar * dpsi)
    elif which in ("A_prime", "A_prime_dag"):
        sign = 1.0 if which == "A_prime" else -1.0
        k = nc.solve_K(lam, q * q)
        coeff = 1.0 + 3.0 * lam * (k * q) ** 2
        amps = scale * (k * q * psi + sign * hbar * coeff * dpsi)
    else:
        raise ValueError(f"unknown ladder operator '{which}'")
    return LatticeState(grid, amps, state.measure_weights)


# ---------------------------------------------------------------------------
# density matrices and pure-state composition


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi: Sequence[complex]) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex)
        n2 = float(np.real(np.vdot(v, v)))
        if n2 <= 0.0:
            raise ValueError("cannot project on the zero vector")
        return cls(np.outer(v, np.conj(v)) / n2)

    def validate(self, tol: float = 1e-10) -> None:
        m = self.matrix
        herm = float(np.max(np.abs(m - m.conj().T)))
        trace = abs(complex(np.trace(m)) - 1.0)
        purity = float(np.max(np.abs(m @ m - m)))
        if herm > tol or trace > tol or purity > tol:
            raise ValueError(
                f"not a pure density matrix: hermiticity {herm:.2e}, "
                f"trace defect {trace:.2e}, purity defect {purity:.2e}"
            )


def pure_state_compose(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    c1: complex,
    c2: complex,
    psi0: Sequence[complex],
    tol: float = 1e-10,
) -> DensityMatrix:
    """Nonlinear composition |psi> = c1 rho1|psi0> + c2 rho2|psi0>, projected.

    Terms with a nonzero coefficient must not annihilate the fiducial vector.
    """
    rho1.validate(tol)
    rho2.validate(tol)
    v0 = np.asarray(psi0, dtype=complex)
    n0 = float(np.linalg.norm(v0))
    if n0 == 0.0:
        raise ValueError("fiducial vector must be nonzero")
    v0 = v0 / n0
    out = np.zeros_like(v0)
    for c, rho in ((complex(c1), rho1), (complex(c2), rho2)):
        if c == 0:
            continue
        term = rho.matrix @ v0
        if float(np.linalg.norm(term)) <= tol:
            raise OrthogonalFiducialError(
                "component state is orthogonal to the fiducial vector"
            )
        out = out + c * term
    if float(np.linalg.norm(out)) <= tol:
        raise ValueError("composed vector vanishes; coefficients degenerate")
    return DensityMatrix.pure(out)


# ---------------------------------------------------------------------------
# polynomials on the plane and Moyal structure


class Poly2:
    """Polynomial in (q, p) held as {(i, j): coefficient}.

    Evaluation is generic: works on floats, arrays, and series seeds (the
    latter require real coefficients).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        clean = {}
        for key, val in (coeffs or {}).items():
            c = complex(val)
            if c != 0:
                clean[(int(key[0]), int(key[1]))] = c
        self.coeffs = clean

    @classmethod
    def monomial(cls, i: int, j: int, c: complex = 1.0) -> "Poly2":
        return cls({(i, j): c})

    @classmethod
    def q(cls) -> "Poly2":
        return cls.monomial(1, 0)

    @classmethod
    def p(cls) -> "Poly2":
        return cls.monomial(0, 1)

    @classmethod
    def constant(cls, c: complex) -> "Poly2":
        return cls({(0, 0): c})

    def coeff(self, i: int, j: int) -> complex:
        return self.coeffs.get((i, j), 0.0 + 0.0j)

    def cleaned(self, tol: float = 1e-13) -> dict:
        return {k: v for k, v in self.coeffs.items() if abs(v) > tol}

    def diff(self, dq: int, dp: int) -> "Poly2":
        out = {}
        for (i, j), c in self.coeffs.items():
            if i < dq or j < dp:
                continue
            factor = 1.0
            for step in range(dq):
                factor *= i - step
            for step in range(dp):
                factor *= j - step
            out[(i - dq, j - dp)] = c * factor
        return Poly2(out)

    def __add__(self, other: "Poly2") -> "Poly2":
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0.0) + c
        return Poly2(out)

    def __sub__(self, other: "Poly2") -> "Poly2":
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0.0) - c
        return Poly2(out)

    def __neg__(self) -> "Poly2":
        return Poly2({k: -c for k, c in self.coeffs.items()})

    def scale(self, factor: complex) -> "Poly2":
        return Poly2({k: factor * c for k, c in self.coeffs.items()})

    def __mul__(self, other: "Poly2") -> "Poly2":
        out = {}
        for (i1, j1), c1 in sorted(self.coeffs.items()):
            for (i2, j2), c2 in sorted(other.coeffs.items()):
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0.0) + c1 * c2
        return Poly2(out)

    def __call__(self, point):
        qv, pv = point[0], point[1]
        if isinstance(qv, Series) or isinstance(pv, Series):
            acc = None
            for (i, j), c in sorted(self.coeffs.items()):
                if abs(c.imag) > 0.0:
                    raise TypeError("series evaluation needs real coefficients")
                term = c.real * (qv**i) * (pv**j)
                acc = term if acc is None else acc + term
            if acc is None:
                base = qv if isinstance(qv, Series) else pv
                return base * 0.0
            return acc
        total = 0.0 + 0.0j
        for (i, j), c in sorted(self.coeffs.items()):
            total += c * (qv**i) * (pv**j)
        if abs(total.imag) == 0.0:
            return total.real
        return total


@dataclass(frozen=True)
class StarConfig:
    hbar: float = 1.0
    order: int = 3

    def __post_init__(self):
        if self.hbar <= 0.0:
            raise ValueError("hbar must be positive")
        if not (0 <= self.order <= 3):
            raise ValueError("order must lie in 0..3 (jet cap)")


def _poisson_power_poly(f: Poly2, g: Poly2, k: int) -> Poly2:
    """P_k(f, g) = sum_j (-1)^j C(k, j) (dq^{k-j} dp^j f) (dq^j dp^{k-j} g)."""
    acc = Poly2()
    for j in range(k + 1):
        sign = -1.0 if j % 2 else 1.0
        term = f.diff(k - j, j) * g.diff(j, k - j)
        acc = acc + term.scale(sign * math.comb(k, j))
    return acc


def _series_at(f: Callable, point: Sequence[float], order: int) -> Series:
    out = f(nc.jet_seed([float(point[0]), float(point[1])], order))
    if not isinstance(out, Series):
        return Series.constant(float(out), 2, order)
    return out


def _poisson_power_value(sf: Series, sg: Series, k: int) -> float:
    terms = []
    for j in range(k + 1):
        sign = -1.0 if j % 2 else 1.0
        terms.append(
            sign * math.comb(k, j) * sf.partial((k - j, j)) * sg.partial((j, k - j))
        )
    return math.fsum(terms)


def _compose_with_chart(f: Callable, chart) -> Callable:
    def composed(w):
        return f(chart.forward(w))

    return composed


def star_product(f, g, cfg: StarConfig = StarConfig(), chart=None):
    """Truncated Moyal product sum_k (i hbar / 2)^k / k! P_k(f, g).

    Polynomial inputs without a chart give an exact Poly2 (the series
    terminates on polynomials).  Otherwise returns a pointwise evaluator;
    with a chart the product is conjugated through it, i.e. computed in the
    chart's flat coordinates at w = chart^{-1}(x).
    """
    if chart is None and isinstance(f, Poly2) and isinstance(g, Poly2):
        acc = Poly2()
        for k in range(cfg.order + 1):
            coeff = (1j * cfg.hbar / 2.0) ** k / math.factorial(k)
            acc = acc + _poisson_power_poly(f, g, k).scale(coeff)
        return acc

    def value(x):
        if chart is not None:
            w = chart.inverse(np.asarray(x, dtype=float))
            fa, ga = _compose_with_chart(f, chart), _compose_with_chart(g, chart)
        else:
            w = x
            fa, ga = f, g
        sf = _series_at(fa, w, cfg.order)
        sg = _series_at(ga, w, cfg.order)
        total = 0.0 + 0.0j
        for k in range(cfg.order + 1):
            coeff = (1j * cfg.hbar / 2.0) ** k / math.factorial(k)
            total += coeff * _poisson_power_value(sf, sg, k)
        return total

    return value


def moyal_bracket(f, g, cfg: StarConfig = StarConfig(), chart=None):
    """(f * g - g * f) / (i hbar): odd P_k terms with real coefficients.

    Leading term is the Poisson bracket; the k = 3 correction carries
    -(hbar^2 / 24) P_3.
    """

    def coefficient(k: int) -> float:
        return (-1.0) ** ((k - 1) // 2) * (cfg.hbar / 2.0) ** (k - 1) / math.factorial(k)

    if chart is None and isinstance(f, Poly2) and isinstance(g, Poly2):
        acc = Poly2()
        for k in range(1, cfg.order + 1, 2):
            acc = acc + _poisson_power_poly(f, g, k).scale(coefficient(k))
        return acc

    def value(x):
        if chart is not None:
            w = chart.inverse(np.asarray(x, dtype=float))
            fa, ga = _compose_with_chart(f, chart), _compose_with_chart(g, chart)
        else:
            w = x
            fa, ga = f, g
        sf = _series_at(fa, w, cfg.order)
        sg = _series_at(ga, w, cfg.order)
        return math.fsum(
            coefficient(k) * _poisson_power_value(sf, sg, k)
            for k in range(1, cfg.order + 1, 2)
        )

    return value


def poisson_bracket_value(f, g, x) -> float:
    """Flat {f, g} at a point via first-order jets."""
    sf = _series_at(f, x, 1)
    sg = _series_at(g, x, 1)
    return sf.partial((1, 0)) * sg.partial((0, 1)) - sf.partial((0, 1)) * sg.partial((1, 0))


def bracket_scaling_check(
    f,
    g,
    lam: float,
    points: np.ndarray | None = None,
    tol: Tolerance = Tolerance(absolute=1e-9),
    seed: int = 0,
    n_points: int = 100,
    chart=None,
) -> dict:
    """Residual of {f, g}_K = D {f, g} with D the chart volume factor.

    The left side is the Poisson bracket of the chart-composed functions at
    w = chart^{-1}(x); D is the determinant of the chart Jacobian there.
    """
    from . import geometry as geo
    from .linstruct import catalog_make

    if chart is None:
        chart = catalog_make("ho_K", lam=lam).phi
    if points is None:
        rng = np.random.default_rng(seed)
        points = rng.uniform(-1.0, 1.0, size=(2, n_points))
    points = np.asarray(points, dtype=float)
    worst = 0.0
    for idx in range(points.shape[1]):
        x = points[:, idx]
        flat = poisson_bracket_value(f, g, x)
        w = np.asarray(chart.inverse(x), dtype=float)
        fa = _compose_with_chart(f, chart)
        ga = _compose_with_chart(g, chart)
        sf = _series_at(fa, w, 1)
        sg = _series_at(ga, w, 1)
        imported = sf.partial((1, 0)) * sg.partial((0, 1)) - sf.partial((0, 1)) * sg.partial((1, 0))
        _, jac = geo.jacobian_at(chart.forward, w, 2)
        density = float(np.linalg.det(jac))
        worst = max(worst, abs(imported - density * flat))
    check = {
        "name": "fg_scaling_residual",
        "residual": worst,
        "tolerance": tol.absolute,
        "pass": bool(worst <= tol.absolute),
    }
    return {
        "lambda": float(lam),
        "n_points": int(points.shape[1]),
        "checks": [check],
        "passed": check["pass"],
    }
