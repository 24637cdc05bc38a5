"""Linear structures imported through a chart.

A diffeomorphism phi: E -> M between a vector space E and a manifold M drags
the vector-space operations of E onto M:

    u +. v      = phi(phi^-1(u) + phi^-1(v))
    lam *. u    = phi(lam phi^-1(u))
    origin      = phi(0)
    Delta(u)    = Dphi(w) w  at  w = phi^-1(u)   (dilation generator)

``forward`` maps must be written with the ``numcore`` function namespace so
that the same callable serves floats, batched arrays (shape ``(dim, n)``),
and series seeds.  ``inverse`` maps are point evaluations only and are never
differentiated through.

The catalog covers: the standard structure, the nonlinear oscillator family
(cubic-root chart), minimal-coupling magnetic charts, componentwise tanh,
the exponential half-line, the cube homeomorphism, and the punctured sphere
under inverse stereographic projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from . import numcore as nc
from .numcore import DomainError, Series, Tolerance


@dataclass(frozen=True)
class Diffeomorphism:
    """Chart pair.  ``domain`` is a predicate on M-side points; ``singular``
    marks M-side points where the imported vector field must refuse (the
    chart stops being a diffeomorphism there)."""

    dim: int
    forward: Callable
    inverse: Callable
    name: str = ""
    domain: Callable | None = None
    singular: Callable | None = None


@dataclass(frozen=True)
class LinearStructure:
    phi: Diffeomorphism
    name: str
    sample_lo: np.ndarray
    sample_hi: np.ndarray
    distance: Callable | None = None

    @property
    def dim(self) -> int:
        return self.phi.dim

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        pts = rng.uniform(self.sample_lo[:, None], self.sample_hi[:, None], size=(self.dim, n))
        return pts

    def dist(self, u, v) -> float:
        if self.distance is not None:
            return float(np.max(self.distance(u, v)))
        return float(np.max(np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))))


@dataclass(frozen=True)
class SpherePoint:
    """Polar point on the unit sphere; the north pole (theta = 0) is the
    stereographic projection point and is excluded."""

    theta: float
    phi_angle: float

    def __post_init__(self):
        if not 0.0 < self.theta <= math.pi:
            raise DomainError("theta must lie in (0, pi]")
        object.__setattr__(self, "phi_angle", self.phi_angle % (2.0 * math.pi))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.phi_angle])

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "SpherePoint":
        return cls(float(x[0]), float(x[1]))


def _check_domain(structure: LinearStructure, u) -> None:
    pred = structure.phi.domain
    if pred is None:
        return
    ok = pred(np.asarray(u, dtype=float))
    if not np.all(ok):
        raise DomainError(f"point outside the domain of structure '{structure.name}'")


def _to_linear(structure: LinearStructure, u):
    _check_domain(structure, u)
    return np.asarray(structure.phi.inverse(np.asarray(u, dtype=float)), dtype=float)


def ls_add(structure: LinearStructure, u, v):
    """Imported addition phi(phi^-1(u) + phi^-1(v)); vectorised over columns."""
    w = _to_linear(structure, u) + _to_linear(structure, v)
    return np.asarray(structure.phi.forward(w), dtype=float)


def ls_sub(structure: LinearStructure, u, v):
    """Imported difference phi(phi^-1(u) - phi^-1(v))."""
    w = _to_linear(structure, u) - _to_linear(structure, v)
    return np.asarray(structure.phi.forward(w), dtype=float)


def ls_scale(structure: LinearStructure, lam: float, u):
    """Imported scaling phi(lam phi^-1(u))."""
    w = float(lam) * _to_linear(structure, u)
    return np.asarray(structure.phi.forward(w), dtype=float)


def ls_origin(structure: LinearStructure) -> np.ndarray:
    return np.asarray(structure.phi.forward(np.zeros(structure.dim)), dtype=float)


def ls_flow(structure: LinearStructure, u, t: float):
    """Dilation one-parameter group  Psi(u, t) = phi(e^t phi^-1(u))."""
    w = math.exp(float(t)) * _to_linear(structure, u)
    return np.asarray(structure.phi.forward(w), dtype=float)


def ls_liouville(structure: LinearStructure, u) -> np.ndarray:
    """Generator of the dilation group at u, from forward jets only.

    Refuses at points marked singular by the chart (the pushforward is not
    defined where the chart fails to be a diffeomorphism).
    """
    u = np.asarray(u, dtype=float)
    phi = structure.phi
    if phi.singular is not None and np.any(phi.singular(u)):
        raise DomainError(f"structure '{structure.name}' has no dilation generator at this point")
    _check_domain(structure, u)
    w = np.asarray(phi.inverse(u), dtype=float)
    if not np.any(w):
        # the flow fixes the origin; the generator vanishes there
        return np.zeros(phi.dim)
    _, jac = geo.jacobian_at(phi.forward, w, phi.dim)
    return jac @ w


def liouville_field(structure: LinearStructure) -> geo.VectorField:
    return geo.VectorField(structure.dim, lambda u: ls_liouville(structure, u))


def magnetic_sub(structure: LinearStructure, u, v):
    """Difference in a magnetic structure; same conjugation as ls_sub."""
    return ls_sub(structure, u, v)


def ls_axiom_report(
    structure: LinearStructure,
    n_samples: int = 1000,
    tol: Tolerance = Tolerance(absolute=1e-8),
    seed: int = 0,
) -> dict:
    """Vector-space axioms on sampled points; residuals in the structure's
    own distance (chordal for the sphere).

    Returns a plain dict: name, residual, tolerance, pass per check.
    """
    rng = np.random.default_rng(seed)
    u = structure.sample(n_samples, rng)
    v = structure.sample(n_samples, rng)
    w = structure.sample(n_samples, rng)
    lam = rng.uniform(-2.0, 2.0, size=n_samples)
    mu = rng.uniform(-2.0, 2.0, size=n_samples)

    checks: list[dict] = []

    def record(name: str, residual: float, tolerance: float | None = None):
        t = tol.absolute if tolerance is None else tolerance
        checks.append(
            {"name": name, "residual": float(residual), "tolerance": float(t), "pass": bool(residual <= t)}
        )

    fwd = lambda z: np.asarray(structure.phi.forward(z), dtype=float)
    inv = lambda z: _to_linear(structure, z)

    record("chart_roundtrip", structure.dist(fwd(inv(u)), u), max(tol.absolute, 1e-10))
    record("add_commutative", structure.dist(ls_add(structure, u, v), ls_add(structure, v, u)))
    record(
        "add_associative",
        structure.dist(
            ls_add(structure, ls_add(structure, u, v), w),
            ls_add(structure, u, ls_add(structure, v, w)),
        ),
    )
    origin = ls_origin(structure)[:, None] * np.ones((1, n_samples))
    record("neutral_element", structure.dist(ls_add(structure, u, origin), u))
    record("scale_identity", structure.dist(ls_scale(structure, 1.0, u), u))

    # scalarwise ops need per-sample scalars: conjugate directly
    wu = inv(u)
    record(
        "scale_compatibility",
        structure.dist(fwd(lam * (mu * wu)), fwd((lam * mu) * wu)),
    )
    record(
        "distributive_over_add",
        structure.dist(fwd(lam * (wu + inv(v))), ls_add(structure, fwd(lam * wu), fwd(lam * inv(v)))),
    )
    record(
        "distributive_over_scalars",
        structure.dist(fwd((lam + mu) * wu), ls_add(structure, fwd(lam * wu), fwd(mu * wu))),
    )
    record(
        "scale_zero_is_origin",
        structure.dist(ls_scale(structure, 0.0, u), origin),
    )
    record(
        "sub_inverts_add",
        structure.dist(ls_add(structure, ls_sub(structure, u, v), v), u),
    )

    return {
        "structure": structure.name,
        "n_samples": int(n_samples),
        "checks": checks,
        "passed": all(c["pass"] for c in checks),
    }


# catalog ------------------------------------------------------------------


def gauge_symmetric(b: float) -> Callable:
    """Vector potential of a uniform field (0, 0, b) in the symmetric gauge."""

    def vector_potential(q):
        return nc.pack(-0.5 * b * q[1], 0.5 * b * q[0], 0.0 * q[2])

    return vector_potential


def gauge_nonuniform() -> Callable:
    """Polynomial gauge with non-constant field: A = (0, q1 q3, 0)."""

    def vector_potential(q):
        return nc.pack(0.0 * q[0], q[0] * q[2], 0.0 * q[1])

    return vector_potential


def _standard(n: int) -> LinearStructure:
    phi = Diffeomorphism(
        dim=n,
        forward=lambda w: w,
        inverse=lambda u: u,
        name="standard",
    )
    return LinearStructure(phi, f"standard({n})", -3.0 * np.ones(n), 3.0 * np.ones(n))


def _ho_K(lam: float) -> LinearStructure:
    if lam < 0.0:
        raise ValueError("ho_K requires lam >= 0")

    def forward(w):
        r2 = w[0] * w[0] + w[1] * w[1]
        f = 1.0 + lam * r2
        return nc.pack(w[0] * f, w[1] * f)

    def inverse(x):
        r2 = x[0] * x[0] + x[1] * x[1]
        k = nc.solve_K(lam, r2)
        return nc.pack(x[0] * k, x[1] * k)

    phi = Diffeomorphism(2, forward, inverse, name=f"ho_K({lam})")
    return LinearStructure(phi, f"ho_K({lam})", np.array([-2.0, -2.0]), np.array([2.0, 2.0]))


def _magnetic(vector_potential: Callable, tag: str) -> LinearStructure:
    def forward(w):
        a = vector_potential([w[0], w[1], w[2]])
        return nc.pack(w[0], w[1], w[2], w[3] + a[0], w[4] + a[1], w[5] + a[2])

    def inverse(x):
        a = vector_potential([x[0], x[1], x[2]])
        return nc.pack(x[0], x[1], x[2], x[3] - a[0], x[4] - a[1], x[5] - a[2])

    phi = Diffeomorphism(6, forward, inverse, name=f"magnetic[{tag}]")
    return LinearStructure(
        phi, f"magnetic[{tag}]", -2.0 * np.ones(6), 2.0 * np.ones(6)
    )


def _tanh(n: int) -> LinearStructure:
    def forward(w):
        return nc.pack(*[nc.tanh(w[i]) for i in range(n)])

    def inverse(x):
        return nc.pack(*[nc.atanh(x[i]) for i in range(n)])

    phi = Diffeomorphism(
        n,
        forward,
        inverse,
        name="tanh",
        domain=lambda x: np.all(np.abs(x) < 1.0, axis=0),
    )
    return LinearStructure(phi, f"tanh({n})", -0.99 * np.ones(n), 0.99 * np.ones(n))


def _exp() -> LinearStructure:
    phi = Diffeomorphism(
        1,
        forward=lambda w: nc.pack(nc.exp(w[0])),
        inverse=lambda x: nc.pack(nc.log(x[0])),
        name="exp",
        domain=lambda x: np.all(x > 0.0, axis=0),
    )
    return LinearStructure(phi, "exp", np.array([0.05]), np.array([5.0]))


def _cube() -> LinearStructure:
    phi = Diffeomorphism(
        1,
        forward=lambda w: nc.pack(w[0] * w[0] * w[0]),
        inverse=lambda x: nc.pack(nc.cbrt(x[0])),
        name="cube",
        # chart inverse is not differentiable at 0: generator refuses there
        singular=lambda x: np.any(np.asarray(x) == 0.0),
    )
    return LinearStructure(phi, "cube", np.array([-2.0]), np.array([2.0]))


def sphere_embed(polar) -> np.ndarray:
    """Polar chart point(s) -> Cartesian coordinates on the unit sphere."""
    theta, phi_angle = polar[0], polar[1]
    st = np.sin(theta)
    return np.stack(
        np.broadcast_arrays(st * np.cos(phi_angle), st * np.sin(phi_angle), np.cos(theta))
    )


def sphere_chordal(u, v) -> np.ndarray:
    """Distance in the embedding; immune to the azimuthal branch cut."""
    du = sphere_embed(np.asarray(u, dtype=float)) - sphere_embed(np.asarray(v, dtype=float))
    return np.sqrt(np.sum(du * du, axis=0))


def sphere_plane_map() -> Callable:
    """Inverse stereographic projection onto Cartesian sphere coordinates,
    rational in the plane variables (smooth across the origin)."""

    def embed(w):
        rho2 = w[0] * w[0] + w[1] * w[1]
        den = 1.0 + rho2
        return nc.pack(2.0 * w[0] / den, 2.0 * w[1] / den, (rho2 - 1.0) / den)

    return embed


def _sphere() -> LinearStructure:
    def forward(w):
        if isinstance(w[0], Series) or isinstance(w[1], Series):
            rho = nc.sqrt(w[0] * w[0] + w[1] * w[1])
            theta = math.pi - 2.0 * nc.atan(rho)
            return [theta, nc.atan2(w[1], w[0])]
        w = np.asarray(w, dtype=float)
        rho = np.hypot(w[0], w[1])
        theta = math.pi - 2.0 * np.arctan(rho)
        phi_angle = np.arctan2(w[1], w[0]) % (2.0 * math.pi)
        return nc.pack(theta, phi_angle)

    def inverse(x):
        theta, phi_angle = np.asarray(x[0], dtype=float), np.asarray(x[1], dtype=float)
        rho = np.cos(0.5 * theta) / np.sin(0.5 * theta)
        return nc.pack(rho * np.cos(phi_angle), rho * np.sin(phi_angle))

    phi = Diffeomorphism(
        2,
        forward,
        inverse,
        name="sphere",
        domain=lambda x: (x[0] > 0.0) & (x[0] <= math.pi),
    )
    return LinearStructure(
        phi,
        "sphere",
        np.array([0.05, 0.0]),
        np.array([math.pi, 2.0 * math.pi]),
        distance=sphere_chordal,
    )


def catalog_make(name: str, **params) -> LinearStructure:
    """Build a catalog structure by identifier.

    standard(n) | ho_K(lam) | magnetic(vector_potential, tag) | tanh(n) |
    exp | cube | sphere
    """
    if name == "standard":
        return _standard(int(params.get("n", 2)))
    if name == "ho_K":
        return _ho_K(float(params.get("lam", 0.1)))
    if name == "magnetic":
        vp = params.get("vector_potential")
        if vp is None:
            vp = gauge_symmetric(float(params.get("b", 1.0)))
            tag = params.get("tag", f"B={params.get('b', 1.0)}")
        else:
            tag = params.get("tag", "custom")
        return _magnetic(vp, str(tag))
    if name == "tanh":
        return _tanh(int(params.get("n", 1)))
    if name == "exp":
        return _exp()
    if name == "cube":
        return _cube()
    if name == "sphere":
        return _sphere()
    raise ValueError(f"unknown structure '{name}'")


def ho_A_matrix(lam: float, x) -> np.ndarray:
    """Chart Jacobian factor of the oscillator family at a flat point x:
    row i holds the flat components of the i-th imported translation
    generator.  Symmetric; determinant is the density relating the two
    symplectic forms."""
    x = np.asarray(x, dtype=float)
    r2 = x[0] * x[0] + x[1] * x[1]
    k2 = nc.solve_K(lam, r2) ** 2
    return np.array(
        [
            [1.0 + lam * k2 * (3.0 * x[0] ** 2 + x[1] ** 2), 2.0 * lam * k2 * x[0] * x[1]],
            [2.0 * lam * k2 * x[0] * x[1], 1.0 + lam * k2 * (x[0] ** 2 + 3.0 * x[1] ** 2)],
        ]
    )


def ho_basis_fields(lam: float) -> tuple[geo.VectorField, geo.VectorField]:
    """The two imported translation generators of the oscillator family,
    in flat (q, p) components; used to draw the chart's coordinate curves.

    Components go through the cubic-root solver, so these fields are
    point/batch evaluable but not series evaluable.
    """
    dq_field = geo.VectorField(2, lambda x: ho_A_matrix(lam, x)[0])
    dp_field = geo.VectorField(2, lambda x: ho_A_matrix(lam, x)[1])
    return dq_field, dp_field
