"""Imported-structure catalog against the closed-form addition/scaling laws."""

from __future__ import annotations

import math

import numpy as np
import pytest

import linchart.geometry as geo
import linchart.linstruct as ls
import linchart.numcore as nc
from linchart.numcore import DomainError, Tolerance


def _report_passed(rep, name=None):
    if name is None:
        return rep["passed"]
    return next(c for c in rep["checks"] if c["name"] == name)["pass"]


ALL_STRUCTURES = [
    ls.catalog_make("standard", n=2),
    ls.catalog_make("ho_K", lam=0.0),
    ls.catalog_make("ho_K", lam=0.1),
    ls.catalog_make("ho_K", lam=1.0),
    ls.catalog_make("magnetic", b=1.3),
    ls.catalog_make("magnetic", vector_potential=ls.gauge_nonuniform(), tag="shear"),
    ls.catalog_make("tanh", n=1),
    ls.catalog_make("exp"),
    ls.catalog_make("cube"),
    ls.catalog_make("sphere"),
]


@pytest.mark.parametrize("structure", ALL_STRUCTURES, ids=[s.name for s in ALL_STRUCTURES])
def test_axiom_report_smoke(structure):
    rep = ls.ls_axiom_report(structure, n_samples=300, tol=Tolerance(absolute=1e-8), seed=11)
    worst = max(c["residual"] for c in rep["checks"])
    assert rep["passed"], f"{structure.name}: worst residual {worst:.3e}"


def test_negative_control_breaks_associativity():
    # forward and "inverse" that are not actually inverse to each other:
    # the binary operation is no longer a conjugated addition
    broken = ls.LinearStructure(
        ls.Diffeomorphism(
            1,
            forward=lambda w: nc.pack(nc.tanh(w[0])),
            inverse=lambda x: nc.pack(1.001 * nc.atanh(x[0])),
            name="broken",
            domain=lambda x: np.all(np.abs(x) < 1.0, axis=0),
        ),
        "broken",
        np.array([-0.9]),
        np.array([0.9]),
    )
    rep = ls.ls_axiom_report(broken, n_samples=200, seed=4)
    assert not rep["passed"]
    assert not _report_passed(rep, "add_associative")
    # commutativity survives this corruption, which is what makes it a
    # discriminating control
    assert _report_passed(rep, "add_commutative")


class TestTanh:
    S = ls.catalog_make("tanh", n=1)

    def test_velocity_addition_value(self):
        out = ls.ls_add(self.S, np.array([0.5]), np.array([0.5]))
        assert abs(out[0] - 0.8) < 1e-14

    def test_closed_form_random(self):
        rng = np.random.default_rng(0)
        x, y = rng.uniform(-0.95, 0.95, size=(2, 50))
        got = ls.ls_add(self.S, x[None, :], y[None, :])[0]
        assert np.max(np.abs(got - (x + y) / (1.0 + x * y))) < 1e-13

    def test_triple_sum_closed_form(self):
        rng = np.random.default_rng(1)
        x, y, z = rng.uniform(-0.9, 0.9, size=(3, 40))
        got = ls.ls_add(self.S, ls.ls_add(self.S, x[None], y[None]), z[None])[0]
        want = (x + y + z + x * y * z) / (1.0 + x * y + x * z + y * z)
        assert np.max(np.abs(got - want)) < 1e-12

    def test_liouville_closed_form(self):
        # (1 - X^2) artanh X; zero at the origin
        for x in [-0.7, -0.2, 0.0, 0.4, 0.9]:
            got = ls.ls_liouville(self.S, np.array([x]))
            want = (1.0 - x * x) * math.atanh(x)
            assert abs(got[0] - want) < 1e-12

    def test_domain_guard(self):
        with pytest.raises(DomainError):
            ls.ls_add(self.S, np.array([1.0]), np.array([0.5]))


class TestExpStructure:
    S = ls.catalog_make("exp")

    def test_add_is_product(self):
        out = ls.ls_add(self.S, np.array([2.0]), np.array([3.0]))
        assert abs(out[0] - 6.0) < 1e-12

    def test_scale_is_power(self):
        out = ls.ls_scale(self.S, 2.0, np.array([3.0]))
        assert abs(out[0] - 9.0) < 1e-12

    def test_origin_is_one(self):
        assert abs(ls.ls_origin(self.S)[0] - 1.0) < 1e-15

    def test_liouville_xlnx(self):
        got = ls.ls_liouville(self.S, np.array([math.e]))
        assert abs(got[0] - math.e) < 1e-12

    def test_domain_guard(self):
        with pytest.raises(DomainError):
            ls.ls_scale(self.S, 2.0, np.array([-1.0]))


class TestCube:
    S = ls.catalog_make("cube")

    def test_add_value(self):
        assert abs(ls.ls_add(self.S, np.array([1.0]), np.array([8.0]))[0] - 27.0) < 1e-12

    def test_scale_value(self):
        assert abs(ls.ls_scale(self.S, 2.0, np.array([1.0]))[0] - 8.0) < 1e-12

    def test_liouville_refuses_at_zero(self):
        with pytest.raises(DomainError):
            ls.ls_liouville(self.S, np.array([0.0]))

    def test_liouville_away_from_zero(self):
        # Dphi(w) w = 3 w^3 = 3X
        for x in [-2.0, -0.3, 0.5, 1.7]:
            assert abs(ls.ls_liouville(self.S, np.array([x]))[0] - 3.0 * x) < 1e-12


class TestHoK:
    def test_lambda_zero_reduces_to_standard(self):
        s0 = ls.catalog_make("ho_K", lam=0.0)
        rng = np.random.default_rng(2)
        u, v = rng.uniform(-2.0, 2.0, size=(2, 2, 30))
        assert np.max(np.abs(ls.ls_add(s0, u, v) - (u + v))) < 1e-14

    def test_lin2_cross_check(self):
        # S(r, r') prefactor form of the addition law
        lam = 0.1
        s = ls.catalog_make("ho_K", lam=lam)
        rng = np.random.default_rng(3)
        u, v = rng.uniform(-1.5, 1.5, size=(2, 2, 60))
        k = nc.solve_K(lam, np.sum(u * u, axis=0))
        kp = nc.solve_K(lam, np.sum(v * v, axis=0))
        pref = 1.0 + lam * (
            k**2 * np.sum(u * u, axis=0)
            + kp**2 * np.sum(v * v, axis=0)
            + 2.0 * k * kp * np.sum(u * v, axis=0)
        )
        want = pref * (k * u + kp * v)
        got = ls.ls_add(s, u, v)
        assert np.max(np.abs(got - want)) < 1e-10

    def test_A_matrix_frozen_determinant(self):
        # at the chart point (1, 0) with lam = 0.1 the flat point is (1.1, 0)
        a = ls.ho_A_matrix(0.1, np.array([1.1, 0.0]))
        assert abs(np.linalg.det(a) - 1.43) < 1e-10
        assert abs(ls.ho_A_matrix(0.1, np.zeros(2))[0, 0] - 1.0) < 1e-14

    def test_A_matrix_is_forward_jacobian(self):
        lam, x = 0.3, np.array([0.8, -1.1])
        s = ls.catalog_make("ho_K", lam=lam)
        w = np.asarray(s.phi.inverse(x), dtype=float)
        _, jac = geo.jacobian_at(s.phi.forward, w, 2)
        assert np.max(np.abs(jac - ls.ho_A_matrix(lam, x))) < 1e-9

    def test_two_forms_density_relation(self):
        # flat two-form = det A times the imported one, pointwise
        lam = 0.2
        s = ls.catalog_make("ho_K", lam=lam)
        omega = np.array([[0.0, 1.0], [-1.0, 0.0]])
        rng = np.random.default_rng(4)
        for x in rng.uniform(-1.5, 1.5, size=(20, 2)):
            a = ls.ho_A_matrix(lam, x)
            b = np.linalg.inv(a)
            omega_imported = b.T @ omega @ b
            assert np.max(np.abs(omega - np.linalg.det(a) * omega_imported)) < 1e-9

    def test_basis_fields_flat_limit(self):
        dq, dp = ls.ho_basis_fields(0.0)
        p = np.array([0.7, -0.3])
        assert np.allclose(dq(p), [1.0, 0.0]) and np.allclose(dp(p), [0.0, 1.0])

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            ls.catalog_make("ho_K", lam=-1.0)


class TestMagnetic:
    B = 1.3
    S = ls.catalog_make("magnetic", b=1.3)

    def test_origin(self):
        # (0, A(0)); the symmetric gauge vanishes at 0
        assert np.allclose(ls.ls_origin(self.S), np.zeros(6), atol=1e-15)

    def test_homogeneous_gauge_gives_standard_structure(self):
        rng = np.random.default_rng(5)
        u, v = rng.uniform(-2.0, 2.0, size=(2, 6, 40))
        assert np.max(np.abs(ls.ls_add(self.S, u, v) - (u + v))) < 1e-13
        lam = -1.7
        assert np.max(np.abs(ls.ls_scale(self.S, lam, u) - lam * u)) < 1e-13

    def test_sum_closed_form_nonuniform(self):
        s = ls.catalog_make("magnetic", vector_potential=ls.gauge_nonuniform(), tag="shear")
        a = lambda q: np.stack(np.broadcast_arrays(0.0 * q[0], q[0] * q[2], 0.0 * q[1]))
        rng = np.random.default_rng(6)
        u, v = rng.uniform(-2.0, 2.0, size=(2, 6, 40))
        got = ls.ls_add(s, u, v)
        qs = u[:3] + v[:3]
        want = np.vstack([qs, u[3:] + v[3:] + a(qs) - a(u[:3]) - a(v[:3])])
        assert np.max(np.abs(got - want)) < 1e-12

    def test_scale_closed_form_nonuniform(self):
        s = ls.catalog_make("magnetic", vector_potential=ls.gauge_nonuniform(), tag="shear")
        a = lambda q: np.stack(np.broadcast_arrays(0.0 * q[0], q[0] * q[2], 0.0 * q[1]))
        rng = np.random.default_rng(7)
        u = rng.uniform(-2.0, 2.0, size=(6, 40))
        lam = 0.7
        got = ls.ls_scale(s, lam, u)
        want = np.vstack([lam * u[:3], lam * u[3:] + a(lam * u[:3]) - lam * a(u[:3])])
        assert np.max(np.abs(got - want)) < 1e-12

    def test_sub_closed_form_and_remark(self):
        s = ls.catalog_make("magnetic", vector_potential=ls.gauge_nonuniform(), tag="shear")
        a = lambda q: np.stack(np.broadcast_arrays(0.0 * q[0], q[0] * q[2], 0.0 * q[1]))
        rng = np.random.default_rng(8)
        u, v = rng.uniform(-2.0, 2.0, size=(2, 6, 30))
        got = ls.magnetic_sub(s, u, v)
        qd = u[:3] - v[:3]
        want = np.vstack([qd, u[3:] - v[3:] + a(qd) + a(v[:3]) - a(u[:3])])
        assert np.max(np.abs(got - want)) < 1e-12
        # self-difference lands on the structure origin
        self_diff = ls.magnetic_sub(s, u, u)
        assert np.max(np.abs(self_diff - ls.ls_origin(s)[:, None])) < 1e-13
        # and subtraction inverts addition
        back = ls.ls_add(s, ls.magnetic_sub(s, u, v), v)
        assert np.max(np.abs(back - u)) < 1e-10


class TestSphere:
    S = ls.catalog_make("sphere")

    @staticmethod
    def _embed(theta, phi):
        return np.array(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
        )

    def test_origin_is_south_pole(self):
        o = ls.ls_origin(self.S)
        assert abs(o[0] - math.pi) < 1e-12

    def test_same_longitude_cot_sum(self):
        th, thp, ph = 1.1, 2.0, 0.7
        got = ls.ls_add(self.S, np.array([th, ph]), np.array([thp, ph]))
        c = 1.0 / math.tan(th / 2.0) + 1.0 / math.tan(thp / 2.0)
        want_sin = 2.0 * c / (c * c + 1.0)
        want_cos = (c * c - 1.0) / (c * c + 1.0)
        assert abs(got[1] - ph) < 1e-12
        assert abs(math.sin(got[0]) - want_sin) < 1e-12
        assert abs(math.cos(got[0]) - want_cos) < 1e-12

    def test_general_addition_law(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            th, thp = rng.uniform(0.3, math.pi, size=2)
            ph, php = rng.uniform(0.0, 2.0 * math.pi, size=2)
            got = ls.ls_add(self.S, np.array([th, ph]), np.array([thp, php]))
            ct, ctp = 1.0 / math.tan(th / 2.0), 1.0 / math.tan(thp / 2.0)
            rho = math.sqrt(ct * ct + ctp * ctp + 2.0 * ct * ctp * math.cos(ph - php))
            assert abs(math.sin(got[0]) - 2.0 * rho / (rho * rho + 1.0)) < 1e-11
            if rho > 1e-9:
                cphi = (ct * math.cos(ph) + ctp * math.cos(php)) / rho
                sphi = (ct * math.sin(ph) + ctp * math.sin(php)) / rho
                assert abs(math.cos(got[1]) - cphi) < 1e-9
                assert abs(math.sin(got[1]) - sphi) < 1e-9

    def test_scaling_polar_display(self):
        # compare on the embedded sphere so negative-lambda conventions agree
        rng = np.random.default_rng(10)
        for _ in range(25):
            th = rng.uniform(0.2, math.pi)
            ph = rng.uniform(0.0, 2.0 * math.pi)
            lam = rng.uniform(-2.0, 2.0)
            got = ls.ls_scale(self.S, lam, np.array([th, ph]))
            c = lam / math.tan(th / 2.0)
            sin_tp = 2.0 * c / (c * c + 1.0)
            cos_tp = (c * c - 1.0) / (c * c + 1.0)
            want = np.array([sin_tp * math.cos(ph), sin_tp * math.sin(ph), cos_tp])
            assert np.max(np.abs(self._embed(*got) - want)) < 1e-11

    def test_scaling_cartesian_display(self):
        # rational form on the embedded sphere (numerators x1, x2 respectively)
        th, ph, lam = 1.3, 2.1, 1.7
        x = self._embed(th, ph)
        den = lam * lam + 1.0 + x[2] * (lam * lam - 1.0)
        want = np.array(
            [2.0 * lam * x[0] / den, 2.0 * lam * x[1] / den, (lam * lam - 1.0 + x[2] * (lam * lam + 1.0)) / den]
        )
        got = self._embed(*ls.ls_scale(self.S, lam, np.array([th, ph])))
        assert np.max(np.abs(got - want)) < 1e-12
        assert abs(np.sum(want * want) - 1.0) < 1e-12

    def test_scale_zero_hits_origin(self):
        got = ls.ls_scale(self.S, 0.0, np.array([1.0, 2.0]))
        assert abs(got[0] - math.pi) < 1e-12

    def test_liouville_polar_form(self):
        # -sin(theta) d/d(theta), vanishing azimuthal component
        for th in [0.4, math.pi / 2.0, 2.6]:
            got = ls.ls_liouville(self.S, np.array([th, 1.2]))
            assert abs(got[0] + math.sin(th)) < 1e-11
            assert abs(got[1]) < 1e-11

    def test_liouville_fixed_point_at_south_pole(self):
        got = ls.ls_liouville(self.S, np.array([math.pi, 0.0]))
        assert np.allclose(got, 0.0, atol=1e-12)

    def test_cartesian_generator_tangency(self):
        # generator through the rational embedding; tangent to the sphere
        embed = ls.sphere_plane_map()
        rng = np.random.default_rng(11)
        for w in rng.uniform(-2.0, 2.0, size=(20, 2)):
            vals, jac = geo.jacobian_at(embed, w, 3)
            delta = jac @ w
            want = np.array(
                [-vals[0] * vals[2], -vals[1] * vals[2], 1.0 - vals[2] ** 2]
            )
            assert np.max(np.abs(delta - want)) < 1e-11
            # L_Delta (|x|^2) = 2 x . Delta = 0
            assert abs(2.0 * np.dot(vals, delta)) < 1e-12

    def test_flow_halfangle_oracle(self):
        th, ph = 2.2, 0.9
        for t in [-1.0, 0.3, 2.0]:
            out = ls.ls_flow(self.S, np.array([th, ph]), t)
            want = math.tan(th / 2.0) * math.exp(-t)
            assert abs(math.tan(out[0] / 2.0) - want) < 1e-10
            assert abs((out[1] - ph + math.pi) % (2.0 * math.pi) - math.pi) < 1e-12

    def test_sphere_point_type(self):
        p = ls.SpherePoint(1.0, 7.0)
        assert 0.0 <= p.phi_angle < 2.0 * math.pi
        with pytest.raises(DomainError):
            ls.SpherePoint(0.0, 0.0)
        with pytest.raises(DomainError):
            ls.SpherePoint(3.5, 0.0)


@pytest.mark.parametrize("structure", ALL_STRUCTURES, ids=[s.name for s in ALL_STRUCTURES])
def test_liouville_against_flow_and_pushforward(structure):
    rng = np.random.default_rng(12)
    pts = structure.sample(20, rng)
    delta0 = geo.VectorField(structure.dim, lambda w: np.asarray(w, dtype=float))
    pushed = geo.pushforward(structure.phi, delta0)
    h = 1e-4
    for i in range(pts.shape[1]):
        u = pts[:, i]
        if structure.phi.singular is not None and np.any(structure.phi.singular(u)):
            continue
        got = ls.ls_liouville(structure, u)
        flow_fd = (ls.ls_flow(structure, u, h) - ls.ls_flow(structure, u, -h)) / (2.0 * h)
        scale = max(1.0, float(np.max(np.abs(got))))
        assert np.max(np.abs(got - flow_fd)) < 1e-6 * scale
        assert np.max(np.abs(got - pushed(u))) < 1e-9 * scale


@pytest.mark.parametrize(
    "structure",
    [ALL_STRUCTURES[2], ALL_STRUCTURES[6], ALL_STRUCTURES[9]],
    ids=["ho_K(0.1)", "tanh(1)", "sphere"],
)
def test_flow_group_law(structure):
    rng = np.random.default_rng(13)
    pts = structure.sample(10, rng)
    for i in range(pts.shape[1]):
        u = pts[:, i]
        for t, tp in [(0.3, -0.8), (1.0, 1.0), (-0.5, -0.5)]:
            lhs = ls.ls_flow(structure, ls.ls_flow(structure, u, tp), t)
            rhs = ls.ls_flow(structure, u, t + tp)
            assert structure.dist(lhs, rhs) < 1e-8


def test_catalog_unknown_name():
    with pytest.raises(ValueError):
        ls.catalog_make("moebius")
