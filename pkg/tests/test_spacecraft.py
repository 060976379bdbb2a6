import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robust_pmp import pmp
from robust_pmp.config import preset
from robust_pmp.errors import DomainViolation
from robust_pmp.lie_so2 import exp_so2
from robust_pmp.lq_game import lq_trajectory
from robust_pmp.nlsolve import SolverConfig
from robust_pmp.spacecraft import (ConvergenceFailure, ProblemParams, closed_form_adjoints, cost_functional,
                                   explicit_xi, kinematics_factor, make_guess, optimal_inputs, residual,
                                   roll_theta, simulate, spacecraft_model)

from conftest import solved

# first bring-up values, cross-checked by the certificates and the LQ oracle
GOLDEN_THETA_N = {
    "S7minus": 0.17624778330572632,
    "S3": 0.4707837234011536,
    "S16": 0.08334352504159992,
    "S17": 0.545873211402093,
    "UW4": 0.545873211402093,
}


def test_kinematics_factor_examples():
    np.testing.assert_array_equal(kinematics_factor(0.0, 0.1).m, np.eye(2))
    np.testing.assert_allclose(kinematics_factor(5.0, 0.1).m,
                               [[math.sqrt(0.75), -0.5], [0.5, math.sqrt(0.75)]], atol=1e-15)
    with pytest.raises(DomainViolation):
        kinematics_factor(10.0, 0.1)


@given(st.floats(-9.99, 9.99))
def test_kinematics_factor_is_exp_of_asin(v):
    np.testing.assert_allclose(kinematics_factor(v, 0.1).m, exp_so2(math.asin(0.1 * v)).m, atol=1e-12)


def test_adjoints_vanish_without_attitude_weight():
    p = ProblemParams(N=4, psi=0.0, Lambda=0.1)
    v = np.array([0.3, 0.2, -0.1, 0.4, 0.05])
    zeta, xi = closed_form_adjoints(p, roll_theta(p, v), v)
    assert np.all(zeta == 0.0)
    np.testing.assert_allclose(xi, [-0.01 * v[k + 1:].sum() for k in range(4)], atol=1e-15)


def test_adjoints_vanish_at_zero_angle():
    p = ProblemParams(N=5, psi=0.9)
    zeta, _ = closed_form_adjoints(p, np.zeros(6), np.zeros(6))
    assert np.all(zeta == 0.0)


def test_single_stage_hand_case():
    p = ProblemParams(N=1, psi=1.0, Lambda=0.0)
    zeta, xi = closed_form_adjoints(p, np.array([0.0, math.pi / 2]), np.array([0.0, 0.0]))
    assert zeta[0] == pytest.approx(-1.0, abs=1e-15) and xi[0] == 0.0


def test_adjoints_domain_violation():
    p = ProblemParams(N=2)
    with pytest.raises(DomainViolation):
        closed_form_adjoints(p, np.zeros(3), np.array([0.0, 10.0, 0.0]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=11, max_size=11), st.floats(0, 1), st.floats(-4, 4))
def test_closed_form_matches_general_recursion(vs, psi, theta0):
    p = ProblemParams(N=10, psi=psi, theta0=theta0, v0=vs[0])
    v = np.array(vs)
    theta = roll_theta(p, v)
    u = np.diff(v) / p.s
    traj = pmp.Trajectory(tuple(exp_so2(t) for t in theta), v, u, np.zeros(10))
    z_general, x_general = pmp.adjoint_sweep(spacecraft_model(p), traj)
    z_closed, x_closed = closed_form_adjoints(p, theta, v)
    assert np.max(np.abs(z_general - z_closed)) <= 1e-12
    assert np.max(np.abs(x_general - x_closed)) <= 1e-12
    assert np.max(np.abs(explicit_xi(p, theta, v) - x_closed)) <= 1e-12


def test_optimal_inputs_examples():
    assert optimal_inputs(0.0, ProblemParams()) == (0.0, 0.0)
    assert optimal_inputs(5.0, ProblemParams(u_c=0.3))[0] == 0.3
    assert optimal_inputs(5.0, ProblemParams())[1] == pytest.approx(-0.125, abs=1e-16)
    assert optimal_inputs(-50.0, ProblemParams(u_c=0.3, d_c=0.1)) == (-0.3, 0.1)


def test_hamiltonian_curvature():
    p = ProblemParams(lam=1.3, mu=2.0, psi=0.4)
    m = spacecraft_model(p)
    h = 1e-3

    def H(u, d):
        return pmp.hamiltonian(m, pmp.StageTuple(2, pmp.CovectorPair(0.3, -0.7), exp_so2(1.1), 0.2, u, d))

    Huu = (H(h, 0) - 2 * H(0, 0) + H(-h, 0)) / h ** 2
    Hdd = (H(0, h) - 2 * H(0, 0) + H(0, -h)) / h ** 2
    assert Huu == pytest.approx(-p.lam ** 2, abs=1e-6)
    assert Hdd == pytest.approx(p.mu ** 2, abs=1e-6)


def test_residual_zero_equilibrium_is_exact():
    assert np.all(residual(ProblemParams(), np.zeros(50)) == 0.0)


def test_residual_vanishes_on_lq_oracle():
    p = ProblemParams(v0=0.3)
    assert np.max(np.abs(residual(p, lq_trajectory(p).v[1:]))) <= 1e-10


def test_residual_domain_violation_reports_stage():
    p = ProblemParams(N=5)
    with pytest.raises(DomainViolation) as err:
        residual(p, np.array([0.0, 0.0, 12.0, 0.0, 0.0]))
    assert err.value.stage == 3


def test_residual_shape_checked():
    with pytest.raises(ValueError):
        residual(ProblemParams(N=5), np.zeros(4))


@pytest.mark.parametrize("bad", [dict(N=0), dict(s=0.0), dict(lam=0.0), dict(mu=-1.0), dict(u_c=0.0),
                                 dict(psi=-0.1)])
def test_params_invariants(bad):
    with pytest.raises(ValueError):
        ProblemParams(**bad)


def test_guess_generators():
    p = ProblemParams(N=4, v0=-0.2)
    np.testing.assert_array_equal(make_guess(p, "zero"), np.zeros(4))
    np.testing.assert_allclose(make_guess(p, "drift"), [-0.15, -0.1, -0.05, 0.0], atol=1e-16)
    with pytest.raises(ValueError):
        make_guess(p, "nope")
    with pytest.raises(ValueError):
        make_guess(p, [0.0])


def test_convergence_failure_carries_report():
    p = ProblemParams(psi=0.3, v0=0.3, theta0=0.3)
    with pytest.raises(ConvergenceFailure) as err:
        simulate(p, solver_cfg=SolverConfig(max_iters=1))
    assert not err.value.report.converged and err.value.report.termination == "max_iters"


def test_trivial_equilibrium_solution():
    sol = simulate(ProblemParams())
    assert sol.iterations == 0 and sol.residual_inf == 0.0
    assert np.all(sol.v == 0) and np.all(sol.theta == 0)


def test_solutions_are_dynamics_consistent(table_solution):
    name, sol = table_solution
    p = preset(name).params
    assert sol.dynamics_defect(p.s) <= 1e-12
    assert np.all(np.abs(p.s * sol.v) < 1)
    assert sol.residual_inf <= 1e-9
    assert sol.variational_ok


@pytest.mark.parametrize("name", sorted(GOLDEN_THETA_N))
def test_golden_final_angle(name):
    assert solved(name)[0].theta[-1] == pytest.approx(GOLDEN_THETA_N[name], abs=1e-10)


def test_cost_functional_matches_stagewise_sum():
    sol = solved("S3")[0]
    p = preset("S3").params
    stage = sum(0.5 * (u * u + p.Lambda ** 2 * v * v - p.mu ** 2 * d * d + p.psi ** 2 * (2 - 2 * math.cos(t)))
                for u, d, v, t in zip(sol.u, sol.d, sol.v[:-1], sol.theta[:-1]))
    terminal = 0.5 * (p.Lambda ** 2 * sol.v[-1] ** 2 + p.psi ** 2 * (2 - 2 * math.cos(sol.theta[-1])))
    assert cost_functional(p, sol.u, sol.d) == pytest.approx(stage + terminal, rel=1e-13)


def test_constrained_run_is_flagged_and_certified():
    p = ProblemParams(psi=0.3, v0=0.3, theta0=0.3, u_c=0.2, d_c=0.05)
    sol = simulate(p)
    assert sol.nonsmooth and sol.variational_ok
    assert np.max(np.abs(sol.u)) <= 0.2 and np.max(np.abs(sol.d)) <= 0.05
    assert np.any(np.abs(sol.u) == 0.2)


def test_unwinding_trace():
    sol = solved("UW4")[0]
    dist = np.abs(np.mod(sol.theta + math.pi, 2 * math.pi) - math.pi)
    peak = int(np.argmax(dist))
    assert 0 < peak < len(dist) - 1
    assert dist[peak] > dist[0] and dist[-1] < dist[peak]


def test_undisturbed_game_certifies_control_block():
    sol = simulate(ProblemParams(mu=math.inf, v0=0.3))
    assert np.all(sol.d == 0.0)
    assert sol.saddle.max_eig_Hdd == -math.inf and sol.certified


def test_cost_rejects_disturbance_when_forbidden():
    p = ProblemParams(N=2, mu=math.inf)
    assert cost_functional(p, [0.1, 0.0], [0.0, 0.0]) > 0
    assert cost_functional(p, [0.0, 0.0], [0.01, 0.0]) == -math.inf
