"""End-to-end acceptance checks, one test (or parametrised family) per criterion.

Each check records a PASS/FAIL line; the per-criterion summary is printed at
the end of the pytest run.
"""
import math
import time

import numpy as np
import pytest

from robust_pmp import pmp
from robust_pmp.config import TABLE_PRESETS, preset
from robust_pmp.lie_so2 import exp_so2, group_deviation_cost, log_so2
from robust_pmp.lq_game import lq_trajectory
from robust_pmp.saddle import GridSpec, grid_saddle_check
from robust_pmp.spacecraft import ProblemParams, kinematics_factor, residual, simulate, spacecraft_model

from conftest import record, solved

LQ_PARAMS = ProblemParams(psi=0.0, N=50, s=0.1, Lambda=0.1, lam=1.0, mu=2.0, v0=0.3)


@pytest.fixture(scope="module")
def lq_run():
    t0 = time.perf_counter()
    sol = simulate(LQ_PARAMS, "zero")
    return sol, time.perf_counter() - t0


def test_c01_lq_oracle_equivalence(lq_run):
    sol, runtime = lq_run
    ref = lq_trajectory(LQ_PARAMS)
    delta = max(np.max(np.abs(sol.v - ref.v)), np.max(np.abs(sol.u - ref.u)), np.max(np.abs(sol.d - ref.d)))
    ok = record(1, "LQ oracle", delta <= 1e-8 and runtime < 2.0, f"max delta {delta:.2e}, runtime {runtime:.2f} s")
    assert ok


def test_c02_induction_identity(lq_run):
    sol, _ = lq_run
    eu = np.max(np.abs(sol.u - LQ_PARAMS.s * sol.xi))
    ed = np.max(np.abs(sol.d + LQ_PARAMS.s * sol.xi / LQ_PARAMS.mu ** 2))
    assert record(2, "u = s xi, d = -s xi / mu^2", max(eu, ed) <= 1e-12, f"{eu:.1e}, {ed:.1e}")


def test_c03_two_stage_brute_force():
    # exact stationary point of the two-stage quadratic game, from a symbolic solve
    exact_u = np.array([-0.0019996250731106590655, -0.00099977504499114236489])
    exact_d = np.array([0.00049990626827766476637, 0.00024994376124778559122])
    sol = simulate(ProblemParams(N=2, v0=1.0))
    err = max(np.max(np.abs(sol.u - exact_u)), np.max(np.abs(sol.d - exact_d)))
    assert record(3, "N = 2 game", err <= 1e-10, f"max error {err:.1e}")


@pytest.mark.parametrize("name", TABLE_PRESETS)
def test_c04_preset(name):
    sol, runtime = solved(name)
    checks = {
        "residual": sol.residual_inf <= 1e-9,
        "variational": sol.variational_ok and len(sol.variational) == 50,
        "Huu > 0": sol.saddle.min_eig_Huu > 0,
        "Hdd < 0": sol.saddle.max_eig_Hdd < 0,
        "certified": sol.saddle.is_saddle_certified,
        "runtime": runtime < 10.0,
    }
    detail = (f"residual {sol.residual_inf:.1e}, min eig Huu {sol.saddle.min_eig_Huu:.4f}, "
              f"max eig Hdd {sol.saddle.max_eig_Hdd:.4f}, {runtime:.2f} s")
    bad = [k for k, v in checks.items() if not v]
    if bad:
        detail += f"; failed {', '.join(bad)}"
    assert record(4, name, not bad, detail)


def _distance_from_zero(theta):
    return np.abs(np.mod(np.asarray(theta) + math.pi, 2 * math.pi) - math.pi)


def test_c04_distinct_saddles():
    a, b = solved("S17")[0], solved("UW4")[0]
    gap = float(np.max(np.abs(a.theta - b.theta)))
    assert record(4, "S17 vs UW4 distinct", gap > 0.1, f"max |theta_S17 - theta_UW4| = {gap:.2e}")


def test_c04_unwinding():
    dist = _distance_from_zero(solved("UW4")[0].theta)
    peak = int(np.argmax(dist))
    ok = dist[peak] > dist[0] and dist[-1] < dist[peak] and 0 < peak < len(dist) - 1
    assert record(4, "UW4 unwinding", ok,
                  f"distance {dist[0]:.3f} -> peak {dist[peak]:.3f} at k={peak} -> {dist[-1]:.3f}")


@pytest.mark.parametrize("name", TABLE_PRESETS)
def test_c05_covector_negation(name):
    c = solved(name)[0].consistency
    worst = max(c.zeta_negation, c.xi_negation)
    assert record(5, name, worst <= 1e-12 and c.deviation_from_amalgamated <= 1e-12,
                  f"negation {worst:.1e}, vs amalgamated {c.deviation_from_amalgamated:.1e}")


@pytest.mark.parametrize("name", TABLE_PRESETS)
def test_c06_zero_multiplier(name):
    sol = solved(name)[0]
    zeta, xi = pmp.adjoint_sweep(spacecraft_model(preset(name).params), sol.to_trajectory(), cost_weight=0.0)
    exact = bool(np.all(zeta == 0.0) and np.all(xi == 0.0))
    assert record(6, name, exact and sol.consistency.abnormal_zero_exact, "all covectors exactly 0" if exact
                  else f"max |zeta|, |xi| = {np.max(np.abs(zeta)):.1e}, {np.max(np.abs(xi)):.1e}")


@pytest.mark.parametrize("name", TABLE_PRESETS)
@pytest.mark.parametrize("r", [0.5, 2.0, 10.0])
def test_c07_scaling(name, r):
    sol = solved(name)[0]
    rep = pmp.scaling_invariance_check(spacecraft_model(preset(name).params), sol.to_trajectory(), r)
    worst = max(rep.scaled.values())
    assert record(7, f"{name} r={r}", rep.passed, f"largest scaled residual {worst:.1e}")


def test_c08_gradient_fidelity():
    rng = np.random.default_rng(20261017)
    worst = 0.0
    for _ in range(100):
        p = ProblemParams(psi=rng.uniform(0, 1), Lambda=rng.uniform(0, 1), lam=rng.uniform(0.5, 2),
                          mu=rng.uniform(0.5, 3))
        theta, v = rng.uniform(-math.pi, math.pi), rng.uniform(-9, 9)
        u, d, zeta, xi = rng.normal(size=4) * 2
        m = spacecraft_model(p)
        t = pmp.StageTuple(1, pmp.CovectorPair(zeta, xi), exp_so2(theta), v, u, d)
        a = pmp.hamiltonian_gradient(m, t)

        def H(th=theta, vv=v, uu=u, dd=d):
            return pmp.hamiltonian(m, pmp.StageTuple(1, pmp.CovectorPair(zeta, xi), exp_so2(th), vv, uu, dd))

        numeric = {}
        for name, x in (("g", theta), ("v", v), ("u", u), ("d", d)):
            h = 1e-6 * (1 + abs(x))
            key = {"g": "th", "v": "vv", "u": "uu", "d": "dd"}[name]
            numeric[name] = (H(**{key: x + h}) - H(**{key: x - h})) / (2 * h)
        for name, n in numeric.items():
            exact = getattr(a, name)
            worst = max(worst, abs(exact - n) / max(1.0, abs(exact)))
    assert record(8, "analytic vs central differences", worst <= 1e-6, f"max relative error {worst:.1e}")


def test_c09_geometry_grids():
    xs = np.linspace(-math.pi, math.pi, 1000, endpoint=False)
    e1 = max(abs(log_so2(exp_so2(x)) - x) for x in xs)
    ts = np.linspace(0, 2 * math.pi, 1000, endpoint=False)
    e2 = max(abs(group_deviation_cost(exp_so2(t)) - 4 * math.sin(t / 2) ** 2) for t in ts)
    vs = np.linspace(-9.99, 9.99, 1000)
    e3 = max(np.max(np.abs(kinematics_factor(v, 0.1).m - exp_so2(math.asin(0.1 * v)).m)) for v in vs)
    assert record(9, "log/exp, deviation cost, kinematics", max(e1, e2, e3) <= 1e-12,
                  f"{e1:.1e}, {e2:.1e}, {e3:.1e}")


TOYS = [
    ("u^2 - d^2", lambda u, d: u * u - d * d, (0.0, 0.0), True),
    ("u^2 + d^2", lambda u, d: u * u + d * d, (0.0, 0.0), False),
    ("shifted", lambda u, d: (u - 0.5) ** 2 - (d + 0.5) ** 2, (0.5, -0.5), True),
]


@pytest.mark.parametrize("label,F,candidate,expected", TOYS, ids=[t[0] for t in TOYS])
def test_c10_set_characterisations(label, F, candidate, expected):
    r = grid_saddle_check(F, GridSpec((-1.0, 1.0), 21, (-1.0, 1.0), 21), candidate)
    verdicts = (r.definition, r.union_characterization, r.separate_characterization)
    assert record(10, label, r.agree and r.definition == expected, f"verdicts {verdicts}")


def test_c11_equilibrium():
    p = ProblemParams(theta0=0.0, v0=0.0)
    res = residual(p, np.zeros(p.N))
    sol = simulate(p)
    zero = bool(np.all(sol.v == 0) and np.all(sol.theta == 0) and np.all(sol.u == 0) and np.all(sol.d == 0))
    assert record(11, "zero equilibrium", zero and np.all(res == 0.0),
                  f"max |residual| = {np.max(np.abs(res)):.1e}, trajectory zero: {zero}")
