"""Which root the solver lands on, by initial guess and by method.

Damped Newton sends both guesses of the 4pi/3 problem to the same unwinding
root. A trust-region dogleg (scipy's hybr) separates them, which shows the
second root exists. The last blocks scan the 0.3 rad problem over the initial
angle and the disturbance weight to show where the d-block turns concave.
"""
import math

import numpy as np
from scipy.optimize import root

from robust_pmp.spacecraft import ProblemParams, make_guess, residual, roll_theta, simulate


def dogleg(p: ProblemParams, guess: str):
    out = root(lambda x: residual(p, x), make_guess(p, guess), method="hybr", options={"xtol": 1e-14})
    v = np.concatenate([[p.v0], out.x])
    return out.success, float(np.max(np.abs(out.fun))), roll_theta(p, v)[-1]


def main() -> None:
    p = ProblemParams(psi=0.3, v0=-0.1, theta0=4 * math.pi / 3)
    for guess in ("zero", "drift"):
        sol = simulate(p, guess)
        ok, res, theta_n = dogleg(p, guess)
        print(f"guess={guess:5}  newton theta_N={sol.theta[-1]:.6f} certified={sol.certified}  "
              f"dogleg theta_N={theta_n:.6f} residual={res:.1e} success={ok}")

    for theta0 in (0.0, 0.3, 1.0, 2.0, 3.0):
        sol = simulate(ProblemParams(psi=0.3, v0=0.3, theta0=theta0))
        print(f"theta0={theta0:.1f}  min eig Huu={sol.saddle.min_eig_Huu:+.4f} "
              f"max eig Hdd={sol.saddle.max_eig_Hdd:+.4f} certified={sol.certified}")
    for mu in (2.0, 2.5, 3.0):
        sol = simulate(ProblemParams(psi=0.3, v0=0.3, theta0=0.3, mu=mu))
        print(f"mu={mu:.1f}  max eig Hdd={sol.saddle.max_eig_Hdd:+.4f} certified={sol.certified}")


if __name__ == "__main__":
    main()
