"""Compare the shooting solver with the Riccati closed form across a few LQ games."""
import numpy as np

from robust_pmp.lq_game import lq_trajectory
from robust_pmp.spacecraft import ProblemParams, simulate


def main() -> None:
    for mu in (1.5, 2.0, 5.0, float("inf")):
        for v0 in (-0.5, 0.3, 2.0):
            p = ProblemParams(psi=0.0, mu=mu, v0=v0)
            sol, ref = simulate(p), lq_trajectory(p)
            delta = max(np.max(np.abs(sol.v - ref.v)), np.max(np.abs(sol.u - ref.u)),
                        np.max(np.abs(sol.d - ref.d)))
            print(f"mu={mu:<4} v0={v0:<5} max delta {delta:.2e}")


if __name__ == "__main__":
    main()
