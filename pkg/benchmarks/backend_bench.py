"""Compare the compiled integrator kernel against the pure-Python fallback.

Times both backends on the hot call (one control period of RK4 substeps),
verifies they agree bit for bit, and reports the speedup:

    python benchmarks/backend_bench.py [--steps 20000] [--substeps 10]
"""

import argparse
import math
import time

import numpy as np

from qubesim._kernels import available_backends
from qubesim.core import PhysicalParams


def kernel_args(params: PhysicalParams) -> tuple:
    return (
        params.motor_resistance, params.torque_constant, params.back_emf_constant,
        params.arm_inertia, params.arm_length, params.pendulum_mass,
        params.pendulum_length, params.pendulum_inertia_cm,
        params.arm_damping, params.pendulum_damping, params.gravity,
    )


def run(kernel, steps: int, substeps: int, args: tuple) -> tuple[float, tuple]:
    state = (0.0, 3.0, 0.0, 0.0)
    voltage = 0.35
    start = time.perf_counter()
    for _ in range(steps):
        state = kernel.integrate(*state, voltage, 0.004, substeps, *args)
    return time.perf_counter() - start, state


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--substeps", type=int, default=10)
    opts = parser.parse_args()

    backends = available_backends()
    args = kernel_args(PhysicalParams())
    print(f"integrate_step x {opts.steps} (RK4 substeps={opts.substeps})")

    results = {}
    for name, kernel in backends.items():
        elapsed, final = run(kernel, opts.steps, opts.substeps, args)
        results[name] = (elapsed, final)
        print(f"  {name:>7}: {elapsed:8.3f} s  ({opts.steps / elapsed:>12.0f} steps/s)")

    if len(results) == 2:
        pure_t, pure_final = results["pure"]
        cy_t, cy_final = results["cython"]
        agree = pure_final == cy_final
        print(f"  speedup: {pure_t / cy_t:.1f}x  | final states bit-identical: {agree}")
        if not agree:
            diff = max(abs(a - b) for a, b in zip(pure_final, cy_final))
            print(f"  WARNING: backends diverged by {diff:.3e}")
            return 1
    else:
        print("  (compiled backend not built; timed the fallback only)")

    # sanity: a random batch must agree across backends too
    if len(results) == 2:
        rng = np.random.default_rng(0)
        pure, cy = backends["pure"], backends["cython"]
        for _ in range(200):
            s = (
                rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi, math.pi),
                rng.uniform(-15, 15), rng.uniform(-15, 15),
            )
            v = rng.uniform(-3, 3)
            if pure.integrate(*s, v, 0.004, opts.substeps, *args) != cy.integrate(
                *s, v, 0.004, opts.substeps, *args
            ):
                print("  WARNING: backends diverged on a random state")
                return 1
        print("  random-state agreement: 200/200 bit-identical")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
