"""Compare the compiled kernels against the pure-Python fallback.

Runs the same workload twice in subprocesses, once with numba enabled and
once with CHAOS_NO_NUMBA=1, reports wall times, and checks the end states
agree.  Usage: python benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, time
from chaoskit import *
from chaoskit import _kernels

steps = __STEPS__
spec = SystemSpec(
    form=FORM_B,
    params=Params(alpha=0.3, beta=1.2, gamma=0.4, delta=0.6, omega=2.0, n=3),
    epsilon=EpsilonSchedule.constant(0.2),
)
ini = State(0.0, 1.0, 0.0)
dt = 1e-3
cfg = IntegratorConfig(method="rk4", dt=dt, t_end=steps * dt, sample_every=steps)

integrate(spec, ini, IntegratorConfig(method="rk4", dt=dt, t_end=10 * dt))  # compile
t0 = time.perf_counter()
traj = integrate(spec, ini, cfg)
t_traj = time.perf_counter() - t0

lycfg = IntegratorConfig(method="rk4", dt=dt, t_end=steps * dt / 10)
lyapunov_variational(spec, ini, IntegratorConfig(method="rk4", dt=dt, t_end=10 * dt))
t0 = time.perf_counter()
est = lyapunov_variational(spec, ini, lycfg)
t_lyap = time.perf_counter() - t0

print(json.dumps({
    "numba": not _kernels.NUMBA_DISABLED,
    "trajectory_s": t_traj,
    "lyapunov_s": t_lyap,
    "x_end": traj.x[-1],
    "lambda": est.lam,
}))
"""


def run(steps, disable_numba):
    env = dict(os.environ)
    env["CHAOS_NO_NUMBA"] = "1" if disable_numba else "0"
    out = subprocess.run(
        [sys.executable, "-c", WORKLOAD.replace("__STEPS__", str(steps))],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=1_000_000, help="rk4 steps in the trajectory workload")
    args = ap.parse_args()

    fast = run(args.steps, disable_numba=False)
    slow = run(args.steps, disable_numba=True)

    print(f"workload: {args.steps} rk4 steps, {args.steps // 10} tangent steps")
    print(f"{'':>12}  {'compiled':>10}  {'fallback':>10}  {'speedup':>8}")
    for key, label in (("trajectory_s", "trajectory"), ("lyapunov_s", "lyapunov")):
        ratio = slow[key] / fast[key]
        print(f"{label:>12}  {fast[key]:>9.3f}s  {slow[key]:>9.3f}s  {ratio:>7.1f}x")

    dx = abs(fast["x_end"] - slow["x_end"])
    dl = abs(fast["lambda"] - slow["lambda"])
    print(f"end-state agreement: |dx| = {dx:.3e}, |dlambda| = {dl:.3e}")
    if dx > 1e-9 or dl > 1e-9:
        print("MISMATCH between compiled and fallback results", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
