"""Backend benchmark: jitted kernels against the pure-numpy fallback.

The kernel backend is fixed at import time by SLIDENAV_BACKEND, so each
timing runs in a fresh subprocess with the flag set. The jit lane warms up
first so compilation is not billed to the kernel. Usage:

    python -m slidenav.bench [--repeat N] [--horizon T]

Workloads:

    sim    full hybrid simulation of the shipped static-disc engagement
           (one nearest-point solve per step, scalar-heavy)
    scan   feasibility field scan + turn-demand sweep of the shipped
           drifting disc, launch probes off (batched, vector-heavy)
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time

BACKENDS = ("numba", "numpy")
WORKLOADS = ("sim", "scan")


def _scenarios():
    from .controller import ControllerParams
    from .obstacle import (Circle, ObstacleModel, Rotate, Scale, TimeProfile,
                           Translate)
    from .robot import RobotParams, RobotState
    from .scenario import Scenario

    robot = RobotParams(0.5, 0.1, 5.0)
    start = RobotState(-3.0, -2.2, math.atan2(3.0, 6.0))
    ctrl = ControllerParams(gamma=1.0, delta=0.021066491838214706, d0=0.3,
                            d_safe=0.1, d_av=0.45, d_minus=0.2, d_plus=0.4,
                            v0=0.2, v_cr=0.4, d0_y=0.45, d_cr=0.8,
                            theta_tol=0.01)
    static = Scenario(robot, ctrl, ObstacleModel(Circle(0.0, 0.0, 1.0)),
                      start, (3.0, 0.8), 60.0, 1e-3)
    wobble = TimeProfile(1.0, 0.0, 0.05, 0.2, 0.0)
    moving = static._replace(obstacle=ObstacleModel(Circle(0.0, 0.0, 1.0), [
        Scale(wobble, wobble),
        Rotate(TimeProfile(slope=0.02)),
        Translate(TimeProfile(slope=0.005), TimeProfile()),
    ]))
    return static, moving


def _run_workload(name: str, horizon: float) -> dict:
    from . import feasibility, kernels, sim

    static, moving = _scenarios()
    if name == "sim":
        sc = static._replace(horizon=horizon)
        sim.run(sc._replace(horizon=5 * sc.dt))  # warmup: jit compile
        t0 = time.perf_counter()
        res = sim.run(sc)
        elapsed = time.perf_counter() - t0
        work = f"{res.steps} steps"
    else:
        sc = moving._replace(horizon=horizon)
        feasibility.run_feasibility(sc._replace(horizon=1.0),
                                    include_default_launches=False)
        t0 = time.perf_counter()
        report = feasibility.run_feasibility(sc, include_default_launches=False)
        elapsed = time.perf_counter() - t0
        work = f"z_star {report.budget.z_star:.4g}"
    return {"backend": kernels.BACKEND, "workload": name,
            "seconds": elapsed, "work": work}


def _time_in_subprocess(backend: str, workload: str, horizon: float,
                        repeat: int) -> dict:
    env = dict(os.environ, SLIDENAV_BACKEND=backend)
    best = None
    for _ in range(repeat):
        proc = subprocess.run(
            [sys.executable, "-m", "slidenav.bench", "--worker", workload,
             "--horizon", repr(horizon)],
            env=env, capture_output=True, text=True, check=True)
        out = json.loads(proc.stdout)
        if out["backend"] != backend:
            out["note"] = f"requested {backend}, got {out['backend']}"
        if best is None or out["seconds"] < best["seconds"]:
            best = out
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="slidenav.bench",
        description="time the jitted kernels against the numpy fallback")
    ap.add_argument("--repeat", type=int, default=3,
                    help="runs per cell, best-of (default 3)")
    ap.add_argument("--horizon", type=float, default=30.0,
                    help="simulated seconds per workload (default 30)")
    ap.add_argument("--worker", choices=WORKLOADS, default=None,
                    help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.worker:
        print(json.dumps(_run_workload(args.worker, args.horizon)))
        return 0

    print(f"{'workload':10s} {'backend':8s} {'best s':>10s}   work")
    times = {}
    for workload in WORKLOADS:
        for backend in BACKENDS:
            cell = _time_in_subprocess(backend, workload, args.horizon,
                                       args.repeat)
            times[workload, backend] = cell["seconds"]
            note = f"  [{cell['note']}]" if "note" in cell else ""
            print(f"{workload:10s} {cell['backend']:8s} "
                  f"{cell['seconds']:10.3f}   {cell['work']}{note}")
        ratio = times[workload, "numpy"] / times[workload, "numba"]
        print(f"{'':10s} numpy/numba time ratio: {ratio:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
