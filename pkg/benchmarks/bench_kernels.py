"""Compiled vs pure-numpy kernels on the die-compaction path.

Each backend runs in its own interpreter because the backend is fixed at
import time by GRANUP_NUMBA. Compilation is excluded by a warm-up run.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _inner(repeat):
    import numpy as np

    from granup import _jit
    from granup.integrator import LoadProgram, LoadStep, initial_state, integrate_strain_step, run_path
    from granup.params import MaterialParams

    params = MaterialParams()
    program = LoadProgram((LoadStep(("stress", "strain", "strain"), (-120.0, 0.0, 0.0), 200),))
    state = initial_state(params)
    run_path(state, program, params)  # warm-up / compile

    path_times = []
    for _ in range(repeat):
        t = time.perf_counter()
        rows = run_path(state, program, params)
        path_times.append(time.perf_counter() - t)

    loaded = rows[100].state
    d_eps = np.array([-1e-3, 0, 0, 0, 0, 0.0])
    n_steps = 2000
    t = time.perf_counter()
    for _ in range(n_steps):
        integrate_strain_step(loaded, d_eps, params)
    step_us = (time.perf_counter() - t) / n_steps * 1e6

    print(json.dumps({"numba": _jit.USE_NUMBA, "path_s": min(path_times), "step_us": step_us}))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.inner:
        _inner(args.repeat)
        return

    results = {}
    for flag in ("1", "0"):
        env = dict(os.environ, GRANUP_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, __file__, "--inner", "--repeat", str(args.repeat)],
            env=env,
            check=True,
            capture_output=True,
            text=True,
        )
        results[flag] = json.loads(out.stdout.strip().splitlines()[-1])

    print(f"{'backend':<10}{'200-inc path [s]':>18}{'strain step [us]':>18}")
    for flag, label in (("1", "numba"), ("0", "numpy")):
        r = results[flag]
        name = label if r["numba"] == (flag == "1") else f"{label}*"
        print(f"{name:<10}{r['path_s']:>18.4f}{r['step_us']:>18.1f}")
    speedup = results["0"]["path_s"] / results["1"]["path_s"]
    print(f"path speed-up: {speedup:.1f}x")


if __name__ == "__main__":
    main()
