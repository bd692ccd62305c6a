"""Compare trial throughput of the compiled and pure-NumPy kernels.

Runs the same outage-probability estimate on both backends (each in a
fresh interpreter, since the backend is fixed at import time) and
reports trials per second plus the agreement of the estimates.

Usage::

    python3 benchmarks/backend_throughput.py [--trials 200000] [--n 30]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import ris_sop._backend as backend
from ris_sop.channel import SystemConfig, db_to_linear
from ris_sop.montecarlo import McConfig, estimate_sop

params = json.loads(sys.argv[1])
cfg = SystemConfig(
    n_elements=params["n"],
    quant_bits=2,
    gamma_srd_bar=db_to_linear(-6.0),
    gamma_sre_bar=1.0,
    gamma_se_bar=db_to_linear(-5.0),
    c_th=0.05,
)
mc = McConfig(trials=params["trials"], master_seed=2024)
estimate_sop(cfg, McConfig(trials=4096, master_seed=2024))  # warm-up
start = time.perf_counter()
result = estimate_sop(cfg, mc)
elapsed = time.perf_counter() - start
print(json.dumps({
    "backend": backend.backend_name(),
    "elapsed_seconds": elapsed,
    "trials_per_second": params["trials"] / elapsed,
    "sop_hat": result.sop_hat,
    "outage_count": result.outage_count,
}))
"""


def run_backend(name: str, trials: int, n: int) -> dict:
    env = dict(os.environ, RIS_SOP_BACKEND=name)
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER, json.dumps({"trials": trials, "n": n})],
        capture_output=True,
        text=True,
        env=env,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"{name} backend failed:\n{proc.stderr}")
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--n", type=int, default=30, help="surface elements")
    args = parser.parse_args(argv)

    results = {}
    for name in ("compiled", "numpy"):
        try:
            results[name] = run_backend(name, args.trials, args.n)
        except RuntimeError as exc:
            print(f"{name}: unavailable ({exc})", file=sys.stderr)

    for name, res in results.items():
        print(
            f"{name:>8}: {res['trials_per_second']:>12,.0f} trials/s "
            f"({res['elapsed_seconds']:.2f}s for {args.trials:,} trials, "
            f"sop_hat={res['sop_hat']:.6f}, outages={res['outage_count']})"
        )
    if len(results) == 2:
        speedup = (
            results["compiled"]["trials_per_second"]
            / results["numpy"]["trials_per_second"]
        )
        same = (
            results["compiled"]["outage_count"] == results["numpy"]["outage_count"]
        )
        print(f"speedup: {speedup:.2f}x (identical outage counts: {same})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
