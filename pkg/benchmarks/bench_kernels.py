"""Compare the sampling backends on the two-stage opening kernel.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]
"""

import argparse
import math
import timeit

import numpy as np

from qbc import _kernels
from qbc.protocol import _cdf, _opening_tables, _rng, consistency_basis
from qbc.states import ProtocolFamily
from qbc.strategies import hk_plan


def tables():
    fam = ProtocolFamily(math.pi / 8)
    fake = hk_plan(fam).fake_states[0]
    basis = consistency_basis(fam)
    first, second = _opening_tables(
        fake.density(), (2, 2), basis.alice_projectors(), basis.bob_tests
    )
    return _cdf(first), _cdf(second)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    first, second = tables()
    u = _rng(0).random((args.trials, 2))
    uses = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    loop_n = min(args.trials, 100_000)
    if _kernels.HAVE_NUMBA:
        _kernels.sample_two_stage(first, second, u[:10], use="numba")  # compile

    ref = _kernels.sample_two_stage(first, second, u, use="numpy")
    print(f"{'backend':8s} {'trials':>9s} {'best s':>9s} {'Mtrials/s':>10s}")
    for use in uses + ["loop"]:
        n = loop_n if use == "loop" else args.trials
        sub = u[:n]
        out = _kernels.sample_two_stage(first, second, sub, use=use)
        assert all(np.array_equal(a, b[:n]) for a, b in zip(out, ref)), use
        best = min(
            timeit.repeat(
                lambda: _kernels.sample_two_stage(first, second, sub, use=use),
                number=1,
                repeat=1 if use == "loop" else args.repeat,
            )
        )
        print(f"{use:8s} {n:9d} {best:9.4f} {n / best / 1e6:10.2f}")


if __name__ == "__main__":
    main()
