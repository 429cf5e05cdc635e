"""Wall-clock comparison of the numba kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_backends.py [--repeat N] [--quick]``.
Each case is warmed up once per backend (so JIT compile time is excluded),
then timed ``--repeat`` times; the best time is reported.  Both backends
must return identical results, which is asserted before printing.
"""

import argparse
import time

import numpy as np

from qcpag import (
    BaseMatrix,
    Origin,
    build_cyclic_base,
    build_prime_base,
    count_cycles,
    decode_batch,
    disperse,
    gf2_rank,
    girth,
    select_submatrix,
    use_backend,
)

EX4_ROWS = [1, 118, 56, 79]
EX4_COLS = [2, 83, 33, 46, 36, 94, 42, 86]
EX4_MASK = np.array(
    [
        [1, 0, 1, 0, 1, 1, 1, 1],
        [0, 1, 0, 1, 1, 1, 1, 1],
        [1, 1, 1, 1, 1, 0, 1, 0],
        [1, 1, 1, 1, 0, 1, 0, 1],
    ]
)


def example4():
    grid = np.outer(EX4_ROWS, EX4_COLS) % 127
    return disperse(BaseMatrix(np.where(EX4_MASK == 1, grid, -1), 127, Origin.MASKED))


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(quick):
    H4 = example4()
    t = 31 if quick else 127
    Hc = disperse(select_submatrix(build_cyclic_base(t + 1, t), range(1, 7), range(t)))
    H7 = disperse(build_prime_base(7))
    rng = np.random.default_rng(1)
    frames = 64 if quick else 256
    llr = 2.0 / 0.5 * (1.0 + rng.normal(0.0, np.sqrt(0.5), size=(frames, H4.shape[1])))
    return [
        ("gf2_rank H_c(6,t)", lambda: gf2_rank(Hc)),
        ("girth ex4", lambda: girth(H4)),
        ("dfs 6-cycles PaG(7,7,6)", lambda: count_cycles(H7, 6, method="dfs")),
        ("dfs 8-cycles ex4", lambda: count_cycles(H4, 8, method="dfs")),
        ("nbt 8-cycles ex4", lambda: count_cycles(H4, 8, method="nbt")),
        (f"msa {frames} frames", lambda: decode_batch(H4, llr, 50, "msa")),
        (f"spa {frames} frames", lambda: decode_batch(H4, llr, 50, "spa")),
    ]


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()

    print(f"{'case':28s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, fn in cases(args.quick):
        results = {}
        for backend in ("numba", "numpy"):
            with use_backend(backend):
                fn()  # warm-up / JIT
                results[backend] = best_of(fn, args.repeat)
        (t_nb, r_nb), (t_np, r_np) = results["numba"], results["numpy"]
        assert same(r_nb, r_np), f"{name}: backends disagree"
        print(f"{name:28s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
