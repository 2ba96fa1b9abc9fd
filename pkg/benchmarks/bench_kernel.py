"""Throughput benchmark: compiled round kernel against the pure-Python twin.

Asserts bit-identical shot records while measuring both implementations,
then times the end-to-end shot (simulation plus decoding).
"""

import time

import numpy as np

from stqec import gates as G
from stqec import memory as M
from stqec.kernel import KERNEL_BACKEND


def bench(family: str, d: int, p: float, n_shots: int = 300):
    noise = G.NoiseConfig.from_common_infidelity(p)
    exp = M.compile_experiment(family, d, noise, p, seed=11)

    for shot in range(50):
        seed = M.shot_seed(77, 0, shot)
        a = M.simulate_rounds_py(exp, seed)
        b = M.simulate_rounds(exp, seed)
        assert np.array_equal(a.anc3, b.anc3)
        assert np.array_equal(a.gad3, b.gad3)
        assert a.rng_state == b.rng_state

    t0 = time.perf_counter()
    for shot in range(n_shots):
        M.simulate_rounds_py(exp, M.shot_seed(77, 0, shot))
    t_py = (time.perf_counter() - t0) / n_shots

    t0 = time.perf_counter()
    for shot in range(n_shots):
        M.simulate_rounds(exp, M.shot_seed(77, 0, shot))
    t_kernel = (time.perf_counter() - t0) / n_shots

    t0 = time.perf_counter()
    for shot in range(n_shots):
        M.run_shot(exp, 77, 0, shot)
    t_full = (time.perf_counter() - t0) / n_shots

    print(f"{family} d={d} p={p}: python {t_py * 1e3:7.3f} ms | "
          f"{KERNEL_BACKEND} {t_kernel * 1e3:7.3f} ms "
          f"({t_py / t_kernel:5.0f}x) | full shot {t_full * 1e3:7.3f} ms")


if __name__ == "__main__":
    print(f"active kernel backend: {KERNEL_BACKEND}")
    for family, d, p in [("css_ld", 5, 0.004), ("css_st", 5, 0.005),
                         ("css_st", 9, 0.005), ("xzzx_st", 7, 0.011)]:
        bench(family, d, p)
