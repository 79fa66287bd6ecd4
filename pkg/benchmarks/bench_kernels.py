"""Benchmark the hot kernels: numba-compiled versus the pure-numpy path.

Usage:
    python benchmarks/bench_kernels.py

The same source runs both ways (the compiled functions keep their
interpreted twin as ``.py_func``), so this measures the JIT speedup alone.
Run with QDK_PURE_NUMPY=1 to confirm the fallback path stands on its own.
"""

import time

import numpy as np

from chansim import kernels
from chansim._accel import NUMBA_ENABLED, python_impl


def _bench(label, compiled, interpreted, args, repeats):
    compiled(*args)  # warm the JIT cache
    t0 = time.perf_counter()
    for _ in range(repeats):
        compiled(*args)
    t_fast = (time.perf_counter() - t0) / repeats
    interp_repeats = max(1, repeats // 20)
    t0 = time.perf_counter()
    for _ in range(interp_repeats):
        interpreted(*args)
    t_slow = (time.perf_counter() - t0) / interp_repeats
    ratio = t_slow / t_fast if t_fast > 0 else float("inf")
    print(f"{label:<28} numba {t_fast * 1e3:9.3f} ms   numpy {t_slow * 1e3:9.3f} ms   x{ratio:6.1f}")


def main():
    if not NUMBA_ENABLED:
        print("numba path disabled (QDK_PURE_NUMPY set or numba missing);")
        print("timing the interpreted kernels only.\n")
    rng = np.random.default_rng(0)

    cases = []
    for d in (4, 8, 16):
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m = m + m.conj().T
        cases.append((f"jacobi_eigh d={d}", kernels.jacobi_eigh, (m,), 400))

    ks = np.stack([rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)) for _ in range(4)])
    s = sum(k.conj().T @ k for k in ks)
    w, v = np.linalg.eigh(s)
    fix = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    ks = np.ascontiguousarray(np.einsum("kab,bc->kac", ks, fix))
    rho = np.eye(8, dtype=complex) / 8
    cases.append(("apply_kraus d=8 r=4", kernels.apply_kraus, (ks, rho), 2000))

    ks2 = ks[:, :2, :2].copy()
    s2 = sum(k.conj().T @ k for k in ks2)
    w2, v2 = np.linalg.eigh(s2)
    ks2 = np.ascontiguousarray(np.einsum("kab,bc->kac", ks2, (v2 * (1 / np.sqrt(w2))) @ v2.conj().T))
    vmat = np.stack([(k @ np.eye(2) / np.sqrt(2)).reshape(4) for k in ks2])
    rho2 = np.eye(2, dtype=complex) / 2
    cases.append(
        ("fw_trace_norm_min qubit", kernels.fw_trace_norm_min, (ks2, vmat, rho2, 300, 1e-8), 20)
    )

    p = np.ascontiguousarray(np.einsum("aij,bik->abjk", ks2.conj(), ks2))
    c0 = np.eye(2, dtype=complex)
    cases.append(("wcf_descent qubit", kernels.wcf_descent, (p, c0, 2000, 1e-9), 50))

    print(f"{'kernel':<28} {'compiled':>18} {'interpreted':>16} {'speedup':>8}")
    for label, func, args, repeats in cases:
        _bench(label, func, python_impl(func), args, repeats)


if __name__ == "__main__":
    main()
