"""Compare the compiled spectrum kernels against the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--points 200000] [--repeats 3]

Problem sizes mirror the desk preset (virtual dimension 16 over a 64-element
IRS) and the full-scale preset (dimension 16 over 256 elements). Reported
times are the best of the repeats; the agreement column is the worst relative
difference between the two backends on the same inputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from irsloc import _kernels_py

try:
    from irsloc import _kernels
except ImportError:
    _kernels = None


def _case(rng, n_pts, dim, m_elem, n_noise):
    p = rng.standard_normal((dim, m_elem)) + 1j * rng.standard_normal((dim, m_elem))
    u = rng.standard_normal((dim, n_noise)) + 1j * rng.standard_normal((dim, n_noise))
    d = rng.uniform(0.5, 40.0, n_pts)
    d[rng.random(n_pts) < 0.3] = np.inf
    theta = rng.uniform(0.01, np.pi / 2, n_pts)
    return p, u, d, theta


def _best(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not built; run: python3 setup.py build_ext --inplace")
        return 1

    rng = np.random.default_rng(0)
    cases = [
        ("desk  (M_I=64,  D=16)", _case(rng, args.points, 16, 64, 12)),
        ("full  (M_I=256, D=16)", _case(rng, args.points, 16, 256, 12)),
        ("small (M_I=32,  D=4)", _case(rng, args.points, 4, 32, 3)),
    ]

    print(f"music_scan over {args.points} grid points, best of {args.repeats}:")
    print(f"{'case':42s} {'cython':>10s} {'numpy':>10s} {'speedup':>8s} {'agreement':>10s}")
    for label, (p, u, d, theta) in cases:
        t_c, out_c = _best(lambda: _kernels.music_scan(p, u, 0.1, 0.05, d, theta), args.repeats)
        t_py, out_py = _best(lambda: _kernels_py.music_scan(p, u, 0.1, 0.05, d, theta), args.repeats)
        rel = float(np.max(np.abs(out_c - out_py) / np.abs(out_py)))
        print(f"{label:42s} {t_c * 1e3:8.1f}ms {t_py * 1e3:8.1f}ms {t_py / t_c:7.1f}x {rel:10.1e}")

    m_elem = 64
    _, _, d, theta = cases[0][1]
    t_c, a_c = _best(lambda: _kernels.steering_batch(0.1, 0.05, m_elem, d, theta), args.repeats)
    t_py, a_py = _best(lambda: _kernels_py.steering_batch(0.1, 0.05, m_elem, d, theta), args.repeats)
    rel = float(np.max(np.abs(a_c - a_py)))
    print(f"\nsteering_batch (M_I={m_elem}):")
    print(f"{'':42s} {t_c * 1e3:8.1f}ms {t_py * 1e3:8.1f}ms {t_py / t_c:7.1f}x {rel:10.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
