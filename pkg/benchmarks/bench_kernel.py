"""Compare the compiled and pure-Python theta kernels.

Times ``theta_moments`` on a fixed set of (q, x, precision) cases, checks
that both backends return identical integers, and optionally times one
end-to-end spectral solve per backend in a subprocess.

    python benchmarks/bench_kernel.py [--repeat N] [--end-to-end]
"""

import argparse
import os
import subprocess
import sys
import time

from mpmath.libmp import MPZ

from partheta import kernel

CASES = [
    # (q, x, bits)
    ("0.3", "-7.5", 220),
    ("0.5", "-1", 220),
    ("0.9", "-40", 400),
    ("0.99", "-20", 2000),
    ("0.999", "-23", 8000),
]


def fixed(value: str, prec: int) -> int:
    from fractions import Fraction

    return int(Fraction(value) * (1 << prec))


def bench_case(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_kernel(repeat: int) -> bool:
    if "compiled" not in kernel.BACKENDS:
        print("compiled kernel not built; only the Python backend is available")
    print(f"{'q':>7} {'x':>6} {'bits':>6} {'terms':>6} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    same = True
    for q, x, bits in CASES:
        prec = bits + 64
        args = (MPZ(fixed(q, prec)), MPZ(fixed(x, prec)), prec, MPZ(1) << 64, 10**7)
        tp, outp = bench_case(kernel.BACKENDS["python"], args, repeat)
        if "compiled" in kernel.BACKENDS:
            tc, outc = bench_case(kernel.BACKENDS["compiled"], args, repeat)
            same &= tuple(map(int, outp)) == tuple(map(int, outc))
            print(f"{q:>7} {x:>6} {bits:>6} {outp[4]:>6} {tp * 1e3:>10.3f} {tc * 1e3:>12.3f} {tp / tc:>8.2f}")
        else:
            print(f"{q:>7} {x:>6} {bits:>6} {outp[4]:>6} {tp * 1e3:>10.3f} {'-':>12} {'-':>8}")
    print("backends agree bit for bit" if same else "BACKENDS DISAGREE")
    return same


SNIPPET = (
    "import time, partheta\n"
    "from partheta import spectral\n"
    "t0 = time.perf_counter()\n"
    "for j in (5, 20, 60):\n"
    "    spectral.spectral_value(j)\n"
    "print(partheta.BACKEND, round(time.perf_counter() - t0, 3))\n"
)


def run_end_to_end() -> None:
    for pure in ("", "1"):
        env = dict(os.environ, PARTHETA_PURE_PYTHON=pure)
        if not pure:
            env.pop("PARTHETA_PURE_PYTHON")
        out = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
        backend, seconds = out.stdout.split()
        print(f"spectral_value(j = 5, 20, 60) with {backend} kernel: {seconds} s")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    ok = run_kernel(args.repeat)
    if args.end_to_end:
        run_end_to_end()
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
