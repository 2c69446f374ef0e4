"""Step data of |V_eps| along sampled traces, plus mean jump counts per doubling.

Writes one CSV per (n, seed) with columns ``eps,norm`` (two rows per segment so
a line plot draws the steps) and prints empirical vs expected jump counts.
"""

import argparse
import math
from pathlib import Path

from privdiffuse.distributions import make_stream, split
from privdiffuse.process import sample_trace, simulate_batch


def step_rows(trace):
    bounds = list(trace.levels) + [trace.eps_lo]
    for i, v in enumerate(trace.values):
        r = float((v**2).sum() ** 0.5)
        yield bounds[i], r
        yield bounds[i + 1], r


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out/trace_norms")
    ap.add_argument("--eps-lo", type=float, default=1.0)
    ap.add_argument("--eps-hi", type=float, default=2.0)
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 20])
    ap.add_argument("--samples", type=int, default=2, help="traces drawn per dimension")
    ap.add_argument("--trials", type=int, default=100_000, help="traces for the jump-count average")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    root = make_stream(args.seed)
    for n in args.dims:
        for s in range(args.samples):
            t = sample_trace(n, args.eps_lo, args.eps_hi, split(root, 100 * n + s))
            path = out / f"norm_n{n}_s{s}.csv"
            path.write_text("eps,norm\n" + "".join(f"{e!r},{r!r}\n" for e, r in step_rows(t)))
        jumps = simulate_batch(n, args.eps_lo, args.eps_hi, args.trials, split(root, 10_000 + n)).jumps
        target = (n + 1) * math.log(args.eps_hi / args.eps_lo)
        print(f"n={n:3d}  mean jumps {jumps.mean():8.4f}  expected {target:8.4f}")
    print(f"wrote step data to {out}/")


if __name__ == "__main__":
    main()
