"""SURE and true squared error per threshold for each model of the zoo.

Writes one row per (model, lambda) at the model's selected rank, suitable for
overlay plots of risk estimate against realized error.

    python scripts/sure_vs_mse.py --out curves.csv
"""

import argparse
import logging
import os

from hysure.core import write_csv
from hysure.sim import SceneConfig, simulate_scene
from hysure.sure import SureConfig, model_select


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", default="64x64x224")
    ap.add_argument("--rank", type=int, default=10)
    ap.add_argument("--snr", type=float, default=15.0)
    ap.add_argument("--eta", type=float, default=1 / 18)
    ap.add_argument("--eta-mode", default="inverse", choices=("literal", "inverse"))
    ap.add_argument("--mode", default="spatial")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="curves.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    h, w, b = (int(v) for v in args.size.split("x"))
    sc = simulate_scene(SceneConfig(h, w, b, args.rank, args.mode, args.eta, args.snr,
                                    args.seed, args.eta_mode))
    rep = model_select(sc.noisy, truth=sc.clean, config=SureConfig(workers=os.cpu_count()))
    rows = []
    for m, s in sorted(rep.surfaces.items()):
        i = s.row(rep.per_model_argmin[m][0])
        rows += [(m, int(s.rank_grid[i]), float(lam), float(s.risk[i, j]), float(s.mse[i, j]))
                 for j, lam in enumerate(s.lambda_grid)]
    write_csv(args.out, ("model", "r", "lambda", "sure", "mse"), rows)
    for m in rep.ordering:
        r, lam = rep.per_model_argmin[m]
        print(f"model {m}: min SURE {rep.per_model[m]:12.1f}  mse {rep.mse[m]:12.1f}  r={r} lam={lam:.2f}")


if __name__ == "__main__":
    main()
