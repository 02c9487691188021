"""Full (r, lambda) SURE surface of the HySURE model for contour plotting.

    python scripts/risk_contour.py --out surface.csv
    python scripts/risk_contour.py --cube my_scene.hsr --out surface.csv
"""

import argparse

from hysure.core import read_cube
from hysure.sim import SceneConfig, simulate_scene
from hysure.sure import risk_surface


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cube", help="HSR1 cube; a simulated scene is used when omitted")
    ap.add_argument("--rank", type=int, default=10)
    ap.add_argument("--snr", type=float, default=15.0)
    ap.add_argument("--eta", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rank-max", type=int, default=60)
    ap.add_argument("--out", default="surface.csv")
    args = ap.parse_args()

    if args.cube:
        cube, _ = read_cube(args.cube)
    else:
        cube = simulate_scene(SceneConfig(64, 64, 224, args.rank, "spatial", args.eta,
                                          args.snr, args.seed)).noisy
    s = risk_surface(cube, 7, rank_grid=range(1, min(args.rank_max, cube.n, cube.bands) + 1))
    s.to_csv(args.out)
    lam, r, risk = s.argmin
    print(f"r_hat={r} lambda_hat={lam:.2f} sure_min={risk:.1f} -> {args.out}")


if __name__ == "__main__":
    main()
