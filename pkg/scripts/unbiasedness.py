"""Monte-Carlo check of SURE against realized squared error.

Compares a spectral basis fixed in advance (from the clean cube) with the
basis re-estimated from each noisy draw, which is what rank selection does in
practice. Reports the mean difference in standard errors per grid point.

    python scripts/unbiasedness.py --draws 200
"""

import argparse

import numpy as np

from hysure.basis import eigenbasis
from hysure.core import NoiseModel
from hysure.noise import whiten
from hysure.sim import SceneConfig, simulate_scene
from hysure.sure import risk_surface

POINTS = ((1, 0.25), (3, 0.5), (5, 1.0), (8, 2.0), (20, 3.0))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    sc = simulate_scene(SceneConfig(32, 32, 64, 5, "dirichlet", 0.0, 15.0, 0))
    X = whiten(sc.clean, sc.noise)
    fixed = eigenbasis(X)
    ranks = sorted({r for r, _ in POINTS})
    lams = sorted({lam for _, lam in POINTS})
    rng = np.random.Generator(np.random.PCG64(args.seed))
    unit = NoiseModel.unit(X.bands)
    d = {"fixed": [], "estimated": []}
    for _ in range(args.draws):
        Y = X.with_data(X.data + rng.standard_normal(X.data.shape))
        for name, basis in (("fixed", fixed), ("estimated", None)):
            s = risk_surface(Y, 7, lams, ranks, unit, basis=basis, truth=X)
            d[name].append([s.risk[ranks.index(r), lams.index(l)] - s.mse[ranks.index(r), lams.index(l)]
                            for r, l in POINTS])
    for name, rows in d.items():
        a = np.asarray(rows)
        z = a.mean(0) / (a.std(0, ddof=1) / np.sqrt(len(a)))
        print(f"{name:9s} " + "  ".join(f"(r={r},lam={l}) bias={m:9.1f} z={zz:6.2f}"
                                        for (r, l), m, zz in zip(POINTS, a.mean(0), z)))


if __name__ == "__main__":
    main()
