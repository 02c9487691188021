"""Acceptance gate: one verdict line per criterion, echoed in the pytest summary.

Tolerances are pinned below and never loosened to make a run pass.
"""

import os

import numpy as np
import pytest

from conftest import note, report
from hysure.basis import eigenbasis
from hysure.cli import BENCH_RANKS, BENCH_SNRS, run_bench
from hysure.core import NoiseModel
from hysure.estimate import soft_threshold
from hysure.noise import whiten
from hysure.sim import SceneConfig, simulate_scene
from hysure.sure import SureConfig, model_select, risk_surface, select_rank
from hysure.wavelet import (
    SUPPORTED_TAPS,
    WaveletSpec,
    dwt1d_forward,
    dwt1d_inverse,
    dwt2d_forward,
    dwt2d_inverse,
)

# criterion 1
C1_SIZE = (64, 64, 224)
C1_TRIALS = 10
C1_MIN_EXACT = 0.90
C1_MAX_MISS = 1
# criterion 2
C2_SIZE = (32, 32, 64)
C2_RANK, C2_SNR, C2_DRAWS = 5, 15.0, 200
C2_POINTS = ((1, 0.25), (3, 0.5), (5, 1.0), (8, 2.0), (20, 3.0))
C2_SE = 3.0
# criterion 4
C4_LAMBDA_MIN, C4_REL = 3.0, 0.02
# criterion 5
C5_SAMPLES, C5_GRID = 10_000, 100_001
# criterion 6
C6_ROUNDTRIP, C6_PARSEVAL, C6_MATRIX, C6_EIGEN = 1e-10, 1e-9, 1e-10, 1e-9
# criterion 8
C8_LAMBDA = (0.2, 0.8)

WORKERS = os.cpu_count() or 1


@pytest.fixture(scope="module")
def rank_table():
    """Scaled rank-recovery sweep: Dirichlet abundances, eta = 1/18, median over 10 seeds."""
    return run_bench(C1_SIZE, BENCH_RANKS, BENCH_SNRS, C1_TRIALS, 1 / 18, seed=0)


@pytest.fixture(scope="module")
def zoo():
    """Seven-model comparison on a spatially structured scene at SNR 15 dB.

    Abundances are smooth maps and the eta = 1/18 bell is read as 18 bands
    wide; under the literal reading every band but one is noiseless and the
    fixed-basis models 1-3 tie at SURE = n p (reported as INFO below).
    """
    sc = simulate_scene(SceneConfig(64, 64, 224, 10, "spatial", 1 / 18, 15.0, 0, "inverse"))
    return model_select(sc.noisy, config=SureConfig(workers=WORKERS))


def test_c1_rank_table_rank_recovery(rank_table):
    misses = [(c["snr_db"], c["r"], c["median_r_hat"]) for c in rank_table
              if c["median_r_hat"] != c["r"]]
    exact = len(rank_table) - len(misses)
    worst = max((abs(m - r) for _, r, m in misses), default=0)
    ok = exact >= C1_MIN_EXACT * len(rank_table) and worst <= C1_MAX_MISS
    report(1, ok, f"{exact}/{len(rank_table)} cells exact (need >= {C1_MIN_EXACT:.0%}), "
                  f"worst miss {worst} (need <= {C1_MAX_MISS}); misses {misses}")
    assert ok


def test_c2_sure_unbiased():
    h, w, p = C2_SIZE
    sc = simulate_scene(SceneConfig(h, w, p, C2_RANK, "dirichlet", 0.0, C2_SNR, 0))
    X = whiten(sc.clean, sc.noise)
    # fixed basis from the clean cube: SURE's derivation treats M_r as known
    basis = eigenbasis(X)
    ranks = sorted({r for r, _ in C2_POINTS})
    lams = sorted({lam for _, lam in C2_POINTS})
    rng = np.random.Generator(np.random.PCG64(2024))
    unit = NoiseModel.unit(p)
    diffs = []
    for _ in range(C2_DRAWS):
        Y = X.with_data(X.data + rng.standard_normal(X.data.shape))
        s = risk_surface(Y, 7, lams, ranks, unit, basis=basis, truth=X)
        diffs.append([s.risk[ranks.index(r), lams.index(lam)] - s.mse[ranks.index(r), lams.index(lam)]
                      for r, lam in C2_POINTS])
    d = np.asarray(diffs)
    bias = d.mean(axis=0)
    se = d.std(axis=0, ddof=1) / np.sqrt(C2_DRAWS)
    z = np.abs(bias) / se
    ok = bool(np.all(z <= C2_SE))
    detail = ", ".join(f"(r={r}, lam={lam}): |bias|/se={zz:.2f}" for (r, lam), zz in zip(C2_POINTS, z))
    report(2, ok, f"{C2_DRAWS} draws, need <= {C2_SE} se; {detail}")
    assert ok


def test_c3_model_ordering(zoo):
    v = zoo.per_model
    checks = {
        "7<6": v[7] < v[6], "5<4": v[5] < v[4], "4<1": v[4] < v[1],
        "1<2": v[1] < v[2], "2<3": v[2] < v[3], "7<5": v[7] < v[5],
    }
    ok = all(checks.values())
    failed = [k for k, good in checks.items() if not good]
    lit = simulate_scene(SceneConfig(64, 64, 224, 10, "spatial", 1 / 18, 15.0, 0, "literal"))
    lit_rep = model_select(lit.noisy, config=SureConfig(workers=WORKERS))
    note(3, "same scene with the literal eta reading: min SURE "
            + ", ".join(f"m{m}={x:.0f}" for m, x in sorted(lit_rep.per_model.items())))
    report(3, ok, f"ordering {zoo.ordering}; min SURE "
                  + ", ".join(f"m{m}={v[m]:.0f}" for m in sorted(v))
                  + (f"; violated {failed}" if failed else ""))
    assert ok


def test_c4_low_full_rank_converge(zoo):
    s7, s5 = zoo.surfaces[7], zoo.surfaces[5]
    big = s7.lambda_grid >= C4_LAMBDA_MIN
    curve7 = s7.risk[s7.argmin_index[0], big]  # model 7 at its selected rank
    curve5 = s5.risk[0, big]
    rel = np.abs(curve7 - curve5) / np.abs(curve5)
    ok = bool(rel.max() < C4_REL)
    report(4, ok, f"max |SURE7 - SURE5| / |SURE5| over lam >= {C4_LAMBDA_MIN} "
                  f"at r={s7.r_hat}: {rel.max():.2e} (need < {C4_REL})")
    assert ok


def test_c5_shrinkage_oracle():
    rng = np.random.Generator(np.random.PCG64(5))
    b = rng.uniform(-10, 10, C5_SAMPLES)
    lam = rng.uniform(0, 5, C5_SAMPLES)
    grid = np.linspace(-12, 12, C5_GRID)
    step = grid[1] - grid[0]
    worst = 0.0
    for lo in range(0, C5_SAMPLES, 200):
        bb, ll = b[lo:lo + 200, None], lam[lo:lo + 200, None]
        obj = 0.5 * (grid - bb) ** 2 + ll * np.abs(grid)
        brute = grid[np.argmin(obj, axis=1)]
        closed = np.array([soft_threshold(x, y) for x, y in zip(bb[:, 0], ll[:, 0])])
        worst = max(worst, np.abs(closed - brute).max())
    ok = worst <= step
    report(5, ok, f"{C5_SAMPLES} samples, max |closed form - brute force| = {worst:.2e} "
                  f"(grid step {step:.2e})")
    assert ok


def test_c6_orthogonality():
    rng = np.random.Generator(np.random.PCG64(6))
    d8 = WaveletSpec(8, 5)
    x1 = rng.standard_normal(256)
    c1 = dwt1d_forward(x1, d8)
    x2 = rng.standard_normal((128, 128))
    c2 = dwt2d_forward(x2, d8)
    roundtrip = max(np.abs(dwt1d_inverse(c1, d8) - x1).max(),
                    np.abs(dwt2d_inverse(c2, d8) - x2).max())
    parseval = max(abs(np.linalg.norm(c1) - np.linalg.norm(x1)) / np.linalg.norm(x1),
                   abs(np.linalg.norm(c2) - np.linalg.norm(x2)) / np.linalg.norm(x2))
    matrix = 0.0
    for taps in SUPPORTED_TAPS:
        M = np.column_stack([dwt1d_forward(e, WaveletSpec(taps, 3)) for e in np.eye(8)])
        matrix = max(matrix, np.abs(M.T @ M - np.eye(8)).max())
    M2 = np.column_stack([dwt2d_forward(e.reshape(8, 8), WaveletSpec(8, 3)).ravel() for e in np.eye(64)])
    matrix = max(matrix, np.abs(M2.T @ M2 - np.eye(64)).max())
    sc = simulate_scene(SceneConfig(32, 32, 224, 10, snr_db=15, seed=6, eta=0.0))
    V = eigenbasis(whiten(sc.noisy, sc.noise)).vectors
    eig = np.abs(V.T @ V - np.eye(224)).max()
    ok = roundtrip < C6_ROUNDTRIP and parseval < C6_PARSEVAL and matrix < C6_MATRIX and eig < C6_EIGEN
    report(6, ok, f"round-trip {roundtrip:.1e} (<{C6_ROUNDTRIP}), Parseval {parseval:.1e} "
                  f"(<{C6_PARSEVAL}), M^T M - I {matrix:.1e} (<{C6_MATRIX}), "
                  f"eigenbasis {eig:.1e} (<{C6_EIGEN})")
    assert ok


def test_c7_structural_identities(zoo):
    sc = simulate_scene(SceneConfig(40, 36, 48, 6, "dirichlet", 0.0, 15.0, 7))
    surfaces = list(zoo.surfaces.values())
    surfaces.append(risk_surface(sc.noisy, 7))             # padded spatial grid
    surfaces.append(risk_surface(sc.noisy, 1, workers=WORKERS))  # padded spatial + spectral
    bad = []
    for s in surfaces:
        if not np.array_equal(s.risk + float(s.n) * float(s.p), s.residual + 2.0 * s.ed):
            bad.append((s.model_id, "decomposition"))
        if np.any(np.diff(s.ed, axis=1) > 0):
            bad.append((s.model_id, "ed vs lambda"))
        if np.any(np.diff(s.ed, axis=0) < 0):
            bad.append((s.model_id, "ed vs r"))
    cells = sum(s.risk.size for s in surfaces)
    ok = not bad
    report(7, ok, f"{len(surfaces)} surfaces, {cells} cells: risk + np == residual + 2 ed exactly, "
                  f"ed monotone in lambda and r" + (f"; violations {bad}" if bad else ""))
    assert ok


def test_c8_documented_exclusions_and_lambda(rank_table):
    report("8a", True, "excluded from automation: Indian Pines r=21 and Cuprite r=29 need "
                       "unbundled AVIRIS cubes (run `hysure rank <cube.hsr>` on user data); "
                       "the exact (r=8, lam=0.44) needs the unshipped library endmembers")
    cell = next(c for c in rank_table if c["snr_db"] == 15 and c["r"] == 10)
    lam = float(np.median(cell["lambda_hats"]))
    ok = C8_LAMBDA[0] <= lam <= C8_LAMBDA[1]
    report("8b", ok, f"median lam_hat on the r=10, SNR 15 dB analog = {lam:.3f} "
                     f"(need in {list(C8_LAMBDA)}); per-seed {cell['lambda_hats']}")
    for label, eta, mode in (("eta=1/18 read as 18-band bell", 1 / 18, "inverse"),
                             ("white noise (eta=0)", 0.0, "literal")):
        hats = [select_rank(simulate_scene(SceneConfig(64, 64, 224, 10, "dirichlet", eta, 15.0,
                                                       seed, mode)).noisy) for seed in range(10)]
        note("8b", f"{label}: median lam_hat {np.median([h.lambda_hat for h in hats]):.3f}, "
                   f"median r_hat {np.median([h.r_hat for h in hats]):g}")
    assert ok
