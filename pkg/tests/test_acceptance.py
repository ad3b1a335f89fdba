"""Acceptance suite: one test per criterion, one printed line per verdict.

Run with ``pytest tests/test_acceptance.py -v -s``.  Criteria needing the
Starfish test image or the external adapter package skip with a notice
when those are absent.
"""

import hashlib
import importlib.util
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from tencomp.cli import cli_main
from tencomp.core import t_product, tnn, tsvd
from tencomp.denoise import DenoiserSpec, external_spec, spawn_external
from tencomp.errors import ExternalDenoiserFailure
from tencomp.metrics import psnr, ssim
from tencomp.prox import svt_tnn
from tencomp.sampling import SamplingSpec, gen_mask
from tencomp.solver import SolverConfig, complete, solve_tnn_only
from tencomp.tenio import read_ten3, write_ten3

from test_core import assert_tsvd_invariants, naive_t_product
from test_metrics import reference_ssim_slice


@contextmanager
def criterion(num, description):
    try:
        yield
    except Exception:
        print(f"criterion {num:2d}: FAIL  {description}")
        raise
    else:
        print(f"criterion {num:2d}: PASS  {description}")


def observe(truth, rate, seed):
    mask = gen_mask(SamplingSpec(kind="elementwise", rate=rate, seed=seed),
                    truth.shape)
    return np.where(mask, truth, 0.0), mask


def test_criterion_01_tsvd_exactness():
    with criterion(1, "t-SVD reconstruction, orthogonality and f-diagonality on 100 tensors"):
        rng = np.random.default_rng(100)
        start = time.perf_counter()
        for _ in range(100):
            n1 = int(rng.integers(1, 33))
            n2 = int(rng.integers(1, 33))
            n3 = int(rng.integers(1, 17))
            x = rng.standard_normal((n1, n2, n3))
            assert_tsvd_invariants(x, tsvd(x), rtol=1e-10)
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"took {elapsed:.2f}s, budget 5s"


def test_criterion_02_t_product_oracle():
    with criterion(2, "Fourier-route t-product matches circular-convolution brute force"):
        rng = np.random.default_rng(101)
        for _ in range(50):
            n1, n2, n4 = (int(rng.integers(1, 5)) for _ in range(3))
            n3 = int(rng.integers(1, 6))
            a = rng.standard_normal((n1, n2, n3))
            b = rng.standard_normal((n2, n4, n3))
            assert np.abs(t_product(a, b) - naive_t_product(a, b)).max() < 1e-12


def test_criterion_03_tnn_consistency():
    with criterion(3, "per-slice TNN equals t-SVD diagonal sum on 50 tensors"):
        rng = np.random.default_rng(102)
        for _ in range(50):
            dims = tuple(int(rng.integers(1, 9)) for _ in range(2)) + (int(rng.integers(1, 7)),)
            x = rng.standard_normal(dims)
            xbar = np.fft.fft(x, axis=2)
            direct = sum(np.linalg.svd(xbar[:, :, k], compute_uv=False).sum()
                         for k in range(dims[2]))
            s = tsvd(x).s
            sbar = np.fft.fft(s, axis=2)
            mn = min(dims[0], dims[1])
            via_tsvd = sbar[np.arange(mn), np.arange(mn), :].real.sum()
            assert np.isclose(tnn(x), direct, rtol=1e-8)
            assert np.isclose(via_tsvd, direct, rtol=1e-8)


def test_criterion_04_svt_oracle():
    with criterion(4, "SVT matches per-slice matrix SVT; prox certificate at n3/beta"):
        rng = np.random.default_rng(103)
        for _ in range(10):
            x = rng.standard_normal((5, 4, 3))
            tau = float(rng.uniform(0.1, 1.5))
            ybar = np.fft.fft(svt_tnn(x, tau), axis=2)
            xbar = np.fft.fft(x, axis=2)
            for k in range(3):
                u, s, vh = np.linalg.svd(xbar[:, :, k], full_matrices=False)
                expected = (u * np.maximum(s - tau, 0.0)) @ vh
                assert np.abs(ybar[:, :, k] - expected).max() < 1e-10
        beta = 1.5
        for _ in range(20):
            x = rng.standard_normal((4, 5, 3))
            n3 = x.shape[2]
            y_star = svt_tnn(x, n3 / beta)
            obj = lambda y: tnn(y) + 0.5 * beta * np.linalg.norm(x - y) ** 2
            base = obj(y_star)
            for _ in range(50):
                assert base <= obj(y_star + 1e-3 * rng.standard_normal(x.shape)) + 1e-12


def test_criterion_05_synthetic_recovery():
    with criterion(5, "rank-2 30x30x10 tensor at SR 60% recovered to RSE < 1e-2"):
        rng = np.random.default_rng(7)
        truth = t_product(rng.standard_normal((30, 2, 10)),
                          rng.standard_normal((2, 30, 10)))
        obs, mask = observe(truth, 0.6, seed=7)
        cfg = SolverConfig(beta=0.1, lam=0.0, denoiser=DenoiserSpec(kind="identity"),
                           tol=1e-4, max_iter=500, clip_output=False)
        start = time.perf_counter()
        x, trace = complete(obs, mask, cfg)
        elapsed = time.perf_counter() - start
        rse = np.linalg.norm(x - truth) / np.linalg.norm(truth)
        assert rse < 1e-2, f"RSE {rse:.3e}"
        assert trace.relcha[-1] < 1e-4
        assert trace.iterations[-1] <= 500
        assert elapsed < 30.0, f"took {elapsed:.2f}s, budget 30s"


def test_criterion_06_starfish_reproduction(starfish):
    with criterion(6, "desk-scale reproduction on Starfish (TNN-only and TV margin)"):
        truth = starfish
        assert truth.shape == (321, 481, 3), f"expected 321x481x3, got {truth.shape}"

        obs5, mask5 = observe(truth, 0.05, seed=1)
        assert abs(psnr(obs5, truth) - 2.03) <= 0.3

        targets = {0.05: 15.73, 0.10: 19.47, 0.30: 25.71}
        tnn_psnr = {}
        for rate, target in targets.items():
            obs, mask = observe(truth, rate, seed=1)
            best = -np.inf
            for beta in (0.1, 1.0):
                x, _ = solve_tnn_only(obs, mask, beta=beta)
                best = max(best, psnr(x, truth))
            tnn_psnr[rate] = best
            assert abs(best - target) <= 1.0, (
                f"TNN-only at SR {rate:.0%}: {best:.2f} dB vs {target} +- 1.0"
            )

        # denoiser-assisted completion must beat the pure low-rank run
        obs10, mask10 = observe(truth, 0.10, seed=1)
        best_tv = -np.inf
        for beta in (0.1, 1.0):
            for sigma in (0.01, 0.1, 1.0):
                cfg = SolverConfig(beta=beta, lam=0.0, sigma_override=sigma,
                                   denoiser=DenoiserSpec(kind="tv"))
                x, _ = complete(obs10, mask10, cfg)
                best_tv = max(best_tv, psnr(x, truth))
        assert best_tv >= tnn_psnr[0.10] + 1.0, (
            f"TV variant {best_tv:.2f} dB vs TNN-only {tnn_psnr[0.10]:.2f} dB"
        )


def test_criterion_07_ablation_equivalence():
    with criterion(7, "identity-denoiser run equals the pure low-rank wrapper"):
        rng = np.random.default_rng(105)
        truth = t_product(rng.standard_normal((20, 2, 6)),
                          rng.standard_normal((2, 20, 6)))
        obs, mask = observe(truth, 0.6, seed=15)
        a, _ = solve_tnn_only(obs, mask, beta=0.1)
        cfg = SolverConfig(beta=0.1, lam=0.0, denoiser=DenoiserSpec(kind="identity"))
        b, _ = complete(obs, mask, cfg)
        assert np.linalg.norm(a - b) <= 1e-6 * max(np.linalg.norm(b), 1e-12)


def test_criterion_08_metric_exactness():
    with criterion(8, "SSIM/PSNR analytic cases and independent SSIM oracle"):
        rng = np.random.default_rng(106)
        x = rng.random((16, 18, 2))
        assert ssim(x, x) == 1.0
        assert psnr(np.zeros((8, 8, 2)), np.ones((8, 8, 2))) == pytest.approx(0.0, abs=1e-12)
        for _ in range(10):
            a = rng.random((32, 32, 1))
            b = np.clip(a + 0.15 * rng.standard_normal((32, 32, 1)), 0, 1)
            expected = reference_ssim_slice(a[:, :, 0], b[:, :, 0])
            assert ssim(a, b) == pytest.approx(expected, abs=1e-6)


def _pipeline(tmp_path, tag):
    files = {n: str(tmp_path / f"{n}-{tag}.ten3") for n in ("truth", "mask", "obs", "rec")}
    assert cli_main(["synth", "--dims", "20,20,5", "--tubal-rank", "2", "--seed", "3",
                     "-o", files["truth"]]) == 0
    assert cli_main(["mask", "--kind", "elementwise", "--rate", "0.6", "--seed", "2",
                     "--dims", "20,20,5", "-o", files["mask"]]) == 0
    assert cli_main(["apply-mask", "-i", files["truth"], "-m", files["mask"],
                     "-o", files["obs"]]) == 0
    assert cli_main(["complete", "-i", files["obs"], "-m", files["mask"],
                     "--beta", "0.1", "--lambda", "0", "--denoiser", "none",
                     "--tol", "1e-4", "--max-iter", "500", "--no-clip",
                     "-o", files["rec"]]) == 0
    return files


def test_criterion_09_cli_determinism(tmp_path, capsys):
    with criterion(9, "identical seeds give byte-identical CLI pipeline outputs"):
        files1 = _pipeline(tmp_path, "a")
        files2 = _pipeline(tmp_path, "b")
        capsys.readouterr()
        for name in ("truth", "mask", "obs", "rec"):
            h1 = hashlib.sha256(open(files1[name], "rb").read()).hexdigest()
            h2 = hashlib.sha256(open(files2[name], "rb").read()).hexdigest()
            assert h1 == h2, f"{name} differs between runs"


def test_criterion_10_convergence_trace(tmp_path):
    with criterion(10, "trace is finite, terminates properly, and trends down"):
        rng = np.random.default_rng(107)
        truth = t_product(rng.standard_normal((24, 2, 8)),
                          rng.standard_normal((2, 24, 8)))
        obs, mask = observe(truth, 0.5, seed=21)
        cfg = SolverConfig(beta=0.1, clip_output=False)
        _, trace = complete(obs, mask, cfg)
        rc = np.array(trace.relcha)
        assert np.isfinite(rc).all() and (rc > 0).all()
        assert rc[-1] < cfg.tol or trace.iterations[-1] == cfg.max_iter
        csv_path = tmp_path / "trace.csv"
        trace.to_csv(str(csv_path))
        rows = [line.split(",") for line in csv_path.read_text().strip().splitlines()[1:]]
        assert len(rows) == len(trace.iterations)
        parsed = np.array([[float(c) for c in row] for row in rows])
        assert np.isfinite(parsed).all()
        # decreasing trend on the log scale
        slope = np.polyfit(parsed[:, 0], np.log10(parsed[:, 1]), 1)[0]
        assert slope < 0
        assert rc[-1] < rc[0]


def _pydenoiser_available():
    return importlib.util.find_spec("pydenoiser") is not None


PYDENOISER_NOTICE = "pydenoiser adapter package not installed; install the secondary component"


def test_criterion_11_protocol_conformance():
    if not _pydenoiser_available():
        print(f"criterion 11: SKIP  {PYDENOISER_NOTICE}")
        pytest.skip(PYDENOISER_NOTICE)
    with criterion(11, "external echo adapter round-trips bit-exactly; bad reply raises"):
        rng = np.random.default_rng(108)
        spec = external_spec((sys.executable, "-m", "pydenoiser", "--mode", "echo"))
        with spawn_external(spec) as session:
            for _ in range(3):
                dims = tuple(int(rng.integers(1, 9)) for _ in range(3))
                x = rng.standard_normal(dims).astype(np.float32).astype(np.float64)
                assert np.array_equal(session.denoise(x, 0.25), x)
        bad = external_spec((
            sys.executable, "-c",
            "import sys;i,o=sys.stdin.buffer,sys.stdout.buffer;"
            "o.write(i.read(8));o.flush();i.read(4);h=i.read(12);i.read(8);"
            "import struct;n1,n2,n3=struct.unpack('<III',h);i.read(4*n1*n2*n3);"
            "o.write(b'JUNK');o.write(h);o.write(bytes(4*n1*n2*n3));o.flush()",
        ))
        with spawn_external(bad) as session:
            with pytest.raises(ExternalDenoiserFailure):
                session.denoise(np.zeros((2, 2, 2)), 0.1)


def test_criterion_12_neural_directionality(starfish):
    if not _pydenoiser_available():
        print(f"criterion 12: SKIP  {PYDENOISER_NOTICE}")
        pytest.skip(PYDENOISER_NOTICE)
    import pydenoiser

    weights = pydenoiser.default_weights_path()
    if weights is None:
        notice = "no pretrained adapter weights found"
        print(f"criterion 12: SKIP  {notice}")
        pytest.skip(notice)
    with criterion(12, "neural adapter matches or beats the TV variant on Starfish SR 10%"):
        truth = starfish
        obs, mask = observe(truth, 0.10, seed=1)

        best_tv = -np.inf
        for beta in (0.1, 1.0):
            for sigma in (0.01, 0.1, 1.0):
                cfg = SolverConfig(beta=beta, sigma_override=sigma,
                                   denoiser=DenoiserSpec(kind="tv"))
                x, _ = complete(obs, mask, cfg)
                best_tv = max(best_tv, psnr(x, truth))

        cmd = (sys.executable, "-m", "pydenoiser", "--mode", "neural",
               "--weights", str(weights))
        best_neural = -np.inf
        for beta, sigma in ((0.1, 0.1), (1.0, 0.1), (0.1, 0.05)):
            cfg = SolverConfig(beta=beta, sigma_override=sigma,
                               denoiser=external_spec(cmd))
            x, _ = complete(obs, mask, cfg)
            best_neural = max(best_neural, psnr(x, truth))
        assert best_neural >= best_tv, (
            f"neural {best_neural:.2f} dB below TV variant {best_tv:.2f} dB"
        )
