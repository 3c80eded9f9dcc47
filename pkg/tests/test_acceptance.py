"""Acceptance criteria, one test each, with pinned tolerances and time budgets.

Every test prints one ``[PASS]``/``[FAIL]`` line (``[WARN]`` for the soft
rotation check); pytest repeats them in a summary section. Run directly with
``python3 tests/test_acceptance.py`` for the verdict lines alone.
"""
import os
import sys
import time
import warnings

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402
from conftest import _quaternion_qr, acceptance_line  # noqa: E402
from qpcanet.cli import main as cli_main  # noqa: E402
from qpcanet.experiment import config_from_mapping, run_experiment  # noqa: E402
from qpcanet.filters import learn_qpca_filters  # noqa: E402
from qpcanet.io import load_model, save_model  # noqa: E402
from qpcanet.linalg import complex_adjoint, conj_transpose, frobenius_norm, hermitian_eig, matmul, qidentity  # noqa: E402
from qpcanet.network import (  # noqa: E402
    NetworkConfig,
    StageConfig,
    _hashed_patterns,
    feature_dim,
    forward,
    qconv2d,
    real_conv2d,
    train_model,
)
from qpcanet.patches import PatchMatrix  # noqa: E402
from qpcanet.pooling import block_partition  # noqa: E402
from qpcanet.quaternion import qconj, qmul, qnorm  # noqa: E402
from qpcanet.synthetic import colored_textures, rotated_objects  # noqa: E402

UNIT = {"1": 0, "i": 1, "j": 2, "k": 3}


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def criterion_1():
    def body():
        exact = 0
        for (a, b), (sign, c) in oracles.UNIT_TABLE.items():
            ea, eb, ec = np.zeros(4), np.zeros(4), np.zeros(4)
            ea[UNIT[a]], eb[UNIT[b]] = 1.0, 1.0
            ec[UNIT[c]] = sign
            exact += np.array_equal(qmul(ea, eb), ec)
        rng = np.random.default_rng(1)
        p, q, r = rng.normal(size=(3, 10_000, 4))
        norm_err = np.max(np.abs(qnorm(qmul(p, q)) - qnorm(p) * qnorm(q)) / (1 + qnorm(p) * qnorm(q)))
        conj_err = np.max(np.abs(qconj(qmul(p, q)) - qmul(qconj(q), qconj(p))))
        assoc_err = np.max(np.abs(qmul(qmul(p, q), r) - qmul(p, qmul(q, r))))
        return exact, max(norm_err, conj_err, assoc_err)

    (exact, err), dt = _timed(body)
    ok = exact == 16 and err <= 1e-12 and dt < 1.0
    return acceptance_line(1, ok, f"unit products exact {exact}/16, max random error {err:.1e} (<= 1e-12), {dt:.2f}s (< 1s)")


def criterion_2():
    def body():
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(100):
            n, m, p = rng.integers(1, 9, size=3)
            a, b = rng.normal(size=(n, m, 4)), rng.normal(size=(m, p, 4))
            diff = complex_adjoint(matmul(a, b)) - complex_adjoint(a) @ complex_adjoint(b)
            worst = max(worst, np.abs(diff).max())
        return worst

    err, dt = _timed(body)
    ok = err <= 1e-10 and dt < 5.0
    return acceptance_line(2, ok, f"adjoint homomorphism max error {err:.1e} on 100 pairs (<= 1e-10), {dt:.2f}s (< 5s)")


def _hermitian_suite(seed=3, count=200):
    rng = np.random.default_rng(seed)
    mats = []
    for t in range(count):
        n = int(rng.integers(1, 17))
        u, _ = _quaternion_qr(rng.normal(size=(n, n, 4)))
        kind = t % 4
        if kind == 0:
            lam = rng.normal(size=n)
        elif kind == 1:  # repeated eigenvalues
            lam = rng.choice([-1.0, 0.5, 2.0], size=n)
        elif kind == 2:  # rank deficient PSD
            lam = np.where(rng.random(n) < 0.5, 0.0, rng.random(n) * 10)
        else:  # wide dynamic range
            lam = 10.0 ** rng.uniform(-6, 3, size=n)
        d = np.zeros((n, n, 4))
        d[np.arange(n), np.arange(n), 0] = lam
        s = matmul(matmul(u, d), conj_transpose(u))
        mats.append(0.5 * (s + conj_transpose(s)))
    return mats


def criterion_3():
    def body():
        mats = _hermitian_suite()
        recon = unit = 0.0
        ordered = True
        first = []
        for s in mats:
            res = hermitian_eig(s)
            w, lam = res.eigenvectors, res.eigenvalues
            n = s.shape[0]
            d = np.zeros((n, n, 4))
            d[np.arange(n), np.arange(n), 0] = lam
            scale = max(frobenius_norm(s), 1e-300)
            recon = max(recon, frobenius_norm(s - matmul(matmul(w, d), conj_transpose(w))) / scale)
            unit = max(unit, frobenius_norm(matmul(conj_transpose(w), w) - qidentity(n)))
            ordered &= bool(np.isrealobj(lam) and np.all(np.diff(lam) <= 0))
            first.append((lam.tobytes(), w.tobytes()))
        again = [(r.eigenvalues.tobytes(), r.eigenvectors.tobytes()) for r in map(hermitian_eig, mats)]
        return recon, unit, ordered, first == again

    (recon, unit, ordered, same), dt = _timed(body)
    ok = recon <= 1e-8 and unit <= 1e-8 and ordered and same and dt < 30.0
    return acceptance_line(
        3,
        ok,
        f"200 Hermitian EVDs: reconstruction {recon:.1e}, unitarity {unit:.1e} (<= 1e-8), "
        f"descending {ordered}, bit-exact rerun {same}, {dt:.1f}s (< 30s)",
    )


def criterion_4():
    def body():
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(20):
            d = int(rng.integers(4, 13))
            count = int(rng.integers(3 * d, 300))
            L = int(rng.integers(1, d))
            x = rng.normal(size=(d, count)) * rng.uniform(0.2, 3.0, size=(d, 1))
            x -= x.mean(axis=0)
            data = np.zeros((d, count, 4))
            data[..., 0] = x
            bank = learn_qpca_filters(PatchMatrix(data, (d, 1)), L)
            w = bank.vectors()
            proj = matmul(w, conj_transpose(w))
            _, v = np.linalg.eigh(x @ x.T / count)
            ref = np.zeros_like(proj)
            ref[..., 0] = v[:, -L:] @ v[:, -L:].T
            worst = max(worst, np.abs(proj - ref).max())
        return worst

    err, dt = _timed(body)
    ok = err <= 1e-8 and dt < 10.0
    return acceptance_line(4, ok, f"QPCA vs real PCA projector max error {err:.1e} on 20 datasets (<= 1e-8), {dt:.2f}s (< 10s)")


def criterion_5():
    def body():
        rng = np.random.default_rng(5)
        images = [rng.random((20, 20, 3)) for _ in range(2)]
        checked = 0
        ok = True
        sweep = [
            ("qpcanet", ((3, 3, 4), (3, 3, 3)), 6, 0.5),
            ("qpcanet", ((5, 5, 6),), 8, 0.0),
            ("qpcanet", ((3, 3, 2), (5, 3, 5)), 5, 0.3),
            ("rgb_pcanet", ((3, 3, 8), (3, 3, 4)), 7, 0.6),
            ("rgb_pcanet", ((3, 3, 5),), 10, 0.0),
            ("gray_pcanet", ((3, 3, 4), (3, 3, 4)), 4, 0.5),
            ("gray_pcanet", ((5, 5, 7),), 20, 0.0),
        ]
        for mode, stages, block, ratio in sweep:
            cfg = NetworkConfig(mode, tuple(StageConfig(*s) for s in stages), block, block, ratio)
            model = train_model(cfg, images)
            L_last = stages[-1][2]
            parents = int(np.prod([s[2] for s in stages[:-1]]))
            grid = block_partition(20, 20, block, block, ratio)
            formula = (4 if mode == "qpcanet" else 1) * 2**L_last * parents * len(grid)
            f = forward(model, images[0])
            hashed = _hashed_patterns(model, images[0])
            mass = f.toarray().reshape(-1, len(grid), 2**L_last).sum(axis=-1)
            ok &= f.shape[1] == formula == feature_dim(cfg, 20, 20)
            ok &= bool(hashed.min() >= 0 and hashed.max() <= 2**L_last - 1)
            ok &= bool(np.all(mass == block * block))
            checked += 1
        return ok, checked

    (ok, checked), dt = _timed(body)
    ok = ok and dt < 10.0
    return acceptance_line(5, ok, f"feature dimension, hash range and histogram mass hold on {checked} configs, {dt:.2f}s (< 10s)")


def criterion_6():
    overlapped = len(block_partition(32, 32, 8, 8, 0.5))
    tiled = len(block_partition(32, 32, 8, 8, 0.0))
    return acceptance_line(6, overlapped == 49 and tiled == 16, f"32x32 block 8: ratio 0.5 -> {overlapped} (49), ratio 0 -> {tiled} (16)")


def criterion_7():
    def body():
        rng = np.random.default_rng(7)
        worst = 0.0
        for t in range(50):
            m, n = rng.integers(4, 10, size=2)
            k1, k2 = rng.choice([1, 3, 5], size=2)
            if t % 2 == 0:
                q, w = rng.normal(size=(m, n, 4)), rng.normal(size=(k1, k2, 4))
                ref = np.array(oracles.qconv2d(q.tolist(), w.tolist()))
                worst = max(worst, np.abs(qconv2d(q, w) - ref).max())
            else:
                c = int(rng.integers(1, 4))
                x, w = rng.normal(size=(c, m, n)), rng.normal(size=(c, k1, k2))
                ref = np.array(oracles.real_conv2d(x.tolist(), w.tolist()))
                worst = max(worst, np.abs(real_conv2d(x, w) - ref).max())
        return worst

    err, dt = _timed(body)
    ok = err <= 1e-10 and dt < 5.0
    return acceptance_line(7, ok, f"convolution vs naive loops max error {err:.1e} on 50 cases (<= 1e-10), {dt:.2f}s (< 5s)")


def _experiment(mode, images, labels, k, block, ratio, train):
    cfg = config_from_mapping(
        {
            "mode": mode, "stages": "1", "patch": str(k), "filters1": "8", "block": str(block),
            "overlap": str(ratio), "train_per_class": str(train), "reps": "3", "seed": "0",
        }
    )
    return run_experiment(cfg, images, labels).mean_accuracy


def criterion_8():
    def body():
        images, labels = colored_textures(per_class=40, size=32, seed=0)
        return _experiment("qpcanet", images, labels, 3, 8, 0.5, 20)

    acc, dt = _timed(body)
    ok = acc >= 0.95 and dt < 180.0
    return acceptance_line(8, ok, f"8-class textures, QPCANet-1 mean accuracy {acc:.4f} over 3 seeds (>= 0.95), {dt:.1f}s (< 180s)")


def criterion_9():
    def body():
        images, labels = rotated_objects(n_classes=10, size=32, seed=0)
        accs = {mode: _experiment(mode, images, labels, 3, 8, 0.0, 18) for mode in ("qpcanet", "rgb_pcanet", "gray_pcanet")}
        wide = {mode: _experiment(mode, images, labels, 5, 8, 0.0, 18) for mode in ("qpcanet", "rgb_pcanet")}
        return accs, wide

    (accs, wide), dt = _timed(body)
    ok = accs["qpcanet"] >= accs["rgb_pcanet"] - 0.02 and dt < 300.0
    detail = (
        f"rotated objects, 3x3 patches: QPCANet-1 {accs['qpcanet']:.4f} vs RGB PCANet-1 {accs['rgb_pcanet']:.4f} "
        f"(needs >= RGB - 0.02), Gray {accs['gray_pcanet']:.4f}; "
        f"5x5 (informational) QPCANet-1 {wide['qpcanet']:.4f} vs RGB {wide['rgb_pcanet']:.4f}; {dt:.1f}s (< 300s)"
    )
    return acceptance_line(9, ok, detail, soft=True)


def _write_fixture_tree(root):
    images, labels = colored_textures(per_class=6, size=16, seed=10)
    for i, (img, label) in enumerate(zip(images, labels)):
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        Image.fromarray(np.rint(img * 255).astype(np.uint8), "RGB").save(d / f"{i:03d}.png")
    return root


def criterion_10(tmp_dir):
    def body():
        root = _write_fixture_tree(tmp_dir / "tree")
        outputs = []
        for name in ("first.csv", "second.csv"):
            out = tmp_dir / name
            argv = ["run", "--root", str(root), "--stages", "2", "--filters1", "4", "--filters2", "4",
                    "--block", "8", "--resize", "16x16", "--train-per-class", "3", "--reps", "2", "-o", str(out)]
            code = cli_main(argv)
            outputs.append((code, out.read_bytes() if out.exists() else b""))
        return outputs

    outputs, dt = _timed(body)
    ok = all(code == 0 for code, _ in outputs) and outputs[0][1] == outputs[1][1] and outputs[0][1] != b"" and dt < 60.0
    return acceptance_line(10, ok, f"CLI run twice -> byte-identical CSV ({len(outputs[0][1])} bytes), {dt:.1f}s (< 60s)")


def criterion_11(tmp_dir):
    rng = np.random.default_rng(11)
    images = [rng.random((16, 16, 3)) for _ in range(3)]
    model = train_model(NetworkConfig("qpcanet", (StageConfig(3, 3, 4), StageConfig(3, 3, 4)), 8, 8, 0.5), images)
    path = tmp_dir / "model.qpcn"
    save_model(path, model)
    loaded, _ = load_model(path)
    a, b = forward(model, images[0]), forward(loaded, images[0])
    same = a.shape == b.shape and np.array_equal(a.indices, b.indices) and np.array_equal(a.data, b.data)
    return acceptance_line(11, same, f"save -> load -> forward bit-exact on a fixture image: {same}")


def test_criterion_01_algebra():
    assert criterion_1()


def test_criterion_02_adjoint_homomorphism():
    assert criterion_2()


def test_criterion_03_evd_suite():
    assert criterion_3()


def test_criterion_04_pca_equivalence():
    assert criterion_4()


def test_criterion_05_pipeline_structure():
    assert criterion_5()


def test_criterion_06_block_partition():
    assert criterion_6()


def test_criterion_07_convolution_oracle():
    assert criterion_7()


def test_criterion_08_synthetic_end_to_end():
    assert criterion_8()


def test_criterion_09_rotation_trend_soft():
    if not criterion_9():
        warnings.warn("rotation-trend check missed: QPCANet-1 fell more than 0.02 below RGB PCANet-1", UserWarning)


def test_criterion_10_run_determinism(tmp_path):
    assert criterion_10(tmp_path)


def test_criterion_11_model_round_trip(tmp_path):
    assert criterion_11(tmp_path)


if __name__ == "__main__":
    import pathlib
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        results = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6(), criterion_7(),
                   criterion_8(), criterion_9(), criterion_10(tmp), criterion_11(tmp)]
    gated = results[:8] + results[9:]
    sys.exit(0 if all(gated) else 1)
