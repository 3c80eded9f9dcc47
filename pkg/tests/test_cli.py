import numpy as np
import pytest
from PIL import Image

from qpcanet.cli import main
from qpcanet.errors import NumericalError
from qpcanet.io import load_model
from qpcanet.synthetic import colored_textures

FLAGS = ["--stages", "1", "--filters1", "4", "--block", "8", "--resize", "16x16", "--train-per-class", "3"]


@pytest.fixture(scope="module")
def tree(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    images, labels = colored_textures(per_class=5, size=16, seed=2)
    keep = {"horizontal-0", "vertical-1", "checker-0"}
    for i, (img, label) in enumerate(zip(images, labels)):
        if label not in keep:
            continue
        d = root / label
        d.mkdir(exist_ok=True)
        Image.fromarray(np.rint(img * 255).astype(np.uint8), "RGB").save(d / f"{i:03d}.png")
    return root


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_ingest(tree, tmp_path, capsys):
    code, out, _ = run(capsys, "ingest", tree, "--resize", "16x16", "-o", tmp_path / "m.json")
    assert code == 0
    assert "15 images in 3 classes, 0 skipped" in out
    assert (tmp_path / "m.json").exists()


def test_run_is_deterministic(tree, tmp_path, capsys):
    results = []
    for name in ("a.csv", "b.csv"):
        code, out, _ = run(capsys, "run", "--root", tree, *FLAGS, "--reps", "2", "-o", tmp_path / name)
        assert code == 0
        results.append((tmp_path / name).read_bytes())
    assert results[0] == results[1]
    lines = results[0].decode().splitlines()
    assert lines[0] == "mode,patch,stage,run,accuracy"
    assert [l.split(",")[3] for l in lines[1:]] == ["0", "1", "mean"]
    assert "mean" in out


def test_train_evaluate_classify_extract_dump(tree, tmp_path, capsys):
    manifest = tmp_path / "m.json"
    model = tmp_path / "model.qpcn"
    assert run(capsys, "ingest", tree, "--resize", "16x16", "-o", manifest)[0] == 0
    code, out, _ = run(capsys, "train", "--manifest", manifest, *FLAGS, "-o", model)
    assert code == 0 and "training accuracy" in out
    network, svm = load_model(model)
    assert svm.classes == ("checker-0", "horizontal-0", "vertical-1")

    code, out, _ = run(capsys, "evaluate", "--model", model, "--manifest", manifest, *FLAGS)
    assert code == 0 and out.startswith("accuracy ")

    images = sorted(str(p) for p in tree.rglob("*.png"))[:2]
    code, out, _ = run(capsys, "classify", "--model", model, "--resize", "16x16", *images)
    assert code == 0
    assert [l.split("\t")[0] for l in out.splitlines()] == images

    feats = tmp_path / "f.npz"
    code, out, _ = run(capsys, "extract", "--model", model, "--manifest", manifest, "-o", feats)
    assert code == 0
    with np.load(feats) as z:
        assert tuple(z["shape"]) == (15, 4 * 16 * 9)
        assert len(z["labels"]) == 15

    code, out, _ = run(capsys, "dump-filters", "--model", model, "-o", tmp_path / "filters", "--zoom", "2")
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "filters").iterdir()) == [
        "stage1_i.png", "stage1_j.png", "stage1_k.png", "stage1_real.png"
    ]


def test_config_file_and_flag_precedence(tree, tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("mode = gray_pcanet\nstages = 1\nfilters1 = 3\nblock = 8\nresize = 16x16\ntrain_per_class = 3\n")
    code, out, _ = run(capsys, "run", "--root", tree, "--config", cfg)
    assert code == 0 and "gray_pcanet,3x3,1,mean," in out
    code, out, _ = run(capsys, "run", "--root", tree, "--config", cfg, "--mode", "rgb_pcanet")
    assert code == 0 and "rgb_pcanet,3x3,1,mean," in out


def test_usage_errors(tree, capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "run")[0] == 1
    assert run(capsys, "run", "--root", tree, "--patch", "4")[0] == 1
    assert run(capsys, "ingest", tree, "--resize", "axb")[0] == 1


def test_data_errors(tree, tmp_path, capsys):
    code, _, err = run(capsys, "ingest", tmp_path / "missing")
    assert code == 2 and "data error" in err
    (tmp_path / "bad.qpcn").write_bytes(b"JUNKJUNKJUNK")
    assert run(capsys, "dump-filters", "--model", tmp_path / "bad.qpcn")[0] == 2
    assert run(capsys, "run", "--root", tree, *FLAGS[:-1], "5")[0] == 2


def test_numerical_failure(tree, capsys, monkeypatch):
    def fail(*args, **kwargs):
        raise NumericalError("eigensolver did not converge", eigenvalue_index=3)

    monkeypatch.setattr("qpcanet.experiment.train_model", fail)
    code, _, err = run(capsys, "run", "--root", tree, *FLAGS)
    assert code == 3 and "eigenvalue_index=3" in err


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "qpcanet.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("qpcanet ")
