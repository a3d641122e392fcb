#!/usr/bin/env python3
"""
Сквозные тесты командной строки advsec: коды выхода, артефакты, манифест
"""

import csv
import json
import typing
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from cli.commands import build_datasets
from cli.config import GeneratorBlock, load_config
from cli.main import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, run
from models import load_model

BLOBS = {"source": {"generator": "blobs", "n": 60, "centers": [[-2.0, 0.0], [2.0, 0.0]], "spread": 0.6}}
MOONS = {"source": {"generator": "moons", "n": 80, "noise": 0.1}}
LOGREG = {"spec": {"kind": "logreg", "regularization": 0.1}}


def write_config(tmp_path, name="experiment.json", **blocks):
    data = {"dataset": BLOBS, "seed": 1}
    data.update(blocks)
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def load_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def read_csv(path):
    with open(path, encoding='utf-8') as f:
        return list(csv.reader(f))


def manifest_hashes(out_dir):
    manifest = load_json(out_dir / "manifest.json")
    return {entry["path"]: entry["sha256"] for entry in manifest["files"]}


def test_train_writes_manifest_and_is_reproducible(tmp_path, capsys):
    cfg = write_config(tmp_path, model=LOGREG)
    first, second = tmp_path / "run1", tmp_path / "run2"
    assert run(["train", "--config", cfg, "--out", str(first)]) == EXIT_OK
    assert run(["train", "--config", cfg, "--out", str(second)]) == EXIT_OK
    assert "✅" in capsys.readouterr().out

    manifest = load_json(first / "manifest.json")
    assert manifest["command"] == "train"
    assert manifest["schema_version"] == 1
    assert manifest["seeds"]["split"] == 1
    hashes = manifest_hashes(first)
    assert {"model.json", "metrics.json", "run.log"} <= set(hashes)
    again = manifest_hashes(second)
    for name in ("model.json", "metrics.json"):
        assert hashes[name] == again[name]

    model = load_model(first / "model.json")
    assert model.kind == "logreg"


def test_missing_model_block_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run(["train", "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert "model" in capsys.readouterr().err


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, model=LOGREG, colour="red")
    assert run(["train", "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert "colour" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run(["train", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG


def test_seed_override_reaches_manifest(tmp_path):
    cfg = write_config(tmp_path, model=LOGREG)
    out = tmp_path / "out"
    assert run(["train", "--config", cfg, "--out", str(out), "--seed", "7"]) == EXIT_OK
    seeds = load_json(out / "manifest.json")["seeds"]
    assert seeds["split"] == 7
    assert seeds["dataset"] == 7


def test_zero_budget_attack_never_succeeds(tmp_path, capsys):
    attack = {"evasion": {"epsilon": 0.0}, "solver": {"solver": "pgd-ls", "max_iter": 5}}
    cfg = write_config(tmp_path, model=LOGREG, attack=attack)
    out = tmp_path / "out"
    assert run(["attack", "--config", cfg, "--out", str(out)]) == EXIT_OK
    summary = load_json(out / "attack_summary.json")
    assert summary["n_success"] == 0
    assert summary["n_total"] > 0
    assert f"0/{summary['n_total']}" in capsys.readouterr().out


def test_gradient_solver_on_forest_is_runtime_error(tmp_path, capsys):
    attack = {"evasion": {"epsilon": 0.5}, "solver": {"solver": "pgd"}}
    model = {"spec": {"kind": "random-forest", "n_trees": 3, "max_depth": 3}}
    cfg = write_config(tmp_path, dataset=MOONS, model=model, attack=attack)
    assert run(["attack", "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_RUNTIME
    assert "NotDifferentiableError" in capsys.readouterr().err


def test_random_search_attacks_forest(tmp_path):
    attack = {"evasion": {"epsilon": 0.5}, "solver": {"solver": "random-search", "max_iter": 10}, "samples": [0, 1]}
    model = {"spec": {"kind": "random-forest", "n_trees": 3, "max_depth": 3}}
    cfg = write_config(tmp_path, dataset=MOONS, model=model, attack=attack)
    out = tmp_path / "out"
    assert run(["attack", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert load_json(out / "manifest.json")["seeds"]["attack_solver"] == 1


def _svg_gids(path):
    return {element.get("id") for element in ET.parse(path).iter() if element.get("id")}


def test_targeted_attack_artifacts(tmp_path):
    attack = {
        "evasion": {"loss": {"kind": "cw-logit-diff", "target_label": 1}, "epsilon": 1.5},
        "solver": {"solver": "pgd", "step_size": 0.2, "max_iter": 20},
        "samples": [0, 1, 2, 3],
        "explain_adversarial": True,
    }
    cfg = write_config(tmp_path, model=LOGREG, attack=attack)
    out = tmp_path / "out"
    assert run(["attack", "--config", cfg, "--out", str(out)]) == EXIT_OK

    summary = load_json(out / "attack_summary.json")
    hashes = manifest_hashes(out)
    for sample in summary["samples"]:
        index = sample["index"]
        trace = load_json(out / f"traces/sample_{index}.json")["trace"]
        assert trace["losses"][-1] <= trace["losses"][0]
        assert f"traces/sample_{index}.json" in hashes
        assert f"attributions/sample_{index}_adversarial.csv" in hashes
        assert "series-loss" in _svg_gids(out / f"plots/sample_{index}_loss.svg")
        gids = _svg_gids(out / f"plots/sample_{index}_scores.svg")
        assert {"series-source-class", "series-target-class"} <= gids


def test_worker_count_does_not_change_results(tmp_path):
    attack = {"evasion": {"epsilon": 1.0, "norm": "linf"}, "solver": {"solver": "pgd-ls", "max_iter": 5},
              "samples": list(range(8))}
    cfg = write_config(tmp_path, model=LOGREG, attack=attack)
    single, pooled = tmp_path / "w1", tmp_path / "w4"
    assert run(["attack", "--config", cfg, "--out", str(single), "--workers", "1"]) == EXIT_OK
    assert run(["attack", "--config", cfg, "--out", str(pooled), "--workers", "4"]) == EXIT_OK
    for index in range(8):
        name = f"traces/sample_{index}.json"
        assert (single / name).read_bytes() == (pooled / name).read_bytes()


def test_empty_sample_list(tmp_path, capsys):
    attack = {"evasion": {"epsilon": 1.0}, "solver": {"solver": "pgd-ls"}, "samples": []}
    cfg = write_config(tmp_path, model=LOGREG, attack=attack)
    assert run(["attack", "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_OK
    assert "0/0" in capsys.readouterr().out


def test_sample_index_out_of_range(tmp_path):
    attack = {"evasion": {"epsilon": 1.0}, "solver": {"solver": "pgd-ls"}, "samples": [1000]}
    cfg = write_config(tmp_path, model=LOGREG, attack=attack)
    assert run(["attack", "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_seceval_single_zero_budget(tmp_path):
    seceval = {"evasion": {"norm": "l2"}, "solver": {"solver": "pgd-ls", "max_iter": 5}, "eps_grid": [0.0]}
    cfg = write_config(tmp_path, model=LOGREG, seceval=seceval)
    out = tmp_path / "out"
    assert run(["seceval", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = read_csv(out / "security_curve.csv")
    assert rows[0] == ["eps", "accuracy", "mean_confidence_drop"]
    assert len(rows) == 2
    assert float(rows[1][0]) == 0.0
    gids = _svg_gids(out / "plots/security_curve.svg")
    assert {"series-accuracy", "series-confidence-drop"} <= gids


def test_poison_without_points_keeps_accuracy(tmp_path):
    poison = {"spec": {"victim": {"kind": "logreg"}, "n_poison": 0}}
    cfg = write_config(tmp_path, poison=poison)
    out = tmp_path / "out"
    assert run(["poison", "--config", cfg, "--out", str(out)]) == EXIT_OK
    summary = load_json(out / "manifest.json")["summary"]
    assert summary["val_accuracy_before"] == summary["val_accuracy_after"]
    assert read_csv(out / "poison_points.csv") == [["x0", "x1", "label"]]


def test_integrated_gradients_on_linear_model(tmp_path):
    explain = {"method": "integrated-gradients", "samples": [0, 3], "target": 1, "m_steps": 10}
    cfg = write_config(tmp_path, model=LOGREG, explain=explain)
    train_out, out = tmp_path / "train", tmp_path / "out"
    assert run(["train", "--config", cfg, "--out", str(train_out)]) == EXIT_OK
    assert run(["explain", "--config", cfg, "--out", str(out)]) == EXIT_OK

    model = load_model(train_out / "model.json")
    _, test = build_datasets(load_config(cfg)[0])
    for index in (0, 3):
        rows = read_csv(out / f"attributions/sample_{index}_integrated-gradients.csv")
        assert rows[0] == ["feature_index", "score"]
        scores = np.array([float(score) for _, score in rows[1:]])
        # нулевая базовая точка: IG = w_target * x
        np.testing.assert_allclose(scores, model.weights[1] * test.sample(index), rtol=0, atol=1e-9)


def test_influence_requires_convex_spec(tmp_path):
    explain = {"method": "influence", "samples": [0]}
    model = {"spec": {"kind": "mlp", "hidden_sizes": [4], "epochs": 10}}
    cfg = write_config(tmp_path, model=model, explain=explain)
    assert run(["explain", "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_influence_outputs(tmp_path):
    explain = {"method": "influence", "samples": [0, 1]}
    cfg = write_config(tmp_path, model=LOGREG, explain=explain)
    out = tmp_path / "out"
    assert run(["explain", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = read_csv(out / "influence/sample_0.csv")
    assert rows[0] == ["train_index", "score"]
    assert len(rows) == 1 + 42
    top = load_json(out / "manifest.json")["summary"]["top_harmful"]
    assert len(top["0"]) == 5


@pytest.mark.parametrize("command", ["attack", "seceval", "poison", "explain"])
def test_missing_command_block(tmp_path, command, capsys):
    cfg = write_config(tmp_path, model=LOGREG)
    assert run([command, "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert command in capsys.readouterr().err


def test_targeted_seceval_skips_target_class(tmp_path):
    seceval = {
        "evasion": {"loss": {"kind": "cw-logit-diff", "target_label": 1}, "norm": "l2"},
        "solver": {"solver": "pgd-ls", "max_iter": 5},
        "eps_grid": [0.0, 1.0, 4.0],
    }
    cfg = write_config(tmp_path, model=LOGREG, seceval=seceval)
    out = tmp_path / "out"
    assert run(["seceval", "--config", cfg, "--out", str(out)]) == EXIT_OK

    _, test = build_datasets(load_config(cfg)[0])
    curve = load_json(out / "security_curve.json")
    assert curve["n_unattacked"] == int(np.sum(test.y == 1))
    assert all(a >= b for a, b in zip(curve["accuracy_at_eps"], curve["accuracy_at_eps"][1:]))


def test_generator_block_uses_typing_annotated():
    assert typing.get_origin(GeneratorBlock) is typing.Annotated
