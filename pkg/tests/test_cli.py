from __future__ import annotations

import json

import pytest

import xpm_if_cli
from xpm_if.errors import NumericalError
from xpm_if.harness import recipes


def test_parser_reads_lists():
    args = xpm_if_cli.build_parser().parse_args(["sweep", "--param", "power", "--values", "-3, 0,3"])
    assert args.values == [-3.0, 0.0, 3.0]
    args = xpm_if_cli.build_parser().parse_args(["q-ratio", "--spans", "1,2,5", "--trials", "10000"])
    assert args.spans == [1, 2, 5]


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        xpm_if_cli.build_parser().parse_args([])
    with pytest.raises(SystemExit):
        xpm_if_cli.build_parser().parse_args(["sweep"])


def test_q_ratio_command(tmp_path):
    code = xpm_if_cli.main(
        ["q-ratio", "--preset", "desk", "--out", str(tmp_path), "--spans", "1,2", "--c-points", "8", "--trials", "10000"]
    )
    assert code == xpm_if_cli.EXIT_OK
    assert (tmp_path / "results.jsonl").exists()


def test_invalid_config_exits_with_config_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"extends": "desk", "link": {"num_spans": 0}}))
    assert xpm_if_cli.main(["multi-span", "--config", str(path)]) == xpm_if_cli.EXIT_CONFIG


def test_parameter_error_exits_with_config_code(tmp_path):
    code = xpm_if_cli.main(["q-ratio", "--preset", "desk", "--out", str(tmp_path), "--spans", "20", "--c-points", "4"])
    assert code == xpm_if_cli.EXIT_CONFIG


def test_numerical_failure_exit_code(monkeypatch, tmp_path):
    def explode(cfg, num_spans=None):
        raise NumericalError("SSFM produced non-finite samples")

    monkeypatch.setattr(recipes, "cmd_multi_span", explode)
    assert xpm_if_cli.main(["multi-span", "--preset", "desk", "--out", str(tmp_path)]) == xpm_if_cli.EXIT_NUMERICAL


def test_failed_validation_exit_code(monkeypatch, tmp_path):
    def failing(cfg):
        return recipes.RecipeResult(recipe="validate", out_dir=tmp_path, gates={"spm_phase": True, "parseval": False})

    monkeypatch.setattr(recipes, "cmd_validate", failing)
    assert xpm_if_cli.main(["validate", "--preset", "desk"]) == xpm_if_cli.EXIT_GATE


def test_overrides_reach_the_recipe(monkeypatch, tmp_path):
    seen = {}

    def capture(cfg, num_spans=None):
        seen["cfg"] = cfg
        seen["spans"] = num_spans
        return recipes.RecipeResult(recipe="multi-span", out_dir=tmp_path)

    monkeypatch.setattr(recipes, "cmd_multi_span", capture)
    code = xpm_if_cli.main(
        ["multi-span", "--preset", "desk", "--spans", "3", "--seed", "17", "--if-mode", "evolving", "--threads", "2"]
    )
    assert code == xpm_if_cli.EXIT_OK
    assert seen["spans"] == 3
    assert seen["cfg"].run.seed == 17
    assert seen["cfg"].run.threads == 2
    assert seen["cfg"].model.if_mode == "evolving"
