import csv
import json

import pytest

try:
    import tomllib as tomli
except ModuleNotFoundError:
    import tomli

from lcashe.cli import main
from lcashe.config import parse_config, schema_text
from lcashe.errors import ConfigError
from lcashe.spectral import CyclicRates, ProductIndependent, Stable

BASE = """
schema = "shecli/1"
experiment = "{exp}"
t = 1.0
group = {{kind = "Cyclic", n = 2}}
levy = {{kind = "CyclicRates", rates = [1.0]}}
{extra}
"""


def write(tmp_path, exp, extra="", name="cfg.toml"):
    p = tmp_path / name
    p.write_text(BASE.format(exp=exp, extra=extra))
    return p


@pytest.fixture(autouse=True)
def _no_env(monkeypatch):
    monkeypatch.delenv("SHE_OUTPUT_DIR", raising=False)


def test_schema_template_parses():
    cfg = parse_config(tomli.loads(schema_text()))
    assert cfg.model == CyclicRates((1.0,))
    assert len(cfg.lambdas) == 21


def test_unknown_keys_rejected():
    raw = tomli.loads(BASE.format(exp="volterra", extra=""))
    raw["levy"]["speed"] = 2
    with pytest.raises(ConfigError, match="speed"):
        parse_config(raw)
    raw = tomli.loads(BASE.format(exp="volterra", extra="colour = 1"))
    with pytest.raises(ConfigError, match="colour"):
        parse_config(raw)


def test_model_tables():
    raw = tomli.loads("""
schema = "shecli/1"
experiment = "upsilon"
group = {kind = "Product", factors = [{kind = "Cyclic", n = 2}, {kind = "RealLine"}]}
levy = {kind = "ProductIndependent", parts = [{kind = "CyclicRates", rates = [1.0]}, {kind = "Stable", alpha = 1.5}]}
""")
    m = parse_config(raw).model
    assert isinstance(m, ProductIndependent) and m.parts[1] == Stable(1.5)
    raw["levy"]["parts"][1] = {"kind": "TorusBrownian"}
    with pytest.raises(ConfigError, match="Torus"):
        parse_config(raw)


def test_sweep_outputs_and_round_trip(tmp_path, monkeypatch):
    cfg = write(tmp_path, "sweep", f'output = {{directory = "{tmp_path / "a"}"}}')
    assert main(["run", str(cfg)]) == 0
    with open(tmp_path / "a" / "sweep.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["lambda", "log_energy_sq", "log_log_energy"]
    assert len(rows) == 22
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert {"config", "config_sha256", "versions", "wall_time_s", "files"} <= set(man)
    monkeypatch.setenv("SHE_OUTPUT_DIR", str(tmp_path / "b"))
    assert main(["run", str(tmp_path / "a" / "manifest.json")]) == 0
    for name in man["files"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_writes_stay_in_output_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write(tmp_path, "kernel", 'output = {directory = "out"}')
    before = set(p.name for p in tmp_path.iterdir())
    assert main(["run", str(cfg)]) == 0
    after = set(p.name for p in tmp_path.iterdir())
    assert after - before == {"out"}


def test_exit_codes(tmp_path, capsys):
    out = f'output = {{directory = "{tmp_path / "o"}"}}'
    bad = tmp_path / "dalang.toml"
    bad.write_text(f"""
schema = "shecli/1"
experiment = "volterra"
group = {{kind = "RealLine"}}
levy = {{kind = "Stable", alpha = 0.9}}
lambda = {{value = 1.0}}
{out}
""")
    assert main(["run", str(bad)]) == 3
    assert "Dalang condition fails" in capsys.readouterr().err
    assert main(["run", str(write(tmp_path, "mc", "numerics = {dt = 0.5}\n" + out))]) == 2
    assert "0.1" in capsys.readouterr().err
    assert main(["run", str(write(tmp_path, "volterra", 'sigma = {kind = "Bounded"}\n' + out))]) == 2
    assert main(["run", str(tmp_path / "missing.toml")]) == 2


def test_mc_outputs(tmp_path):
    extra = (f'lambda = {{value = 0.5}}\nnumerics = {{dt = 0.01, n_paths = 300, keep_paths = true}}\n'
             f'output = {{directory = "{tmp_path / "o"}"}}')
    assert main(["run", str(write(tmp_path, "mc", extra))]) == 0
    res = json.loads((tmp_path / "o" / "mc.json").read_text())
    assert {"mean", "se", "n_paths", "seed"} <= set(res)
    assert res["n_paths"] == 300 and res["seed"] == 20140415
    assert (tmp_path / "o" / "paths.csv").read_text().startswith("path_id,energy_sq\n")


def test_dichotomy_outputs(tmp_path):
    text = f"""
schema = "shecli/1"
experiment = "dichotomy"
output = {{directory = "{tmp_path / "o"}"}}

[[models]]
id = "c2"
group = {{kind = "Cyclic", n = 2}}
levy = {{kind = "CyclicRates", rates = [1.0]}}

[[models]]
id = "s2"
group = {{kind = "RealLine"}}
levy = {{kind = "Stable", alpha = 2.0}}
"""
    p = tmp_path / "d.toml"
    p.write_text(text)
    assert main(["run", str(p)]) == 0
    header = (tmp_path / "o" / "dichotomy.csv").read_text().splitlines()[0]
    assert header == "model_id,kind,source,slope,ci,predicted,verdict"
    rows = json.loads((tmp_path / "o" / "dichotomy.json").read_text())
    assert [r["verdict"] for r in rows] == ["Discrete2", "ConnectedAtLeast4"]
    summary = (tmp_path / "o" / "summary.txt").read_text()
    assert "c2: discrete" in summary and "s2: connected" in summary


def test_print_schema(capsys):
    assert main(["print-schema"]) == 0
    assert 'schema = "shecli/1"' in capsys.readouterr().out


@pytest.mark.slow
def test_verify_all_default(tmp_path, monkeypatch):
    monkeypatch.setenv("SHE_OUTPUT_DIR", str(tmp_path))
    assert main(["verify-all"]) == 0
    rows = json.loads((tmp_path / "verify.json").read_text())
    assert all(r["ok"] for r in rows) and len(rows) >= 26
