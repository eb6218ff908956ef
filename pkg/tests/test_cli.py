import io
import json
import subprocess
import sys

import pytest

from conftest import FIXTURES, JACOBI_LATEX, JACOBI_MAPLE, JACOBI_MATHEMATICA
from mathsem.cli import run
from mathsem.config import Config, config_path, load_config
from mathsem.errors import ConfigError
from mathsem.lexicon import bundled_lexicon_path


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MATHSEM_CONFIG", raising=False)
    return tmp_path


# -- config ------------------------------------------------------------------


def test_defaults_without_file(isolated):
    assert load_config(cwd=isolated) == Config()
    assert config_path(cwd=isolated) == (None, False)


def test_local_file_then_env_then_flag(isolated):
    (isolated / "mathsem.json").write_text(json.dumps({"weights": {"tau": 0.7}}), encoding="utf-8")
    other = isolated / "other.json"
    other.write_text(json.dumps({"weights": {"tau": 0.6}}), encoding="utf-8")
    explicit = isolated / "explicit.json"
    explicit.write_text(json.dumps({"weights": {"tau": 0.5}}), encoding="utf-8")
    assert load_config(env={}, cwd=isolated).weights.tau == 0.7
    env = {"MATHSEM_CONFIG": str(other)}
    assert load_config(env=env, cwd=isolated).weights.tau == 0.6
    assert load_config(str(explicit), env=env, cwd=isolated).weights.tau == 0.5
    assert load_config(str(explicit)).with_overrides(**{"weights.tau": 0.9}).weights.tau == 0.9


def test_missing_explicit_config():
    with pytest.raises(ConfigError):
        load_config("nope.json")
    with pytest.raises(ConfigError):
        load_config(env={"MATHSEM_CONFIG": "nope.json"})


@pytest.mark.parametrize("data", [
    {"bogus": 1},
    {"weights": {"tau": 2}},
    {"weights": {"tau": "high"}},
    {"context": {"window": -1}},
    {"sampler": {"count": 1.5}},
    {"sampler": {"region": "ring"}},
    {"tolerance": 0},
    [],
])
def test_bad_config(isolated, data):
    path = isolated / "bad.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_relative_lexicon_resolves_against_config(isolated):
    sub = isolated / "conf"
    sub.mkdir()
    (sub / "lex.json").write_bytes(bundled_lexicon_path().read_bytes())
    (sub / "mathsem.json").write_text(json.dumps({"lexicon": "lex.json"}), encoding="utf-8")
    assert load_config(str(sub / "mathsem.json")).lexicon == str(sub / "lex.json")


def test_config_round_trips_through_dict():
    cfg = Config().with_overrides(**{"sampler.seed": 9, "context.window": 3, "cutoff": 0.4})
    assert cfg.sampler.seed == 9 and cfg.window == 3 and cfg.cutoff == 0.4
    assert Config().with_overrides(tolerance=None) == Config()


# -- commands ----------------------------------------------------------------


@pytest.mark.parametrize("dialect,expected", [("maple", JACOBI_MAPLE), ("mathematica", JACOBI_MATHEMATICA)])
def test_translate_generic_jacobi(dialect, expected):
    assert cli("translate", JACOBI_LATEX, "--to", dialect) == (0, expected + "\n", "")


def test_translate_json():
    code, out, _ = cli("translate", r"\gamma", "--to", "maple", "--json")
    data = json.loads(out)
    assert code == 0 and data["output"] == "gamma"
    assert data["nodes"][0]["decided"] == "const:EulerMascheroni"


def test_translate_with_context():
    code, out, _ = cli("translate", r"\epsilon", "--to", "maple", "--context", str(FIXTURES / "dlmf_1_5.txt"))
    assert (code, out) == (0, "epsilon\n")


def test_translate_without_context_is_undecided():
    code, out, err = cli("translate", r"\epsilon", "--to", "maple")
    assert code == 1 and out == ""
    assert "undecided" in err and "^" in err


def test_undecided_diagnostic_underlines_symbols():
    code, _, err = cli("translate", "E=mc^2", "--to", "maple")
    lines = err.splitlines()
    assert code == 1
    assert lines[1] == "  E=mc^2"
    assert lines[2] == "  ^ ^^"


def test_syntax_error_exit_code():
    code, _, err = cli("parse", "x^")
    assert code == 1 and err.startswith("error:")


def test_usage_error_exit_code():
    assert cli("translate", "x")[0] == 2
    assert cli("frobnicate")[0] == 2
    assert cli("verify", "x", "--to", "maple", "--fix", "nonsense")[0] == 2


def test_tau_flag_overrides():
    assert cli("translate", r"\gamma", "--to", "maple", "--tau", "0.99")[0] == 1


def test_bad_config_exit_code(isolated):
    (isolated / "mathsem.json").write_text("{", encoding="utf-8")
    assert cli("parse", "x")[0] == 2


def test_env_config_is_used(isolated, monkeypatch):
    path = isolated / "env.json"
    path.write_text(json.dumps({"weights": {"tau": 0.99}}), encoding="utf-8")
    monkeypatch.setenv("MATHSEM_CONFIG", str(path))
    assert cli("translate", r"\gamma", "--to", "maple")[0] == 1


def test_missing_document_exit_code():
    code, _, err = cli("analyze", "absent.txt")
    assert code == 2 and "absent.txt" in err


def test_parse_canonical():
    code, out, _ = cli("parse", r"\frac 1 x")
    assert (code, out) == (0, "\\frac{1}{x}\n")
    data = json.loads(cli("parse", JACOBI_LATEX, "--json")[1])
    assert data["tokens"] == 18 and data["canonical"] == JACOBI_LATEX


def test_verify_pass_and_fail():
    code, out, _ = cli("verify", JACOBI_LATEX, "--to", "maple", "--fix", "n=3")
    assert code == 0 and out.startswith("pass: ")
    code, out, _ = cli("verify", r"\Gamma(z)", "--to", "mathematica", "--json", "--count", "5", "--seed", "4")
    data = json.loads(out)
    assert code == 0 and data["samples"] == 5 and data["seed"] == 4


def test_probe_text_and_csv(isolated):
    code, out, _ = cli("probe", r"\sqrt{z^2}", "--csv", "cut.csv")
    assert code == 0 and "2 jump(s)" in out
    assert (isolated / "cut.csv").read_text(encoding="utf-8").startswith("phi,re,im")
    code, out, _ = cli("probe", "z^3", "--samples", "256")
    assert "continuous" in out
    assert cli("probe", "z", "--samples", "4")[0] == 2


def test_analyze_epsilon():
    code, out, _ = cli("analyze", str(FIXTURES / "dlmf_1_5.txt"), "--json")
    data = json.loads(out)
    assert code == 0
    assert data["candidates"]["\\epsilon"][0]["definiens"] == "constant"


def test_eval_gold_bundled():
    code, out, _ = cli("eval-gold", "--json")
    data = json.loads(out)
    assert code == 0
    assert set(data) == {"definiens", "senses"}
    assert data["senses"]["aggregate"]["precision"] == 1.0


def test_out_flag(isolated):
    code, out, _ = cli("parse", "x+1", "--out", "result.txt")
    assert (code, out) == (0, "")
    assert (isolated / "result.txt").read_text(encoding="utf-8") == "x+1\n"


def test_output_is_byte_deterministic():
    first = cli("analyze", str(FIXTURES / "dlmf_1_5.txt"), "--json")
    second = cli("analyze", str(FIXTURES / "dlmf_1_5.txt"), "--json")
    assert first == second
    assert cli("eval-gold", "--json", "--jobs", "2") == cli("eval-gold", "--json")


def test_commands_write_no_files(isolated):
    cli("translate", JACOBI_LATEX, "--to", "maple")
    cli("verify", JACOBI_LATEX, "--to", "maple", "--fix", "n=2")
    cli("analyze", str(FIXTURES / "dlmf_1_5.txt"))
    cli("eval-gold")
    assert list(isolated.iterdir()) == []


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mathsem", "parse", "x^{2}"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "x^2\n"
