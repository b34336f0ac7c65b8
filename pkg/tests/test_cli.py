import json

import pytest

from elab import cli
from elab.symflow import IdentityFailure


def _flow(tmp_path, *extra, name="out"):
    out = tmp_path / name
    code = cli.main(["flow", "--preset", "kirchhoff", "--grid", "8x8", "--t", "0:0.5:2",
                     "-o", str(out), *extra])
    return code, out


def test_parse_config():
    cfg = cli.parse_config("""
# a comment
preset = gerstner
k = 2.0   # trailing comment
reflect1 = true
grid = 16x16
""")
    assert cfg.family == "gerstner" and cfg.k == 2.0 and cfg.reflect1 is True
    assert cfg.grid == "16x16"
    with pytest.raises(cli.ConfigError, match="line 2"):
        cli.parse_config("k = 1\nspeed = 3\n")
    with pytest.raises(cli.ConfigError):
        cli.parse_config("k 1\n")


def test_times_are_inclusive():
    cfg = cli.RunConfig(t="0:0.5:2")
    assert list(cfg.times()) == [0.0, 0.5, 1.0, 1.5, 2.0]


def test_usage_errors_exit_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["flow", "--bogus"])
    assert e.value.code == 1
    code = cli.main(["flow", "--family", "family2", "--mu", "1.0", "--theta", "1.0",
                     "-o", str(tmp_path / "eq")])
    assert code == 1
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("tol_det = -1\n")
    code, _ = _flow(tmp_path, "--config", str(cfg))
    assert code == 1
    assert "elab flow" in capsys.readouterr().err


def test_verification_failure_exits_2(tmp_path):
    cfg = tmp_path / "strict.cfg"
    cfg.write_text("tol_euler = 1e-300\n")
    code, out = _flow(tmp_path, "--config", str(cfg))
    assert code == 2
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] is False


def test_kirchhoff_run_is_reproducible(tmp_path, capsys):
    code, a = _flow(tmp_path, name="a")
    assert code == 0
    code, b = _flow(tmp_path, name="b")
    assert code == 0
    for f in ("report.json", "trajectories.csv", "path.csv"):
        ta, tb = (a / f).read_text(), (b / f).read_text()
        if f == "report.json":
            ta = ta.replace(str(a), "OUT")
            tb = tb.replace(str(b), "OUT")
        assert ta == tb, f
    report = json.loads((a / "report.json").read_text())
    assert report["pass"] and report["kind"] == "family1"
    checks = {r["check"] for r in report["reports"]}
    assert {"det_drift", "n12_numeric", "euler_residual", "eulerian_divergence"} <= checks
    # the Kirchhoff flow carries its pressure, so none is recovered
    assert not (a / "pressure.csv").exists()
    assert "PASS" in capsys.readouterr().out


def test_verify_identities(tmp_path, capsys):
    out = tmp_path / "thm52.json"
    assert cli.main(["verify-identities", "thm52", "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert {"q1", "q2", "det", "n12"} <= set(data)
    assert cli.main(["verify-identities", "reflections"]) == 0
    assert "reflect1=True,reflect2=True" in capsys.readouterr().out


def test_identity_failure_exits_2(monkeypatch, capsys):
    def boom():
        raise IdentityFailure("q1", "u1_10")

    monkeypatch.setattr(cli, "_thm52", boom)
    assert cli.main(["verify-identities", "thm52"]) == 2
    assert "offending polynomial: u1_10" in capsys.readouterr().err


def test_prove_rigidity(tmp_path):
    out = tmp_path / "rigid.json"
    assert cli.main(["prove-rigidity", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["dimensions"] == {"complex": 6, "real": 5}


def test_elliptic_inverse_writes_recovered_fields(tmp_path):
    out = tmp_path / "ei"
    assert cli.main(["flow", "--family", "elliptic-inverse", "--grid", "24x24",
                     "--t", "0:0.5:1", "-o", str(out)]) == 0
    for f in ("v.csv", "pressure.csv", "trajectories.csv", "report.json"):
        assert (out / f).exists()
    assert (out / "v.csv").read_text().splitlines()[0] == "alpha1,alpha2,f1,f2"
