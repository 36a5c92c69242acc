import json
from pathlib import Path

import pytest

from exq.cli import EXIT_DOMAIN, EXIT_FAIL, EXIT_OK, EXIT_PARSE, main

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_analyze_annulus(tmp_path):
    assert run(tmp_path, "--command", "analyze", "--domain", str(FIX / "annulus_2_1.json")) == EXIT_OK
    doc = json.loads((tmp_path / "analyze.json").read_text())
    assert doc["summary"]["lambda_min"] == pytest.approx(1.0, rel=1e-12)
    assert doc["monodromy_sum_over_2pi"] == pytest.approx(1.0)


def test_parse_and_domain_errors(tmp_path):
    assert run(tmp_path, "--command", "analyze", "--domain", str(FIX / "malformed.json")) == EXIT_PARSE
    assert run(tmp_path, "--command", "analyze", "--domain", str(FIX / "overlapping.json")) == EXIT_DOMAIN
    assert run(tmp_path, "--command", "analyze", "--domain", str(tmp_path / "missing.json")) == EXIT_PARSE
    assert run(tmp_path, "--command", "nope") == EXIT_PARSE
    assert run(tmp_path, "--command", "analyze", "--samples", "8", "--domain", str(FIX / "annulus_2_1.json")) == EXIT_PARSE
    assert run(tmp_path, "--command", "fit", "--basis", "8", "--domain", str(FIX / "annulus_2_1.json")) == EXIT_PARSE


def test_fit_verdicts(tmp_path):
    assert run(tmp_path / "a", "--command", "fit", "--domain", str(FIX / "annulus_2_1.json")) == EXIT_OK
    assert json.loads((tmp_path / "a" / "fit.json").read_text())["verdict"] == "Extremal"
    assert run(tmp_path / "b", "--command", "fit", "--domain", str(FIX / "perturbed_annulus.json")) == EXIT_FAIL
    assert json.loads((tmp_path / "b" / "fit.json").read_text())["verdict"] == "NotExtremal"


def test_appendix_concentric(tmp_path):
    assert run(tmp_path, "--command", "appendix", "--domain", str(FIX / "annulus_3_2.json")) == EXIT_OK
    assert "overall: PASS" in (tmp_path / "appendix.txt").read_text()


def test_stokes_outputs(tmp_path):
    assert run(tmp_path, "--command", "stokes", "--domain", str(FIX / "annulus_2_1.json")) == EXIT_OK
    svg = (tmp_path / "stokes.svg").read_text()
    assert 'width="1024" height="1024"' in svg
    assert json.loads((tmp_path / "stokes.json").read_text())["classification"]["maximal"] is True


def test_wkb_default_and_phi_file(tmp_path):
    assert run(tmp_path / "a", "--command", "wkb") == EXIT_OK
    phi = tmp_path / "phi.json"
    phi.write_text(json.dumps({"poly": [[0, 0], [1, 0]], "poles": []}))
    assert run(tmp_path / "b", "--command", "wkb", "--phi", str(phi), "--path=-0.5,0;0.5,0") == EXIT_FAIL


def test_byte_identical_reruns(tmp_path):
    for sub in ("x", "y"):
        for cmd in ("analyze", "fit", "stokes", "appendix"):
            run(tmp_path / sub, "--command", cmd, "--domain", str(FIX / "annulus_2_1.json"), "--seed", "7")
    for f in sorted((tmp_path / "x").iterdir()):
        assert f.read_bytes() == (tmp_path / "y" / f.name).read_bytes(), f.name
