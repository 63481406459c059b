import json
import subprocess
import sys

import numpy as np
import pytest

from quadiag import BosonForm, verify
from quadiag.cli import ParseError, decode_matrix, encode_matrix, main, parse_matrix, parse_problem
from quadiag.spectral import DEFECTIVE


def write(tmp_path, doc, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_boson_single_squeeze(tmp_path, capsys):
    path = write(tmp_path, {"kind": "boson", "n": 1, "alpha": [[5]], "gamma": [[3]]})
    code, out, _ = run(["diagonalize", path], capsys)
    report = json.loads(out)
    assert code == 0
    assert report["verdict"] == "diagonalized"
    assert report["omegas"] == pytest.approx([4.0], abs=1e-12)
    assert report["constant"] == pytest.approx(-0.5, abs=1e-12)
    assert report["verified"] is True
    assert set(report["residuals"]) >= {"metric", "congruence", "similarity", "involution", "reconstruction"}


def test_boson_defective(tmp_path, capsys):
    path = write(tmp_path, {"kind": "boson", "alpha": [[1]], "gamma": [[1]]})
    code, out, _ = run(["diagonalize", path], capsys)
    report = json.loads(out)
    assert code == 2
    assert report["verdict"] == "not-diagonalizable"
    assert report["classification"] == DEFECTIVE
    assert report["message"].startswith("defective at omega=0")


def test_landau_model(tmp_path, capsys):
    path = write(tmp_path, {"kind": "model", "name": "landau", "parameters": {"m": 1, "omega_L": 0.5}})
    code, out, _ = run(["diagonalize", path], capsys)
    report = json.loads(out)
    assert code == 0 and report["verdict"] == "partial"
    assert report["omegas"] == pytest.approx([1.0])
    assert len(report["residual_modes"]) == 2
    code, out, _ = run(["diagonalize", path, "--no-allow-partial"], capsys)
    report = json.loads(out)
    assert code == 0 and report["verdict"] == "diagonalized"
    assert sorted(report["omegas"]) == pytest.approx([0.0, 1.0], abs=1e-10)


def test_phonon_partial_flag(tmp_path, capsys):
    doc = {"kind": "model", "name": "phonon_ring", "parameters": {"N": 4, "k": 1, "m": 1}}
    path = write(tmp_path, doc)
    code, out, _ = run(["diagonalize", path], capsys)
    assert code == 2
    # file options sit below the flag
    path = write(tmp_path, {**doc, "options": {"allow_partial": True}})
    code, out, _ = run(["diagonalize", path, "--no-allow-partial"], capsys)
    assert code == 2
    code, out, _ = run(["diagonalize", path, "--allow-partial"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "partial"


@pytest.mark.parametrize("doc, word, code", [
    ({"kind": "boson", "alpha": [[1]], "gamma": [[3]]}, "complex-spectrum", 2),
    ({"kind": "boson", "alpha": [[5]], "gamma": [[3]]}, "physically-diagonalizable", 0),
    ({"kind": "fermion", "alpha": [[1, 0], [0, -2]], "gamma": [[0, 3], [-3, 0]]}, "physically-diagonalizable", 0),
    ({"kind": "pairing-bose", "alpha": [[1]], "epsilon": [[0]], "gamma": [[2]]}, "complex-spectrum", 2),
])
def test_check(tmp_path, capsys, doc, word, code):
    got, out, _ = run(["check", write(tmp_path, doc)], capsys)
    assert got == code
    assert out.split(":")[0].strip() == word


def test_check_json(tmp_path, capsys):
    path = write(tmp_path, {"kind": "boson", "alpha": [[1]], "gamma": [[3]]})
    code, out, _ = run(["check", path, "--format", "json"], capsys)
    assert json.loads(out)["verdict"] == "complex-spectrum"


def test_malformed_row(tmp_path, capsys):
    path = write(tmp_path, {"kind": "boson", "alpha": [[1, 0], [0]], "gamma": [[0, 0], [0, 0]]})
    code, _, err = run(["check", path], capsys)
    assert code == 1
    assert "alpha[1]" in err
    code, out, _ = run(["diagonalize", path], capsys)
    assert code == 1 and json.loads(out)["verdict"] == "error"


@pytest.mark.parametrize("doc, field", [
    ({"alpha": [[1]]}, "kind"),
    ({"kind": "spin"}, "kind"),
    ({"kind": "boson"}, "alpha"),
    ({"kind": "boson", "n": 2, "alpha": [[1]]}, "alpha"),
    ({"kind": "boson", "alpha": [[1, 0], [[2], 1]]}, "alpha[1][0]"),
    ({"kind": "boson", "alpha": [[1]], "options": {"tolerances": {"foo": 1}}}, "options.tolerances.foo"),
    ({"kind": "boson", "alpha": [[1]], "options": {"allow_partial": 1}}, "options.allow_partial"),
    ({"kind": "coord", "mu": [[1]]}, "kappa"),
])
def test_parse_errors_name_field(doc, field):
    with pytest.raises(ParseError, match=field.replace("[", r"\[").replace("]", r"\]")):
        parse_problem(doc)


def test_parse_matrix_accepts_pairs():
    a = parse_matrix([[1, [0, 2]], [[0, -2], 3]], "alpha")
    np.testing.assert_array_equal(a, [[1, 2j], [-2j, 3]])


def test_structural_violation_is_parse_error():
    with pytest.raises(ParseError):
        parse_problem({"kind": "boson", "alpha": [[1, 2], [3, 1]]})


def test_unreadable_file(capsys):
    code, _, err = run(["diagonalize", "/nonexistent/problem.json"], capsys)
    assert code == 1 and "cannot read" in err


def test_transform_round_trip(tmp_path, capsys):
    doc = {"kind": "boson", "alpha": [[2, [0.3, 0.1]], [[0.3, -0.1], 1.5]], "gamma": [[0.4, 0.2], [0.2, -0.1]]}
    path = write(tmp_path, doc)
    code, out, _ = run(["diagonalize", path, "--emit-transform"], capsys)
    report = json.loads(out)
    assert code == 0
    t = decode_matrix(report["transform"])
    form, _ = parse_problem(doc)
    again = verify(t, form).as_dict()
    for key, value in report["residuals"].items():
        if value is not None:
            assert abs(again[key] - value) <= 1e-12


def test_encode_decode_exact():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    back = decode_matrix(json.loads(json.dumps(encode_matrix(a))))
    np.testing.assert_array_equal(back, a)


def test_byte_identical(tmp_path, capsys):
    doc = {"kind": "model", "name": "rank_one_triplet"}
    path = write(tmp_path, doc)
    outs = []
    for k in range(2):
        target = str(tmp_path / f"out{k}.json")
        assert main(["diagonalize", path, "--emit-transform", "-o", target]) == 0
        outs.append(open(target, "rb").read())
    assert outs[0] == outs[1]


def test_text_format(tmp_path, capsys):
    path = write(tmp_path, {"kind": "model", "name": "jz"})
    code, out, _ = run(["diagonalize", path, "--format", "text"], capsys)
    assert code == 0
    assert "verdict: diagonalized" in out and "time-polarized" in out


def test_tolerance_flags(tmp_path, capsys):
    doc = {"kind": "boson", "alpha": [[2, [0.3, 0.1]], [[0.3, -0.1], 1.5]], "gamma": [[0.4, 0.2], [0.2, -0.1]],
           "options": {"tolerances": {"orth": 1e-300}}}
    path = write(tmp_path, doc)
    _, out, _ = run(["diagonalize", path], capsys)
    assert json.loads(out)["verified"] is False
    # the flag overrides the file
    _, out, _ = run(["diagonalize", path, "--tol-orth", "1e-9"], capsys)
    assert json.loads(out)["verified"] is True


def test_corpus_all(capsys):
    code, out, _ = run(["corpus"], capsys)
    assert code == 0
    assert out.strip().splitlines()[-1].startswith("22/22")


def test_corpus_filter(capsys):
    code, out, _ = run(["corpus", "landau"], capsys)
    lines = out.strip().splitlines()
    assert code == 0
    assert len(lines) == 3 and lines[1].startswith("landau(")


def test_corpus_corrupted(tmp_path, capsys):
    fixtures = [{"name": "klein_gordon", "parameters": {"m": 3, "p": 4}, "expected": {"omegas": [6.0]}}]
    path = write(tmp_path, fixtures, "fixtures.json")
    code, out, _ = run(["corpus", "--fixtures", path], capsys)
    assert code != 0
    assert "diff klein_gordon(m=3,p=4): omegas: expected [6], got [5]" in out


def test_module_entry_point(tmp_path):
    path = write(tmp_path, {"kind": "boson", "alpha": [[5]], "gamma": [[3]]})
    proc = subprocess.run([sys.executable, "-m", "quadiag", "check", path], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "physically-diagonalizable"


def test_boson_form_fixture_helper():
    # the CLI and the library agree on the same input
    form, _ = parse_problem({"kind": "boson", "alpha": [[5]], "gamma": [[3]]})
    assert isinstance(form, BosonForm) and form.n == 1
