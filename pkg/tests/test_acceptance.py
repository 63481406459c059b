"""Acceptance criteria.  Each test prints one PASS/FAIL line in the summary."""

import json
import time

import numpy as np
import pytest

import oracles
from quadiag import (
    BosonForm,
    NotDiagonalizable,
    PairingForm,
    assemble_coefficient_matrix,
    classify,
    diagonalize,
    dynamic_matrix,
    generate,
    verify,
)
from quadiag.cli import main
from quadiag.dynamics import heisenberg_matrix
from quadiag.spectral import COMPLEX, DEFECTIVE, PHYSICAL


def _max_err(got, want):
    return float(np.max(np.abs(np.asarray(got, float) - np.asarray(want, float)), initial=0.0))


@pytest.mark.acceptance(1, "single-mode squeeze three phases, omega 4 and constant -0.5, runtime < 10 ms")
def test_c01_single_squeeze_phases(measured):
    def run():
        verdicts = [classify(dynamic_matrix(BosonForm([[a]], [[g]]))).verdict for a, g in ((5, 3), (1, 1), (1, 3))]
        return verdicts, diagonalize(BosonForm([[5]], [[3]]))

    run()
    times = []
    for _ in range(5):
        start = time.perf_counter()
        verdicts, d = run()
        times.append(time.perf_counter() - start)
    elapsed = float(np.median(times))
    measured["verdicts"] = verdicts
    measured["omega_err"] = f"{abs(d.omegas[0] - 4):.1e}"
    measured["ms"] = f"{1e3 * elapsed:.2f}"
    assert verdicts == [PHYSICAL, DEFECTIVE, COMPLEX]
    assert abs(d.omegas[0] - 4.0) <= 1e-10
    assert abs(d.constant + 0.5) <= 1e-10
    assert elapsed < 0.010


@pytest.mark.acceptance(2, "hopping pair omegas {2, 0} and T+MT = diag(2,0,2,0)")
def test_c02_hopping_pair(measured):
    form = generate("hopping_pair")
    d = diagonalize(form)
    c = d.t.conj().T @ assemble_coefficient_matrix(form).m @ d.t
    off = float(np.max(np.abs(c - np.diag(np.diag(c)))))
    measured["omegas"] = [round(float(w), 12) for w in d.omegas]
    measured["offdiag"] = f"{off:.1e}"
    assert _max_err(d.omegas, [2, 0]) <= 1e-10
    assert _max_err(np.diag(c).real, [2, 0, 2, 0]) <= 1e-10
    assert off <= 1e-10


@pytest.mark.acceptance(3, "rank-one triplet omegas {4, 0, 0}, residuals <= 1e-9")
def test_c03_rank_one_triplet(measured):
    form = generate("rank_one_triplet")
    d = diagonalize(form)
    worst = verify(d, form).worst()
    measured["omegas"] = [round(float(w), 12) for w in d.omegas]
    measured["worst"] = f"{worst:.1e}"
    assert _max_err(sorted(d.omegas), [0, 0, 4]) <= 1e-10
    assert worst <= 1e-9


@pytest.mark.acceptance(4, "fermion pair-gap for 20 random draws, constants to 1e-10 relative")
def test_c04_fermion_pair_gap(measured):
    rng = np.random.default_rng(4)
    worst = 0.0
    for alpha, gamma in rng.uniform(-5, 5, size=(20, 2)):
        d = diagonalize(generate("fermion_pair_gap", {"alpha": alpha, "gamma": gamma}))
        w = np.hypot(alpha, gamma)
        # relative to the energy scale w; the constant alpha - w can vanish
        worst = max(worst, _max_err(d.omegas, [w, w]) / w, abs(d.constant - (alpha - w)) / w)
    measured["worst_rel"] = f"{worst:.1e}"
    assert worst <= 1e-10


_MU_NU_VECTORS = {
    "+w1": np.array([1, 1, -1, 1]) / 2,
    "+w2": np.array([1, 1, 1, -1]) / 2,
    "-w1": np.array([-1, 1, 1, 1]) / 2,
    "-w2": np.array([1, -1, 1, 1]) / 2,
}
_PICTURES = {
    frozenset({"+w1", "+w2"}): "particle",
    frozenset({"-w1", "-w2"}): "hole",
    frozenset({"+w1", "-w2"}): "mixed",
}


def _picture(t):
    """Which eigenvectors of the mu,nu example span the left half of T."""
    q, _ = np.linalg.qr(t[:, :2])
    inside = frozenset(k for k, v in _MU_NU_VECTORS.items() if np.linalg.norm(v - q @ (q.conj().T @ v)) < 1e-8)
    return _PICTURES.get(inside, "none")


@pytest.mark.acceptance(5, "fermion mu,nu three-case table with picture tags on a 9-point grid")
def test_c05_mu_nu_table(measured):
    nu = 1.0
    grid = [-1.5, -1.2, -1.01, -0.99, -0.3, 0.4, 0.99, 1.01, 1.5]
    bad = []
    for mu in grid:
        d = diagonalize(generate("fermion_mu_nu", {"mu": mu, "nu": nu}))
        if mu > nu:
            picture, constant = "particle", -mu
        elif mu < -nu:
            picture, constant = "hole", mu
        else:
            picture, constant = "mixed", -nu
        ok = (_picture(d.t) == picture and abs(d.constant - constant) <= 1e-10
              and _max_err(sorted(d.omegas), sorted([abs(mu + nu), abs(mu - nu)])) <= 1e-10)
        if not ok:
            bad.append(mu)
    measured["points"] = len(grid)
    measured["bad"] = bad
    assert not bad


@pytest.mark.acceptance(6, "Bose pairing (3,1,1) closed form, (1,0,2) complex spectrum")
def test_c06_bose_pairing(measured):
    e1, e2, g = 3.0, 1.0, 1.0
    d = diagonalize(PairingForm([[e1]], [[e2]], [[g]], "boson"))
    root = np.sqrt((e1 + e2) ** 2 - 4 * g ** 2)
    w1, w2 = (e1 - e2 + root) / 2, (e1 - e2 - root) / 2
    # the second excitation appears as -w2 d+ d
    err = _max_err(d.omegas, [w1, -w2])
    measured["err"] = f"{err:.1e}"
    assert err <= 1e-10
    with pytest.raises(NotDiagonalizable) as info:
        diagonalize(PairingForm([[1]], [[0]], [[2]], "boson"))
    measured["second"] = info.value.classification.verdict
    assert info.value.classification.verdict == COMPLEX


@pytest.mark.acceptance(7, "Landau one nonzero omega 2 wL and constant wL")
def test_c07_landau(measured):
    worst = 0.0
    for wl in (0.25, 0.5, 2.0):
        d = diagonalize(generate("landau", {"m": 1, "omega_L": wl}), allow_partial=True)
        nonzero = [w for w in d.omegas if abs(w) > 1e-8]
        assert len(nonzero) == 1
        worst = max(worst, abs(nonzero[0] - 2 * wl), abs(d.constant - wl))
    measured["worst"] = f"{worst:.1e}"
    assert worst <= 1e-10


@pytest.mark.acceptance(8, "Klein-Gordon (3,4) omega 5 and 50 random draws")
def test_c08_klein_gordon(measured):
    first = diagonalize(generate("klein_gordon", {"m": 3, "p": 4})).omegas
    assert len(first) == 1 and abs(first[0] - 5) <= 1e-10
    rng = np.random.default_rng(8)
    worst = 0.0
    for m, p in rng.uniform(0.01, 50, size=(50, 2)):
        (w,) = diagonalize(generate("klein_gordon", {"m": m, "p": p})).omegas
        worst = max(worst, abs(w - np.hypot(m, p)) / np.hypot(m, p))
    measured["worst_rel"] = f"{worst:.1e}"
    assert worst <= 1e-10


@pytest.mark.acceptance(9, "J_z omegas (+1, -1 signed), constant 0")
def test_c09_jz(measured):
    d = diagonalize(generate("jz"))
    measured["omegas"] = [float(w) for w in d.omegas]
    measured["tags"] = d.tags
    # exact up to floating-point roundoff
    assert _max_err(d.omegas, [1, -1]) <= 1e-14
    assert d.tags == ["normal", "time-polarized"]
    assert abs(d.constant) <= 1e-14


@pytest.mark.acceptance(10, "500 random instances: recovery, residuals, oracle equivalence, < 30 s")
def test_c10_property_suite(measured):
    rng = np.random.default_rng(10)
    start = time.perf_counter()
    worst_rec = worst_res = worst_oracle = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 5))
        w = rng.uniform(0.1, 10, n)
        alpha, gamma, _ = oracles.boson_from_spectrum(w, oracles.random_bv_matrix(n, rng))
        form = BosonForm(alpha, gamma)
        d = diagonalize(form)
        worst_rec = max(worst_rec, float(np.max(np.abs(np.sort(d.omegas) - np.sort(w)) / np.sort(w))))
        rep = verify(d, form)
        worst_res = max(worst_res, rep.metric, rep.involution, rep.congruence)
        worst_oracle = max(worst_oracle, float(np.max(np.abs(heisenberg_matrix(form) - dynamic_matrix(form).d))))
    elapsed = time.perf_counter() - start
    measured.update(recovery=f"{worst_rec:.1e}", residual=f"{worst_res:.1e}",
                    oracle=f"{worst_oracle:.1e}", s=f"{elapsed:.1f}")
    assert worst_rec <= 1e-8
    assert worst_res <= 1e-9
    assert worst_oracle <= 1e-12
    assert elapsed < 30


@pytest.mark.acceptance(11, "Fock space cutoff 200: gap 4 and ground -0.5 to 1e-6")
def test_c11_fock(measured):
    levels = oracles.fock_boson_single(5.0, 3.0, cutoff=200)
    gap, ground = levels[1] - levels[0], levels[0]
    measured["gap"] = f"{gap:.9f}"
    measured["ground"] = f"{ground:.9f}"
    assert abs(gap - 4) <= 1e-6
    assert abs(ground + 0.5) <= 1e-6


@pytest.mark.acceptance(12, "phonon ring N=4: omegas {sqrt2, 2, sqrt2}, k=0 residual only with --allow-partial")
def test_c12_phonon_ring(tmp_path, capsys, measured):
    path = tmp_path / "ring.json"
    path.write_text(json.dumps({"kind": "model", "name": "phonon_ring", "parameters": {"N": 4, "k": 1, "m": 1}}))
    code = main(["diagonalize", str(path), "--allow-partial"])
    report = json.loads(capsys.readouterr().out)
    err = _max_err(sorted(report["omegas"]), sorted([np.sqrt(2), 2, np.sqrt(2)]))
    measured["err"] = f"{err:.1e}"
    assert code == 0 and report["verdict"] == "partial"
    assert err <= 1e-9
    assert len(report["residual_modes"]) == 1
    code = main(["diagonalize", str(path)])
    report = json.loads(capsys.readouterr().out)
    measured["no_flag"] = report["verdict"]
    assert code == 2 and report["verdict"] == "not-diagonalizable"
