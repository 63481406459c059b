"""
Bogoliubov-Valatin diagonalization of bosonic, fermionic and pairing forms.

The normal BV matrix T_n collects G-orthonormal eigenvectors of the dynamic
matrix.  Bosons put the norm +1 vectors in the left half, fermions the
nonnegative-frequency ones; in both cases the right half holds the partners
Sigma_x v^*.  Then

    bosons:   T^+ I_- T = I_-,  T^+ M T = diag(w, w),
              H = sum w d^+ d + 1/2 sum w - 1/2 tr(alpha)
    fermions: T^+ T = I,        T^+ M T = diag(w, -w),
              H = sum w d^+ d - 1/2 sum w + 1/2 tr(alpha)
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    BosonForm,
    DegenerateMetric,
    FermionForm,
    Metric,
    NotDiagonalizable,
    PairingForm,
    QuadraticForm,
    StructuralViolation,
    Tolerances,
    as_matrix,
    assemble_coefficient_matrix,
    default_tolerances,
    form_kind,
    metric_for,
    metric_matrix,
)
from .dynamics import build_dynamic_matrix
from .gramschmidt import lex_key, orthonormalize_cluster, orthonormalize_zero_space, phase_fix
from .spectral import (
    CONJUGATE_SWAP,
    PHYSICAL,
    Classification,
    Eigensystem,
    classify_eigensystem,
    eigen_decompose,
    pair_modes,
    partner,
)

NORMAL = "normal"
TIME_POLARIZED = "time-polarized"
HOLE = "hole-transformed"


@dataclass(frozen=True)
class Mode:
    """One quasi-particle term omega d^+ d of the diagonal form."""

    omega: float
    statistics: str
    tag: str = NORMAL


@dataclass(frozen=True)
class Diagonalization:
    t: np.ndarray
    modes: Tuple[Mode, ...]
    constant: float
    kind: str
    classification: Optional[Classification] = None
    residual: Optional[dict] = None

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def tags(self) -> List[str]:
        return [m.tag for m in self.modes]


# ------------------------------------------------------------- engine


def _random_unitary(rng, k):
    z = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def normal_columns(eig: Eigensystem, metric: Metric, rule: str, include_zero: bool = True,
                   tol: Optional[Tolerances] = None, rotate=None):
    """Left half of the normal matrix and the frequency of each column.

    Columns come back sorted by descending frequency, ties broken by the
    phase-fixed vectors.  The right half is J applied to each column.
    ``rotate`` (a numpy Generator) mixes every degenerate eigenspace by a
    random unitary before orthonormalization; the result must not change.
    """
    j = partner(rule)
    definite = metric.definite
    pairs = pair_modes(eig, rule, include_zero=include_zero)
    by_cluster = {}
    for p in pairs:
        by_cluster.setdefault(p.cluster, []).append(p)
    cols = []
    for k in sorted(by_cluster):
        group = by_cluster[k]
        vs = np.column_stack([p.v_plus for p in group])
        if rotate is not None and vs.shape[1] > 1:
            vs = vs @ _random_unitary(rotate, vs.shape[1])
        omega = group[0].omega
        if omega == 0.0:
            nb = orthonormalize_zero_space([vs[:, c] for c in range(vs.shape[1])], metric, rule, tol)
            m = vs.shape[1]
            for c in range(m):
                w = nb.vectors[:, c]
                if definite:
                    a, b = phase_fix(w), phase_fix(j(w))
                    w = a if lex_key(a) <= lex_key(b) else b
                cols.append((0.0, w))
            continue
        nb = orthonormalize_cluster(vs, metric, tol)
        for c in range(nb.vectors.shape[1]):
            v = nb.vectors[:, c]
            if nb.norms[c] > 0:
                cols.append((omega, v))
            else:
                cols.append((-omega, phase_fix(j(v))))
    cols.sort(key=lambda item: (-item[0], lex_key(item[1])))
    left = np.column_stack([c[1] for c in cols]) if cols else np.zeros((metric.size, 0), complex)
    right = np.column_stack([j(left[:, c]) for c in range(left.shape[1])]) if cols else left
    return np.hstack([left, right]), [c[0] for c in cols]


def _analyse(form, tol):
    cm = assemble_coefficient_matrix(form)
    metric = metric_for(form)
    dm = build_dynamic_matrix(cm, metric)
    eig = eigen_decompose(dm, tol)
    return cm, metric, dm, eig


def _congruence_diagonal(t, m):
    return np.real(np.diag(t.conj().T @ m @ t))


def diagonalize_boson(form: BosonForm, tol: Optional[Tolerances] = None, rotate=None) -> Diagonalization:
    """BV diagonalization of a bosonic form, or NotDiagonalizable."""
    if not isinstance(form, BosonForm):
        raise TypeError("diagonalize_boson expects a BosonForm")
    tol = tol or default_tolerances()
    cm, metric, dm, eig = _analyse(form, tol)
    cls = classify_eigensystem(eig)
    if not cls.ok:
        raise NotDiagonalizable(cls)
    t, _ = normal_columns(eig, metric, CONJUGATE_SWAP, tol=tol, rotate=rotate)
    n = form.n
    omegas = _congruence_diagonal(t, cm.m)[:n]
    omegas = np.where(np.abs(omegas) <= eig.tol_cluster, 0.0, omegas)
    modes = tuple(Mode(float(w), "boson", NORMAL if w >= 0 else TIME_POLARIZED) for w in omegas)
    constant = 0.5 * float(np.sum(omegas)) + cm.offset
    return Diagonalization(t, modes, constant, "boson", cls)


def diagonalize_fermion(form: FermionForm, tol: Optional[Tolerances] = None, rotate=None) -> Diagonalization:
    """BV diagonalization of a fermionic form; always succeeds."""
    if not isinstance(form, FermionForm):
        raise TypeError("diagonalize_fermion expects a FermionForm")
    tol = tol or default_tolerances()
    cm, metric, dm, eig = _analyse(form, tol)
    cls = classify_eigensystem(eig)
    if not cls.ok:
        # D is Hermitian here; a failure means the tolerances are inconsistent
        raise NotDiagonalizable(cls)
    t, _ = normal_columns(eig, metric, CONJUGATE_SWAP, tol=tol, rotate=rotate)
    n = form.n
    omegas = _congruence_diagonal(t, cm.m)[:n]
    omegas = np.where(np.abs(omegas) <= eig.tol_cluster, 0.0, omegas)
    modes = tuple(Mode(float(w), "fermion", NORMAL) for w in omegas)
    constant = -0.5 * float(np.sum(omegas)) + cm.offset
    return Diagonalization(t, modes, constant, "fermion", cls)


def diagonalize_normal(alpha, statistics: str, full: bool = True) -> Diagonalization:
    """Diagonalize a number-conserving form sum alpha_ij c_i^+ c_j.

    Works on alpha alone with a Hermitian eigensolver.  Fermionic modes with
    negative energy are particle-hole transformed: their energy flips sign,
    they are tagged ``hole-transformed`` and their energy enters the constant.
    With ``full`` the transformation is returned in the 2n field basis,
    otherwise the n x n unitary U (holes noted only by tags).
    """
    if statistics not in ("boson", "fermion"):
        raise StructuralViolation(f"statistics must be 'boson' or 'fermion', got {statistics!r}")
    a = as_matrix(alpha, "alpha")
    if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-12 * (1 + np.max(np.abs(a))):
        raise StructuralViolation("alpha is not Hermitian")
    a = (a + a.conj().T) / 2
    lam, u = np.linalg.eigh(a)
    order = np.lexsort((np.arange(lam.size), -lam))
    lam, u = lam[order], u[:, order]
    u = np.column_stack([phase_fix(u[:, k]) for k in range(u.shape[1])])
    n = lam.size
    if statistics == "boson":
        modes = tuple(Mode(float(w), "boson", NORMAL if w >= 0 else TIME_POLARIZED) for w in lam)
        constant = 0.0
        holes = np.zeros(n, bool)
    else:
        holes = lam < 0
        modes = tuple(Mode(float(abs(w)), "fermion", HOLE if h else NORMAL) for w, h in zip(lam, holes))
        constant = float(np.sum(lam[holes]))
    if not full:
        return Diagonalization(u, modes, constant, f"normal-{statistics}")
    z = np.zeros((n, n))
    t = np.block([[u, z], [z, u.conj()]])
    for k in np.where(holes)[0]:
        t[:, [k, n + k]] = t[:, [n + k, k]]
    return Diagonalization(t, modes, constant, statistics)


def diagonalize_pairing(form: PairingForm, tol: Optional[Tolerances] = None) -> Diagonalization:
    """Diagonalize a pairing form on the reduced field (a, b^+).

    Bose: eigenvectors of D = I_- M are I_- orthonormalized and reordered so
    that U^+ I_- U = I_-; the time-polarized half is relabeled f = e^+.
    Fermi: M is a Hermitian problem of size 2n handled with holes.
    """
    if not isinstance(form, PairingForm):
        raise TypeError("diagonalize_pairing expects a PairingForm")
    tol = tol or default_tolerances()
    n = form.n
    if form.statistics == "fermion":
        cm = assemble_coefficient_matrix(form)
        base = diagonalize_normal(cm.m, "fermion", full=False)
        return Diagonalization(base.t, base.modes, base.constant + cm.offset, "pairing-fermi",
                               Classification(PHYSICAL, None))
    cm, metric, dm, eig = _analyse(form, tol)
    cls = classify_eigensystem(eig)
    if not cls.ok:
        raise NotDiagonalizable(cls)
    pos, neg = [], []
    for c in eig.clusters:
        nb = orthonormalize_cluster(c.basis, metric, tol)
        for k in range(nb.vectors.shape[1]):
            (pos if nb.norms[k] > 0 else neg).append((c.omega, nb.vectors[:, k]))
    if len(pos) != n or len(neg) != n:
        raise DegenerateMetric(f"inertia ({len(pos)}, {len(neg)}) differs from ({n}, {n})")
    pos.sort(key=lambda item: (-item[0], lex_key(item[1])))
    neg.sort(key=lambda item: (item[0], lex_key(item[1])))
    u = np.column_stack([v for _, v in pos] + [v for _, v in neg])
    diag = _congruence_diagonal(u, cm.m)
    # U^+ M U = diag(w_1..w_n, -w_{n+1}..-w_2n); both halves are excitation energies
    modes = tuple(Mode(float(w), "boson", NORMAL if w >= 0 else TIME_POLARIZED) for w in diag)
    constant = float(np.sum(diag[n:])) + cm.offset
    return Diagonalization(u, modes, constant, "pairing-bose", cls)


def pairing_as_full_form(form: PairingForm):
    """Re-encode a pairing form as a 2n-mode BosonForm or FermionForm."""
    n = form.n
    z = np.zeros((n, n))
    alpha = np.block([[form.alpha, z], [z, form.epsilon]])
    g = form.gamma
    if form.statistics == "boson":
        gamma = np.block([[z, g], [g.T, z]])
        return BosonForm(alpha, gamma)
    gamma = np.block([[z, g], [-g.T, z]])
    return FermionForm(alpha, gamma)


def particle_hole(diag: Diagonalization, indices: Sequence[int]) -> Diagonalization:
    """Relabel d_i <-> d_i^+ for the given fermionic modes.

    omega d^+ d = -omega f^+ f + omega, so the energy flips sign and the
    constant absorbs omega.  Applying it twice restores the input.
    """
    n = len(diag.modes)
    t = diag.t.copy()
    modes = list(diag.modes)
    constant = diag.constant
    for i in indices:
        m = modes[i]
        if m.statistics != "fermion":
            raise StructuralViolation("particle-hole relabeling applies to fermionic modes only")
        constant += m.omega
        modes[i] = Mode(-m.omega, m.statistics, NORMAL if m.tag == HOLE else HOLE)
        if t.shape[1] == 2 * n:
            t[:, [i, n + i]] = t[:, [n + i, i]]
    return replace(diag, t=t, modes=tuple(modes), constant=constant)


# ---------------------------------------------------------- verification


@dataclass(frozen=True)
class VerificationReport:
    metric: Optional[float] = None
    congruence: Optional[float] = None
    similarity: Optional[float] = None
    involution: Optional[float] = None
    reconstruction: Optional[float] = None
    unitarity: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("metric", "congruence", "similarity", "involution", "reconstruction", "unitarity")}

    def worst(self) -> float:
        return max((v for v in self.as_dict().values() if v is not None), default=0.0)


def _offdiag(a):
    return float(np.max(np.abs(a - np.diag(np.diag(a))), initial=0.0))


def _sigma_x(size):
    n = size // 2
    z, e = np.zeros((n, n)), np.eye(n)
    return np.block([[z, e], [e, z]])


def verify(diag, form: QuadraticForm) -> VerificationReport:
    """Residuals of a diagonalization against its form.  Never raises.

    ``diag`` is a diagonalization result or a bare transformation matrix.

    All residuals are relative: metric / (1 + |T|^2), congruence and
    similarity / |M| and |D|, involution / |T|, reconstruction / |M|.
    """
    try:
        t = np.asarray(getattr(diag, "t_d", getattr(diag, "t", diag)))
        cm = assemble_coefficient_matrix(form)
        m = cm.m
        kind = form_kind(form)
        if kind == "pairing-fermi":
            g = np.eye(m.shape[0])
        else:
            g = metric_matrix(metric_for(form))
        d = g @ m
        cols = t.shape[1]
        if cols == 0:
            # nothing diagonalized (e.g. a pure zero-mode partial result)
            return VerificationReport(0.0, 0.0)
        k = cols // 2
        if kind in ("fermion", "pairing-fermi"):
            g0 = np.eye(cols)
        else:
            g0 = np.diag(np.concatenate([np.ones(k), -np.ones(cols - k)]))
        tn = np.linalg.norm(t, 2)
        mn = max(np.linalg.norm(m, 2), 1e-300)
        dn = max(np.linalg.norm(d, 2), 1e-300)
        metric_res = float(np.max(np.abs(t.conj().T @ g @ t - g0))) / (1 + tn ** 2)
        tmt = t.conj().T @ m @ t
        congruence = _offdiag(tmt) / mn
        similarity = reconstruction = None
        if t.shape[0] == cols:
            tinv = np.linalg.inv(t)
            similarity = _offdiag(tinv @ d @ t) / dn
            lam = np.diag(np.real(np.diag(tmt)))
            recon = tinv.conj().T @ lam @ tinv
            reconstruction = float(np.max(np.abs(recon - m))) / mn
        involution = None
        if kind in ("boson", "fermion") and t.shape[0] == cols:
            sx = _sigma_x(cols)
            involution = float(np.max(np.abs(sx @ t.conj() @ sx - t))) / max(tn, 1e-300)
        elif kind == "coord":
            involution = float(np.max(np.abs(t.conj() - t @ _sigma_x(cols)))) / max(tn, 1e-300)
        unitarity = None
        if kind in ("fermion", "pairing-fermi"):
            unitarity = float(np.max(np.abs(t.conj().T @ t - np.eye(cols))))
        return VerificationReport(metric_res, congruence, similarity, involution, reconstruction, unitarity)
    except Exception:  # a report, never an exception
        nan = float("nan")
        return VerificationReport(nan, nan, nan, nan, nan, nan)
