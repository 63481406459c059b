"""
Dirac diagonalization of coordinate-momentum quadratic forms.

With phi = (p, q) and H = 1/2 phi^T M phi the dynamic matrix is D = Sigma_y M
(times the per-pair signature).  Eigenvectors pair up as v(-w) = v(w)^*, and
the Dirac matrix T_d = [v_1..v_n, v_1^*..v_n^*] built from norm +1 vectors
satisfies T_d^+ Sigma_y T_d = I_- and T_d^* = T_d Sigma_x.  Then

    H = sum w a^+ a + 1/2 sum w.

Zero-frequency modes of free-particle type make D defective.  With
``allow_partial`` they are left out of T_d and reported as conserved linear
combinations u . phi, i.e. row vectors with u^T D = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .bv import NORMAL, TIME_POLARIZED, Mode, _analyse, normal_columns
from .core import CoordForm, NotDiagonalizable, NotPositiveDefinite, Tolerances, default_tolerances
from .gramschmidt import phase_fix
from .spectral import PLAIN_CONJUGATE, Classification, classify_eigensystem


@dataclass(frozen=True)
class DiracResult:
    t_d: np.ndarray
    modes: Tuple[Mode, ...]
    constant: float
    residual_modes: np.ndarray
    classification: Classification
    partial: bool = False

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def t(self) -> np.ndarray:
        return self.t_d

    @property
    def tags(self):
        return [m.tag for m in self.modes]


def _conserved_modes(d: np.ndarray, tol_rank: float) -> np.ndarray:
    """Real basis (rows) of {u : u^T D = 0}."""
    _, s, vh = np.linalg.svd(d.T)
    null = vh[np.sum(s > tol_rank):].conj()
    if null.shape[0] == 0:
        return np.zeros((0, d.shape[0]))
    # the space is closed under conjugation, so it has a real basis
    stacked = np.vstack([null.real, null.imag])
    u, sv, vt = np.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(sv > 1e-8 * sv[0]))
    rows = vt[:rank]
    out = []
    for r in rows:
        r = np.real(phase_fix(r))
        r = r / np.linalg.norm(r)
        r[np.abs(r) < 1e-14] = 0.0
        out.append(r)
    return np.array(out)


def diagonalize_coord(form: CoordForm, allow_partial: bool = False, tol: Optional[Tolerances] = None,
                      rotate=None) -> DiracResult:
    """Dirac diagonalization, optionally leaving zero-frequency modes residual."""
    if not isinstance(form, CoordForm):
        raise TypeError("diagonalize_coord expects a CoordForm")
    tol = tol or default_tolerances()
    cm, metric, dm, eig = _analyse(form, tol)
    full = classify_eigensystem(eig)
    has_zero = any(eig.is_zero(c) for c in eig.clusters)
    if full.ok and not (allow_partial and has_zero):
        t, _ = normal_columns(eig, metric, PLAIN_CONJUGATE, tol=tol, rotate=rotate)
        residual = np.zeros((0, 2 * form.n))
        cls, partial = full, False
    elif allow_partial:
        cls = classify_eigensystem(eig, exclude_zero=True)
        if not cls.ok:
            raise NotDiagonalizable(cls)
        t, _ = normal_columns(eig, metric, PLAIN_CONJUGATE, include_zero=False, tol=tol, rotate=rotate)
        residual = _conserved_modes(dm.d, eig.tol_rank)
        partial = True
    else:
        raise NotDiagonalizable(full)
    k = t.shape[1] // 2
    omegas = np.real(np.diag(t.conj().T @ cm.m @ t))[:k]
    omegas = np.where(np.abs(omegas) <= eig.tol_cluster, 0.0, omegas)
    modes = tuple(Mode(float(w), "boson", NORMAL if w >= 0 else TIME_POLARIZED) for w in omegas)
    constant = 0.5 * float(np.sum(omegas))
    return DiracResult(t, modes, constant, residual, cls, partial)


def kv_fast_path(K, V) -> Tuple[np.ndarray, np.ndarray]:
    """Normal modes of H = 1/2 p^T K p + 1/2 q^T V q for positive definite K.

    With K = Q Q^T (Cholesky) and Q^T V Q = S diag(w^2) S^T the mode matrix
    T = Q S satisfies T^T K^{-1} T = I and T^T V T = diag(w^2).
    Returns (frequencies in ascending order, T).
    """
    k = np.asarray(K, dtype=float)
    v = np.asarray(V, dtype=float)
    try:
        q = np.linalg.cholesky((k + k.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("K is not positive definite") from exc
    w2, s = np.linalg.eigh(q.T @ ((v + v.T) / 2) @ q)
    scale = 1.0 + np.max(np.abs(w2), initial=0.0)
    if np.min(w2) < -1e-12 * scale:
        raise NotPositiveDefinite("V is not nonnegative definite")
    w2 = np.clip(w2, 0.0, None)
    return np.sqrt(w2), q @ s
