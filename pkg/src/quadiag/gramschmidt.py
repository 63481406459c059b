"""
Orthonormalization with respect to a (possibly indefinite) metric G.

Two entry points:

``orthonormalize_cluster``
    An eigenspace of a nonzero eigenvalue.  The Gram matrix B^+ G B of such a
    space is nonsingular, so its Hermitian eigendecomposition yields a
    G-orthonormal basis directly; a second pass removes the rounding left by
    the first.

``orthonormalize_zero_space``
    The zero eigenspace, given as pairs (v, J v).  The output must stay
    paired under J, so vectors are orthonormalized a pair at a time:
    normalize a nonisotropic vector, or build one from a non-orthogonal
    isotropic pair, then project the rest onto the complement and recurse.
    For the definite (fermionic) metric the pair (w, J w) is made orthogonal
    by the real combination a v + b J v.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .core import DegenerateMetric, Metric, Tolerances, default_tolerances, metric_matrix
from .spectral import partner

PHASE_TIE = 1e-9


@dataclass(frozen=True)
class NormalizedBasis:
    vectors: np.ndarray
    norms: np.ndarray
    metric: Metric


def phase_fix(v: np.ndarray) -> np.ndarray:
    """Rotate v so its largest component (lowest index on ties) is real positive."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    top = mags.max(initial=0.0)
    if top == 0:
        return v
    k = int(np.argmax(mags >= top * (1 - PHASE_TIE)))
    return v * (abs(v[k]) / v[k])


def lex_key(v: np.ndarray, digits: int = 10):
    """Sort key comparing vectors component by component."""
    return tuple(x for z in np.asarray(v) for x in (round(z.real, digits), round(z.imag, digits)))


def gram(vectors: np.ndarray, g: np.ndarray) -> np.ndarray:
    return vectors.conj().T @ g @ vectors


def _gram_pass(b: np.ndarray, g: np.ndarray, tol_rank: float):
    gm = gram(b, g)
    gm = (gm + gm.conj().T) / 2
    lam, u = np.linalg.eigh(gm)
    # |G| = 1, so the Gram eigenvalues are bounded by the Euclidean ones
    ref = max(np.max(np.abs(lam)), np.linalg.norm(b, 2) ** 2 if b.shape[1] else 1.0)
    if np.min(np.abs(lam)) <= tol_rank * ref:
        raise DegenerateMetric(
            f"cluster Gram matrix is singular (smallest |eigenvalue| "
            f"{np.min(np.abs(lam)):.3e} vs largest {ref:.3e})")
    # positive norms first, each block in ascending eigenvalue order
    order = np.concatenate([np.where(lam > 0)[0], np.where(lam < 0)[0]])
    lam, u = lam[order], u[:, order]
    return b @ (u / np.sqrt(np.abs(lam))), np.sign(lam)


def orthonormalize_cluster(basis: np.ndarray, metric: Metric, tol: Optional[Tolerances] = None) -> NormalizedBasis:
    """G-orthonormal basis spanning the same space, with its norms (+1/-1)."""
    tol = tol or default_tolerances()
    g = metric_matrix(metric)
    b = np.asarray(basis, dtype=complex)
    if b.ndim == 1:
        b = b[:, None]
    b = b / np.linalg.norm(b, axis=0)
    b, norms = _gram_pass(b, g, tol.get("rank"))
    b, norms2 = _gram_pass(b, g, tol.get("rank"))
    if not np.array_equal(norms, norms2):
        raise DegenerateMetric("norm signs changed between passes")
    if metric.definite and np.any(norms < 0):
        raise DegenerateMetric("negative norm under a definite metric")
    b = np.column_stack([phase_fix(b[:, k]) for k in range(b.shape[1])])
    return NormalizedBasis(b, norms.astype(int), metric)


# ----------------------------------------------------------- zero space


def _fermion_pair(v, j):
    """Orthonormal (w, J w) inside span(v, J v) for the definite metric."""
    v = v / np.linalg.norm(v)
    s = np.vdot(v, j(v))
    if abs(s) > 0:
        v = v * np.exp(0.5j * np.angle(s))
    s = float(np.real(np.vdot(v, j(v))))
    if not 0 <= s < 1:
        raise DegenerateMetric(f"pair overlap {s:.3e} outside [0, 1)")
    p, q = 1 / np.sqrt(1 + s), 1 / np.sqrt(1 - s)
    a, b = (p + q) / 2, (p - q) / 2
    return a * v + b * j(v)


def _isotropic_fix(vs: List[np.ndarray], g, j, tol_iso):
    """Replace one vector so that a nonisotropic vector exists.

    All vectors (and partners) are isotropic here.  Pick the pair with the
    largest inner product, rotate its phase so the product is purely
    imaginary and combine w = v + i y, w' = v - i y.
    """
    best = (0.0, None)
    m = len(vs)
    for l in range(m):
        for k in range(l + 1, m):
            for swap in (False, True):
                y = j(vs[k]) if swap else vs[k]
                z = np.vdot(vs[l], g @ y)
                size = abs(z) / (np.linalg.norm(vs[l]) * np.linalg.norm(y))
                if size > best[0]:
                    best = (size, (l, k, swap))
    if best[1] is None or best[0] <= tol_iso:
        raise DegenerateMetric("zero space is isotropic and mutually orthogonal under G")
    l, k, swap = best[1]
    v = vs[l]
    y = j(vs[k]) if swap else vs[k]
    z = np.vdot(v, g @ y)
    y = y * (1j * abs(z) / z)
    vs[l] = v + 1j * y
    vs[k] = v - 1j * y


def _zero_pass(vectors: Sequence[np.ndarray], g, j, definite: bool, tol_iso: float):
    vs = [np.asarray(v, dtype=complex) for v in vectors]
    out = []
    gnorm = np.linalg.norm(g, 2)
    while vs:
        if definite:
            w = _fermion_pair(vs.pop(0), j)
            lam_w = lam_jw = 1.0
        else:
            ratios = [abs(np.vdot(v, g @ v)) / (np.vdot(v, v).real * gnorm) for v in vs]
            l = int(np.argmax(ratios))
            if ratios[l] <= tol_iso:
                _isotropic_fix(vs, g, j, tol_iso)
                continue
            v = vs.pop(l)
            nv = float(np.real(np.vdot(v, g @ v)))
            w = v / np.sqrt(abs(nv))
            if nv < 0:
                w = j(w)
            lam_w, lam_jw = 1.0, -1.0
        jw = j(w)
        out.append(w)
        vs = [v - (np.vdot(w, g @ v) / lam_w) * w - (np.vdot(jw, g @ v) / lam_jw) * jw for v in vs]
    return out


def orthonormalize_zero_space(paired_basis: Sequence[np.ndarray], metric: Metric, partner_rule: str,
                              tol: Optional[Tolerances] = None) -> NormalizedBasis:
    """G-orthonormalize pairs {v_l, J v_l} while keeping the pairing.

    ``paired_basis`` holds v_1..v_m; their partners are implied by the rule.
    Returns [w_1..w_m, J w_1..J w_m].  For indefinite metrics every w_l has
    norm +1 and every J w_l norm -1; for the definite metric all norms are +1.
    """
    tol = tol or default_tolerances()
    g = metric_matrix(metric)
    j = partner(partner_rule)
    definite = metric.definite
    ws = _zero_pass(paired_basis, g, j, definite, tol.get("iso"))
    ws = _zero_pass(ws, g, j, definite, tol.get("iso"))
    ws = [phase_fix(w) for w in ws]
    vectors = np.column_stack(ws + [j(w) for w in ws]) if ws else np.zeros((metric.size, 0), dtype=complex)
    m = len(ws)
    norms = np.ones(2 * m, dtype=int) if definite else np.concatenate([np.ones(m, int), -np.ones(m, int)])
    return NormalizedBasis(vectors, norms, metric)


def gram_residual(nb: NormalizedBasis) -> float:
    """max |v_i^+ G v_j - lambda_i delta_ij|."""
    gm = gram(nb.vectors, metric_matrix(nb.metric))
    return float(np.max(np.abs(gm - np.diag(nb.norms)), initial=0.0))
