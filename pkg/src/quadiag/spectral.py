"""
Eigendecomposition and classification of dynamic matrices.

A dynamic matrix is physically diagonalizable when it is diagonalizable and
its spectrum is real.  Dense eigensolvers split degenerate eigenvalues by
rounding noise and split defective ones by O(sqrt(eps)), so eigenvalues are
first grouped into clusters; realness and multiplicities are then decided
per cluster.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
import scipy.linalg

from .core import PairingFailure, SolverFailure, Tolerances, default_tolerances
from .dynamics import DynamicMatrix

PHYSICAL = "PhysicallyDiagonalizable"
COMPLEX = "ComplexSpectrum"
DEFECTIVE = "Defective"

CONJUGATE_SWAP = "ConjugateSwap"
PLAIN_CONJUGATE = "PlainConjugate"

# Two clusters whose eigenvectors are this close to collinear are treated as
# one split defective eigenvalue, provided their values are within
# COALESCE_RADIUS (relative).
COALESCE_RADIUS = 1e-5
COALESCE_ANGLE = 1e-5


@dataclass(frozen=True)
class Cluster:
    value: complex
    algebraic: int
    geometric: int
    basis: np.ndarray
    null_sigma: float
    gap_sigma: float

    @property
    def omega(self) -> float:
        return float(self.value.real)


@dataclass(frozen=True)
class Eigensystem:
    clusters: List[Cluster]
    d: np.ndarray
    scale: float
    tol: Tolerances

    @property
    def tol_cluster(self) -> float:
        return self.tol.get("cluster") * self.scale

    @property
    def tol_real(self) -> float:
        return self.tol.get("real") * self.scale

    @property
    def tol_rank(self) -> float:
        return self.tol.get("rank") * self.scale

    def is_zero(self, c: Cluster) -> bool:
        return abs(c.value) <= self.tol_cluster

    def is_real(self, c: Cluster) -> bool:
        return abs(c.value.imag) <= self.tol_real


@dataclass(frozen=True)
class Classification:
    verdict: str
    witness: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.verdict == PHYSICAL

    def describe(self) -> str:
        if self.ok:
            return "physically diagonalizable"
        w = self.witness or {}
        omega = w.get("omega", 0)
        if self.verdict == COMPLEX:
            return f"complex spectrum at omega={_fmt(omega)}"
        return (f"defective at omega={_fmt(omega)} (algebraic multiplicity "
                f"{w.get('algebraic')}, geometric {w.get('geometric')})")


def _fmt(z) -> str:
    z = complex(z)
    if abs(z.imag) <= 1e-12 * (1 + abs(z)):
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}i"


@dataclass(frozen=True)
class ModePair:
    """A (+omega, -omega) pair of eigenvectors linked by the partner rule."""

    omega: float
    v_plus: np.ndarray
    v_minus: np.ndarray
    partner_rule: str
    cluster: int
    norms: Optional[tuple] = None


def partner(rule: str) -> Callable[[np.ndarray], np.ndarray]:
    """The antilinear map J that sends v(omega) to v(-omega)."""
    if rule == CONJUGATE_SWAP:
        def swap(v):
            v = np.asarray(v)
            n = v.shape[0] // 2
            return np.concatenate([v[n:].conj(), v[:n].conj()])
        return swap
    if rule == PLAIN_CONJUGATE:
        return lambda v: np.asarray(v).conj()
    raise ValueError(f"unknown partner rule {rule!r}")


# ------------------------------------------------------------ clustering


def _union_find(count):
    parent = list(range(count))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    return find, union


def _group(values, vectors, tol_cluster, scale):
    k = len(values)
    find, union = _union_find(k)
    for i in range(k):
        for j in range(i + 1, k):
            if abs(values[i] - values[j]) <= tol_cluster:
                union(i, j)
    # merge clusters whose eigenvectors coalesce: a split Jordan block
    changed = True
    while changed:
        changed = False
        roots = sorted({find(i) for i in range(k)})
        members = {r: [i for i in range(k) if find(i) == r] for r in roots}
        for a_pos, ra in enumerate(roots):
            for rb in roots[a_pos + 1:]:
                dist = min(abs(values[i] - values[j]) for i in members[ra] for j in members[rb])
                if dist > COALESCE_RADIUS * scale:
                    continue
                stacked = vectors[:, members[ra] + members[rb]]
                s = np.linalg.svd(stacked, compute_uv=False)
                if s[-1] <= COALESCE_ANGLE * s[0]:
                    union(ra, rb)
                    changed = True
                    break
            if changed:
                break
    roots = sorted({find(i) for i in range(k)}, key=lambda r: (values[r].real, values[r].imag))
    return [[i for i in range(k) if find(i) == r] for r in roots]


def eigen_decompose(dm, tol: Optional[Tolerances] = None) -> Eigensystem:
    """Cluster the spectrum of D and give an eigenspace basis per cluster."""
    tol = tol or default_tolerances()
    d = dm.d if isinstance(dm, DynamicMatrix) else np.asarray(dm, dtype=complex)
    try:
        values, vectors = scipy.linalg.eig(d)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(values)):
        raise SolverFailure("eigensolver returned non-finite eigenvalues")
    scale = 1.0 + np.linalg.norm(d, np.inf)
    tol_rank = tol.get("rank") * scale
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    groups = _group(values, vectors, tol.get("cluster") * scale, scale)
    size = d.shape[0]
    clusters = []
    for members in groups:
        center = complex(np.mean(values[members]))
        if abs(center.imag) <= tol.get("real") * scale:
            center = complex(center.real, 0.0)
        if abs(center) <= tol.get("cluster") * scale:
            center = 0j
        alg = len(members)
        _, s, vh = np.linalg.svd(d - center * np.eye(size))
        nullity = int(np.sum(s <= tol_rank))
        geo = min(nullity, alg)
        basis = vh[size - geo:].conj().T if geo else np.zeros((size, 0), dtype=complex)
        null_sigma = float(s[size - geo]) if geo else 0.0
        gap_sigma = float(s[size - geo - 1]) if geo < size else float("inf")
        clusters.append(Cluster(center, alg, geo, basis, null_sigma, gap_sigma))
    return Eigensystem(clusters, d, scale, tol)


# -------------------------------------------------------- classification


def classify_eigensystem(eig: Eigensystem, exclude_zero: bool = False) -> Classification:
    """Verdict for an eigensystem; optionally ignoring the zero cluster."""
    considered = [c for c in eig.clusters if not (exclude_zero and eig.is_zero(c))]
    complex_ones = [c for c in considered if not eig.is_real(c)]
    if complex_ones:
        worst = max(complex_ones, key=lambda c: (abs(c.value.imag), c.value.imag))
        omega = worst.value if worst.value.imag > 0 else worst.value.conjugate()
        if abs(omega.real) <= eig.tol_real:
            omega = complex(0.0, omega.imag)
        return Classification(COMPLEX, {
            "omega": omega,
            "algebraic": worst.algebraic,
            "geometric": worst.geometric,
            "imag_over_tol": float(abs(omega.imag) / eig.tol_real),
        })
    defective = [c for c in considered if c.geometric < c.algebraic]
    if defective:
        worst = max(defective, key=lambda c: (c.algebraic - c.geometric, -abs(c.value)))
        return Classification(DEFECTIVE, {
            "omega": worst.value,
            "algebraic": worst.algebraic,
            "geometric": worst.geometric,
            "sigma_over_tol": float(worst.gap_sigma / eig.tol_rank),
        })
    # margins: how far the decisive quantities sit from their thresholds
    imag = max((abs(c.value.imag) for c in considered), default=0.0)
    null = max((c.null_sigma for c in considered if c.geometric), default=0.0)
    return Classification(PHYSICAL, {
        "imag_over_tol": float(imag / eig.tol_real),
        "null_sigma_over_tol": float(null / eig.tol_rank),
    })


def classify(dm, tol: Optional[Tolerances] = None) -> Classification:
    """PhysicallyDiagonalizable, ComplexSpectrum or Defective.

    A complex spectrum takes precedence over a defect.
    """
    return classify_eigensystem(eigen_decompose(dm, tol))


# ----------------------------------------------------------- mode pairing


def realify(vectors: np.ndarray, rule: str, tol: float) -> np.ndarray:
    """Real basis of the fixed space of J inside span(vectors).

    The span must be closed under J.  Returned as complex J-fixed vectors.
    """
    j = partner(rule)
    size, count = vectors.shape
    n = size // 2
    fixed = []
    for k in range(count):
        b = vectors[:, k]
        jb = j(b)
        fixed.append(b + jb)
        fixed.append(1j * (b - jb))
    fixed = np.array(fixed).T
    if rule == CONJUGATE_SWAP:
        coords = np.vstack([fixed[:n].real, fixed[:n].imag])
    else:
        coords = fixed.real
    u, s, _ = np.linalg.svd(coords, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1e-300))) if s.size else 0
    if rank != count:
        raise PairingFailure(f"real form has dimension {rank}, expected {count}")
    u = u[:, :rank]
    if rule == CONJUGATE_SWAP:
        x = u[:n] + 1j * u[n:]
        return np.vstack([x, x.conj()])
    return u.astype(complex)


def zero_space_pairs(basis: np.ndarray, rule: str, tol: float):
    """Pair a zero eigenspace as {v_l, J v_l} (the zero-space convention).

    The space is closed under J; with a real basis r_1..r_2m of its fixed
    space the vectors v_l = r_l + i r_{m+l} have partners r_l - i r_{m+l}.
    """
    dim = basis.shape[1]
    if dim % 2:
        raise PairingFailure(f"zero eigenspace has odd dimension {dim}")
    r = realify(basis, rule, tol)
    m = dim // 2
    return [r[:, l] + 1j * r[:, m + l] for l in range(m)]


def pair_modes(eig: Eigensystem, partner_rule: str, include_zero: bool = True) -> List[ModePair]:
    """Dynamic mode pairs: one per positive eigenvector plus the zero pairs.

    Negative-frequency vectors are generated by the partner rule, never
    solved for.  Every positive cluster must have a negated twin of equal
    multiplicity.
    """
    j = partner(partner_rule)
    pairs: List[ModePair] = []
    positive = [c for c in eig.clusters if not eig.is_zero(c) and c.omega > 0]
    negative = [c for c in eig.clusters if not eig.is_zero(c) and c.omega < 0]
    for c in positive:
        twin = min(negative, key=lambda x: abs(x.value + c.value), default=None)
        if twin is None or abs(twin.value + c.value) > 10 * eig.tol_cluster or twin.algebraic != c.algebraic:
            raise PairingFailure(f"no negated partner for omega={c.omega:.12g}")
    if len(positive) != len(negative):
        raise PairingFailure("positive and negative clusters do not match")
    for k, c in enumerate(eig.clusters):
        if eig.is_zero(c):
            if not include_zero:
                continue
            for v in zero_space_pairs(c.basis, partner_rule, eig.tol.get("rank")):
                pairs.append(ModePair(0.0, v, j(v), partner_rule, k))
        elif c.omega > 0:
            for col in range(c.basis.shape[1]):
                v = c.basis[:, col]
                pairs.append(ModePair(c.omega, v, j(v), partner_rule, k))
    return pairs
