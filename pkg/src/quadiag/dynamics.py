"""
Dynamic matrix construction and the Heisenberg-operator oracle.

The dynamic matrix D is the matrix of the linear Heisenberg equation
i d/dt psi = [psi, H] = D psi.  For every supported form it equals G M,
where G is the metric fixed by the commutation rules.

``heisenberg_apply`` recomputes a row of D without touching M: it expands
H into operator monomials straight from the form's input coefficients and
commutes a single field operator through them with the canonical
(anti)commutation rules.  It is the independent oracle for
``build_dynamic_matrix``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .core import (
    BosonForm,
    CoefficientMatrix,
    CoordForm,
    FermionForm,
    IndexOutOfRange,
    Metric,
    PairingForm,
    QuadraticForm,
    SizeMismatch,
    assemble_coefficient_matrix,
    metric_for,
    metric_matrix,
)


@dataclass(frozen=True)
class DynamicMatrix:
    d: np.ndarray
    metric: Metric
    source: CoefficientMatrix

    @property
    def size(self) -> int:
        return self.d.shape[0]


def build_dynamic_matrix(m: CoefficientMatrix, metric: Metric) -> DynamicMatrix:
    """D = G M."""
    if m.size != metric.size:
        raise SizeMismatch(f"coefficient matrix has size {m.size}, metric {metric.size}")
    d = metric_matrix(metric) @ m.m
    d.setflags(write=False)
    return DynamicMatrix(d, metric, m)


def dynamic_matrix(form: QuadraticForm) -> DynamicMatrix:
    """Assemble M for ``form`` and multiply by its metric."""
    return build_dynamic_matrix(assemble_coefficient_matrix(form), metric_for(form))


# ----------------------------------------------------------------------
# Symbolic operator algebra.
#
# A symbol is (species, index, dagger).  Species 'c', 'a', 'b' are ladder
# operators, 'p' and 'q' are momenta and coordinates (dagger unused).
# A monomial is a tuple of symbols; H is a dict monomial -> coefficient.

Symbol = Tuple[str, int, bool]
Monomial = Tuple[Symbol, ...]


def _dag(sym: Symbol) -> Symbol:
    species, i, dagger = sym
    if species in ("p", "q"):
        return sym
    return (species, i, not dagger)


class _Algebra:
    """Canonical brackets between single symbols.

    ``fermionic`` selects anticommutators; ``signature`` holds the commutator
    sign of each mode (boson and coordinate cases only).
    """

    def __init__(self, fermionic: bool, signature=None):
        self.fermionic = fermionic
        self.signature = signature

    def _s(self, i: int) -> float:
        return 1.0 if self.signature is None else float(self.signature[i])

    def bracket(self, x: Symbol, y: Symbol) -> complex:
        (sx, ix, dx), (sy, iy, dy) = x, y
        if ix != iy:
            return 0.0
        if sx in ("p", "q"):
            if sy == sx or sy not in ("p", "q"):
                return 0.0
            # [q, p] = i s, [p, q] = -i s
            return 1j * self._s(ix) if sx == "q" else -1j * self._s(ix)
        if sx != sy or dx == dy:
            return 0.0
        if self.fermionic:
            return 1.0
        # [c, c+] = s, [c+, c] = -s
        return self._s(ix) if not dx else -self._s(ix)

    def commute_quadratic(self, x: Symbol, hamiltonian: Dict[Monomial, complex]) -> Dict[Symbol, complex]:
        """[x, H] for quadratic H, returned as a linear combination of symbols."""
        out: Dict[Symbol, complex] = defaultdict(complex)
        for (a, b), coef in hamiltonian.items():
            if coef == 0:
                continue
            xa = self.bracket(x, a)
            xb = self.bracket(x, b)
            if self.fermionic:
                # [x, ab] = {x,a} b - a {x,b}
                out[b] += coef * xa
                out[a] -= coef * xb
            else:
                # [x, ab] = [x,a] b + a [x,b]
                out[b] += coef * xa
                out[a] += coef * xb
        return dict(out)


def _field_basis(form: QuadraticForm) -> List[Symbol]:
    n = form.n
    if isinstance(form, (BosonForm, FermionForm)):
        return [("c", i, False) for i in range(n)] + [("c", i, True) for i in range(n)]
    if isinstance(form, PairingForm):
        return [("a", i, False) for i in range(n)] + [("b", i, True) for i in range(n)]
    if isinstance(form, CoordForm):
        return [("p", i, False) for i in range(n)] + [("q", i, False) for i in range(n)]
    raise TypeError(f"not a quadratic form: {type(form).__name__}")


def expand_hamiltonian(form: QuadraticForm) -> Dict[Monomial, complex]:
    """Operator monomials of H built directly from the input coefficients."""
    n = form.n
    h: Dict[Monomial, complex] = defaultdict(complex)
    if isinstance(form, (BosonForm, FermionForm)):
        al, ga = form.alpha, form.gamma
        for i in range(n):
            for j in range(n):
                h[(("c", i, True), ("c", j, False))] += al[i, j]
                h[(("c", i, True), ("c", j, True))] += 0.5 * ga[i, j]
                h[(("c", j, False), ("c", i, False))] += 0.5 * np.conj(ga[i, j])
    elif isinstance(form, PairingForm):
        al, ep, ga = form.alpha, form.epsilon, form.gamma
        for i in range(n):
            for j in range(n):
                h[(("a", i, True), ("a", j, False))] += al[i, j]
                h[(("b", i, True), ("b", j, False))] += ep[i, j]
                h[(("a", i, True), ("b", j, True))] += ga[i, j]
                h[(("b", j, False), ("a", i, False))] += np.conj(ga[i, j])
    elif isinstance(form, CoordForm):
        mu, ka, gp = form.mu, form.kappa, form.gamma_pq
        for i in range(n):
            for j in range(n):
                h[(("p", i, False), ("p", j, False))] += 0.5 * mu[i, j]
                h[(("q", i, False), ("q", j, False))] += 0.5 * ka[i, j]
                h[(("p", i, False), ("q", j, False))] += 0.5 * gp[i, j]
                h[(("q", j, False), ("p", i, False))] += 0.5 * gp[i, j]
    else:
        raise TypeError(f"not a quadratic form: {type(form).__name__}")
    return dict(h)


def _algebra_for(form: QuadraticForm) -> _Algebra:
    if isinstance(form, FermionForm):
        return _Algebra(fermionic=True)
    if isinstance(form, PairingForm):
        return _Algebra(fermionic=form.statistics == "fermion")
    return _Algebra(fermionic=False, signature=form.signature)


def heisenberg_apply(form: QuadraticForm, basis_index: int, hamiltonian=None) -> np.ndarray:
    """Row ``basis_index`` of the dynamic matrix, by symbolic commutation.

    Returns the coefficients of [psi_k, H] = i f(psi_k) in the field basis,
    where f(x) = i[H, x] is the Heisenberg operator.
    """
    basis = _field_basis(form)
    if not 0 <= basis_index < len(basis):
        raise IndexOutOfRange(f"basis index {basis_index} outside [0, {len(basis)})")
    h = expand_hamiltonian(form) if hamiltonian is None else hamiltonian
    result = _algebra_for(form).commute_quadratic(basis[basis_index], h)
    position = {sym: k for k, sym in enumerate(basis)}
    row = np.zeros(len(basis), dtype=complex)
    for sym, coef in result.items():
        if coef == 0:
            continue
        if sym not in position:
            raise IndexOutOfRange(f"commutator left the field basis through {sym}")
        row[position[sym]] += coef
    return row


def heisenberg_matrix(form: QuadraticForm) -> np.ndarray:
    """The full dynamic matrix assembled row by row from the oracle."""
    h = expand_hamiltonian(form)
    return np.array([heisenberg_apply(form, k, h) for k in range(2 * form.n)])


def conserved_rows(d: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Coefficients of [u . psi, H]; zero for conserved linear combinations."""
    return np.asarray(u) @ d
