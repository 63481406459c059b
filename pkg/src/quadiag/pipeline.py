"""Single entry point that routes a form to the matching diagonalizer."""

from __future__ import annotations

from typing import Optional, Union

from .bv import Diagonalization, diagonalize_boson, diagonalize_fermion, diagonalize_normal, diagonalize_pairing
from .core import BosonForm, CoordForm, FermionForm, PairingForm, QuadraticForm, Tolerances
from .dirac import DiracResult, diagonalize_coord

Result = Union[Diagonalization, DiracResult]


def diagonalize(form: QuadraticForm, allow_partial: bool = False, tol: Optional[Tolerances] = None) -> Result:
    """Diagonalize any supported form.

    Number-conserving fermionic forms take the Hermitian fast path so that
    negative-energy modes come back hole transformed.  ``allow_partial`` only
    affects coordinate forms.

    Raises
    ------
    NotDiagonalizable
        When the dynamic matrix has a complex spectrum or is defective.
    """
    if isinstance(form, FermionForm):
        if form.is_normal:
            return diagonalize_normal(form.alpha, "fermion")
        return diagonalize_fermion(form, tol)
    if isinstance(form, BosonForm):
        return diagonalize_boson(form, tol)
    if isinstance(form, PairingForm):
        return diagonalize_pairing(form, tol)
    if isinstance(form, CoordForm):
        return diagonalize_coord(form, allow_partial=allow_partial, tol=tol)
    raise TypeError(f"not a quadratic form: {type(form).__name__}")
