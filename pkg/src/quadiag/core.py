"""
Domain types for quadratic forms, metrics and coefficient matrices.

Four families of Hermitian quadratic forms are supported:

* ``BosonForm`` and ``FermionForm``:
  H = sum_ij alpha_ij c_i^+ c_j + 1/2 gamma_ij c_i^+ c_j^+ + 1/2 gamma_ij^* c_j c_i
  with field psi = (c_1..c_n, c_1^+..c_n^+).
* ``PairingForm``: H = a^+ alpha a + b^+ epsilon b + sum_ij gamma_ij a_i^+ b_j^+ + h.c.
  with reduced field psi = (a_1..a_n, b_1^+..b_n^+).
* ``CoordForm``: H = 1/2 phi^T M phi with phi = (p_1..p_n, q_1..q_n) and
  M = [[mu, gamma_pq], [gamma_pq^T, kappa]].

Every form is validated on construction and then symmetrized, so that
downstream code sees exact Hermitian structure.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

STRUCT_TOL = 1e-12


# ---------------------------------------------------------------- errors


class QuadiagError(Exception):
    """Base class of all library errors."""


class StructuralViolation(QuadiagError):
    """A form violates a required symmetry beyond the structural tolerance."""


class SizeMismatch(QuadiagError):
    """Matrix shapes do not agree."""


class IndexOutOfRange(QuadiagError):
    """A basis index lies outside the field basis."""


class SolverFailure(QuadiagError):
    """The dense eigensolver did not converge."""


class PairingFailure(QuadiagError):
    """Eigenvectors could not be paired according to the partner rule."""


class DegenerateMetric(QuadiagError):
    """The metric restricted to a subspace is singular within tolerance."""


class NotPositiveDefinite(QuadiagError):
    """A matrix required to be positive definite is not."""


class NotDiagonalizable(QuadiagError):
    """The dynamic matrix is not physically diagonalizable.

    The offending :class:`~quadiag.spectral.Classification` is kept in
    ``classification`` so callers can tell a complex spectrum from a defect.
    """

    def __init__(self, classification):
        self.classification = classification
        super().__init__(classification.describe())


class UnknownModel(QuadiagError):
    """The requested corpus model does not exist."""


class MissingParameter(QuadiagError):
    """A corpus model was called without a required parameter."""


# ------------------------------------------------------------ tolerances


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances used across the pipeline.

    Each value is multiplied by ``scale``; the default scale is read from the
    ``QUADIAG_TOL_SCALE`` environment variable.
    """

    struct: float = 1e-12
    real: float = 1e-9
    rank: float = 1e-8
    cluster: float = 1e-8
    iso: float = 1e-10
    orth: float = 1e-9
    scale: float = 1.0

    @classmethod
    def from_env(cls, **overrides) -> "Tolerances":
        raw = os.environ.get("QUADIAG_TOL_SCALE", "1")
        try:
            scale = float(raw)
        except ValueError as exc:
            raise QuadiagError(f"QUADIAG_TOL_SCALE is not a number: {raw!r}") from exc
        if not np.isfinite(scale) or scale <= 0:
            raise QuadiagError(f"QUADIAG_TOL_SCALE must be positive, got {raw!r}")
        values = {k: v for k, v in overrides.items() if v is not None}
        return cls(scale=scale, **values)

    def get(self, name: str) -> float:
        return getattr(self, name) * self.scale


DEFAULT_TOLERANCES = Tolerances()


def default_tolerances() -> Tolerances:
    return Tolerances.from_env()


# -------------------------------------------------------------- helpers


def as_matrix(value, name: str, dtype=complex) -> np.ndarray:
    """Convert ``value`` to a finite square 2-D array."""
    arr = np.array(value, dtype=dtype)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise SizeMismatch(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StructuralViolation(f"{name} contains NaN or Inf entries")
    return arr


def _check_close(a: np.ndarray, b: np.ndarray, name: str, what: str, tol: float):
    scale = 1.0 + max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0))
    err = np.max(np.abs(a - b), initial=0.0)
    if err > tol * scale:
        raise StructuralViolation(f"{name} is not {what} (deviation {err:.3e})")


def _hermitian(a, name, tol):
    _check_close(a, a.conj().T, name, "Hermitian", tol)
    return (a + a.conj().T) / 2


def _symmetric(a, name, tol, sign=1):
    what = "symmetric" if sign > 0 else "antisymmetric"
    _check_close(a, sign * a.T, name, what, tol)
    return (a + sign * a.T) / 2


def _signature(sig, n, name="signature"):
    if sig is None:
        return np.ones(n, dtype=int)
    s = np.array(sig, dtype=float).ravel()
    if s.shape != (n,) or not np.all(np.isin(s, (-1.0, 1.0))):
        raise StructuralViolation(f"{name} must be a length-{n} vector of +1/-1")
    return s.astype(int)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


# ------------------------------------------------------------ the forms


@dataclass(frozen=True)
class BosonForm:
    """Bosonic quadratic form with Hermitian ``alpha`` and symmetric ``gamma``.

    ``signature`` gives the commutator sign of every mode,
    [c_i, c_i^+] = s_i; it defaults to all +1.
    """

    alpha: np.ndarray
    gamma: np.ndarray
    signature: Optional[np.ndarray] = None

    statistics = "boson"

    def __post_init__(self):
        alpha = as_matrix(self.alpha, "alpha")
        gamma = as_matrix(self.gamma, "gamma")
        if alpha.shape != gamma.shape:
            raise SizeMismatch(f"alpha {alpha.shape} and gamma {gamma.shape} differ")
        alpha = _hermitian(alpha, "alpha", STRUCT_TOL)
        gamma = _symmetric(gamma, "gamma", STRUCT_TOL, +1)
        if not alpha.any() and not gamma.any():
            raise StructuralViolation("alpha and gamma are both zero")
        sig = _signature(self.signature, alpha.shape[0])
        _freeze(alpha, gamma, sig)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "signature", sig)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def is_normal(self) -> bool:
        return not self.gamma.any()


@dataclass(frozen=True)
class FermionForm:
    """Fermionic quadratic form with Hermitian ``alpha`` and antisymmetric ``gamma``."""

    alpha: np.ndarray
    gamma: np.ndarray

    statistics = "fermion"

    def __post_init__(self):
        alpha = as_matrix(self.alpha, "alpha")
        gamma = as_matrix(self.gamma, "gamma")
        if alpha.shape != gamma.shape:
            raise SizeMismatch(f"alpha {alpha.shape} and gamma {gamma.shape} differ")
        alpha = _hermitian(alpha, "alpha", STRUCT_TOL)
        gamma = _symmetric(gamma, "gamma", STRUCT_TOL, -1)
        if not alpha.any() and not gamma.any():
            raise StructuralViolation("alpha and gamma are both zero")
        _freeze(alpha, gamma)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def is_normal(self) -> bool:
        return not self.gamma.any()


@dataclass(frozen=True)
class PairingForm:
    """Pairing form between two species ``a`` and ``b``.

    ``gamma_ij`` couples a_i^+ b_j^+; it carries no symmetry requirement
    because the two indices refer to different species.
    """

    alpha: np.ndarray
    epsilon: np.ndarray
    gamma: np.ndarray
    statistics: str = "boson"

    def __post_init__(self):
        if self.statistics not in ("boson", "fermion"):
            raise StructuralViolation(f"statistics must be 'boson' or 'fermion', got {self.statistics!r}")
        alpha = as_matrix(self.alpha, "alpha")
        epsilon = as_matrix(self.epsilon, "epsilon")
        gamma = as_matrix(self.gamma, "gamma")
        if not alpha.shape == epsilon.shape == gamma.shape:
            raise SizeMismatch("alpha, epsilon and gamma must share one shape")
        alpha = _hermitian(alpha, "alpha", STRUCT_TOL)
        epsilon = _hermitian(epsilon, "epsilon", STRUCT_TOL)
        if not (alpha.any() or epsilon.any() or gamma.any()):
            raise StructuralViolation("pairing form is identically zero")
        _freeze(alpha, epsilon, gamma)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "epsilon", epsilon)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]


@dataclass(frozen=True)
class CoordForm:
    """Real quadratic form in momenta and coordinates.

    ``signature`` gives the commutator sign per coordinate pair,
    [q_i, p_i] = i s_i, with -1 marking a time-polarized pair.
    """

    mu: np.ndarray
    kappa: np.ndarray
    gamma_pq: Optional[np.ndarray] = None
    signature: Optional[np.ndarray] = None

    statistics = "boson"

    def __post_init__(self):
        mu = as_matrix(self.mu, "mu", dtype=complex)
        kappa = as_matrix(self.kappa, "kappa", dtype=complex)
        n = mu.shape[0]
        gamma = np.zeros((n, n)) if self.gamma_pq is None else as_matrix(self.gamma_pq, "gamma_pq", dtype=complex)
        if not mu.shape == kappa.shape == gamma.shape:
            raise SizeMismatch("mu, kappa and gamma_pq must share one shape")
        for name, a in (("mu", mu), ("kappa", kappa), ("gamma_pq", gamma)):
            if np.max(np.abs(a.imag), initial=0.0) > STRUCT_TOL * (1 + np.max(np.abs(a))):
                raise StructuralViolation(f"{name} must be real")
        mu = _symmetric(mu.real, "mu", STRUCT_TOL, +1)
        kappa = _symmetric(kappa.real, "kappa", STRUCT_TOL, +1)
        gamma = np.ascontiguousarray(gamma.real)
        if not (mu.any() or kappa.any() or gamma.any()):
            raise StructuralViolation("coordinate form is identically zero")
        sig = _signature(self.signature, n)
        _freeze(mu, kappa, gamma, sig)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "gamma_pq", gamma)
        object.__setattr__(self, "signature", sig)

    @property
    def n(self) -> int:
        return self.mu.shape[0]


QuadraticForm = Union[BosonForm, FermionForm, PairingForm, CoordForm]


def form_kind(form: QuadraticForm) -> str:
    """Short kind label used in reports and file formats."""
    if isinstance(form, BosonForm):
        return "boson"
    if isinstance(form, FermionForm):
        return "fermion"
    if isinstance(form, PairingForm):
        return "pairing-bose" if form.statistics == "boson" else "pairing-fermi"
    if isinstance(form, CoordForm):
        return "coord"
    raise TypeError(f"not a quadratic form: {type(form).__name__}")


# --------------------------------------------------------------- metrics


@dataclass(frozen=True)
class Metric:
    """Signature matrix G of the sesquilinear form <x|G|y>.

    kind is one of ``Iplus``, ``Iminus``, ``SigmaY`` or ``DiagSignature``.
    ``signature`` is the per-mode sign vector s (length n): DiagSignature
    realises diag(s, -s) and SigmaY realises [[0, -iS], [iS, 0]].
    """

    kind: str
    size: int
    signature: Optional[np.ndarray] = field(default=None)

    KINDS = ("Iplus", "Iminus", "SigmaY", "DiagSignature")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.size <= 0 or self.size % 2:
            raise SizeMismatch(f"metric size must be a positive even number, got {self.size}")
        if self.signature is not None:
            sig = _signature(self.signature, self.size // 2)
            sig.setflags(write=False)
            object.__setattr__(self, "signature", sig)
        elif self.kind == "DiagSignature":
            raise StructuralViolation("DiagSignature metric needs a signature vector")

    @property
    def n(self) -> int:
        return self.size // 2

    @property
    def definite(self) -> bool:
        return self.kind == "Iplus"


def metric_matrix(metric: Metric) -> np.ndarray:
    """Dense realisation of ``metric``."""
    n = metric.n
    s = np.ones(n) if metric.signature is None else metric.signature.astype(float)
    if metric.kind == "Iplus":
        return np.eye(2 * n, dtype=complex)
    if metric.kind in ("Iminus", "DiagSignature"):
        return np.diag(np.concatenate([s, -s])).astype(complex)
    g = np.zeros((2 * n, 2 * n), dtype=complex)
    g[:n, n:] = -1j * np.diag(s)
    g[n:, :n] = 1j * np.diag(s)
    return g


def metric_for(form: QuadraticForm) -> Metric:
    """The metric fixed by the commutation rules of ``form``."""
    n = form.n
    if isinstance(form, BosonForm):
        if np.all(form.signature == 1):
            return Metric("Iminus", 2 * n)
        return Metric("DiagSignature", 2 * n, form.signature)
    if isinstance(form, FermionForm):
        return Metric("Iplus", 2 * n)
    if isinstance(form, PairingForm):
        return Metric("Iminus" if form.statistics == "boson" else "Iplus", 2 * n)
    if isinstance(form, CoordForm):
        sig = None if np.all(form.signature == 1) else form.signature
        return Metric("SigmaY", 2 * n, sig)
    raise TypeError(f"not a quadratic form: {type(form).__name__}")


# ------------------------------------------------------ coefficient matrix


@dataclass(frozen=True)
class CoefficientMatrix:
    """Hermitian matrix M with H = scale * psi^+ M psi + offset.

    ``scale`` is 1/2 for full boson, fermion and coordinate forms and 1 for
    the reduced pairing field.
    """

    m: np.ndarray
    offset: float
    form_kind: str
    scale: float = 0.5

    @property
    def size(self) -> int:
        return self.m.shape[0]


def assemble_coefficient_matrix(form: QuadraticForm) -> CoefficientMatrix:
    """Build M and the scalar offset for ``form``."""
    kind = form_kind(form)
    if isinstance(form, BosonForm):
        a, g = form.alpha, form.gamma
        m = np.block([[a, g], [g.conj().T, a.T]])
        offset = -0.5 * float(np.real(np.sum(form.signature * np.diag(a))))
    elif isinstance(form, FermionForm):
        a, g = form.alpha, form.gamma
        m = np.block([[a, g], [g.conj().T, -a.T]])
        offset = 0.5 * float(np.real(np.trace(a)))
    elif isinstance(form, PairingForm):
        a, e, g = form.alpha, form.epsilon, form.gamma
        sign = 1.0 if form.statistics == "boson" else -1.0
        m = np.block([[a, g], [g.conj().T, sign * e.T]])
        offset = -sign * float(np.real(np.trace(e)))
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        return CoefficientMatrix(m, offset, kind, scale=1.0)
    elif isinstance(form, CoordForm):
        m = np.block([[form.mu, form.gamma_pq], [form.gamma_pq.T, form.kappa]]).astype(complex)
        offset = 0.0
    else:
        raise TypeError(f"not a quadratic form: {type(form).__name__}")
    m = (m + m.conj().T) / 2
    m.setflags(write=False)
    return CoefficientMatrix(m, offset, kind)


def with_signature(form: Union[BosonForm, CoordForm], signature) -> Union[BosonForm, CoordForm]:
    """Copy of ``form`` with a different commutator signature."""
    return replace(form, signature=signature)
