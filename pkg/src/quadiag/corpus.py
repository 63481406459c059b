"""
Parameterized generators for physical example models.

Every model is a finite form: continuum fields are reduced to a single
momentum mode, lattices to small rings or tori.  Model names and their
parameter schemas double as the ``kind: "model"`` input format of the CLI.

``FIXTURES`` pairs models with expected frequencies and constants.  The
expected values come from closed forms, never from this package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .bv import verify
from .core import (
    BosonForm,
    CoordForm,
    FermionForm,
    MissingParameter,
    PairingForm,
    QuadiagError,
    QuadraticForm,
    UnknownModel,
)
from .pipeline import diagonalize

# ------------------------------------------------------ Dirac matrices

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_Z2 = np.zeros((2, 2))
DIRAC_ALPHA = tuple(np.block([[_Z2, s], [s, _Z2]]) for s in _SIGMA)
DIRAC_BETA = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)


def _check_dirac_algebra():
    eye = np.eye(4)
    for i, a in enumerate(DIRAC_ALPHA):
        if np.max(np.abs(a @ DIRAC_BETA + DIRAC_BETA @ a)) > 1e-15:
            raise RuntimeError(f"alpha_{i} does not anticommute with beta")
        for j, b in enumerate(DIRAC_ALPHA):
            if np.max(np.abs(a @ b + b @ a - 2 * (i == j) * eye)) > 1e-15:
                raise RuntimeError(f"alpha_{i}, alpha_{j} violate the Clifford relation")
    if np.max(np.abs(DIRAC_BETA @ DIRAC_BETA - eye)) > 1e-15:
        raise RuntimeError("beta does not square to one")


_check_dirac_algebra()


# ---------------------------------------------------------- generators


def _single_squeeze(alpha, gamma):
    return BosonForm([[alpha]], [[gamma]])


def _two_mode_squeeze(alpha, gamma):
    return BosonForm(alpha * np.eye(2), [[0, gamma], [gamma, 0]])


def _hopping_pair():
    return BosonForm([[1, -1], [-1, 1]], np.zeros((2, 2)))


def _rank_one_triplet():
    r = np.sqrt(2)
    return BosonForm([[2, r, r], [r, 1, 1], [r, 1, 1]], np.zeros((3, 3)))


def _fermion_pair_gap(alpha, gamma):
    return FermionForm(alpha * np.eye(2), [[0, gamma], [-gamma, 0]])


def _fermion_mu_nu(mu, nu):
    return FermionForm([[0, mu], [mu, 0]], [[0, nu], [-nu, 0]])


def _boson_two_site(e1, e2, mu):
    return BosonForm([[e1, mu], [mu, e2]], np.zeros((2, 2)))


def _boson_chain3(eps, mu):
    return BosonForm([[eps, mu, 0], [mu, eps, mu], [0, mu, eps]], np.zeros((3, 3)))


def _fermion_two_site(eps, mu):
    return FermionForm([[eps, mu], [mu, eps]], np.zeros((2, 2)))


def _bose_pairing(e1, e2, g):
    return PairingForm([[e1]], [[e2]], [[g]], "boson")


def _fermi_pairing(e1, e2, g):
    return PairingForm([[e1]], [[e2]], [[g]], "fermion")


def _pairing_block(statistics):
    def build(eps, gamma):
        return PairingForm(eps * np.eye(2), eps * np.eye(2), gamma * np.ones((2, 2)), statistics)
    return build


def _oscillator(m, omega):
    return CoordForm([[1 / m]], [[m * omega ** 2]])


def _negative_oscillator(m, omega):
    return CoordForm([[-1 / m]], [[-m * omega ** 2]])


def _free_particle(m):
    return CoordForm([[1 / m]], [[0.0]])


def _landau(m, omega_L):
    # H = (px^2 + py^2)/2m + m wL^2 (x^2 + y^2)/2 + wL (x py - y px)
    w = omega_L
    return CoordForm(np.eye(2) / m, m * w ** 2 * np.eye(2), [[0, -w], [w, 0]])


def _jz():
    # J_z = x py - y px
    return CoordForm(np.zeros((2, 2)), np.zeros((2, 2)), [[0, -1], [1, 0]])


def _klein_gordon(m, p):
    return CoordForm([[1.0]], [[m ** 2 + p ** 2]])


def _dirac_field(m, px=0.0, py=0.0, pz=0.0):
    alpha = px * DIRAC_ALPHA[0] + py * DIRAC_ALPHA[1] + pz * DIRAC_ALPHA[2] + m * DIRAC_BETA
    return FermionForm(alpha, np.zeros((4, 4)))


def phonon_force_constants(N: int, k: float, dim: int = 1) -> np.ndarray:
    """Force-constant matrix of a periodic simple lattice with N sites per side.

    Nearest neighbours are joined by isotropic springs of stiffness k, so
    every polarization sees the same lattice Laplacian.  Rows sum to zero
    (acoustic sum rule).  Coordinates are ordered site-major.
    """
    sites = list(itertools.product(range(N), repeat=dim))
    index = {s: i for i, s in enumerate(sites)}
    lap = np.zeros((len(sites), len(sites)))
    for s in sites:
        for axis in range(dim):
            t = list(s)
            t[axis] = (t[axis] + 1) % N
            i, j = index[s], index[tuple(t)]
            lap[i, i] += k
            lap[j, j] += k
            lap[i, j] -= k
            lap[j, i] -= k
    return np.kron(lap, np.eye(dim))


def _phonon_ring(N, k, m, dim=1):
    n_sites, dim = int(N), int(dim)
    if n_sites != N or dim != float(dim) or n_sites < 2 or dim not in (1, 2, 3):
        raise QuadiagError("phonon_ring needs integer N >= 2 and dim in {1, 2, 3}")
    if n_sites ** dim > 16:
        raise QuadiagError(f"phonon_ring supports at most 16 sites, got {n_sites ** dim}")
    phi = phonon_force_constants(n_sites, k, dim)
    return CoordForm(np.eye(phi.shape[0]) / m, phi)


def _maxwell_mode(p):
    # A0 is the time-like pair: [A_l, pi_l] = i g_ll with g = diag(1, -1, -1, -1)
    # and H = 1/2 sum_l (pi_l^2 + p^2 A_l^2) - 1/2 (pi_0^2 + p^2 A_0^2).
    g = np.diag([-1.0, 1.0, 1.0, 1.0])
    return CoordForm(g, p ** 2 * g, signature=[1, -1, -1, -1])


@dataclass(frozen=True)
class _Model:
    build: Callable[..., QuadraticForm]
    required: Tuple[str, ...] = ()
    defaults: Mapping[str, float] = field(default_factory=dict)
    options: Mapping[str, object] = field(default_factory=dict)


MODELS: Dict[str, _Model] = {
    "single_squeeze": _Model(_single_squeeze, ("alpha", "gamma")),
    "two_mode_squeeze": _Model(_two_mode_squeeze, ("alpha", "gamma")),
    "hopping_pair": _Model(_hopping_pair),
    "rank_one_triplet": _Model(_rank_one_triplet),
    "fermion_pair_gap": _Model(_fermion_pair_gap, ("alpha", "gamma")),
    "fermion_mu_nu": _Model(_fermion_mu_nu, ("mu", "nu")),
    "boson_two_site": _Model(_boson_two_site, ("e1", "e2", "mu")),
    "boson_chain3": _Model(_boson_chain3, ("eps", "mu")),
    "fermion_two_site": _Model(_fermion_two_site, ("eps", "mu")),
    "bose_pairing": _Model(_bose_pairing, ("e1", "e2", "g")),
    "fermi_pairing": _Model(_fermi_pairing, ("e1", "e2", "g")),
    "bose_pairing_block": _Model(_pairing_block("boson"), ("eps", "gamma")),
    "fermi_pairing_block": _Model(_pairing_block("fermion"), ("eps", "gamma")),
    "oscillator": _Model(_oscillator, ("m", "omega")),
    "negative_oscillator": _Model(_negative_oscillator, ("m", "omega")),
    "free_particle": _Model(_free_particle, ("m",)),
    "landau": _Model(_landau, ("m", "omega_L"), options={"allow_partial": True}),
    "jz": _Model(_jz),
    "klein_gordon": _Model(_klein_gordon, ("m", "p")),
    "dirac_field": _Model(_dirac_field, ("m",), {"px": 0.0, "py": 0.0, "pz": 0.0}),
    "phonon_ring": _Model(_phonon_ring, ("N", "k", "m"), {"dim": 1}),
    "maxwell_mode": _Model(_maxwell_mode, ("p",)),
}


def _lookup(name: str) -> _Model:
    try:
        return MODELS[name]
    except KeyError:
        raise UnknownModel(f"unknown model {name!r}; known: {', '.join(sorted(MODELS))}") from None


def model_options(name: str) -> dict:
    """Default pipeline options of a model (e.g. ``allow_partial``)."""
    return dict(_lookup(name).options)


def generate(name: str, parameters: Optional[Mapping[str, float]] = None) -> QuadraticForm:
    """Build the form of model ``name``.

    Raises
    ------
    UnknownModel
        For an unknown name or a parameter the model does not take.
    MissingParameter
        When a required parameter is absent.
    """
    model = _lookup(name)
    params = dict(parameters or {})
    known = set(model.required) | set(model.defaults)
    extra = sorted(set(params) - known)
    if extra:
        raise UnknownModel(f"model {name!r} takes no parameter {extra[0]!r}")
    missing = [p for p in model.required if p not in params]
    if missing:
        raise MissingParameter(f"model {name!r} requires parameter {missing[0]!r}")
    values = {**model.defaults, **params}
    for key, value in values.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
            raise QuadiagError(f"parameter {key!r} of model {name!r} must be a finite real number")
    return model.build(**{k: float(v) for k, v in values.items()})


# ------------------------------------------------------------ fixtures


@dataclass(frozen=True)
class ModelSpec:
    """A model instance with optional expected frequencies and constant."""

    name: str
    parameters: Mapping[str, float] = field(default_factory=dict)
    expected: Optional[Mapping[str, object]] = None
    options: Mapping[str, object] = field(default_factory=dict)

    @property
    def label(self) -> str:
        args = ",".join(f"{k}={v:g}" for k, v in self.parameters.items())
        return f"{self.name}({args})"


_R2, _R3, _R5, _R13 = np.sqrt(2), np.sqrt(3), np.sqrt(5), np.sqrt(13)

FIXTURES: List[ModelSpec] = [
    ModelSpec("single_squeeze", {"alpha": 5, "gamma": 3},
              {"omegas": [4.0], "constant": -0.5, "note": "w = sqrt(a^2 - g^2), E0 = (w - a)/2"}),
    ModelSpec("two_mode_squeeze", {"alpha": 2, "gamma": 1},
              {"omegas": [_R3, _R3], "constant": _R3 - 2, "note": "w = sqrt(a^2 - g^2) twice, E0 = w - a"}),
    ModelSpec("hopping_pair", {}, {"omegas": [2.0, 0.0], "constant": 0.0, "note": "eigenvalues of alpha"}),
    ModelSpec("rank_one_triplet", {}, {"omegas": [4.0, 0.0, 0.0], "constant": 0.0, "note": "eigenvalues of alpha"}),
    ModelSpec("fermion_pair_gap", {"alpha": 1, "gamma": 1},
              {"omegas": [_R2, _R2], "constant": 1 - _R2, "note": "w = sqrt(a^2 + g^2), E0 = a - w"}),
    ModelSpec("fermion_mu_nu", {"mu": 1.5, "nu": 1},
              {"omegas": [2.5, 0.5], "constant": -1.5, "note": "w = |mu| +- nu"}),
    ModelSpec("boson_two_site", {"e1": 3, "e2": 1, "mu": 1},
              {"omegas": [2 + _R2, 2 - _R2], "constant": 0.0, "note": "eigenvalues of alpha"}),
    ModelSpec("boson_chain3", {"eps": 2, "mu": 1},
              {"omegas": [2 + _R2, 2.0, 2 - _R2], "constant": 0.0, "note": "eps + sqrt(2) mu cos(j pi/2)"}),
    ModelSpec("fermion_two_site", {"eps": 1, "mu": 2},
              {"omegas": [3.0, 1.0], "constant": -1.0, "note": "eps +- mu, negative level hole transformed"}),
    ModelSpec("bose_pairing", {"e1": 3, "e2": 1, "g": 1},
              {"omegas": [1 + _R3, _R3 - 1], "constant": _R3 - 2,
               "note": "(e1 - e2 +- sqrt((e1 + e2)^2 - 4 g^2))/2"}),
    ModelSpec("fermi_pairing", {"e1": 2, "e2": 1, "g": 1},
              {"omegas": [(1 + _R13) / 2, (_R13 - 1) / 2], "constant": 1 - (_R13 - 1) / 2,
               "note": "(e1 - e2 +- sqrt((e1 + e2)^2 + 4 g^2))/2"}),
    ModelSpec("bose_pairing_block", {"eps": 3, "gamma": 1},
              {"omegas": [3.0, _R5, 3.0, _R5], "constant": _R5 - 3,
               "note": "antisymmetric eps, symmetric sqrt(eps^2 - 4 g^2)"}),
    ModelSpec("fermi_pairing_block", {"eps": 1, "gamma": 1},
              {"omegas": [_R5, 1.0, _R5, 1.0], "constant": 1 - _R5,
               "note": "antisymmetric eps, symmetric sqrt(eps^2 + 4 g^2)"}),
    ModelSpec("oscillator", {"m": 1, "omega": 2}, {"omegas": [2.0], "constant": 1.0, "note": "w, E0 = w/2"}),
    ModelSpec("negative_oscillator", {"m": 1, "omega": 2},
              {"omegas": [-2.0], "constant": -1.0, "note": "-w, E0 = -w/2"}),
    ModelSpec("free_particle", {"m": 1}, {"omegas": [], "constant": 0.0, "residual": 1, "note": "p conserved"},
              {"allow_partial": True}),
    ModelSpec("landau", {"m": 1, "omega_L": 0.5},
              {"omegas": [1.0], "constant": 0.5, "residual": 2, "note": "cyclotron 2 wL, E0 = wL"}),
    ModelSpec("jz", {}, {"omegas": [1.0, -1.0], "constant": 0.0, "note": "a1+a1 - a2+a2"}),
    ModelSpec("klein_gordon", {"m": 3, "p": 4}, {"omegas": [5.0], "constant": 2.5, "note": "sqrt(m^2 + p^2)"}),
    ModelSpec("dirac_field", {"m": 3, "px": 4}, {"omegas": [5.0] * 4, "constant": -10.0,
                                                   "note": "+-sqrt(m^2 + p^2) twice each, holes filled"}),
    ModelSpec("phonon_ring", {"N": 4, "k": 1, "m": 1},
              {"omegas": [2.0, _R2, _R2], "constant": 1 + _R2, "residual": 1,
               "note": "w^2 = (2k/m)(1 - cos(2 pi j/N)), k = 0 residual"}, {"allow_partial": True}),
    ModelSpec("maxwell_mode", {"p": 2}, {"omegas": [2.0, 2.0, 2.0, -2.0], "constant": 2.0,
                                         "note": "three +p modes and one time-like -p mode"}),
]


@dataclass(frozen=True)
class FixtureResult:
    spec: ModelSpec
    passed: bool
    omegas: Tuple[float, ...] = ()
    constant: Optional[float] = None
    residual_count: int = 0
    worst_residual: Optional[float] = None
    diff: str = ""


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * (1 + abs(b))


def run_fixture(spec: ModelSpec, tol: float = 1e-9) -> FixtureResult:
    """Run one fixture through the main pipeline and compare with its expectation.

    Frequencies are compared as multisets.
    """
    options = {**model_options(spec.name), **spec.options}
    try:
        form = generate(spec.name, spec.parameters)
        result = diagonalize(form, allow_partial=bool(options.get("allow_partial", False)))
    except QuadiagError as exc:
        return FixtureResult(spec, False, diff=f"{type(exc).__name__}: {exc}")
    omegas = tuple(float(w) for w in result.omegas)
    residual = getattr(result, "residual_modes", None)
    count = 0 if residual is None else int(residual.shape[0])
    worst = verify(result, form).worst()
    exp = spec.expected or {}
    diffs = []
    if "omegas" in exp:
        want, got = sorted(exp["omegas"]), sorted(omegas)
        if len(want) != len(got) or not all(_close(g, w, tol) for g, w in zip(got, want)):
            diffs.append(f"omegas: expected {_fmt_list(want)}, got {_fmt_list(got)}")
    if "constant" in exp and not _close(result.constant, float(exp["constant"]), tol):
        diffs.append(f"constant: expected {exp['constant']:.12g}, got {result.constant:.12g}")
    if "residual" in exp and count != exp["residual"]:
        diffs.append(f"residual modes: expected {exp['residual']}, got {count}")
    if not worst <= 1e-9:
        diffs.append(f"verification residual {worst:.3e} exceeds 1e-9")
    return FixtureResult(spec, not diffs, omegas, float(result.constant), count, worst, "; ".join(diffs))


def _fmt_list(values: Sequence[float]) -> str:
    return "[" + ", ".join(f"{v:.10g}" for v in values) + "]"


def select_fixtures(pattern: Optional[str] = None, fixtures: Optional[Sequence[ModelSpec]] = None) -> List[ModelSpec]:
    """Fixtures whose model name contains ``pattern``, ordered by name."""
    pool = FIXTURES if fixtures is None else fixtures
    chosen = [f for f in pool if pattern is None or pattern in f.name]
    return sorted(chosen, key=lambda f: (f.name, f.label))
