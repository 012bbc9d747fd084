"""Built-in driven spin models in operator form and explicit matrix form.

Four model families are provided:

* ``lz_two_state``: the two-state linear sweep with its closed-form
  transition probability (the analytic oracle for the propagator);
* ``spin32_*``: a single spin-3/2 with two quadratic anisotropy axes and a
  linear sweep (4 x 4);
* ``half_one_*``: a spin-1/2 coupled to a spin-1 with general bilinear
  couplings, a quadrupole term, and linear sweeps (6 x 6);
* ``central_spin_*``: a central spin-1/2 coupled to two spin-1/2 partners,
  only the central spin swept (8 x 8).

Each family exposes the operator form (a :class:`~kramers_lz.hamiltonian.
Hamiltonian`, from which the time-reversal machinery follows) and the matrix
form (an explicit ``A + R t`` evaluator with the published basis labels).
The two agree entrywise after the documented basis permutation; the matrix
builders own that permutation.

All couplings here use spin operators (S), not Pauli matrices; for spin-1/2
``sigma = 2 S``, and ``lz_two_state`` absorbs that factor internally.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, fields
from typing import Callable, Sequence

import numpy as np

from .hamiltonian import (
    Hamiltonian,
    HamiltonianTerm,
    LinearSweepHamiltonian,
    SpinFactor,
    TimePolynomial,
)
from .spin_algebra import (
    SpinSystem,
    TimeReversalOp,
    apply_antiunitary,
    permute_time_reversal,
    time_reversal,
)

__all__ = [
    "Spin32Params",
    "Spin32Derived",
    "HalfOneParams",
    "HalfOneDerived",
    "CentralSpinParams",
    "CentralSpinDerived",
    "MatrixModel",
    "KramersPair",
    "lz_two_state",
    "lz_probability",
    "lz_labels",
    "spin32_derived",
    "spin32_operator_form",
    "spin32_matrix_form",
    "spin32_labels",
    "half_one_derived",
    "half_one_operator_form",
    "half_one_matrix_form",
    "half_one_labels",
    "central_spin_derived",
    "central_spin_operator_form",
    "central_spin_matrix_form",
    "central_spin_labels",
    "kramers_pairs",
    "partner_pairs",
    "BuiltModel",
    "ModelInfo",
    "MODELS",
    "build_model",
]

_const = TimePolynomial.constant
_lin = TimePolynomial.linear


@dataclass
class MatrixModel:
    """Explicit ``A + R t`` form of a model, with its published basis labels.

    ``permutation[i]`` is the internal (descending-m, lexicographic) basis
    index of the i-th published basis state; ``theta()`` returns the
    time-reversal operator re-expressed in the published ordering.
    """

    sweep: LinearSweepHamiltonian
    labels: tuple[str, ...]
    system: SpinSystem
    permutation: tuple[int, ...]
    derived: object

    @property
    def dim(self) -> int:
        return self.sweep.dim

    def evaluate(self, t: float) -> np.ndarray:
        return self.sweep.evaluate(t)

    def evaluate_many(self, times: np.ndarray) -> np.ndarray:
        return self.sweep.evaluate_many(times)

    def __call__(self, t: float) -> np.ndarray:
        return self.sweep.evaluate(t)

    def theta(self) -> TimeReversalOp:
        return permute_time_reversal(time_reversal(self.system), self.permutation)


def _hermitian_from_upper(diag, upper: dict[tuple[int, int], complex]) -> np.ndarray:
    dim = len(diag)
    a = np.diag(np.asarray(diag, dtype=complex))
    for (i, j), value in upper.items():
        a[i, j] = value
        a[j, i] = np.conj(value)
    return a


# ---------------------------------------------------------------------------
# two-state Landau-Zener
# ---------------------------------------------------------------------------

def lz_two_state(g: float, beta: float) -> Hamiltonian:
    """Two-state linear sweep ``beta * t * sigma_z + g * sigma_x``.

    Built on a single spin-1/2 (sigma = 2 S, hence the factors of two).
    """
    if not beta > 0:
        raise ValueError("sweep rate beta must be positive")
    system = SpinSystem([0.5])
    terms = [
        HamiltonianTerm(_lin(2.0 * beta), (SpinFactor(0, "z"),)),
        HamiltonianTerm(_const(2.0 * g), (SpinFactor(0, "x"),)),
    ]
    return Hamiltonian(system, terms)


def lz_probability(g: float, beta: float) -> float:
    """Asymptotic spin-flip probability ``1 - exp(-pi g^2 / beta)``."""
    if not beta > 0:
        raise ValueError("sweep rate beta must be positive")
    return 1.0 - math.exp(-math.pi * g * g / beta)


def lz_labels() -> tuple[str, str]:
    return ("up", "down")


# ---------------------------------------------------------------------------
# spin-3/2 with quadratic anisotropies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Spin32Params:
    """Couplings of the spin-3/2 model: sweep rates h1, h2; anisotropy
    strengths g1, g2; anisotropy-axis angle phi (radians)."""

    h1: float = 0.0
    h2: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class Spin32Derived:
    """Entries of the published 4 x 4 matrix in terms of the raw couplings."""

    beta1: float
    beta2: float
    delta1: float
    delta2: float
    gamma1: float
    gamma2: float


def spin32_derived(p: Spin32Params) -> Spin32Derived:
    c2 = math.cos(2 * p.phi)
    s2 = math.sin(2 * p.phi)
    return Spin32Derived(
        beta1=1.5 * p.h1 + 27.0 / 8.0 * p.h2,
        beta2=0.5 * p.h1 + p.h2 / 8.0,
        delta1=1.5 * (p.g1 + p.g2) - 0.75 * (p.g1 - p.g2) * c2,
        delta2=(p.g1 + p.g2) + 0.75 * (p.g1 - p.g2) * c2,
        gamma1=math.sqrt(3.0) / 4.0 * (p.g1 + p.g2 + (p.g1 - p.g2) * c2),
        gamma2=math.sqrt(3.0) / 2.0 * (p.g1 - p.g2) * s2,
    )


def _quadratic_form_terms(site: int, direction: Sequence[float], strength: float) -> list[HamiltonianTerm]:
    """Expansion of ``strength * (n . S)^2`` into ordered operator products."""
    terms = []
    axes = tuple(zip("xyz", direction))
    for a, ca in axes:
        for b, cb in axes:
            c = strength * ca * cb
            if c == 0.0:
                continue
            if a == b:
                factors = (SpinFactor(site, a, 2),)
            else:
                factors = (SpinFactor(site, a), SpinFactor(site, b))
            terms.append(HamiltonianTerm(_const(c), factors))
    return terms


def spin32_operator_form(p: Spin32Params, theta_angle: float = 0.0) -> Hamiltonian:
    """Spin-3/2 model as operator products.

    The easy axis is ``n = (cos phi, 0, sin phi)``; the second anisotropy
    axis is perpendicular, ``n_perp = (-sin phi cos theta, sin theta,
    cos phi cos theta)``, which lies in the x-z plane at ``theta_angle = 0``
    (the published 4 x 4 matrix corresponds to that special case).
    """
    system = SpinSystem([1.5])
    n = (math.cos(p.phi), 0.0, math.sin(p.phi))
    n_perp = (
        -math.sin(p.phi) * math.cos(theta_angle),
        math.sin(theta_angle),
        math.cos(p.phi) * math.cos(theta_angle),
    )
    terms = _quadratic_form_terms(0, n, p.g1)
    terms += _quadratic_form_terms(0, n_perp, p.g2)
    if p.h1:
        terms.append(HamiltonianTerm(_lin(p.h1), (SpinFactor(0, "z"),)))
    if p.h2:
        terms.append(HamiltonianTerm(_lin(p.h2), (SpinFactor(0, "z", 3),)))
    return Hamiltonian(system, terms)


def spin32_labels() -> tuple[str, ...]:
    """Labels of the published basis order (3/2, -3/2, 1/2, -1/2)."""
    return ("3/2", "-3/2", "1/2", "-1/2")


def spin32_operator_labels() -> tuple[str, ...]:
    """Labels of the internal descending-m order used by the operator form."""
    return ("3/2", "1/2", "-1/2", "-3/2")


def spin32_matrix_form(p: Spin32Params) -> MatrixModel:
    """The 4 x 4 matrix form in the basis (3/2, -3/2, 1/2, -1/2)."""
    d = spin32_derived(p)
    constant = _hermitian_from_upper(
        [d.delta1, d.delta1, d.delta2, d.delta2],
        {
            (0, 2): d.gamma2,
            (0, 3): d.gamma1,
            (1, 2): d.gamma1,
            (1, 3): -d.gamma2,
        },
    )
    slopes = np.array([d.beta1, -d.beta1, d.beta2, -d.beta2])
    sweep = LinearSweepHamiltonian(constant=constant, slopes=slopes)
    return MatrixModel(
        sweep=sweep,
        labels=spin32_labels(),
        system=SpinSystem([1.5]),
        permutation=(0, 3, 1, 2),
        derived=d,
    )


# ---------------------------------------------------------------------------
# spin-1/2 coupled to spin-1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfOneParams:
    """Couplings of the spin-1/2 x spin-1 model.

    eps1 is the zz exchange, eps2 the spin-1 quadrupole, g1..g8 the bilinear
    couplings, and h1..h3 the linear sweep rates (h3 multiplies s_z S_z^2).
    """

    eps1: float = 0.0
    eps2: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    g3: float = 0.0
    g4: float = 0.0
    g5: float = 0.0
    g6: float = 0.0
    g7: float = 0.0
    g8: float = 0.0
    h1: float = 0.0
    h2: float = 0.0
    h3: float = 0.0


@dataclass(frozen=True)
class HalfOneDerived:
    """Entries of the published 6 x 6 matrix."""

    delta1: float
    delta2: float
    beta1: float
    beta2: float
    beta3: float
    gamma1: complex
    gamma2: complex
    gamma3: complex
    gamma4: complex


def half_one_derived(p: HalfOneParams) -> HalfOneDerived:
    rt8 = 2.0 * math.sqrt(2.0)
    return HalfOneDerived(
        delta1=p.eps1 / 2.0 + p.eps2,
        delta2=-p.eps1 / 2.0 + p.eps2,
        beta1=p.h1 / 2.0 + p.h2 + p.h3 / 2.0,
        beta2=p.h1 / 2.0,
        beta3=p.h1 / 2.0 - p.h2 + p.h3 / 2.0,
        gamma1=(p.g1 - 1j * p.g8) / 2.0,
        gamma2=(p.g2 - p.g3 - 1j * p.g4 - 1j * p.g7) / rt8,
        gamma3=(p.g2 + p.g3 - 1j * p.g4 + 1j * p.g7) / rt8,
        gamma4=(p.g5 - 1j * p.g6) / rt8,
    )


_HALF_ONE_COUPLINGS = (
    ("eps1", ("z", "z")),
    ("g1", ("x", "z")),
    ("g2", ("x", "x")),
    ("g3", ("y", "y")),
    ("g4", ("y", "x")),
    ("g5", ("z", "x")),
    ("g6", ("z", "y")),
    ("g7", ("x", "y")),
    ("g8", ("y", "z")),
)


def half_one_operator_form(p: HalfOneParams) -> Hamiltonian:
    """Spin-1/2 x spin-1 model; site 0 is the spin-1/2."""
    system = SpinSystem([0.5, 1.0])
    terms = []
    for name, (a0, a1) in _HALF_ONE_COUPLINGS:
        value = getattr(p, name)
        if value:
            terms.append(HamiltonianTerm(_const(value), (SpinFactor(0, a0), SpinFactor(1, a1))))
    if p.eps2:
        terms.append(HamiltonianTerm(_const(p.eps2), (SpinFactor(1, "z", 2),)))
    if p.h1:
        terms.append(HamiltonianTerm(_lin(p.h1), (SpinFactor(0, "z"),)))
    if p.h2:
        terms.append(HamiltonianTerm(_lin(p.h2), (SpinFactor(1, "z"),)))
    if p.h3:
        terms.append(HamiltonianTerm(_lin(p.h3), (SpinFactor(0, "z"), SpinFactor(1, "z", 2))))
    return Hamiltonian(system, terms)


def half_one_labels() -> tuple[str, ...]:
    return tuple(str(i) for i in range(1, 7))


def half_one_matrix_form(p: HalfOneParams) -> MatrixModel:
    """The 6 x 6 matrix form in the basis (up 1, up 0, up -1, dn 1, dn 0, dn -1).

    This ordering coincides with the internal lexicographic one, so the
    permutation is the identity.
    """
    d = half_one_derived(p)
    constant = _hermitian_from_upper(
        [d.delta1, 0.0, d.delta2, d.delta2, 0.0, d.delta1],
        {
            (0, 1): d.gamma4,
            (0, 3): d.gamma1,
            (0, 4): d.gamma2,
            (1, 2): d.gamma4,
            (1, 3): d.gamma3,
            (1, 5): d.gamma2,
            (2, 4): d.gamma3,
            (2, 5): -d.gamma1,
            (3, 4): -d.gamma4,
            (4, 5): -d.gamma4,
        },
    )
    slopes = np.array([d.beta1, d.beta2, d.beta3, -d.beta3, -d.beta2, -d.beta1])
    sweep = LinearSweepHamiltonian(constant=constant, slopes=slopes)
    return MatrixModel(
        sweep=sweep,
        labels=half_one_labels(),
        system=SpinSystem([0.5, 1.0]),
        permutation=tuple(range(6)),
        derived=d,
    )


# ---------------------------------------------------------------------------
# central spin-1/2 with two spin-1/2 partners
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CentralSpinParams:
    """Couplings of the central spin model.

    h1 sweeps the central spin only; eps1, eps2 couple it to partners 1 and
    2 along z, eps3 couples the partners; g1..g6 are the transverse terms.
    """

    h1: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    eps3: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    g3: float = 0.0
    g4: float = 0.0
    g5: float = 0.0
    g6: float = 0.0


@dataclass(frozen=True)
class CentralSpinDerived:
    """Entries of the published 8 x 8 matrix."""

    beta: float
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    gamma5: float
    gamma6: float


def central_spin_derived(p: CentralSpinParams) -> CentralSpinDerived:
    return CentralSpinDerived(
        beta=p.h1 / 2.0,
        delta1=(p.eps1 + p.eps2 + p.eps3) / 4.0,
        delta2=(p.eps1 - p.eps2 - p.eps3) / 4.0,
        delta3=(-p.eps1 + p.eps2 - p.eps3) / 4.0,
        delta4=(-p.eps1 - p.eps2 + p.eps3) / 4.0,
        gamma1=(p.g1 + p.g2) / 4.0,
        gamma2=(p.g4 - p.g6) / 4.0,
        gamma3=(p.g3 - p.g5) / 4.0,
        gamma4=(p.g4 + p.g6) / 4.0,
        gamma5=(p.g1 - p.g2) / 4.0,
        gamma6=(p.g3 + p.g5) / 4.0,
    )


_CENTRAL_COUPLINGS = (
    ("eps1", ("z", 1, "z")),
    ("eps2", ("z", 2, "z")),
    ("g1", ("x", 1, "z")),
    ("g2", ("x", 2, "z")),
    ("g3", ("x", 1, "x")),
    ("g4", ("x", 2, "x")),
    ("g5", ("y", 1, "y")),
    ("g6", ("y", 2, "y")),
)


def central_spin_operator_form(p: CentralSpinParams) -> Hamiltonian:
    """Central spin model; site 0 is the central spin."""
    system = SpinSystem([0.5, 0.5, 0.5])
    terms = []
    if p.h1:
        terms.append(HamiltonianTerm(_lin(p.h1), (SpinFactor(0, "z"),)))
    for name, (a0, partner, ap) in _CENTRAL_COUPLINGS:
        value = getattr(p, name)
        if value:
            terms.append(HamiltonianTerm(_const(value), (SpinFactor(0, a0), SpinFactor(partner, ap))))
    if p.eps3:
        terms.append(HamiltonianTerm(_const(p.eps3), (SpinFactor(1, "z"), SpinFactor(2, "z"))))
    return Hamiltonian(system, terms)


def central_spin_labels() -> tuple[str, ...]:
    return tuple(str(i) for i in range(1, 9))


def central_spin_matrix_form(p: CentralSpinParams) -> MatrixModel:
    """The 8 x 8 matrix form in the all-up-first product basis (identity
    permutation relative to the internal ordering)."""
    d = central_spin_derived(p)
    constant = _hermitian_from_upper(
        [d.delta1, d.delta2, d.delta3, d.delta4, d.delta4, d.delta3, d.delta2, d.delta1],
        {
            (0, 4): d.gamma1,
            (0, 5): d.gamma2,
            (0, 6): d.gamma3,
            (1, 4): d.gamma4,
            (1, 5): d.gamma5,
            (1, 7): d.gamma3,
            (2, 4): d.gamma6,
            (2, 6): -d.gamma5,
            (2, 7): d.gamma2,
            (3, 5): d.gamma6,
            (3, 6): d.gamma4,
            (3, 7): -d.gamma1,
        },
    )
    slopes = d.beta * np.array([1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0])
    sweep = LinearSweepHamiltonian(constant=constant, slopes=slopes)
    return MatrixModel(
        sweep=sweep,
        labels=central_spin_labels(),
        system=SpinSystem([0.5, 0.5, 0.5]),
        permutation=tuple(range(8)),
        derived=d,
    )


# ---------------------------------------------------------------------------
# Kramers pairing of diabatic basis states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KramersPair:
    """Time-reversal partner of one basis state: theta |index> = phase |partner>."""

    index: int
    partner: int
    phase: complex


_ALIGNMENT_TOL = 1e-10


def kramers_pairs(
    system: SpinSystem | None = None,
    theta: TimeReversalOp | None = None,
) -> tuple[KramersPair, ...]:
    """Map each basis state to its time-reversal partner.

    Requires the basis states to be mapped onto single basis states by the
    time-reversal operator (true for any product basis of Sz eigenstates);
    raises otherwise, which signals a rotated, non-product basis.  Either a
    spin system or a ready-made theta must be supplied.
    """
    if theta is None:
        if system is None:
            raise ValueError("kramers_pairs needs a SpinSystem or a theta")
        theta = time_reversal(system)
    dim = theta.dim
    pairs = []
    for n in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[n] = 1.0
        image = apply_antiunitary(theta, e)
        partner = int(np.argmax(np.abs(image)))
        amplitude = image[partner]
        if abs(amplitude) < 1.0 - _ALIGNMENT_TOL:
            raise ValueError(
                f"time reversal does not map basis state {n} to a single basis "
                "state; the diabatic basis is not an Sz product basis"
            )
        pairs.append(KramersPair(index=n, partner=partner, phase=amplitude / abs(amplitude)))
    return tuple(pairs)


def partner_pairs(pairs: Sequence[KramersPair]) -> tuple[tuple[int, int], ...]:
    """Unique unordered partner pairs (n, n') with n < n'."""
    seen = set()
    out = []
    for pair in pairs:
        key = (min(pair.index, pair.partner), max(pair.index, pair.partner))
        if key not in seen:
            seen.add(key)
            out.append(key)
    return tuple(out)


# ---------------------------------------------------------------------------
# registry used by the command line front end
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BuiltModel:
    hamiltonian: Hamiltonian
    system: SpinSystem
    labels: tuple[str, ...]


@dataclass(frozen=True)
class ModelInfo:
    name: str
    keys: tuple[str, ...]
    factory: Callable[[dict], BuiltModel]


def _build_lz2(params: dict) -> BuiltModel:
    h = lz_two_state(g=params.get("g", 0.0), beta=params.get("beta", 0.0))
    return BuiltModel(h, h.sys, lz_labels())


def _build_spin32(params: dict) -> BuiltModel:
    params = dict(params)
    theta_angle = params.pop("theta", 0.0)
    h = spin32_operator_form(Spin32Params(**params), theta_angle=theta_angle)
    return BuiltModel(h, h.sys, spin32_operator_labels())


def _build_half_one(params: dict) -> BuiltModel:
    h = half_one_operator_form(HalfOneParams(**params))
    return BuiltModel(h, h.sys, half_one_labels())


def _build_central_spin(params: dict) -> BuiltModel:
    h = central_spin_operator_form(CentralSpinParams(**params))
    return BuiltModel(h, h.sys, central_spin_labels())


def _keys_of(cls) -> tuple[str, ...]:
    return tuple(f.name for f in fields(cls))


MODELS: dict[str, ModelInfo] = {
    "lz2": ModelInfo("lz2", ("g", "beta"), _build_lz2),
    "spin32": ModelInfo("spin32", _keys_of(Spin32Params) + ("theta",), _build_spin32),
    "half-one": ModelInfo("half-one", _keys_of(HalfOneParams), _build_half_one),
    "central-spin": ModelInfo("central-spin", _keys_of(CentralSpinParams), _build_central_spin),
}


def build_model(name: str, params: dict) -> BuiltModel:
    """Instantiate a registered model; unknown names or keys raise ValueError."""
    try:
        info = MODELS[name]
    except KeyError:
        known = ", ".join(sorted(MODELS))
        raise ValueError(f"unknown model {name!r} (known models: {known})") from None
    unknown = sorted(set(params) - set(info.keys))
    if unknown:
        raise ValueError(
            f"unknown parameter(s) {', '.join(unknown)} for model {name!r}; "
            f"valid keys: {', '.join(info.keys)}"
        )
    return info.factory(params)
