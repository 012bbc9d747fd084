"""Time-dependent Hamiltonians as sums of polynomial-coefficient spin products.

A Hamiltonian is a sum of terms ``p(t) * S_{a1}^{j1} S_{a2}^{j2} ...`` where
``p`` is a real polynomial in time and each factor is a single-site spin
operator raised to a positive power.  Factor products are applied in listed
order and are not symmetrized; Hermiticity of the assembled sum is checked,
not enforced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence, Union

import numpy as np

from .spin_algebra import SpinSystem, TimeReversalOp, conjugate_by_theta, embed, spin_axis_matrix

__all__ = [
    "TimePolynomial",
    "SpinFactor",
    "HamiltonianTerm",
    "Hamiltonian",
    "LinearSweepHamiltonian",
    "TermParity",
    "ParityReport",
    "SymmetryCheck",
    "check_parity_symmetry",
    "check_dynamic_symmetry",
    "check_hermitian",
    "from_matrix_pair",
    "rescale_time",
    "as_evaluator",
]

# sample times used when validating Hermiticity at assembly
_SAMPLE_TIMES = np.array([0.0, 0.37, -0.37, 1.29, -1.29, 2.71])


@dataclass(frozen=True)
class TimePolynomial:
    """Real polynomial in time, stored as canonical (power, coeff) pairs.

    Canonical means: distinct powers in ascending order, zero coefficients
    dropped.  The parity classification drives the symmetry checker:
    ``even``/``odd`` when all powers share that parity, ``mixed`` otherwise,
    ``zero`` for the empty polynomial (which is both even and odd).
    """

    monomials: tuple[tuple[int, float], ...]

    def __init__(self, monomials: Iterable[tuple[int, float]] = ()):
        merged: dict[int, float] = {}
        for power, coeff in monomials:
            power = int(power)
            if power < 0:
                raise ValueError("polynomial powers must be nonnegative")
            merged[power] = merged.get(power, 0.0) + float(coeff)
        canon = tuple(sorted((p, c) for p, c in merged.items() if c != 0.0))
        object.__setattr__(self, "monomials", canon)

    @classmethod
    def constant(cls, c: float) -> "TimePolynomial":
        return cls(((0, c),))

    @classmethod
    def linear(cls, slope: float) -> "TimePolynomial":
        """The polynomial ``slope * t``."""
        return cls(((1, slope),))

    @classmethod
    def monomial(cls, power: int, coeff: float) -> "TimePolynomial":
        return cls(((power, coeff),))

    def __call__(self, t):
        """Evaluate at a scalar or array ``t``.

        Powers are built by repeated multiplication so evaluation at ``-t``
        is the exact negation/copy of evaluation at ``t`` per parity.
        """
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if not self.monomials:
            return out if out.ndim else float(out)
        max_power = self.monomials[-1][0]
        coeffs = dict(self.monomials)
        mono = np.ones_like(t)
        for p in range(max_power + 1):
            c = coeffs.get(p)
            if c is not None:
                out = out + c * mono
            if p < max_power:
                mono = mono * t
        return out if out.ndim else float(out)

    @property
    def parity(self) -> str:
        if not self.monomials:
            return "zero"
        parities = {p % 2 for p, _ in self.monomials}
        if parities == {0}:
            return "even"
        if parities == {1}:
            return "odd"
        return "mixed"

    @property
    def is_zero(self) -> bool:
        return not self.monomials

    def even_part(self) -> "TimePolynomial":
        return TimePolynomial((p, c) for p, c in self.monomials if p % 2 == 0)

    def odd_part(self) -> "TimePolynomial":
        return TimePolynomial((p, c) for p, c in self.monomials if p % 2 == 1)

    def scaled(self, factor: float) -> "TimePolynomial":
        return TimePolynomial((p, factor * c) for p, c in self.monomials)

    def time_scaled(self, lam: float) -> "TimePolynomial":
        """Coefficients of ``p(lam * t)`` as a polynomial in ``t``."""
        return TimePolynomial((p, c * lam**p) for p, c in self.monomials)

    def __add__(self, other: "TimePolynomial") -> "TimePolynomial":
        return TimePolynomial(self.monomials + other.monomials)


_VALID_AXES = frozenset("xyz")


@dataclass(frozen=True)
class SpinFactor:
    """One factor ``S_axis^exponent`` acting on ``site``."""

    site: int
    axis: str
    exponent: int = 1

    def __post_init__(self):
        if self.axis not in _VALID_AXES:
            raise ValueError(f"axis must be one of 'x', 'y', 'z', got {self.axis!r}")
        if self.exponent < 1:
            raise ValueError("factor exponent must be a positive integer")


@dataclass(frozen=True)
class HamiltonianTerm:
    """One summand: coefficient polynomial times an ordered product of factors."""

    coeff: TimePolynomial
    factors: tuple[SpinFactor, ...]

    def __init__(self, coeff: TimePolynomial, factors: Iterable[SpinFactor]):
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "factors", tuple(factors))

    @property
    def order(self) -> int:
        """Total operator count n (exponents included)."""
        return sum(f.exponent for f in self.factors)

    def matrix(self, system: SpinSystem) -> np.ndarray:
        """Product of the embedded factors, in listed order."""
        out = np.eye(system.dim, dtype=complex)
        for f in self.factors:
            if not 0 <= f.site < system.sites:
                raise ValueError(f"factor site {f.site} out of range for {system!r}")
            local = np.linalg.matrix_power(spin_axis_matrix(system.spins[f.site], f.axis), f.exponent)
            out = out @ embed(system, f.site, local)
        return out


class Hamiltonian:
    """A spin system together with a list of terms; evaluates to dense matrices.

    Term matrices are collected by polynomial power at construction, so
    evaluation at one time or at a whole grid of times is a short sum of
    precomputed matrices.
    """

    def __init__(self, system: SpinSystem, terms: Iterable[HamiltonianTerm], validate: bool = True):
        self.sys = system
        self.terms: tuple[HamiltonianTerm, ...] = tuple(terms)
        by_power: dict[int, np.ndarray] = {}
        for term in self.terms:
            mat = term.matrix(system)
            for power, coeff in term.coeff.monomials:
                if power in by_power:
                    by_power[power] = by_power[power] + coeff * mat
                else:
                    by_power[power] = coeff * mat
        self._powers = tuple(sorted(by_power))
        self._power_matrices = tuple(by_power[p] for p in self._powers)
        if validate:
            check = check_hermitian(self, _SAMPLE_TIMES)
            if not check.passed:
                raise ValueError(
                    f"Hamiltonian is not Hermitian (max deviation {check.max_deviation:.3e}); "
                    "pass validate=False to build it anyway"
                )

    @property
    def dim(self) -> int:
        return self.sys.dim

    def evaluate(self, t: float) -> np.ndarray:
        return self.evaluate_many(np.asarray([t], dtype=float))[0]

    def evaluate_many(self, times: np.ndarray) -> np.ndarray:
        """Stack of H(t) over ``times``; exact under t -> -t by parity."""
        times = np.asarray(times, dtype=float)
        out = np.zeros(times.shape + (self.dim, self.dim), dtype=complex)
        if not self._powers:
            return out
        max_power = self._powers[-1]
        lookup = dict(zip(self._powers, self._power_matrices))
        mono = np.ones_like(times)
        for p in range(max_power + 1):
            mat = lookup.get(p)
            if mat is not None:
                out += mono[..., None, None] * mat
            if p < max_power:
                mono = mono * times
        return out

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluate(t)

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        if other.sys != self.sys:
            raise ValueError("cannot add Hamiltonians on different spin systems")
        return Hamiltonian(self.sys, self.terms + other.terms, validate=False)

    def even_part(self) -> "Hamiltonian":
        terms = [HamiltonianTerm(t.coeff.even_part(), t.factors) for t in self.terms]
        return Hamiltonian(self.sys, [t for t in terms if not t.coeff.is_zero], validate=False)

    def __repr__(self) -> str:
        return f"Hamiltonian({self.sys!r}, {len(self.terms)} terms)"


class TermParity(NamedTuple):
    index: int
    order: int
    coeff_parity: str
    passed: bool


@dataclass(frozen=True)
class ParityReport:
    """Per-term verdicts for the coefficient-parity symmetry condition."""

    terms: tuple[TermParity, ...]
    passed: bool


def check_parity_symmetry(h: Hamiltonian) -> ParityReport:
    """Check that each term's coefficient parity matches its operator count.

    A term with n operators passes when its polynomial is odd for odd n and
    even for even n; identically zero coefficients pass either way; mixed
    parity fails.  The aggregate verdict is the conjunction.
    """
    entries = []
    for i, term in enumerate(h.terms):
        parity = term.coeff.parity
        n = term.order
        wanted = "odd" if n % 2 else "even"
        passed = parity == "zero" or parity == wanted
        entries.append(TermParity(index=i, order=n, coeff_parity=parity, passed=passed))
    return ParityReport(terms=tuple(entries), passed=all(e.passed for e in entries))


class SymmetryCheck(NamedTuple):
    passed: bool
    max_deviation: float
    tol: float


def check_dynamic_symmetry(
    h,
    theta: TimeReversalOp,
    grid: Sequence[float],
    tol: float = 1e-10,
) -> SymmetryCheck:
    """Compare ``theta H(t) theta^-1`` against ``H(-t)`` over a time grid.

    Works for any evaluator (operator form, matrix form, or a plain
    callable); returns the max-entry deviation and a pass verdict.
    """
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    evaluator = as_evaluator(h)
    worst = 0.0
    for t in grid:
        lhs = conjugate_by_theta(theta, evaluator(t))
        rhs = evaluator(-t)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return SymmetryCheck(passed=worst < tol, max_deviation=worst, tol=tol)


def check_hermitian(h, grid: Sequence[float], tol: float = 1e-12) -> SymmetryCheck:
    """Max-entry deviation of H(t) from its conjugate transpose over a grid."""
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    evaluator = as_evaluator(h)
    worst = 0.0
    for t in grid:
        m = evaluator(t)
        worst = max(worst, float(np.max(np.abs(m - m.conj().T))))
    return SymmetryCheck(passed=worst < tol, max_deviation=worst, tol=tol)


@dataclass(frozen=True)
class LinearSweepHamiltonian:
    """Evaluator for ``H(t) = A + R t`` with Hermitian A and diagonal R.

    ``basis`` is None when the input R was already diagonal; otherwise it
    holds the unitary that diagonalized R (columns are the diabatic states
    in the original basis, ordered by ascending slope), and A is expressed
    in that rotated basis.
    """

    constant: np.ndarray
    slopes: np.ndarray
    basis: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def evaluate(self, t: float) -> np.ndarray:
        return self.constant + np.diag(self.slopes * t).astype(complex)

    def evaluate_many(self, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        out = np.broadcast_to(self.constant, times.shape + self.constant.shape).copy()
        idx = np.arange(self.dim)
        out[..., idx, idx] += times[..., None] * self.slopes
        return out

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluate(t)


def from_matrix_pair(a: np.ndarray, r: np.ndarray, tol: float = 1e-12) -> LinearSweepHamiltonian:
    """Build the evaluator ``t -> A + R t`` from Hermitian matrices A and R.

    R must be diagonal in the supplied basis (the diabatic basis); if it is
    not, it is diagonalized and A is rotated accordingly, with the rotation
    reported on the result's ``basis`` field.
    """
    a = np.asarray(a, dtype=complex)
    r = np.asarray(r, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("A must be a square matrix")
    if a.shape != r.shape:
        raise ValueError(f"A and R dimensions differ: {a.shape} vs {r.shape}")
    if np.max(np.abs(a - a.conj().T)) > tol:
        raise ValueError("A is not Hermitian")
    if np.max(np.abs(r - r.conj().T)) > tol:
        raise ValueError("R is not Hermitian")
    off = r - np.diag(np.diag(r))
    if np.max(np.abs(off)) <= tol:
        return LinearSweepHamiltonian(constant=a, slopes=np.real(np.diag(r)).copy())
    slopes, v = np.linalg.eigh(r)
    return LinearSweepHamiltonian(constant=v.conj().T @ a @ v, slopes=slopes, basis=v)


def rescale_time(h: Hamiltonian, lam: float) -> Hamiltonian:
    """Return the Hamiltonian generating the same evolution on a time axis
    compressed by ``lam``: coefficients pick up ``lam**(power + 1)``.

    Propagating the result over (-T/lam, T/lam) with an unchanged step count
    reproduces the original evolution over (-T, T) exactly.
    """
    terms = [
        HamiltonianTerm(t.coeff.time_scaled(lam).scaled(lam), t.factors) for t in h.terms
    ]
    return Hamiltonian(h.sys, terms, validate=False)


Evaluator = Callable[[float], np.ndarray]


class _CallableEvaluator:
    """Adapter giving plain callables the evaluate/evaluate_many interface."""

    def __init__(self, fn: Evaluator):
        self._fn = fn

    def evaluate(self, t: float) -> np.ndarray:
        return np.asarray(self._fn(t), dtype=complex)

    def evaluate_many(self, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        return np.stack([self.evaluate(t) for t in times])

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluate(t)


HamiltonianLike = Union[Hamiltonian, LinearSweepHamiltonian, Evaluator]


def as_evaluator(h: HamiltonianLike):
    """Normalize Hamiltonian-like inputs to an object with evaluate/evaluate_many."""
    if hasattr(h, "evaluate_many") and hasattr(h, "evaluate"):
        return h
    if callable(h):
        return _CallableEvaluator(h)
    raise TypeError(f"cannot interpret {type(h).__name__} as a time-dependent Hamiltonian")
