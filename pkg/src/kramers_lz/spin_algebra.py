"""Spin operators, tensor-product embeddings, and the antiunitary time-reversal map.

Conventions used throughout the package:

* a site with spin ``s`` has dimension ``2s + 1`` and its basis is ordered by
  descending magnetic quantum number ``m = s, s - 1, ..., -s``;
* multi-site bases are lexicographic with the first listed spin varying
  slowest (site 0 is the most significant index);
* the time-reversal map is ``exp(-i pi Sy_total) K`` with ``K`` complex
  conjugation in this basis.  It is antiunitary, so it is represented by a
  (unitary matrix, conjugation flag) pair rather than a single matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "SpinSystem",
    "TimeReversalOp",
    "spin_matrices",
    "embed",
    "total_spin_y",
    "time_reversal",
    "permute_time_reversal",
    "apply_antiunitary",
    "conjugate_by_theta",
]


def _twice_spin(s) -> int:
    """Validate a spin magnitude and return it as a twice-spin integer."""
    value = float(s)
    doubled = round(2 * value)
    if doubled < 0 or abs(2 * value - doubled) > 1e-9:
        raise ValueError(f"spin must be a nonnegative half-integer, got {s!r}")
    return doubled


class SpinSystem:
    """An ordered collection of spins defining a tensor-product Hilbert space.

    Spin magnitudes are stored as twice-spin integers so that parity
    decisions (half-integer vs integer total spin) are exact.
    """

    __slots__ = ("twice_spins",)

    def __init__(self, spins: Iterable):
        self.twice_spins: tuple[int, ...] = tuple(_twice_spin(s) for s in spins)
        if not self.twice_spins:
            raise ValueError("a spin system needs at least one site")

    @property
    def spins(self) -> tuple[float, ...]:
        return tuple(ts / 2 for ts in self.twice_spins)

    @property
    def sites(self) -> int:
        return len(self.twice_spins)

    @property
    def dim(self) -> int:
        return prod(ts + 1 for ts in self.twice_spins)

    def site_dim(self, site: int) -> int:
        return self.twice_spins[site] + 1

    @property
    def half_integer_total(self) -> bool:
        """True when the total spin is half-integer (sum of twice-spins odd)."""
        return sum(self.twice_spins) % 2 == 1

    def __eq__(self, other) -> bool:
        return isinstance(other, SpinSystem) and self.twice_spins == other.twice_spins

    def __hash__(self) -> int:
        return hash(self.twice_spins)

    def __repr__(self) -> str:
        inner = ", ".join(_format_spin(ts) for ts in self.twice_spins)
        return f"SpinSystem({inner})"


def _format_spin(twice: int) -> str:
    return str(twice // 2) if twice % 2 == 0 else f"{twice}/2"


def spin_matrices(s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Sx, Sy, Sz) for a single spin ``s`` in the descending-m basis.

    Sz is diagonal with entries ``s, s-1, ..., -s``; Sx and Sy are built from
    the standard ladder operators, so Sx and Sz are real and Sy is purely
    imaginary.
    """
    twice = _twice_spin(s)
    sval = twice / 2
    dim = twice + 1
    m = sval - np.arange(dim)
    sz = np.diag(m).astype(complex)
    # raising operator: <m+1| S+ |m> = sqrt(s(s+1) - m(m+1))
    up = np.sqrt(sval * (sval + 1) - m[1:] * (m[1:] + 1))
    sp = np.zeros((dim, dim), dtype=complex)
    sp[np.arange(dim - 1), np.arange(1, dim)] = up
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    return sx, sy, sz


_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def spin_axis_matrix(s, axis: str) -> np.ndarray:
    """Single-site spin matrix along ``axis`` in {'x', 'y', 'z'}."""
    try:
        index = _AXIS_INDEX[axis]
    except KeyError:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None
    return spin_matrices(s)[index]


def embed(system: SpinSystem, site: int, op: np.ndarray) -> np.ndarray:
    """Embed a single-site operator into the full tensor-product space.

    Returns ``I (x) ... (x) op (x) ... (x) I`` with the operator at ``site``
    and identities elsewhere, consistent with the lexicographic basis order.
    """
    if not 0 <= site < system.sites:
        raise ValueError(f"site {site} out of range for {system!r}")
    op = np.asarray(op, dtype=complex)
    expected = system.site_dim(site)
    if op.shape != (expected, expected):
        raise ValueError(
            f"operator shape {op.shape} does not match site {site} "
            f"dimension {expected}"
        )
    result = np.eye(1, dtype=complex)
    for k in range(system.sites):
        factor = op if k == site else np.eye(system.site_dim(k), dtype=complex)
        result = np.kron(result, factor)
    return result


def total_spin_y(system: SpinSystem) -> np.ndarray:
    """Sum of the single-site Sy operators embedded into the full space."""
    dim = system.dim
    out = np.zeros((dim, dim), dtype=complex)
    for site, spin in enumerate(system.spins):
        out += embed(system, site, spin_matrices(spin)[1])
    return out


@dataclass(frozen=True)
class TimeReversalOp:
    """Antiunitary map ``v -> u @ conj(v)``.

    The unitary factor ``u`` is ``exp(-i pi Sy_total)``; ``conjugates`` marks
    the complex-conjugation factor and is always True for time reversal.
    """

    u: np.ndarray
    conjugates: bool = True

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return apply_antiunitary(self, v)

    def squared(self) -> np.ndarray:
        """Matrix of the doubled map; equals +I or -I by total-spin parity."""
        return self.u @ self.u.conj()


def time_reversal(system: SpinSystem) -> TimeReversalOp:
    """Construct the time-reversal operator for a spin system.

    The unitary factor is computed by Hermitian eigendecomposition of the
    total Sy, which keeps it unitary to rounding.
    """
    sy = total_spin_y(system)
    w, v = np.linalg.eigh(sy)
    u = (v * np.exp(-1j * np.pi * w)) @ v.conj().T
    return TimeReversalOp(u=u)


def permute_time_reversal(theta: TimeReversalOp, permutation: Sequence[int]) -> TimeReversalOp:
    """Re-express a time-reversal operator in a permuted basis.

    ``permutation[i]`` is the original index of the i-th basis vector of the
    new ordering.  Permutations are real, so they commute with conjugation.
    """
    perm = np.asarray(permutation, dtype=int)
    if sorted(perm.tolist()) != list(range(theta.dim)):
        raise ValueError("permutation must be a bijection on basis indices")
    u = theta.u[np.ix_(perm, perm)]
    return TimeReversalOp(u=u, conjugates=theta.conjugates)


def apply_antiunitary(theta: TimeReversalOp, v: np.ndarray) -> np.ndarray:
    """Apply ``theta`` to a state vector: ``u @ conj(v)``."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (theta.dim,):
        raise ValueError(f"state shape {v.shape} does not match operator dim {theta.dim}")
    return theta.u @ v.conj()


def conjugate_by_theta(theta: TimeReversalOp, a: np.ndarray) -> np.ndarray:
    """Return ``theta A theta^-1``, i.e. ``u @ conj(A) @ u^dagger``."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (theta.dim, theta.dim):
        raise ValueError(f"matrix shape {a.shape} does not match operator dim {theta.dim}")
    return theta.u @ a.conj() @ theta.u.conj().T
