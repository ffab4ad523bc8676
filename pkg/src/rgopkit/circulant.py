"""Symmetric circulant matrix utilities.

A circulant matrix is determined by its first row c_0..c_{T-1}; every
subsequent row is the cyclic right-shift of the previous one.  When the first
row satisfies c_t == c_{T-t} the matrix is symmetric and its eigenvalues are
the real cosine sums

    lambda_j = sum_t c_t * cos(2*pi*j*t / T),   j = 0..T-1.

Eigenvalues are computed by the direct cosine sum up to ``FFT_THRESHOLD`` and
by a real FFT beyond it; the two paths agree to ~1e-15 and tests pin them to
1e-10 of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotSymmetric

# Direct O(T^2) cosine sums up to this size inclusive, rfft beyond it.
FFT_THRESHOLD = 256

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class CirculantVector:
    """First row of a circulant matrix."""

    first_row: np.ndarray

    def __post_init__(self):
        row = np.atleast_1d(np.asarray(self.first_row, dtype=float))
        if row.ndim != 1 or row.size < 1:
            raise ValueError("first_row must be a 1-D vector of length >= 1")
        row = row.copy()
        row.setflags(write=False)
        object.__setattr__(self, "first_row", row)

    @property
    def size(self) -> int:
        return self.first_row.size

    @property
    def is_symmetric(self) -> bool:
        """True iff c_t == c_{T-t} for all t (within 1e-12 of the row scale)."""
        c = self.first_row
        scale = max(1.0, float(np.abs(c).max()))
        return bool(np.abs(c[1:] - c[1:][::-1]).max(initial=0.0) <= _SYM_TOL * scale)


def materialize(c: CirculantVector) -> np.ndarray:
    """Dense T x T matrix with row i the cyclic right-shift of the first row by i."""
    row = c.first_row
    T = row.size
    idx = (np.arange(T)[None, :] - np.arange(T)[:, None]) % T
    return row[idx]


def eigenvalues_symmetric(c: CirculantVector) -> np.ndarray:
    """Eigenvalues lambda_j = sum_t c_t cos(2 pi j t / T) of a symmetric circulant.

    Raises
    ------
    NotSymmetric
        If the first row does not satisfy c_t == c_{T-t}.
    """
    if not c.is_symmetric:
        raise NotSymmetric("first row is not symmetric: c_t != c_{T-t}")
    row = c.first_row
    T = row.size
    if T <= FFT_THRESHOLD:
        j = np.arange(T)
        # cos table times row, reduced with numpy's pairwise summation
        table = np.cos((2.0 * np.pi / T) * np.outer(j, j))
        return (table * row[None, :]).sum(axis=1)
    spectrum = np.fft.rfft(row).real
    lam = np.empty(T)
    half = spectrum.size
    lam[:half] = spectrum
    lam[half:] = spectrum[1 : T - half + 1][::-1]
    return lam


def is_psd(c: CirculantVector, tol: float = 0.0) -> bool:
    """True iff every eigenvalue is >= -tol * max(1, max |lambda|)."""
    lam = eigenvalues_symmetric(c)
    return bool(lam.min() >= -tol * max(1.0, float(np.abs(lam).max())))


def cosine_sum(j: int, T: int) -> float:
    """sum_{t=0}^{T-1} cos(2 pi j t / T); exactly T for j = 0, ~0 for 1 <= j <= T-1."""
    if not 0 <= j <= T - 1:
        raise ValueError(f"j must satisfy 0 <= j <= T-1, got j={j}, T={T}")
    if j == 0:
        return float(T)
    t = np.arange(T)
    return float(np.cos((2.0 * math.pi * j / T) * t).sum())
