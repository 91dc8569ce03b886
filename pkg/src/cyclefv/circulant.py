"""Circulant linear algebra for the walk generator on the cycle.

A circulant matrix ``circ(c_0, ..., c_{K-1})`` has entry ``(r, c)`` equal to
``c_{(c - r) mod K}``. It is diagonalised by the Fourier vectors
``f_k = (w^{jk})_j`` with ``w = exp(2i*pi/K)``:

    C f_k = lambda_k f_k,   lambda_k = sum_j c_j w^{jk}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams

IMAG_TOL = 1e-10


@dataclass(frozen=True)
class CirculantMatrix:
    """Circulant matrix stored by its first row."""

    first_row: np.ndarray

    def __post_init__(self):
        row = np.asarray(self.first_row, dtype=float)
        if row.ndim != 1 or row.size == 0:
            raise ValueError("first_row must be a nonempty vector")
        row = row.copy()
        row.flags.writeable = False
        object.__setattr__(self, "first_row", row)

    @property
    def size(self) -> int:
        return self.first_row.size

    def dense(self) -> np.ndarray:
        K = self.size
        idx = (np.arange(K)[None, :] - np.arange(K)[:, None]) % K
        return self.first_row[idx]

    def eigenvalues(self) -> np.ndarray:
        return circ_eigenvalues(self)

    def __eq__(self, other):
        if not isinstance(other, CirculantMatrix):
            return NotImplemented
        return np.array_equal(self.first_row, other.first_row)

    def __hash__(self):
        return hash(self.first_row.tobytes())


def _dft_matrix(K: int) -> np.ndarray:
    """``F[k, j] = w^{kj}``, built from reduced exponents for accuracy."""
    kj = np.outer(np.arange(K), np.arange(K)) % K
    return np.exp(2j * np.pi * kj / K)


def build_Q(params: ModelParams) -> CirculantMatrix:
    """Generator of the unkilled walk: ``circ(-(1+theta), 1, 0, ..., 0, theta)``."""
    row = np.zeros(params.K)
    row[0] = -(1.0 + params.theta)
    row[1] = 1.0
    row[-1] += params.theta
    return CirculantMatrix(row)


def circ_eigenvalues(C: CirculantMatrix) -> np.ndarray:
    """Eigenvalues ``lambda_k = sum_j c_j w^{jk}`` (associated polynomial at roots of unity)."""
    return _dft_matrix(C.size) @ C.first_row


def q_spectrum_closed_form(params: ModelParams) -> np.ndarray:
    """``lambda_k = -2(1+theta) sin^2(pi k/K) + i (1-theta) sin(2 pi k/K)``."""
    k = np.arange(params.K)
    th = params.theta
    re = -2.0 * (1.0 + th) * np.sin(np.pi * k / params.K) ** 2
    im = (1.0 - th) * np.sin(2.0 * np.pi * k / params.K)
    return re + 1j * im


def spectral_constants(params: ModelParams) -> tuple[float, float]:
    """Return ``(rho_K, alpha_K)``: spectral gap and largest decay rate of Q."""
    K, th = params.K, params.theta
    rho = 2.0 * (1.0 + th) * np.sin(np.pi / K) ** 2
    if K % 2 == 0:
        alpha = 2.0 * (1.0 + th)
    else:
        alpha = 2.0 * (1.0 + th) * np.cos(np.pi / (2 * K)) ** 2
    return float(rho), float(alpha)


def exp_action(C: CirculantMatrix, t: float, v, method: str = "dft") -> np.ndarray:
    """Row-vector action ``v @ expm(t C)``.

    ``v C`` is the circular convolution of ``v`` with the first row, so in
    Fourier space each mode is multiplied by ``exp(t * lambda_{-k})``.
    ``method`` selects a direct O(K^2) transform or ``numpy.fft``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    v = np.asarray(v, dtype=float)
    K = C.size
    if v.shape[-1] != K:
        raise ValueError(f"vector length {v.shape[-1]} does not match matrix size {K}")
    if t == 0:
        return v.copy()
    if method == "fft":
        lam = np.fft.fft(C.first_row)
        out = np.fft.ifft(np.fft.fft(v, axis=-1) * np.exp(t * lam), axis=-1)
    elif method == "dft":
        F = _dft_matrix(K)
        Finv = F / K  # conj(F) is the forward transform, F/K its inverse
        lam = np.conj(F) @ C.first_row
        out = ((v @ np.conj(F)) * np.exp(t * lam)) @ Finv
    else:
        raise ValueError(f"unknown method {method!r}")
    scale = max(1.0, float(np.max(np.abs(v), initial=0.0)))
    resid = float(np.max(np.abs(out.imag), initial=0.0))
    assert resid <= IMAG_TOL * scale, f"imaginary residue {resid:g} in exp_action"
    return out.real


def expm_dense(A: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Dense ``expm(t A)`` by scaling and squaring (scipy's Pade implementation)."""
    from scipy.linalg import expm

    return expm(t * np.asarray(A, dtype=float))


def cloez_lambda(C) -> float:
    """Coupling constant ``inf_{x != y} Q_xy + Q_yx + sum_{s != x,y} min(Q_xs, Q_ys)``.

    ``C`` may be a :class:`CirculantMatrix` or a dense generator matrix.
    """
    Q = C.dense() if isinstance(C, CirculantMatrix) else np.asarray(C, dtype=float)
    n = Q.shape[0]
    best = np.inf
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            mask = np.ones(n, dtype=bool)
            mask[[x, y]] = False
            val = Q[x, y] + Q[y, x] + np.minimum(Q[x, mask], Q[y, mask]).sum()
            best = min(best, val)
    return float(best)
