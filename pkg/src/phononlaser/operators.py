"""Truncated-Fock and spin operator algebra.

All operators are dense complex numpy arrays (row-major); sparse CSR views are
obtained with :func:`as_sparse` and agree elementwise with the dense form.
The joint Hilbert space is ordered (motion, heating ion, cooling ion) and that
ordering is fixed project-wide: a Kronecker product ``kron(M, H, C)`` acts on
the joint index ``(n*dim_h + h)*dim_c + c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import eval_genlaguerre, gammaln

__all__ = [
    "SpaceLayout",
    "destroy",
    "create",
    "number_op",
    "spin_op",
    "embed",
    "displacement",
    "as_sparse",
]


class DimensionError(ValueError):
    """Raised for invalid or mismatched operator dimensions."""


@dataclass(frozen=True)
class SpaceLayout:
    """Subsystem dimensions of the joint space, in fixed order.

    Order is (motion, heating ion, cooling ion).  ``fock_cutoff`` is the
    number of retained Fock states N (occupation 0..N-1).
    """

    fock_cutoff: int
    dim_h: int = 2
    dim_c: int = 2

    def __post_init__(self):
        if self.fock_cutoff < 2:
            raise DimensionError(f"fock_cutoff must be >= 2, got {self.fock_cutoff}")
        if self.dim_h not in (2, 4):
            raise DimensionError(f"heating-ion dimension must be 2 or 4, got {self.dim_h}")
        if self.dim_c != 2:
            raise DimensionError(f"cooling-ion dimension must be 2, got {self.dim_c}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.fock_cutoff, self.dim_h, self.dim_c)

    @property
    def joint_dim(self) -> int:
        return self.fock_cutoff * self.dim_h * self.dim_c


def destroy(N: int) -> np.ndarray:
    """Truncated annihilation operator: a[n-1, n] = sqrt(n)."""
    if N < 2:
        raise DimensionError(f"Fock truncation must be >= 2, got {N}")
    a = np.zeros((N, N), dtype=complex)
    ns = np.arange(1, N)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def create(N: int) -> np.ndarray:
    return destroy(N).conj().T


def number_op(N: int) -> np.ndarray:
    return np.diag(np.arange(N)).astype(complex)


def spin_op(kind: str, levels: int = 2, pair: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Spin-like operator on a chosen level pair of a ``levels``-dim system.

    kind:
        ``minus``  -> |lower><upper|
        ``plus``   -> |upper><lower|
        ``z``      -> |upper><upper| - |lower><lower|
        ``proj_1`` -> |upper><upper|
    """
    lower, upper = pair
    if not (0 <= lower < upper < levels):
        raise DimensionError(f"level pair {pair} out of range for {levels} levels")
    op = np.zeros((levels, levels), dtype=complex)
    if kind == "minus":
        op[lower, upper] = 1.0
    elif kind == "plus":
        op[upper, lower] = 1.0
    elif kind == "z":
        op[upper, upper] = 1.0
        op[lower, lower] = -1.0
    elif kind == "proj_1":
        op[upper, upper] = 1.0
    else:
        raise ValueError(f"unknown spin operator kind {kind!r}")
    return op


def transition(levels: int, to: int, frm: int) -> np.ndarray:
    """|to><frm| on a ``levels``-dim system (used for engineered-decay jumps)."""
    if not (0 <= to < levels and 0 <= frm < levels):
        raise DimensionError(f"transition ({to},{frm}) out of range for {levels} levels")
    op = np.zeros((levels, levels), dtype=complex)
    op[to, frm] = 1.0
    return op


def embed(op: np.ndarray, slot: int, layout: SpaceLayout) -> np.ndarray:
    """Kronecker-embed a single-subsystem operator into the joint space.

    ``slot`` indexes the fixed ordering: 0 = motion, 1 = heating ion,
    2 = cooling ion.  Embeddings on different slots commute.
    """
    dims = layout.dims
    if not 0 <= slot < 3:
        raise DimensionError(f"slot must be 0..2, got {slot}")
    if op.shape != (dims[slot], dims[slot]):
        raise DimensionError(
            f"operator shape {op.shape} does not match slot {slot} dim {dims[slot]}"
        )
    out = np.eye(1, dtype=complex)
    for s, d in enumerate(dims):
        out = np.kron(out, op if s == slot else np.eye(d, dtype=complex))
    return out


def displacement(beta: complex, N: int) -> np.ndarray:
    """Displacement operator D(beta) from the analytic Fock matrix elements.

    <m|D|n> = sqrt(n!/m!) beta^(m-n) e^(-|beta|^2/2) L_n^(m-n)(|beta|^2) for
    m >= n and the adjoint-symmetric expression below the diagonal.  Built
    element-wise rather than by matrix exponentiation so that every retained
    element is exact; unitarity is lost only in the last ~sqrt(N)|beta| rows
    of the truncation.
    """
    if N < 2:
        raise DimensionError(f"Fock truncation must be >= 2, got {N}")
    beta = complex(beta)
    if beta == 0:
        return np.eye(N, dtype=complex)
    x = abs(beta) ** 2
    m, n = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    lo = np.minimum(m, n)
    d = np.abs(m - n)
    # sqrt(min!/max!) via log-gamma for stability at large N
    amp = np.exp(0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1)) - 0.5 * x)
    lag = eval_genlaguerre(lo, d, x)
    phase = np.where(m >= n, beta**d, (-beta.conjugate()) ** d)
    return amp * lag * phase


def as_sparse(op: np.ndarray) -> sparse.csr_matrix:
    """CSR view of a dense operator (assembly uses COO internally)."""
    return sparse.coo_matrix(op).tocsr()
