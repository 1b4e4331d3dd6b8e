"""Sparse Liouvillian assembly, steady states, time evolution, observables.

Vectorization is column-stacking (numpy order='F'), so

    Lv = -i (I x H - H^T x I) + sum_k [ conj(L_k) x L_k
         - 1/2 (I x L_k^dag L_k + (L_k^dag L_k)^T x I) ].

Steady states are solved as a sparse linear system with one row of Lv
replaced by the vectorized trace constraint; the fallback is the
smallest-magnitude eigenpair via shift-invert.  When the model conserves an
excitation charge (no tickle drive), the Liouvillian is block diagonal in the
coherence charge k = K_row - K_col and solvers restrict to the relevant block,
which cuts the dimension by roughly the number of charge sectors.  The block
structure is verified numerically before use and the final residual is always
checked against the full Liouvillian.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import eigs, spsolve

__all__ = [
    "liouvillian",
    "vec",
    "unvec",
    "sector_indices",
    "sector_block",
    "is_block_closed",
    "steady_state",
    "SteadyStateResult",
    "evolve",
    "evolve_vec",
    "expectation",
    "phonon_distribution",
    "hermitize",
    "floor_positivity",
    "check_density_matrix",
]


class SolverError(RuntimeError):
    """Raised when a steady-state or evolution solve fails its tolerances."""


class DegenerateSteadyStateError(SolverError):
    """Raised when the Liouvillian nullspace has dimension > 1."""


class TruncationWarning(UserWarning):
    """Emitted when the Fock-space tail holds non-negligible population."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")

def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    return v.reshape((d, d), order="F")


def liouvillian(H: np.ndarray | None, jumps=()) -> sparse.csr_matrix:
    """Assemble the Lindblad generator as a sparse dim^2 x dim^2 matrix."""
    ops = [np.asarray(J) for J in jumps]
    if H is None:
        if not ops:
            raise ValueError("need a Hamiltonian or at least one jump operator")
        dim = ops[0].shape[0]
    else:
        H = np.asarray(H)
        dim = H.shape[0]
    for J in ops:
        if J.shape != (dim, dim):
            raise ValueError(f"jump operator shape {J.shape} != Hamiltonian dim {dim}")
    eye = sparse.identity(dim, dtype=complex, format="csr")
    L = sparse.csr_matrix((dim * dim, dim * dim), dtype=complex)
    if H is not None and np.any(H):
        Hs = sparse.csr_matrix(H)
        L = L - 1j * (sparse.kron(eye, Hs, format="csr") - sparse.kron(Hs.T, eye, format="csr"))
    for J in ops:
        Js = sparse.csr_matrix(J)
        JdJ = (Js.conj().T @ Js).tocsr()
        L = L + sparse.kron(Js.conj(), Js, format="csr")
        L = L - 0.5 * sparse.kron(eye, JdJ, format="csr")
        L = L - 0.5 * sparse.kron(JdJ.T, eye, format="csr")
    return L.tocsr()


# ---------------------------------------------------------------------------
# charge-sector bookkeeping


def sector_indices(charges: np.ndarray, k: int) -> np.ndarray:
    """Vectorized indices (i + j*dim) whose coherence charge K_i - K_j equals k."""
    charges = np.asarray(charges)
    diff = charges[:, None] - charges[None, :]
    return np.nonzero(diff.reshape(-1, order="F") == k)[0]


def sector_block(L: sparse.spmatrix, idx: np.ndarray) -> sparse.csr_matrix:
    return L.tocsr()[idx][:, idx].tocsr()


def is_block_closed(L: sparse.spmatrix, idx: np.ndarray, tol: float = 0.0) -> bool:
    """True if the rows of ``idx`` have no coupling outside ``idx``."""
    rows = L.tocsr()[idx]
    inside = rows[:, idx]
    if tol == 0.0:
        return rows.nnz == inside.nnz
    outside_mass = abs(rows).sum() - abs(inside).sum()
    return outside_mass <= tol


# ---------------------------------------------------------------------------
# density-matrix hygiene


def hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def floor_positivity(rho: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Clip small negative eigenvalues (solver noise) and renormalize.

    Eigenvalues below -tol are an error; those in [-tol, 0) are floored to 0.
    """
    w, V = np.linalg.eigh(rho)
    if w.min() < -tol:
        raise SolverError(f"density matrix has eigenvalue {w.min():.3e} below -{tol:.1e}")
    w = np.clip(w, 0.0, None)
    rho = (V * w) @ V.conj().T
    return rho / np.trace(rho).real


def check_density_matrix(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8):
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise SolverError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise SolverError("density matrix trace deviates from 1")
    wmin = np.linalg.eigvalsh(rho).min()
    if wmin < -eig_tol:
        raise SolverError(f"density matrix minimum eigenvalue {wmin:.3e} < -{eig_tol:.1e}")


# ---------------------------------------------------------------------------
# steady state


@dataclass
class SteadyStateResult:
    rho: np.ndarray
    residual: float
    method: str
    reduced_dim: int


def _solve_nullvector(Lb: sparse.csr_matrix, trace_positions: np.ndarray) -> np.ndarray:
    """Solve Lb v = 0 with sum of v[trace_positions] = 1 via row replacement."""
    n = Lb.shape[0]
    Lc = Lb.tolil()
    constraint = np.zeros(n, dtype=complex)
    constraint[trace_positions] = 1.0
    # replace the row with the largest trace weight to keep conditioning sane
    row = int(trace_positions[0])
    Lc[row] = constraint
    rhs = np.zeros(n, dtype=complex)
    rhs[row] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sparse.linalg.MatrixRankWarning)
        v = spsolve(Lc.tocsc(), rhs)
    return v


def _eig_nullvector(Lb: sparse.csr_matrix) -> np.ndarray:
    w, V = eigs(Lb.tocsc(), k=1, sigma=1e-12, which="LM")
    return V[:, 0]


def steady_state(
    L: sparse.spmatrix,
    charges: np.ndarray | None = None,
    residual_tol: float = 1e-8,
    check_unique: bool | None = None,
    degeneracy_tol: float = 1e-7,
) -> SteadyStateResult:
    """Null vector of the Liouvillian as a valid density matrix.

    With ``charges`` given (tickle-free models) the solve restricts to the
    k = 0 coherence block after verifying block closure.  The residual
    ||L vec(rho)|| / ||vec(rho)|| is always evaluated on the full Liouvillian.
    ``check_unique`` probes the second-smallest eigenvalue and raises
    DegenerateSteadyStateError if it is below ``degeneracy_tol``; by default
    the probe runs whenever the (reduced) dimension is below 20000.
    """
    L = L.tocsr()
    dim = int(round(np.sqrt(L.shape[0])))
    diag_positions = np.arange(dim) * (dim + 1)

    reduced = False
    if charges is not None:
        idx = sector_indices(charges, 0)
        if is_block_closed(L, idx):
            reduced = True
        else:
            idx = None
    if reduced:
        Lb = sector_block(L, idx)
        # positions of the diagonal entries inside the block indexing
        pos = np.searchsorted(idx, diag_positions)
        assert np.array_equal(idx[pos], diag_positions)
        trace_positions = pos
    else:
        idx = None
        Lb = L
        trace_positions = diag_positions

    method = "direct"
    try:
        v = _solve_nullvector(Lb, trace_positions)
        ok = np.all(np.isfinite(v)) and abs(v[trace_positions].sum()) > 1e-12
    except Exception:
        ok = False
    if ok:
        resid = np.linalg.norm(Lb @ v) / np.linalg.norm(v)
        if resid > residual_tol:
            ok = False
    if not ok:
        method = "shift-invert"
        v = _eig_nullvector(Lb)

    if check_unique is None:
        check_unique = Lb.shape[0] <= 20000
    if check_unique and Lb.shape[0] > 4:
        w2 = eigs(Lb.tocsc(), k=2, sigma=1e-12, which="LM", return_eigenvectors=False)
        mags = np.sort(np.abs(w2))
        if mags[1] < degeneracy_tol:
            raise DegenerateSteadyStateError(
                f"nullspace dimension > 1: |lambda_2| = {mags[1]:.3e} < {degeneracy_tol:.1e}"
            )

    full = np.zeros(dim * dim, dtype=complex)
    if idx is not None:
        full[idx] = v
    else:
        full = v
    rho = unvec(full)
    rho = hermitize(rho)
    rho = rho / np.trace(rho).real
    resid = np.linalg.norm(L @ vec(rho)) / np.linalg.norm(vec(rho))
    if resid > residual_tol:
        raise SolverError(
            f"steady-state residual {resid:.3e} above tolerance {residual_tol:.1e}"
        )
    rho = floor_positivity(rho)
    return SteadyStateResult(rho=rho, residual=float(resid), method=method,
                             reduced_dim=Lb.shape[0])


# ---------------------------------------------------------------------------
# time evolution


def evolve_vec(
    L: sparse.spmatrix,
    v0: np.ndarray,
    t_grid,
    method: str = "adaptive",
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> np.ndarray:
    """Integrate dv/dt = L v on a vectorized state (or state block).

    method='adaptive' is an explicit high-order scheme (DOP853) suitable for
    non-stiff generators; method='stiff' switches to BDF with the sparse
    Liouvillian as Jacobian; method='expm' evaluates the exact matrix
    exponential action on a uniform grid, which is the fastest reliable
    option when the generator carries fast scales (the detuned repumper
    couplings of the 4-level heating ion make it stiff by three orders of
    magnitude).
    """
    L = L.tocsc()
    t_grid = np.asarray(t_grid, dtype=float)
    if method == "expm":
        return _evolve_expm(L, np.asarray(v0, dtype=complex), t_grid)
    if method == "adaptive":
        kwargs = dict(method="DOP853")
    elif method == "stiff":
        kwargs = dict(method="BDF", jac=L)
    else:
        raise ValueError(f"unknown evolve method {method!r}")
    sol = solve_ivp(
        lambda _t, y: L @ y,
        (t_grid[0], t_grid[-1]),
        np.asarray(v0, dtype=complex),
        t_eval=t_grid,
        rtol=rtol,
        atol=atol,
        **kwargs,
    )
    if not sol.success:
        raise SolverError(f"time evolution failed: {sol.message}")
    return sol.y.T


def _evolve_expm(L: sparse.csc_matrix, v0: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    from scipy.sparse.linalg import expm_multiply

    steps = np.diff(t_grid)
    uniform = len(t_grid) > 1 and np.allclose(steps, steps[0], rtol=1e-9, atol=0.0)
    if uniform:
        return expm_multiply(
            L, v0, start=t_grid[0], stop=t_grid[-1], num=len(t_grid), endpoint=True
        )
    out = np.empty((len(t_grid), v0.size), dtype=complex)
    v = v0
    t_prev = t_grid[0]
    out[0] = v if t_grid[0] == 0.0 else expm_multiply(L * t_grid[0], v0)
    if t_grid[0] != 0.0:
        v = out[0]
    for i, t in enumerate(t_grid[1:], start=1):
        v = expm_multiply(L * (t - t_prev), v)
        out[i] = v
        t_prev = t
    return out


def evolve(
    rho0: np.ndarray,
    L: sparse.spmatrix,
    t_grid,
    method: str = "adaptive",
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> np.ndarray:
    """Trajectory of density matrices on ``t_grid`` (shape (T, d, d)).

    Snapshots are hermitized; trace preservation is monitored at 1e-8 per
    unit time.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    ys = evolve_vec(L, vec(rho0), t_grid, method=method, rtol=rtol, atol=atol)
    out = np.empty((len(ys), dim, dim), dtype=complex)
    t_grid = np.asarray(t_grid, dtype=float)
    span = max(t_grid[-1] - t_grid[0], 1.0)
    for i, y in enumerate(ys):
        rho = hermitize(unvec(y))
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-8 * span:
            raise SolverError(f"trace drifted to {tr} at t={t_grid[i]}")
        out[i] = rho / tr
    return out


# ---------------------------------------------------------------------------
# observables


def expectation(rho: np.ndarray, O: np.ndarray) -> complex:
    if rho.shape != O.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {O.shape}")
    return complex(np.trace(rho @ O))


def phonon_distribution(rho: np.ndarray, layout) -> np.ndarray:
    """P(n) from the partial trace over the internal levels.

    Emits TruncationWarning when the top Fock state holds more than 1e-3.
    """
    N, dim_h, dim_c = layout.dims
    if rho.shape[0] != N * dim_h * dim_c:
        raise ValueError("density matrix does not match layout")
    diag = np.real(np.diag(rho)).reshape(N, dim_h * dim_c)
    pn = diag.sum(axis=1)
    total = pn.sum()
    if abs(total - 1.0) > 1e-8:
        raise SolverError(f"phonon distribution sums to {total}, expected 1")
    if pn[-1] > 1e-3:
        warnings.warn(
            f"tail mass P(N-1) = {pn[-1]:.2e} exceeds 1e-3; raise the Fock cutoff",
            TruncationWarning,
            stacklevel=2,
        )
    return pn
