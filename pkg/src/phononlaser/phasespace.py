"""Characteristic-function sampling, Fourier marginals, Wigner function,
and phase-diffusion extraction.

Quadrature convention (used consistently across both reconstruction
pipelines): X_phi = (a e^{-i phi} + a^dag e^{i phi}) / sqrt(2), whose
characteristic function is obtained from the Weyl function at
beta = i lambda e^{i phi} / sqrt(2).  Characteristic-function samples taken
along the phase-space axis psi therefore Fourier-transform into the marginal
of the quadrature at phi = psi - pi/2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .operators import displacement

__all__ = [
    "CharFunSamples",
    "MarginalCurve",
    "char_fun",
    "marginal_from_charfun",
    "wigner",
    "wigner_marginal",
    "phase_variance_trace",
    "PhaseVarianceResult",
    "reduced_motional_state",
]

TRUNCATION_SAFE_BETA = 1.0


@dataclass
class CharFunSamples:
    """Weyl characteristic function sampled along one phase-space axis.

    ``grid`` holds signed displacement magnitudes b (symmetric about 0); the
    sample at b is C(b e^{i axis_angle}) = Tr(rho D(b e^{i axis_angle})).
    """

    axis_angle: float
    grid: np.ndarray
    values: np.ndarray

    def validate(self, tol: float = 1e-10):
        i0 = np.argmin(np.abs(self.grid))
        if abs(self.grid[i0]) < 1e-14 and abs(self.values[i0] - 1.0) > tol:
            raise ValueError(f"C(0) = {self.values[i0]} deviates from 1")
        rev = np.argsort(-self.grid)  # positions of -b for a symmetric grid
        sym = self.values - np.conj(self.values[rev])
        if np.abs(sym).max() > tol:
            raise ValueError("Hermitian symmetry C(-b) = conj(C(b)) violated")


@dataclass
class MarginalCurve:
    """Probability density of one quadrature on a uniform grid."""

    quadrature_angle: float
    x: np.ndarray
    p: np.ndarray
    norm_error: float = 0.0
    negativity: float = 0.0


def reduced_motional_state(rho: np.ndarray, layout) -> np.ndarray:
    """Partial trace over the internal levels -> N x N motional state."""
    N, dim_h, dim_c = layout.dims
    d_int = dim_h * dim_c
    return rho.reshape(N, d_int, N, d_int).trace(axis1=1, axis2=3)


def char_fun(rho: np.ndarray, phi: float, grid) -> CharFunSamples:
    """Sample C(beta) = Tr(rho D(beta)) along the axis beta = b e^{i phi}.

    ``rho`` is a motional-only state (use reduced_motional_state first for a
    joint state).  |b| beyond the truncation-safe bound of 1 warns.
    """
    grid = np.asarray(grid, dtype=float)
    N = rho.shape[0]
    if np.abs(grid).max() > TRUNCATION_SAFE_BETA:
        warnings.warn(
            f"characteristic function sampled at |beta| > {TRUNCATION_SAFE_BETA}; "
            "truncation error grows quickly there",
            stacklevel=2,
        )
    phase = np.exp(1j * phi)
    vals = np.empty(len(grid), dtype=complex)
    for i, b in enumerate(grid):
        vals[i] = np.trace(rho @ displacement(b * phase, N))
    return CharFunSamples(axis_angle=float(phi), grid=grid, values=vals)


def marginal_from_charfun(
    samples: CharFunSamples,
    pad_to: float = 1.0,
    oversample: int = 64,
    x_max: float | None = None,
) -> MarginalCurve:
    """Fourier-transform characteristic-function samples into a marginal.

    The samples are zero-padded from their outermost point to +-pad_to
    (measured data end before the function has fully decayed; the padding
    band carries the assumption that it has), resampled on a uniform grid if
    necessary, extended with further zeros for spectral interpolation, and
    transformed:

        P(x) = (sqrt(2)/2 pi) integral C(b e^{i psi}) e^{-i sqrt(2) b x} db,

    the density of the quadrature at phi = psi - pi/2.  The real part is
    taken, the normalization is checked, and residual Fourier ringing below
    zero is floored afterwards.
    """
    b = np.asarray(samples.grid, dtype=float)
    order = np.argsort(b)
    b, vals = b[order], np.asarray(samples.values)[order]
    if abs(b[0] + b[-1]) > 1e-12:
        raise ValueError("characteristic-function grid must be symmetric about 0")
    bmax = b[-1]
    if pad_to < bmax:
        raise ValueError(f"pad_to = {pad_to} is smaller than the sampled range {bmax}")
    db = np.diff(b)
    step = db.min()
    if not np.allclose(db, db[0], rtol=1e-9):
        # uniform resampling before the discrete transform
        step = db.min()
        b_u = np.arange(-bmax, bmax + step / 2, step)
        vals = np.interp(b_u, b, vals.real) + 1j * np.interp(b_u, b, vals.imag)
        b = b_u
    n_pad = int(np.ceil((pad_to - bmax) / step))
    m_half = len(b) // 2 + n_pad
    M = int(2 ** np.ceil(np.log2(max(2 * m_half + 1, oversample * len(b)))))
    c_full = np.zeros(M, dtype=complex)
    k0 = M // 2
    idx = np.arange(len(b)) - len(b) // 2 + k0
    c_full[idx] = vals
    # centered DFT: P(x_k) = (sqrt(2) step / 2 pi) sum_j C_j e^{-i sqrt(2) step j x_k}
    spec = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(c_full)))
    x = np.fft.fftshift(np.fft.fftfreq(M, d=step)) * 2.0 * np.pi / np.sqrt(2.0)
    p = np.sqrt(2.0) * step / (2.0 * np.pi) * spec
    p_real = p.real
    dx = x[1] - x[0]
    norm = p_real.sum() * dx
    norm_error = abs(norm - 1.0)
    if x_max is not None:
        keep = np.abs(x) <= x_max
        x, p_real = x[keep], p_real[keep]
    negativity = max(0.0, -p_real.min()) * (x[-1] - x[0])
    p_real = np.clip(p_real, 0.0, None)
    p_real = p_real / (p_real.sum() * dx)
    return MarginalCurve(
        quadrature_angle=float(samples.axis_angle - np.pi / 2.0),
        x=x,
        p=p_real,
        norm_error=float(norm_error),
        negativity=float(negativity),
    )


def _displacement_conj_parity_trace(rho: np.ndarray, beta: complex) -> complex:
    """Tr[rho D(beta) Pi] with Pi = (-1)^n, via the analytic D elements."""
    N = rho.shape[0]
    m, n = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    lo = np.minimum(m, n)
    d = np.abs(m - n)
    x = abs(beta) ** 2
    amp = np.exp(0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1)) - 0.5 * x)
    lag = eval_genlaguerre(lo, d, x)
    phase = np.where(m >= n, beta**d, (-np.conj(beta)) ** d)
    D = amp * lag * phase
    parity = np.where(np.arange(N) % 2 == 0, 1.0, -1.0)
    return np.einsum("nm,mn,n->", rho, D, parity)


def wigner(rho: np.ndarray, alpha_grid, boundary_tol: float = 1e-3) -> np.ndarray:
    """Wigner function from the displaced-parity expectation at alpha.

    W(alpha) = (2/pi) Tr[rho D(alpha) Pi D^dag(alpha)] with parity
    Pi = (-1)^(a^dag a), evaluated through the identity
    D(alpha) Pi D^dag(alpha) = D(2 alpha) Pi (a coherent state |a0> then
    peaks at alpha = a0).  ``alpha_grid`` may have any shape; the result
    matches it.  A warning is emitted when the state carries weight at the
    grid boundary (the grid is then too small for the state's support).
    """
    alpha = np.asarray(alpha_grid, dtype=complex)
    flat = alpha.reshape(-1)
    w = np.empty(flat.shape, dtype=float)
    for i, a in enumerate(flat):
        val = _displacement_conj_parity_trace(rho, 2.0 * a)
        w[i] = (2.0 / np.pi) * val.real
    w = w.reshape(alpha.shape)
    if w.ndim == 2:
        edge = max(
            np.abs(w[0]).max(), np.abs(w[-1]).max(), np.abs(w[:, 0]).max(), np.abs(w[:, -1]).max()
        )
        if edge > boundary_tol * max(np.abs(w).max(), 1e-300):
            warnings.warn(
                "Wigner grid boundary carries non-negligible amplitude; enlarge the grid",
                stacklevel=2,
            )
    return w


def wigner_marginal(w: np.ndarray, re_grid: np.ndarray, im_grid: np.ndarray, axis: str = "re"):
    """Quadrature density from a Wigner field sampled on a rectangular grid.

    Returns (x, P(x)) in the X_phi convention (x = sqrt(2) Re alpha for
    axis='re', x = sqrt(2) Im alpha for axis='im').
    """
    d_re = re_grid[1] - re_grid[0]
    d_im = im_grid[1] - im_grid[0]
    if axis == "re":
        dens = w.sum(axis=0) * d_im  # integrate over Im(alpha); w indexed [im, re]
        coord = re_grid
    elif axis == "im":
        dens = w.sum(axis=1) * d_re
        coord = im_grid
    else:
        raise ValueError("axis must be 're' or 'im'")
    x = np.sqrt(2.0) * coord
    p = dens / np.sqrt(2.0)
    return x, p


@dataclass
class PhaseVarianceResult:
    t: np.ndarray
    theta_sq: np.ndarray
    rate: float
    saturated: bool = False
    mask: np.ndarray = field(default_factory=lambda: np.array([], dtype=bool))


def phase_variance_trace(
    t_grid,
    amplitudes,
    intensity: float,
    weights=None,
) -> PhaseVarianceResult:
    """Phase variance and its linear growth rate from the <a>(t) decay.

    For Gaussian phase spread, <a> = sqrt(I) e^{i theta0} e^{-<theta^2>/2},
    so <theta^2>(t) = -2 ln(|<a>(t)| / sqrt(I)).  A weighted least-squares
    line through the origin gives the diffusion rate.  Points where |<a>|
    has collapsed below 1e-6 sqrt(I) (phase fully randomized) are excluded
    and flagged.
    """
    if intensity <= 0:
        raise ValueError("reference intensity must be positive")
    t = np.asarray(t_grid, dtype=float)
    a = np.asarray(amplitudes, dtype=complex)
    valid = np.abs(a) > 1e-6 * np.sqrt(intensity)
    saturated = bool(np.any(~valid))
    theta_sq = np.full(len(t), np.nan)
    theta_sq[valid] = -2.0 * np.log(np.abs(a[valid]) / np.sqrt(intensity))
    fit_mask = valid & (t > 0)
    if weights is None:
        w = np.ones(len(t))
    else:
        w = np.asarray(weights, dtype=float)
    tw, yw, ww = t[fit_mask], theta_sq[fit_mask], w[fit_mask]
    denom = np.sum(ww * tw * tw)
    if denom == 0:
        raise ValueError("no usable points for the diffusion fit")
    rate = float(np.sum(ww * tw * yw) / denom)
    return PhaseVarianceResult(t=t, theta_sq=theta_sq, rate=rate, saturated=saturated, mask=valid)
