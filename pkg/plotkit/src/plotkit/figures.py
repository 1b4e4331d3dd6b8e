"""The figure kinds: phase diagram, phonon histogram, characteristic
function, marginals, diffusion fit, carrier traces.

Each ``plot_*`` function takes a FigureRequest, renders deterministically
(fixed style, no timestamps), embeds the source-file hash in the caption and
PNG metadata, and returns the figure plus a dict of the quantities a caller
may want to verify (overlay positions, distances, fitted values).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, file_hash, load_json, load_sweep_csv, sweep_grid

FIGURE_KINDS = ("phase_diagram", "pn_hist", "charfun", "marginals", "diffusion_fit", "carrier")

STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.titlesize": 9,
    "svg.hashsalt": "plotkit",
}


@dataclass
class FigureRequest:
    inputs: list[str]
    kind: str
    out: str
    cmap: str = "viridis"
    clip_nbar: float = 80.0
    annotations: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")
        if not self.inputs:
            raise SchemaError("figure request needs at least one input file")


def _caption(fig, paths):
    hashes = ", ".join(f"{p.split('/')[-1]}@{file_hash(p)}" for p in paths)
    fig.text(0.005, 0.005, f"source: {hashes}", fontsize=5, color="0.45")
    return hashes


def _save(fig, req: FigureRequest, hashes: str):
    fig.savefig(req.out, metadata={"Source": hashes, "Software": "plotkit"})
    plt.close(fig)


def plot_phase_diagram(req: FigureRequest):
    """Heatmap of the steady occupation with the analytic transition lines.

    The gain/loss boundary sits at inv_kappa_c = (gamma_h + gamma_e)/g_h^2
    and the saturation boundary at inv_gamma_c = 1/gamma_h, both computed
    from the embedded system parameters.  Occupations above the clip value
    are greyed out (runaway cells).
    """
    records, meta, _h = load_sweep_csv(req.inputs[0])
    system = meta.get("system")
    if system is None:
        raise SchemaError("sweep CSV carries no embedded system parameters")
    inv_kappa, inv_gamma, nbar, _label = sweep_grid(records)

    kappa_h = system["g_h"] ** 2 / (system["gamma_h"] + system.get("gamma_e", 0.0))
    line_inv_kappa = 1.0 / kappa_h              # ms
    line_inv_gamma = 1.0e3 / system["gamma_h"]  # us

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.6, 3.6))
        shown = np.ma.masked_invalid(np.minimum(nbar, req.clip_nbar))
        cmap = plt.get_cmap(req.cmap).copy()
        cmap.set_over("0.6")
        cmap.set_bad("0.8")
        mesh = ax.pcolormesh(
            inv_gamma, inv_kappa, np.where(nbar > req.clip_nbar, req.clip_nbar * 1.01, shown),
            cmap=cmap, vmax=req.clip_nbar, shading="nearest",
        )
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.axhline(line_inv_kappa, color="white", lw=1.2)
        ax.axvline(line_inv_gamma, color="white", lw=1.2)
        ax.set_xlabel(r"$1/\gamma_c$ [$\mu$s]")
        ax.set_ylabel(r"$1/\kappa_c$ [ms]")
        ax.set_title("steady occupation")
        fig.colorbar(mesh, ax=ax, label=r"$\bar n$" + f" (clip {req.clip_nbar:g})")
        hashes = _caption(fig, req.inputs)
        fig.tight_layout()
        _save(fig, req, hashes)
    return {
        "line_inv_kappa_ms": line_inv_kappa,
        "line_inv_gamma_us": line_inv_gamma,
        "grid_inv_kappa": inv_kappa,
        "grid_inv_gamma": inv_gamma,
    }


def _poisson(n, nbar):
    from math import lgamma

    n = np.asarray(n, dtype=float)
    return np.exp(n * np.log(nbar) - nbar - np.array([lgamma(k + 1) for k in n]))


def plot_pn_hist(req: FigureRequest):
    """Phonon histogram with a Poisson overlay of the same mean (optional
    thermal overlay for finite-time heating snapshots)."""
    data, _h = load_json(req.inputs[0])
    pn = np.asarray(data["pn"], dtype=float)
    if abs(pn.sum() - 1.0) > 1e-6:
        raise SchemaError("phonon distribution is not normalized")
    n = np.arange(len(pn))
    nbar = data.get("nbar", float(pn @ n))
    pois = _poisson(n, nbar)
    tv = 0.5 * (np.abs(pn - pois).sum() + (1.0 - pois.sum()))

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        ax.bar(n, pn, width=0.9, color="#3b6fae", label="simulated")
        ax.plot(n, pois, "o-", ms=2.5, lw=1.0, color="0.4",
                label=f"Poisson($\\bar n$={nbar:.2f})")
        if req.annotations.get("thermal"):
            thermal = (nbar / (1 + nbar)) ** n / (1 + nbar)
            ax.plot(n, thermal, "s-", ms=2.5, lw=1.0, color="seagreen", label="thermal")
        ax.set_xlabel("n")
        ax.set_ylabel("P(n)")
        ax.set_title(f"TV distance to Poisson: {tv:.3f}")
        ax.legend(frameon=False)
        hashes = _caption(fig, req.inputs)
        fig.tight_layout()
        _save(fig, req, hashes)
    return {"nbar": nbar, "tv_poisson": tv}


def plot_charfun(req: FigureRequest):
    """Real and imaginary characteristic-function panels per sampled axis."""
    data, _h = load_json(req.inputs[0])
    axes_data = data["axes"]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(
            2, len(axes_data), figsize=(3.4 * len(axes_data), 4.4),
            sharex=True, squeeze=False,
        )
        for j, block in enumerate(axes_data):
            beta = np.asarray(block["beta"])
            for i, part in enumerate(("re", "im")):
                ax = axes[i][j]
                ax.plot(beta, np.asarray(block[part]), lw=1.2, color="#d95f02")
                ax.axhline(0.0, color="0.85", lw=0.6, zorder=0)
                ax.set_ylabel(f"{'Re' if part == 're' else 'Im'} C")
                if i == 0:
                    ax.set_title(f"axis {block['axis_angle_deg']:g}°")
            axes[1][j].set_xlabel(r"$\beta$")
        hashes = _caption(fig, req.inputs)
        fig.tight_layout()
        _save(fig, req, hashes)
    return {"n_axes": len(axes_data)}


def plot_marginals(req: FigureRequest):
    """Stacked marginal panels, one row per input file (e.g. per duration)."""
    loaded = [load_json(p)[0] for p in req.inputs]
    rows = []
    for path, data in zip(req.inputs, loaded):
        for block in data["axes"]:
            marg = block["marginal"]
            rows.append(
                (path.split("/")[-1], block["axis_angle_deg"],
                 np.asarray(marg["x"]), np.asarray(marg["p"]))
            )
    grids = {len(x) for _, _, x, _ in rows}
    if len(grids) > 1:
        pass  # panels may have distinct grids; they are drawn independently
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(len(rows), 1, figsize=(4.4, 1.5 * len(rows) + 0.8),
                                 sharex=True, squeeze=False)
        for ax, (name, angle, x, p) in zip(axes[:, 0], rows):
            ax.fill_between(x, p, color="#7fb2d9", alpha=0.8, lw=0)
            ax.plot(x, p, color="#1f5f9e", lw=1.0)
            ax.set_ylabel("P(x)")
            ax.text(0.99, 0.85, f"{name}  axis {angle:g}°", ha="right",
                    transform=ax.transAxes, fontsize=7)
        axes[-1][0].set_xlabel("x")
        hashes = _caption(fig, req.inputs)
        fig.tight_layout()
        _save(fig, req, hashes)
    return {"n_panels": len(rows)}


def plot_diffusion_fit(req: FigureRequest):
    """Phase-variance samples with the fitted linear growth."""
    data, _h = load_json(req.inputs[0])
    t = np.asarray(data["t_ms"], dtype=float)
    theta = np.asarray(data["theta_sq"], dtype=float)
    rate = float(data["rate_rad2_per_ms"])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        ax.plot(t, theta, "o", ms=4, color="#1f5f9e", label="extracted")
        ax.plot(t, rate * t, "-", color="0.35",
                label=f"fit: {rate:.3f} rad$^2$/ms")
        ax.set_xlabel("t [ms]")
        ax.set_ylabel(r"$\langle\theta^2\rangle$ [rad$^2$]")
        ax.legend(frameon=False)
        hashes = _caption(fig, req.inputs)
        fig.tight_layout()
        _save(fig, req, hashes)
    return {"rate": rate}


def plot_carrier(req: FigureRequest):
    """Carrier Rabi traces after increasing dissipation durations."""
    data, _h = load_json(req.inputs[0])
    t = np.asarray(data["rabi_t_ms"], dtype=float)
    traces = data["traces"]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(len(traces), 1, figsize=(4.6, 1.3 * len(traces) + 0.8),
                                 sharex=True, squeeze=False)
        for ax, trace in zip(axes[:, 0], traces):
            ax.plot(t, np.asarray(trace["p_up"]), lw=0.9, color="#b04a5a")
            ax.set_ylim(-0.05, 1.05)
            ax.text(0.99, 0.8, f"{trace['duration_ms']:g} ms, $\\bar n$={trace['nbar']:.1f}",
                    ha="right", transform=ax.transAxes, fontsize=7)
            ax.set_ylabel(r"$P_\uparrow$")
        axes[-1][0].set_xlabel("t [ms]")
        hashes = _caption(fig, req.inputs)
        fig.tight_layout()
        _save(fig, req, hashes)
    return {"n_traces": len(traces)}


RENDERERS = {
    "phase_diagram": plot_phase_diagram,
    "pn_hist": plot_pn_hist,
    "charfun": plot_charfun,
    "marginals": plot_marginals,
    "diffusion_fit": plot_diffusion_fit,
    "carrier": plot_carrier,
}


def render(req: FigureRequest):
    return RENDERERS[req.kind](req)
