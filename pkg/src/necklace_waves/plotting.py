"""SVG figures for the CLI (imported only when plotting is requested)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "necklace-waves"


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_bands(path, rows, xlabel="ell"):
    fig, ax = plt.subplots(figsize=(5, 4))
    fams = {}
    for ell, idx, fam, om in rows:
        fams.setdefault((fam, idx), []).append((ell, om))
    for (fam, idx), pts in sorted(fams.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
        pts = sorted(pts)
        x, y = zip(*pts)
        style = "--" if "flat" in fam else ("." if fam == "fd" else "-")
        ax.plot(x, y, style, lw=1, ms=2,
                color={"flat": "tab:green", "fd": "k"}.get(fam, None))
    ax.set_xlabel(xlabel)
    ax.set_ylabel("omega")
    return _save(fig, path)


def plot_spectrum(path, roots):
    fig, ax = plt.subplots(figsize=(4, 5))
    for fam, marker in (("generic", "o"), ("flat", "*")):
        z = np.array([r.lam for r in roots if r.family == fam])
        if len(z):
            ax.plot(z.real, z.imag, marker, ms=4, ls="none", label=fam)
    ax.axvline(0.0, color="0.7", lw=0.5)
    ax.set_xlabel("Re lambda")
    ax.set_ylabel("Im lambda")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_paths(path, paths, param_name):
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 4))
    for p in paths:
        z = np.array(p.values)
        a1.plot(p.params, z.real, lw=0.8)
        a2.plot(p.params, z.imag, lw=0.8)
    a1.set_xlabel(param_name)
    a1.set_ylabel("Re lambda")
    a2.set_xlabel(param_name)
    a2.set_ylabel("Im lambda")
    return _save(fig, path)


def plot_snapshots(path, grid, snaps):
    fig, ax = plt.subplots(figsize=(7, 3))
    axis = np.nonzero(grid.side == 0)[0]
    order = axis[np.argsort(grid.x[axis])]
    for s in snaps:
        ax.plot(grid.x[order], np.abs(s.values[order]), lw=0.7, label=f"t={s.t:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("|psi|")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_diagnostics(path, reports):
    t = [r.t for r in reports]
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.5))
    a1.plot(t, [r.com for r in reports], label="simulation")
    a1.plot(t, [r.com_theory for r in reports], "--", label="theory")
    a1.set_xlabel("t")
    a1.set_ylabel("center of mass")
    a1.legend(fontsize=8)
    a2.semilogy(t, [max(r.err_L2, 1e-300) for r in reports], label="L2")
    a2.semilogy(t, [max(r.err_Linf, 1e-300) for r in reports], label="Linf")
    a2.semilogy(t, [max(r.err_Linf_phase_opt, 1e-300) for r in reports], ":", label="Linf, phase opt")
    a2.set_xlabel("t")
    a2.set_ylabel("error")
    a2.legend(fontsize=8)
    return _save(fig, path)


def plot_varidemo(path, res):
    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.loglog(res.n, res.ratio, "o-", label="ratio")
    ax.loglog(res.n, res.F, "s--", label="F")
    ax.set_xlabel("n")
    ax.legend(fontsize=8)
    return _save(fig, path)
