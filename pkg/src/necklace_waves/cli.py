"""Command-line entry point: ``necklace-waves [--config FILE] [command] [key=value ...]``."""

from __future__ import annotations

import argparse
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, bands, diagnostics, spectrum
from .config import RunConfig, parse_config
from .errors import ConfigError, InvalidSpecError, NecklaceError, NoHomoclinicError, NumericError
from .evolve import SplitStepConfig, evolve
from .graph import MetricGraphSpec, build_grid, build_necklace
from .io import output_dir, write_csv, write_json
from .pulse import build_initial_data, cell_counts

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
TWO_PI = 2.0 * math.pi


class Run:
    """Collects artifacts and a summary for the manifest."""

    def __init__(self, cfg: RunConfig, out: Path):
        self.cfg, self.out = cfg, out
        self.outputs = []
        self.summary = {}

    def csv(self, name, header, rows):
        self.outputs.append(name)
        return write_csv(self.out / name, header, rows)

    def json(self, name, data):
        self.outputs.append(name)
        return write_json(self.out / name, data)

    def plot(self, name, fn, *args):
        if self.cfg.plot:
            from . import plotting

            getattr(plotting, fn)(self.out / name, *args)
            self.outputs.append(name)


# --------------------------------------------------------------------------
# commands


def _ells(n):
    return -0.5 + np.arange(n) / n


def cmd_bands(run: Run):
    cfg = run.cfg
    rows = []
    for ell in _ells(cfg.n_ell):
        om = bands.band_frequencies(float(ell), cfg.n_branches, cfg.L1, cfg.L2)
        rows += [(float(ell), b + 1, "generic", float(w)) for b, w in enumerate(om)]
        if cfg.L2 > 0:
            rows += [(float(ell), m, "flat", bands.flat_band_frequency(m, cfg.L2))
                     for m in range(1, cfg.n_flat + 1)]
    run.csv("bands.csv", ["ell", "branch", "family", "omega"], rows)
    run.plot("bands.svg", "plot_bands", rows)
    run.summary["rows"] = len(rows)


def cmd_ladder(run: Run):
    cfg = run.cfg
    rows = []
    ells = np.linspace(-math.pi, math.pi, cfg.n_ell)
    spec = MetricGraphSpec("ladder", Ls=cfg.Ls, Lr=cfg.Lr, pts_per_edge=cfg.pts_per_edge)
    for ell in ells:
        ell = float(ell)
        if cfg.Ls == 1 and cfg.Lr == 1:
            for k in range(cfg.n_branches):
                for fam, sgn, label in (("symmetric", 1, "symmetric+"),
                                        ("symmetric", -1, "symmetric-"),
                                        ("antisymmetric", 1, "antisymmetric")):
                    try:
                        rows.append((ell, k, label, bands.ladder_band(ell, k, fam, sgn)))
                    except NecklaceError:
                        pass
            try:
                rows.append((ell, 0, "lowest", bands.ladder_band(ell, 0, "lowest")))
            except NecklaceError:
                pass
            for k in range(cfg.n_flat):
                rows.append((ell, k, "flat", bands.ladder_band(ell, k, "flat")))
            for k in range(cfg.n_branches):
                for fam in ("symmetric", "antisymmetric"):
                    for sgn, tag in ((1, "+"), (-1, "-")):
                        rows.append((ell, k, f"kirchhoff_{fam}{tag}",
                                     bands.ladder_band_kirchhoff(ell, k, fam, sgn)))
            for m in range(1, cfg.n_flat + 1):
                rows.append((ell, m, "kirchhoff_flat", bands.ladder_band_kirchhoff(ell, m, "flat")))
        ev = bands.fd_bloch_eigs(spec, ell / spec.period, 2 * cfg.n_branches)
        rows += [(ell, i, "fd", float(w)) for i, w in enumerate(ev)]
    run.csv("ladder_bands.csv", ["ell", "k", "family", "omega"], rows)
    run.plot("ladder_bands.svg", "plot_bands", rows, "ell (phase per rail section)")
    run.summary["rows"] = len(rows)


def _params(cfg, sigma=None):
    return spectrum.SpectralParams(cfg.sigma_value if sigma is None else sigma, cfg.c,
                                   cfg.L1, cfg.L2)


def _seeds(cfg, sigma):
    return spectrum.roots_homogeneous(sigma, cfg.c, range(cfg.k_min, cfg.k_max + 1))


def _continue_L1(cfg, sigma, stop):
    seeds = _seeds(cfg, sigma)
    if abs(stop - TWO_PI) < 1e-15:
        return None, seeds, []
    p0 = spectrum.SpectralParams(sigma, cfg.c, TWO_PI, 0.0)
    paths, events = spectrum.continue_path(seeds, spectrum.Schedule("L1", TWO_PI, stop), p0,
                                           n_steps=cfg.n_steps)
    return paths, [p.final for p in paths], events


def cmd_spectrum(run: Run):
    cfg = run.cfg
    sigma = cfg.sigma_value
    params = _params(cfg)
    if cfg.L2 == 0:
        roots = _seeds(cfg, sigma)
    else:
        _, finals, _ = _continue_L1(cfg, sigma, cfg.L1)
        roots = [spectrum.newton_root(z, params) for z in finals]
        roots += spectrum.flat_roots(params, max(cfg.n_flat, 1))
    part = spectrum.classify_roots(roots)
    rows = [(r.lam.real, r.lam.imag, r.family, r.cls, r.residual) for r in roots]
    run.csv("spectrum.csv", ["re_lambda", "im_lambda", "family", "class", "residual"], rows)
    run.plot("spectrum.svg", "plot_spectrum", roots)
    run.summary.update(counts=part["counts"], n_roots=len(roots))


def cmd_continue(run: Run):
    cfg = run.cfg
    if cfg.cont_param == "L1":
        stop = cfg.L1 if math.isnan(cfg.cont_stop) else cfg.cont_stop
        start = TWO_PI if math.isnan(cfg.cont_start) else cfg.cont_start
        if abs(start - TWO_PI) > 1e-12:
            raise ConfigError("L1 continuation starts from the homogeneous line (2*pi)",
                              "cont_start")
        if not 0 < stop < TWO_PI:
            raise ConfigError("L1 target must lie in (0, 2*pi)", "cont_stop")
        paths, _, events = _continue_L1(cfg, cfg.sigma_value, stop)
        base = None
    else:
        start = cfg.sigma_value if math.isnan(cfg.cont_start) else cfg.cont_start
        stop = start + 0.025 if math.isnan(cfg.cont_stop) else cfg.cont_stop
        if cfg.L2 == 0:
            seeds = [r.lam for r in _seeds(cfg, start)]
        else:
            _, seeds, _ = _continue_L1(cfg, start, cfg.L1)
        base = _params(cfg, start)
        paths, events = spectrum.continue_path(seeds, spectrum.Schedule("sigma", start, stop),
                                               base, n_steps=cfg.n_steps)
    rows = []
    for p in paths:
        for q, z in zip(p.params, p.values):
            rows.append((p.path_id, q, z.real, z.imag))
    run.csv("paths.csv", ["path_id", "param_value", "re_lambda", "im_lambda"], rows)
    ev_out = []
    for e in spectrum.collisions(events):
        d = e.to_dict()
        if base is not None:
            try:
                bif = spectrum.bifurcation_from_root(e.midpoint, base.replace(sigma=e.param))
                d.update(sigma0=bif.sigma0, ell0=bif.ell0, omega_pp=bif.omega_pp,
                         has_homoclinic=spectrum.has_homoclinic(bif))
            except NecklaceError as exc:
                d["classification_error"] = str(exc)
        ev_out.append(d)
    run.json("events.json", {"param": cfg.cont_param, "start": start, "stop": stop,
                             "events": ev_out})
    run.plot("paths.svg", "plot_paths", paths, cfg.cont_param)
    run.summary.update(n_paths=len(paths), n_events=len(ev_out))


def _bifurcation(cfg, with_gamma=True):
    return spectrum.bifurcation_for_speed(cfg.c, cfg.branch, cfg.L1, cfg.L2, with_gamma)


def cmd_bifurcate(run: Run):
    cfg = run.cfg
    bif = _bifurcation(cfg)
    data = bif.to_dict()
    data["has_homoclinic"] = spectrum.has_homoclinic(bif)
    if data["has_homoclinic"]:
        b = cell_counts(cfg.eps, bif.kappa, bif.c0, cfg.T)
        data["cell_budget"] = {"eps": cfg.eps, "T": cfg.T, "n0_min": b.n0, "n1": b.n1,
                               "total": b.total}
    run.json("bifurcation.json", data)
    for k in ("ell0", "sigma0", "omega_pp", "gamma", "kappa"):
        print(f"{k}={data[k]:.12g}")
    run.summary.update({k: data[k] for k in ("ell0", "sigma0", "c0", "omega_pp", "gamma", "kappa")})


def cmd_simulate(run: Run):
    cfg = run.cfg
    if cfg.topology != "necklace":
        raise ConfigError("simulate builds modulating pulses on necklace graphs", "topology")
    bif = _bifurcation(cfg)
    if not spectrum.has_homoclinic(bif):
        raise NoHomoclinicError("omega'' <= 0 at the selected bifurcation: no sech pulse")
    budget = cell_counts(cfg.eps, bif.kappa, bif.c0, cfg.T)
    n0 = cfg.n0 or budget.n0
    n_cells = cfg.n_cells or 2 * n0 + budget.n1
    grid = build_necklace(MetricGraphSpec("necklace", cfg.L1, cfg.L2, n_cells=n_cells,
                                          pts_per_edge=cfg.pts_per_edge, boundary=cfg.boundary))
    psi0 = build_initial_data(grid, bif, cfg.eps, n0)
    step_cfg = SplitStepConfig(dt=cfg.dt, T=cfg.T, variant=cfg.variant,
                               snapshot_stride=max(1, SplitStepConfig(cfg.dt, cfg.T).n_steps
                                                   // max(cfg.snapshots - 1, 1)),
                               diag_stride=cfg.diag_every)
    comp = diagnostics.Comparator(grid, bif, cfg.eps, n0)
    reports = []
    trace = evolve(psi0, grid, step_cfg, callback=lambda k, t, psi: reports.append(comp(t, psi)))
    run.csv("trace.csv", ["t", "mass", "energy"],
            [(t, m, e) for t, m, e in zip(trace.times, trace.mass, trace.energy)])
    run.csv("diagnostics.csv", list(diagnostics.ComparisonReport.COLUMNS),
            [r.row() for r in reports])
    snaps = trace.snapshots[: cfg.snapshots - 1] + [trace.snapshots[-1]] \
        if len(trace.snapshots) > cfg.snapshots else trace.snapshots
    for i, s in enumerate(snaps):
        run.json(f"snapshot_{i:03d}.json", {"grid": grid.to_dict(), **s.to_json_dict(grid)})
    run.plot("snapshots.svg", "plot_snapshots", grid, snaps)
    run.plot("diagnostics.svg", "plot_diagnostics", reports)
    ts = [r.t for r in reports]
    early = [r.err_Linf for r in reports if r.t <= 1.0 / cfg.eps]
    run.summary.update(
        n_cells=n_cells, n0=n0, N=grid.N, com_slope=diagnostics.fit_slope(ts, [r.com for r in reports]),
        c0=bif.c0, mass_drift=abs(trace.mass[-1] - trace.mass[0]) / trace.mass[0],
        energy_drift=abs(trace.energy[-1] - trace.energy[0]) / max(abs(trace.energy[0]), 1e-300),
        max_err_Linf_early=max(early) if early else None, eps_three_halves=cfg.eps ** 1.5,
    )


def cmd_varidemo(run: Run):
    cfg = run.cfg
    res = diagnostics.variational_demo(p=cfg.p, sigma=cfg.var_sigma, n_list=cfg.n_list,
                                       L1=cfg.L1)
    run.csv("varidemo.csv", ["n", "ratio", "F"], list(zip(res.n, res.ratio, res.F)))
    run.plot("varidemo.svg", "plot_varidemo", res)
    print(f"slope={res.slope:.12g} expected={res.expected_slope:.12g}")
    run.summary.update(slope=res.slope, expected_slope=res.expected_slope)


COMMANDS = {
    "bands": cmd_bands, "ladder": cmd_ladder, "spectrum": cmd_spectrum,
    "continue": cmd_continue, "bifurcate": cmd_bifurcate, "simulate": cmd_simulate,
    "varidemo": cmd_varidemo,
}


# --------------------------------------------------------------------------


def _manifest(cfg_dict, status, outputs, summary, wall, error=None):
    return {
        "status": status,
        "config": cfg_dict,
        "versions": {"necklace_waves": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "wall_time_s": wall,
        "outputs": outputs,
        "summary": summary,
        "error": error,
    }


def _exit_code(exc) -> int:
    if isinstance(exc, (ConfigError, InvalidSpecError)):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_NUMERIC


def run(cfg: RunConfig) -> int:
    out = output_dir(cfg.out)
    t0 = time.perf_counter()
    r = Run(cfg, out)
    status, error, code = "ok", None, EXIT_OK
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[cfg.command](r)
    except (NecklaceError, OSError, ArithmeticError, ValueError) as exc:
        code = _exit_code(exc)
        status = "error"
        error = {"type": type(exc).__name__, "message": str(exc),
                 "key": getattr(exc, "key", None), "exit_code": code}
        print(f"error: {exc}", file=sys.stderr)
    wall = time.perf_counter() - t0
    try:
        if error is not None:
            write_json(out / "error.json", error)
        write_json(out / "manifest.json",
                   _manifest(cfg.to_dict(), status, r.outputs, r.summary, wall, error))
    except OSError as exc:
        print(f"error: cannot write manifest: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="necklace-waves", description=__doc__)
    ap.add_argument("-c", "--config", help="key=value configuration file")
    ap.add_argument("tokens", nargs="*", help="command and key=value overrides")
    ns = ap.parse_args(argv)
    try:
        text = Path(ns.config).read_text(encoding="utf-8") if ns.config else ""
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text, ns.tokens)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        out = output_dir(_raw_out(text, ns.tokens))
        err = {"type": type(exc).__name__, "message": str(exc), "key": exc.key,
               "exit_code": EXIT_CONFIG}
        try:
            write_json(out / "error.json", err)
            write_json(out / "manifest.json", _manifest(
                {"raw": list(ns.tokens)}, "error", [], {}, 0.0, err))
        except OSError:
            return EXIT_IO
        return EXIT_CONFIG
    return run(cfg)


def _raw_out(text, tokens):
    out = "out"
    for line in text.splitlines() + list(tokens):
        line = line.split("#", 1)[0].strip()
        if line.startswith("out="):
            out = line[4:].strip() or out
    return out


if __name__ == "__main__":
    sys.exit(main())
