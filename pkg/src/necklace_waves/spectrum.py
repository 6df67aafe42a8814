"""Eigenvalues of the linearised spatial dynamics for traveling waves.

Substituting ``omega = -sigma - i c lam`` and ``ell = -i lam`` into the
necklace band equation gives the entire function

    G(lam) = 9 cos(2 pi r) - cos(2 (pi - L2) r) - 8 cosh(2 pi lam),
    r = sqrt(-sigma - i c lam),

whose zeros are the generic spatial eigenvalues.  Flat bands contribute
the roots ``lam = i (sigma + (pi m / L2)**2) / c`` in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bands
from .bands import TWO_PI, char_F_omega, cos_sqrt
from .errors import (
    BandEdgeError,
    InvalidSpecError,
    NoRootError,
    NumericError,
    PathLostError,
)

CLASS_TOL = 1e-9


@dataclass(frozen=True)
class SpectralParams:
    sigma: float
    c: float
    L1: float = math.pi
    L2: float = math.pi

    def __post_init__(self):
        if self.c == 0:
            raise InvalidSpecError("wave speed c must be non-zero")
        if self.L1 <= 0 or self.L2 < 0 or abs(self.L1 + self.L2 - TWO_PI) > 1e-9:
            raise InvalidSpecError(
                f"need L1 > 0, L2 >= 0 and L1 + L2 = 2*pi, got L1={self.L1}, L2={self.L2}"
            )

    def replace(self, **kw) -> "SpectralParams":
        d = dict(sigma=self.sigma, c=self.c, L1=self.L1, L2=self.L2)
        d.update(kw)
        if "L1" in kw and "L2" not in kw:
            d["L2"] = max(TWO_PI - d["L1"], 0.0)
        return SpectralParams(**d)


def classify(lam: complex, class_tol: float = CLASS_TOL) -> str:
    if abs(lam.real) <= class_tol:
        return "center"
    return "stable" if lam.real < 0 else "unstable"


@dataclass(frozen=True)
class Root:
    lam: complex
    family: str = "generic"
    cls: str = "center"
    residual: float = 0.0

    @classmethod
    def make(cls, lam, family, residual, class_tol=CLASS_TOL):
        lam = complex(lam)
        return cls(lam, family, classify(lam, class_tol), float(residual))


# --------------------------------------------------------------------------
# characteristic function


def char_residual(lam, params: SpectralParams, L2: float | None = None, sigma=None):
    lam = np.asarray(lam, dtype=complex)
    L2 = params.L2 if L2 is None else L2
    sigma = params.sigma if sigma is None else sigma
    omega = -sigma - 1j * params.c * lam
    return (9.0 * cos_sqrt(omega, TWO_PI) - cos_sqrt(omega, 2.0 * (math.pi - L2))
            - 8.0 * np.cosh(TWO_PI * lam))


def char_derivative(lam, params: SpectralParams, L2: float | None = None, sigma=None):
    """``dG/dlam`` from the analytic ``omega``-derivative of the band function."""
    lam = np.asarray(lam, dtype=complex)
    L2 = params.L2 if L2 is None else L2
    sigma = params.sigma if sigma is None else sigma
    omega = -sigma - 1j * params.c * lam
    Fw, _ = char_F_omega(omega, L2)
    return -1j * params.c * Fw - 16.0 * math.pi * np.sinh(TWO_PI * lam)


def residual_scale(lam, params: SpectralParams, sigma=None):
    """Size of the individual terms of ``G``; roundoff in ``G`` is relative to this."""
    lam = np.asarray(lam, dtype=complex)
    sigma = params.sigma if sigma is None else sigma
    omega = -sigma - 1j * params.c * lam
    return 1.0 + 9.0 * np.abs(cos_sqrt(omega, TWO_PI)) + 8.0 * np.abs(np.cosh(TWO_PI * lam))


def _tol(lam, params, sigma=None):
    return np.maximum(1e-11, 1e-14 * residual_scale(lam, params, sigma))


# --------------------------------------------------------------------------
# closed forms


def roots_homogeneous(sigma: float, c: float, k_range=range(-6, 7),
                      class_tol: float = CLASS_TOL) -> list:
    """Both roots ``i (c/2 - k) +- sqrt(sigma - c**2/4 + c k)`` for every ``k``."""
    p = SpectralParams(sigma, c, TWO_PI, 0.0)
    out = []
    for k in k_range:
        d = np.sqrt(complex(sigma - 0.25 * c * c + c * k))
        for sgn in (1, -1):
            lam = 1j * (0.5 * c - k) + sgn * d
            out.append(Root.make(lam, "generic", abs(complex(char_residual(lam, p))), class_tol))
    return out


def flat_roots(params: SpectralParams, m_max: int = 3, class_tol: float = CLASS_TOL) -> list:
    """Closed-form roots of ``sigma + i c lam + (pi m / L2)**2 = 0``."""
    if params.L2 == 0:
        return []
    out = []
    for m in range(1, m_max + 1):
        w = bands.flat_band_frequency(m, params.L2)
        lam = 1j * (params.sigma + w) / params.c
        res = abs(params.sigma + 1j * params.c * lam + w)
        out.append(Root.make(lam, "flat", res, class_tol))
    return out


# --------------------------------------------------------------------------
# Newton


def _newton_vec(z, params, L2, sigma, maxit=50):
    """Vectorised complex Newton; returns ``(z, converged, residual, iterations)``."""
    z = np.array(z, dtype=complex, copy=True)
    done = np.zeros(z.shape, dtype=bool)
    its = np.zeros(z.shape, dtype=int)
    for _ in range(maxit):
        G = char_residual(z, params, L2, sigma)
        ok = np.isfinite(G) & (np.abs(G) <= _tol(z, params, sigma))
        done |= ok
        if done.all():
            break
        act = ~done
        dG = char_derivative(z[act], params, L2, sigma)
        with np.errstate(all="ignore"):
            step = G[act] / dG
        step[~np.isfinite(step)] = 0.0
        z[act] -= step
        its[act] += 1
    G = char_residual(z, params, L2, sigma)
    res = np.abs(G)
    conv = np.isfinite(G) & (res <= _tol(z, params, sigma))
    return z, conv, res, its


def newton_root(lam_guess, params: SpectralParams, maxit: int = 50,
                class_tol: float = CLASS_TOL) -> Root:
    z, conv, res, its = _newton_vec(np.array([lam_guess]), params, params.L2, params.sigma, maxit)
    if not conv[0]:
        raise NoRootError(f"Newton did not converge from {lam_guess!r}", last=complex(z[0]),
                          iterations=int(its[0]))
    return Root.make(z[0], "generic", res[0], class_tol)


def newton_iterations(lam_guess, params: SpectralParams) -> int:
    _, conv, _, its = _newton_vec(np.array([lam_guess]), params, params.L2, params.sigma)
    if not conv[0]:
        raise NoRootError("Newton did not converge", iterations=int(its[0]))
    return int(its[0])


def classify_roots(roots, class_tol: float = CLASS_TOL) -> dict:
    parts = {"center": [], "stable": [], "unstable": []}
    for r in roots:
        lam = r.lam if isinstance(r, Root) else complex(r)
        parts[classify(lam, class_tol)].append(r)
    parts["counts"] = {k: len(v) for k, v in parts.items() if k != "counts"}
    return parts


# --------------------------------------------------------------------------
# continuation


@dataclass
class CollisionEvent:
    param: float
    param_before: float
    param_after: float
    path_ids: tuple
    kind: str  # "imag_to_complex" or "complex_to_imag"
    before: tuple
    after: tuple

    @property
    def midpoint(self) -> complex:
        return 0.5 * (self.before[0] + self.before[1])

    def to_dict(self) -> dict:
        pair = lambda zz: [[z.real, z.imag] for z in zz]
        return {"param": self.param, "param_before": self.param_before,
                "param_after": self.param_after, "path_ids": list(self.path_ids),
                "kind": self.kind, "before": pair(self.before), "after": pair(self.after)}


@dataclass
class ContinuationPath:
    path_id: int
    param_name: str
    params: list = field(default_factory=list)
    values: list = field(default_factory=list)
    events: list = field(default_factory=list)

    @property
    def final(self) -> complex:
        return self.values[-1]


@dataclass(frozen=True)
class Schedule:
    param: str  # "L1" or "sigma"
    start: float
    stop: float

    def __post_init__(self):
        if self.param not in ("L1", "sigma"):
            raise InvalidSpecError(f"schedule parameter must be L1 or sigma, got {self.param!r}")
        if self.start == self.stop:
            raise InvalidSpecError("empty continuation schedule")


def _nn_dist(z):
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1) if len(z) > 1 else np.full(len(z), np.inf)


def continue_path(seeds, schedule: Schedule, params: SpectralParams, n_steps: int = 2000,
                  collision_tol: float = 1e-4, perturb_eps: float | None = None,
                  path_jump_tol: float = 0.05, max_halvings: int = 8):
    """Follow every seed root while ``schedule.param`` moves from start to stop.

    Returns ``(paths, events)``.  A step is accepted when Newton converges for
    every path, no path moves more than ``0.3`` of its distance to the nearest
    other path (nor more than ``path_jump_tol``) and no two paths merge.
    Failed steps are halved up to ``max_halvings`` times.  If the trouble is a
    pair of nearly coincident roots, the pair is declared a collision and both
    are restarted on the far side from the midpoint, rotated by 90 degrees.
    When the partner of a failing path was never seeded, it is located by
    Newton near the failing root and tracked as a new path from then on.
    """
    seeds = np.array([r.lam if isinstance(r, Root) else complex(r) for r in seeds])
    if perturb_eps is None:
        perturb_eps = 10.0 * collision_tol
    name = schedule.param

    def at(p):
        if name == "L1":
            return max(TWO_PI - p, 0.0), params.sigma
        return params.L2, p

    L2_0, sig_0 = at(schedule.start)
    z, conv, _, _ = _newton_vec(seeds, params, L2_0, sig_0)
    if not conv.all():
        bad = np.nonzero(~conv)[0]
        raise PathLostError("seeds are not roots at the schedule start", schedule.start, bad)

    n = len(z)
    paths = [ContinuationPath(i, name, [schedule.start], [complex(z[i])]) for i in range(n)]
    events = []
    span = schedule.stop - schedule.start
    h0 = span / n_steps
    p = schedule.start
    z_prev, h_prev = None, None
    h = h0
    spawned, max_spawn = 0, 4 * n + 8
    h_floor = abs(h0) / 2 ** max_halvings

    def finished(q):
        return (q - schedule.stop) * np.sign(span) >= -1e-15 * max(1.0, abs(schedule.stop))

    while not finished(p):
        halvings = 0
        while True:
            if (p + h - schedule.stop) * np.sign(span) > 0:
                h = schedule.stop - p
            q = p + h
            pred = z if z_prev is None else z + (z - z_prev) * (h / h_prev)
            L2q, sigq = at(q)
            zn, conv, _, _ = _newton_vec(pred, params, L2q, sigq, maxit=30)
            nn = _nn_dist(z)
            jump = np.abs(zn - z)
            ok = conv & (jump <= np.minimum(0.3 * nn, path_jump_tol))
            merge = _nn_dist(zn) <= 1e-9 * (1.0 + np.abs(zn))
            ok &= ~merge
            if ok.all():
                z_prev, h_prev = z, h
                z, p = zn, q
                for i in range(n):
                    paths[i].params.append(float(p))
                    paths[i].values.append(complex(z[i]))
                h = min(2.0 * h, h0) if abs(2.0 * h) <= abs(h0) else h0
                break
            halvings += 1
            # the floor on |h| stops a Zeno approach to a collision point
            if halvings <= max_halvings and abs(h) > h_floor:
                h = 0.5 * h
                continue
            # step refinement exhausted: look for a colliding pair among the failures
            bad = np.nonzero(~ok)[0]
            ev = _jump_collision(z, bad, p, h0, at, params, collision_tol, perturb_eps,
                                 path_jump_tol, schedule)
            if ev is None:
                # the partner may be a root that was never seeded: adopt it
                new = _find_partner(z, bad, at(p), params) if spawned < max_spawn else None
                if new is None:
                    raise PathLostError(f"paths {list(bad)} lost at {name}={p:.12g}", p, bad)
                spawned += 1
                paths.append(ContinuationPath(n, name, [float(p)], [complex(new)]))
                z = np.append(z, new)
                n += 1
                z_prev, h_prev = None, None
                h = h0
                halvings = 0
                continue
            q, zn, event = ev
            events.append(event)
            for i in event.path_ids:
                paths[i].events.append(event)
            z_prev, h_prev = None, None
            z, p = zn, q
            for i in range(n):
                paths[i].params.append(float(p))
                paths[i].values.append(complex(z[i]))
            h = h0
            break
    return paths, events


def _find_partner(z, bad, state, params, radius=0.1):
    """An unseeded root close to one of the failing paths, or ``None``."""
    L2, sigma = state
    best = None
    for i in bad:
        guesses = [z[i] + r * np.exp(0.25j * math.pi * k)
                   for r in (1e-3, 1e-2, 3e-2, 0.1) for k in range(8)]
        zz, conv, _, _ = _newton_vec(np.array(guesses), params, L2, sigma)
        for cand in zz[conv]:
            dmin = np.abs(z - cand).min()
            if dmin > 1e-8 and abs(cand - z[i]) <= radius:
                if best is None or abs(cand - z[i]) < best[0]:
                    best = (abs(cand - z[i]), complex(cand))
    return None if best is None else best[1]


def _jump_collision(z, bad, p, h0, at, params, collision_tol, perturb_eps, path_jump_tol,
                    schedule):
    """Restart a nearly coincident pair past its collision; ``None`` if none applies."""
    nn = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(nn, np.inf)
    i = min(bad, key=lambda k: nn[k].min())
    j = int(np.argmin(nn[i]))
    dist = nn[i, j]
    # a genuine pair is much closer to each other than to anything else
    others = np.delete(nn[[i, j]], [i, j], axis=1)
    far = others.min() if others.size else np.inf
    if dist > max(0.05 * (1.0 + abs(z[i])), collision_tol) or dist > 0.25 * far:
        return None
    sep = z[i] - z[j]
    mid = 0.5 * (z[i] + z[j])
    on_axis = abs(sep.real) < abs(sep.imag)
    if on_axis:
        mid = complex(0.0, mid.imag) if abs(mid.real) < 1e-6 else mid
        direction = 1.0
        kind = "imag_to_complex"
    else:
        mid = complex(0.0, mid.imag) if abs(mid.real) < 1e-6 else mid
        direction = 1j
        kind = "complex_to_imag"
    delta = max(perturb_eps, dist)
    others_idx = [k for k in range(len(z)) if k not in (i, j)]
    for step in (h0, 2.0 * h0, 4.0 * h0, 8.0 * h0):
        q = p + step
        if (q - schedule.stop) * np.sign(schedule.stop - schedule.start) > 0:
            q = schedule.stop
        L2q, sigq = at(q)
        guess = np.array(z, dtype=complex)
        guess[i] = mid + delta * direction
        guess[j] = mid - delta * direction
        zn, conv, _, _ = _newton_vec(guess, params, L2q, sigq, maxit=40)
        if not conv.all():
            continue
        pair_ok = abs(zn[i] - zn[j]) > 1e-9 and max(abs(zn[i] - mid), abs(zn[j] - mid)) < max(
            4.0 * (dist + delta), path_jump_tol)
        rest = np.abs(zn[others_idx] - z[others_idx]).max() if others_idx else 0.0
        distinct = _nn_dist(zn).min() > 1e-9
        if pair_ok and rest <= path_jump_tol and distinct:
            new_sep = zn[i] - zn[j]
            rotated = abs(new_sep.real) >= abs(new_sep.imag) if on_axis else abs(new_sep.real) < abs(new_sep.imag)
            if not rotated:
                kind = "near_miss"
            event = CollisionEvent(param=float(0.5 * (p + q)), param_before=float(p),
                                   param_after=float(q), path_ids=(int(i), int(j)), kind=kind,
                                   before=(complex(z[i]), complex(z[j])),
                                   after=(complex(zn[i]), complex(zn[j])))
            return q, zn, event
        if q == schedule.stop:
            break
    return None


def collisions(events):
    """Events where the pair really changed orientation."""
    return [e for e in events if e.kind != "near_miss"]


# --------------------------------------------------------------------------
# grid scan


def grid_scan(region, resolution, params: SpectralParams, dedupe_tol: float = 1e-8,
              class_tol: float = CLASS_TOL) -> list:
    """Roots inside ``region = (re_min, re_max, im_min, im_max)`` from level-curve crossings.

    ``resolution`` is ``(n_re, n_im)`` samples.  Cells where both the real and
    the imaginary part of ``G`` change sign are polished with Newton.
    """
    x0, x1, y0, y1 = region
    nr, ni = resolution if np.ndim(resolution) else (resolution, resolution)
    xs = np.linspace(x0, x1, nr)
    ys = np.linspace(y0, y1, ni)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    G = char_residual(X + 1j * Y, params)

    def changes(A):
        a = np.sign(A)
        c = [a[:-1, :-1], a[1:, :-1], a[:-1, 1:], a[1:, 1:]]
        mx = np.maximum.reduce(c)
        mn = np.minimum.reduce(c)
        return (mx >= 0) & (mn <= 0)

    flag = changes(G.real) & changes(G.imag)
    # dilate by one cell so crossings on a cell edge are not lost
    dil = flag.copy()
    dil[1:, :] |= flag[:-1, :]
    dil[:-1, :] |= flag[1:, :]
    dil[:, 1:] |= flag[:, :-1]
    dil[:, :-1] |= flag[:, 1:]
    idx = np.argwhere(dil)
    if len(idx) == 0:
        return []
    cx = 0.5 * (xs[idx[:, 0]] + xs[idx[:, 0] + 1])
    cy = 0.5 * (ys[idx[:, 1]] + ys[idx[:, 1] + 1])
    z, conv, res, _ = _newton_vec(cx + 1j * cy, params, params.L2, params.sigma)
    dx = (x1 - x0) / max(nr - 1, 1)
    dy = (y1 - y0) / max(ni - 1, 1)
    inside = ((z.real >= x0 - 1e-12) & (z.real <= x1 + 1e-12)
              & (z.imag >= y0 - 1e-12) & (z.imag <= y1 + 1e-12))
    near = (np.abs(z.real - cx) <= 3 * dx) & (np.abs(z.imag - cy) <= 3 * dy)
    keep = conv & inside & near
    found = []
    for lam, r in zip(z[keep], res[keep]):
        if all(abs(lam - f.lam) > dedupe_tol for f in found):
            found.append(Root.make(lam, "generic", r, class_tol))
    found.sort(key=lambda r: (r.lam.imag, r.lam.real))
    return found


# --------------------------------------------------------------------------
# bifurcation data


@dataclass
class BifurcationData:
    m0: int | None
    ell0: float
    sigma0: float
    c0: float
    omega: float
    omega_p: float
    omega_pp: float
    gamma: float
    kappa: float
    L1: float
    L2: float
    mode: object = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"m0": self.m0, "ell0": self.ell0, "sigma0": self.sigma0, "c0": self.c0,
                "omega": self.omega, "omega_p": self.omega_p, "omega_pp": self.omega_pp,
                "gamma": self.gamma, "kappa": self.kappa, "L1": self.L1, "L2": self.L2}


def _kappa(omega_pp):
    return math.sqrt(2.0 / omega_pp) if omega_pp > 0 else float("nan")


def bifurcation_point(branch: int, ell0: float, L1: float, L2: float,
                      with_gamma: bool = True) -> BifurcationData:
    omega = bands.band_frequency(ell0, branch, L1, L2)
    return _bif_from_band(branch, ell0, ell0, omega, L1, L2, with_gamma)


def _bif_from_band(branch, ell_band, ell_full, omega, L1, L2, with_gamma):
    w1, w2 = bands.band_derivatives(ell_band, omega, L1, L2)
    gamma, mode = float("nan"), None
    if with_gamma:
        mode = bands.bloch_eigenfunction(ell_band, omega, L1, L2, branch=branch)
        gamma = bands.gamma_coefficient(mode)
    return BifurcationData(m0=branch, ell0=float(ell_full), sigma0=-omega + ell_full * w1,
                           c0=w1, omega=omega, omega_p=w1, omega_pp=w2, gamma=gamma,
                           kappa=_kappa(w2), L1=L1, L2=L2, mode=mode)


def bifurcation_for_speed(c0: float, branch: int = 1, L1: float = math.pi,
                          L2: float = math.pi, with_gamma: bool = True) -> BifurcationData:
    ell0 = bands.solve_ell_for_speed(c0, branch, L1, L2)
    return bifurcation_point(branch, ell0, L1, L2, with_gamma)


def bifurcation_from_root(lam: complex, params: SpectralParams, n_branches: int = 12,
                          with_gamma: bool = False) -> BifurcationData:
    """Band point behind a double root ``lam ~ i ell*`` of ``G``.

    The Bloch wavenumber ``ell*`` is reduced to ``[-1/2, 1/2)`` for band
    evaluations, and then refined so that the band slope equals ``c`` exactly.
    ``sigma0`` uses the unreduced ``ell*``, so it is the critical ``sigma``.
    """
    c = params.c
    L1, L2 = params.L1, params.L2
    ell_full = float(np.imag(lam))
    shift = math.floor(ell_full + 0.5)
    ell = ell_full - shift
    omega_guess = c * ell_full - params.sigma
    omegas = bands.band_frequencies(ell, n_branches, L1, L2)
    branch = int(np.argmin(np.abs(omegas - omega_guess))) + 1
    if abs(omegas[branch - 1] - omega_guess) > 0.05 * (1.0 + abs(omega_guess)):
        raise NumericError(f"no band near omega={omega_guess:.6g} at ell={ell:.6g}")
    for _ in range(30):
        omega = bands.band_frequencies(ell, branch, L1, L2)[branch - 1]
        w1, w2 = bands.band_derivatives(ell, omega, L1, L2)
        if w2 == 0:
            raise BandEdgeError("vanishing curvature at the collision")
        d = (w1 - c) / w2
        ell -= d
        if abs(d) < 1e-14:
            break
    omega = bands.band_frequencies(ell, branch, L1, L2)[branch - 1]
    return _bif_from_band(branch, ell, ell + shift, omega, L1, L2, with_gamma)


def has_homoclinic(bif: BifurcationData) -> bool:
    """The normal form has a sech homoclinic orbit iff the band curvature is positive."""
    if bif.omega_pp == 0:
        raise BandEdgeError("degenerate bifurcation (vanishing band curvature)")
    return bool(bif.omega_pp > 0)


def split_roots(bif: BifurcationData, delta: float, with_c: float | None = None):
    """The two roots near ``i ell0`` at ``sigma = sigma0 + delta``."""
    c = bif.c0 if with_c is None else with_c
    p = SpectralParams(bif.sigma0 + delta, c, bif.L1, bif.L2)
    # leading order: lam - i ell0 = +-sqrt(2 delta / omega'') (real when omega'' delta > 0)
    amp = np.sqrt(complex(2.0 * delta / bif.omega_pp))
    out = []
    for sgn in (1, -1):
        out.append(newton_root(1j * bif.ell0 + sgn * amp, p))
    return out
