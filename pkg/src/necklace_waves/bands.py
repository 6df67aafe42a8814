"""Floquet--Bloch bands of the necklace and ladder graphs.

On the necklace with period ``L1 + L2 = 2*pi`` the generic bands are the
roots of

    F(omega, ell) = 9 cos(2 pi s) - cos(2 (pi - L2) s) - 8 cos(2 pi ell),

with ``s = sqrt(omega)``, while the flat bands sit at ``(pi m / L2)**2``.
All functions of ``omega`` here are entire (``cos(a s)`` and ``sin(a s)/s``
are even in ``s``), so negative and complex ``omega`` are allowed wherever
it makes sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    BandEdgeError,
    DomainError,
    FlatBandAbsentError,
    InconsistentBandError,
    InvalidSpecError,
    NumericError,
    SpeedOutOfRangeError,
    UnsupportedNormalizationError,
)
from .graph import MIN_INTERIOR, MetricGraphSpec, build_necklace, integrate

TWO_PI = 2.0 * math.pi
NORMALIZATION_TOL = 1e-12
RESIDUAL_TOL = 1e-10

# --------------------------------------------------------------------------
# entire building blocks


def _sqrt(omega):
    return np.sqrt(np.asarray(omega, dtype=complex))


def _realify(z, like):
    """Drop the imaginary part when every input was real and non-negative-safe."""
    if np.isrealobj(like):
        return np.real(z)
    return z


def cos_sqrt(omega, a):
    """``cos(a * sqrt(omega))``; real for real ``omega``."""
    return _realify(np.cos(a * _sqrt(omega)), omega)


def sinc_sqrt(omega, a):
    """``sin(a * sqrt(omega)) / sqrt(omega)`` with the limit ``a`` at 0."""
    om = np.asarray(omega)
    s = _sqrt(om)
    small = np.abs(a * a * om) < 1e-8
    safe = np.where(small, 1.0, s)
    out = np.where(small, a - a ** 3 * om / 6.0, np.sin(a * safe) / safe)
    return _realify(out, omega)


def _cos_sqrt_derivs(omega, a):
    """Value, first and second ``omega``-derivative of ``cos(a sqrt(omega))``."""
    om = np.asarray(omega)
    s = _sqrt(om)
    C = np.cos(a * s)
    d1 = -0.5 * a * sinc_sqrt(om, a)
    small = np.abs(a * a * om) < 1e-4
    safe = np.where(small, 1.0, s)
    # d/domega [sin(a s)/s] = (a s cos(a s) - sin(a s)) / (2 s^3)
    exact = (a * safe * np.cos(a * safe) - np.sin(a * safe)) / (2.0 * safe ** 3)
    series = -a ** 3 / 6.0 + a ** 5 * om / 60.0 - a ** 7 * om ** 2 / 1680.0
    d2 = -0.5 * a * np.where(small, series, exact)
    return _realify(C, omega), _realify(d1, omega), _realify(d2, omega)


def _check_necklace(L1, L2):
    if not (L1 > 0 and L2 >= 0):
        raise InvalidSpecError(f"need L1 > 0 and L2 >= 0, got L1={L1}, L2={L2}")
    if abs(L1 + L2 - TWO_PI) > 1e-9:
        raise UnsupportedNormalizationError(
            f"band formulas need L1 + L2 = 2*pi, got {L1 + L2!r}"
        )


# --------------------------------------------------------------------------
# flat bands, monodromy, characteristic function


def flat_band_frequency(m: int, L2: float) -> float:
    if L2 == 0:
        raise FlatBandAbsentError("no flat bands on the homogeneous line (L2 = 0)")
    if L2 < 0 or m < 1:
        raise DomainError(f"need m >= 1 and L2 > 0, got m={m}, L2={L2}")
    return (math.pi * m / L2) ** 2


def monodromy_matrix(omega, L1: float, L2: float) -> np.ndarray:
    """Transfer matrix of the coefficients ``(a, b)`` of ``a cos + b sin`` over one cell.

    Complex for negative ``omega`` (where ``sin(sqrt(omega) L)`` is imaginary);
    the trace and determinant stay real.
    """
    s = complex(np.sqrt(complex(omega)))
    c1, s1 = np.cos(s * L1), np.sin(s * L1)
    c2, s2 = np.cos(s * L2), np.sin(s * L2)
    semis = np.array([[c2, s2], [-2.0 * s2, 2.0 * c2]])
    seg = np.array([[c1, s1], [-0.5 * s1, 0.5 * c1]])
    M = semis @ seg
    if np.isrealobj(omega) and omega >= 0:
        return M.real
    return M


def transfer_matrix(omega, L1: float, L2: float) -> np.ndarray:
    """Real transfer matrix of ``(w, w')`` across one necklace cell.

    Continuity at the vertices and the Kirchhoff balance with the symmetric
    choice ``w_+ = w_-`` give ``T = diag(1, 2) R(L2) diag(1, 1/2) R(L1)``.
    It is similar to :func:`monodromy_matrix` and regular at ``omega = 0``.
    """
    T = _rotation(omega, L1)
    T = np.diag([1.0, 0.5]) @ T
    T = _rotation(omega, L2) @ T
    return np.diag([1.0, 2.0]) @ T


def _rotation(omega, L):
    c = float(np.real(cos_sqrt(float(omega), L)))
    sn = float(np.real(sinc_sqrt(float(omega), L)))
    return np.array([[c, sn], [-omega * sn, c]])


def trace_monodromy(omega, L1: float, L2: float):
    c1, c2 = cos_sqrt(omega, L1), cos_sqrt(omega, L2)
    # sin(s L1) sin(s L2) = omega * sinc1 * sinc2 keeps it real for omega < 0
    ss = np.asarray(omega) * sinc_sqrt(omega, L1) * sinc_sqrt(omega, L2)
    return 2.0 * c2 * c1 - 2.5 * ss


def char_F(omega, cos2pl, L2: float):
    """Characteristic function with ``cos(2 pi ell)`` given directly."""
    return (9.0 * cos_sqrt(omega, TWO_PI) - cos_sqrt(omega, 2.0 * (math.pi - L2))
            - 8.0 * cos2pl)


def char_F_omega(omega, L2: float):
    """First and second ``omega``-derivatives of the characteristic function."""
    _, a1, a2 = _cos_sqrt_derivs(omega, TWO_PI)
    _, b1, b2 = _cos_sqrt_derivs(omega, 2.0 * (math.pi - L2))
    return 9.0 * a1 - b1, 9.0 * a2 - b2


def char_function(omega, ell, L2: float):
    return char_F(omega, np.cos(TWO_PI * np.asarray(ell)), L2)


# --------------------------------------------------------------------------
# band frequencies


def _g(s, cos2pl, L2):
    return 9.0 * np.cos(TWO_PI * s) - np.cos(2.0 * (math.pi - L2) * s) - 8.0 * cos2pl


def _dg(s, L2):
    b = 2.0 * (math.pi - L2)
    return -9.0 * TWO_PI * np.sin(TWO_PI * s) + b * np.sin(b * s)


def _critical_points(s_lo, s_hi, L2, ds=0.01):
    """Zeros of ``g'`` in ``(s_lo, s_hi]``, found by sampling plus bisection."""
    grid = np.arange(s_lo, s_hi + 0.5 * ds, ds)
    dv = _dg(grid, L2)
    dg = lambda t: _dg(t, L2)
    out = list(grid[1:][dv[1:] == 0.0])
    for i in np.nonzero(dv[:-1] * dv[1:] < 0)[0]:
        out.append(brentq(dg, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
    uniq = []
    for t in sorted(out):
        if t > s_lo + 1e-12 and (not uniq or t - uniq[-1] > 1e-12):
            uniq.append(t)
    return uniq


def band_frequencies(ell: float, n: int, L1: float, L2: float) -> np.ndarray:
    """The ``n`` lowest generic band frequencies at ``ell`` in ascending order.

    Roots are bracketed in ``s = sqrt(omega) >= 0`` on the pieces between
    consecutive critical points of ``g(s) = F(s**2, ell)``, where ``g`` is
    monotone.  A critical point on which ``g`` vanishes is a double root
    (two bands touching).
    """
    _check_necklace(L1, L2)
    if n < 1:
        raise DomainError(f"need at least one branch, got {n}")
    c = math.cos(TWO_PI * ell)
    g = lambda t: _g(t, c, L2)
    tol = 1e-11

    def sgn(t):
        v = g(t)
        return 0 if abs(v) <= tol else (1 if v > 0 else -1)

    roots = [0.0] if sgn(0.0) == 0 else []
    prev = 0.0
    chunk = 1.0
    while len(roots) < n:
        crit = _critical_points(prev, prev + chunk, L2)
        for q in crit:
            sp_, sq = sgn(prev), sgn(q)
            if sp_ * sq < 0:
                roots.append(brentq(g, prev, q, xtol=1e-15, rtol=1e-15))
            if sq == 0:
                roots += [q, q]
            prev = q
        if prev > 4.0 * n + 16:
            raise NumericError(f"could not bracket {n} bands at ell={ell}")
        chunk *= 2.0
    s_roots = np.sort(np.array(roots))[:n]
    return np.array([_newton_polish(t * t, c, L2) for t in s_roots])


def _newton_polish(omega, cos2pl, L2, iters=3):
    for _ in range(iters):
        F = float(char_F(omega, cos2pl, L2))
        if abs(F) <= 1e-14:
            break
        Fw, _ = char_F_omega(omega, L2)
        if abs(Fw) < 1e-8:
            break
        step = F / float(Fw)
        if abs(step) > 1e-6 * (1 + abs(omega)):
            break
        omega -= step
    return max(omega, 0.0) if omega > -1e-14 else omega


def band_frequency(ell: float, branch: int, L1: float, L2: float) -> float:
    """Generic band ``branch`` (1 = lowest) at ``ell``."""
    return float(band_frequencies(ell, branch, L1, L2)[branch - 1])


def band_derivatives(ell: float, omega: float, L1: float, L2: float):
    """``(omega', omega'')`` along the band through ``(ell, omega)`` by implicit differentiation."""
    _check_necklace(L1, L2)
    Fw, Fww = char_F_omega(omega, L2)
    Fw, Fww = float(Fw), float(Fww)
    if abs(Fw) < 1e-12:
        raise BandEdgeError(f"dF/domega vanishes at ell={ell}, omega={omega}")
    Fl = 16.0 * math.pi * math.sin(TWO_PI * ell)
    Fll = 32.0 * math.pi ** 2 * math.cos(TWO_PI * ell)
    w1 = -Fl / Fw
    w2 = -(Fww * w1 * w1 + Fll) / Fw
    return w1, w2


def _speed(ell, branch, L1, L2):
    return band_derivatives(ell, band_frequency(ell, branch, L1, L2), L1, L2)


def solve_ell_for_speed(c0: float, branch: int, L1: float, L2: float) -> float:
    """Smallest ``|ell|`` in the zone where the band's group velocity equals ``c0``."""
    _check_necklace(L1, L2)
    if c0 < 0:
        return -solve_ell_for_speed(-c0, branch, L1, L2)
    if c0 == 0:
        return 0.0
    ells = np.linspace(0.0, 0.5, 401)[1:-1]
    vals = []
    for e in ells:
        try:
            vals.append(_speed(e, branch, L1, L2)[0] - c0)
        except BandEdgeError:
            vals.append(np.nan)
    vals = np.array(vals)
    f = lambda e: _speed(e, branch, L1, L2)[0] - c0
    for i in range(len(ells) - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] <= 0:
            ell = brentq(f, ells[i], ells[i + 1], xtol=1e-14, rtol=1e-14)
            for _ in range(4):
                w1, w2 = _speed(ell, branch, L1, L2)
                if w2 == 0 or abs(w1 - c0) <= 1e-14:
                    break
                ell -= (w1 - c0) / w2
            return float(ell)
    raise SpeedOutOfRangeError(f"no ell in the zone with group velocity {c0} on branch {branch}")


# --------------------------------------------------------------------------
# Bloch eigenfunctions


@dataclass
class BlochMode:
    """Bloch eigenfunction ``f(ell, x) = exp(-i ell x) w(x)`` on one necklace cell.

    ``w`` is ``a0 cos(s x) + b0 sin(s x)`` on the segment and
    ``c cos(s y) + d sin(s y)`` (``y = x - L1``) on both semicircles.
    ``scale`` holds the complex factor that enforces ``sup |f| = 1`` with
    ``f(x0) > 0``.
    """

    ell: float
    omega: float
    L1: float
    L2: float
    branch: int | None
    state0: np.ndarray
    stateB: np.ndarray
    multiplier: complex
    x0: float
    scale: complex = 1.0
    omega_p: float = float("nan")
    omega_pp: float = float("nan")
    vertex_residual: float = float("nan")
    coefficients: dict = field(default_factory=dict)

    def w(self, local):
        """Un-normalised Bloch wave at cell-local coordinates in ``[0, L1 + L2]``."""
        local = np.asarray(local, dtype=float)
        on_seg = local <= self.L1
        seg = _evolve(self.omega, local, *self.state0)
        semi = _evolve(self.omega, local - self.L1, *self.stateB)
        return np.where(on_seg, seg, semi)

    def f(self, local):
        """Normalised Bloch function ``f(ell, x)``."""
        local = np.asarray(local, dtype=float)
        return self.scale * np.exp(-1j * self.ell * local) * self.w(local)

    def sample(self, grid):
        """``f`` at every node of a necklace grid (cell-periodic)."""
        return self.f(grid.local)


def _evolve(omega, y, w, p):
    """Solution of ``-u'' = omega u`` with ``u(0) = w``, ``u'(0) = p`` at ``y``."""
    y = np.asarray(y, dtype=float)
    return w * cos_sqrt(float(omega), y) + p * sinc_sqrt(float(omega), y)


def _null_vector(T, mu):
    A = T - mu * np.eye(2)
    cand = [np.array([A[0, 1], -A[0, 0]]), np.array([A[1, 1], -A[1, 0]])]
    v = max(cand, key=lambda u: np.linalg.norm(u))
    if np.linalg.norm(v) < 1e-14:
        v = np.array([1.0, 0.0], dtype=complex)
    return v / np.linalg.norm(v)


def bloch_eigenfunction(ell: float, omega: float, L1: float, L2: float,
                        branch: int | None = None, x0: float | None = None) -> BlochMode:
    """Build the symmetric (``w_+ = w_-``) Bloch mode at a generic band point."""
    _check_necklace(L1, L2)
    mu = complex(np.exp(1j * TWO_PI * ell))
    T = transfer_matrix(omega, L1, L2)
    v = _null_vector(T.astype(complex), mu)
    res = float(np.linalg.norm(T @ v - mu * v))
    if res > 1e-8:
        raise InconsistentBandError(
            f"exp(2 pi i ell) is not a Floquet multiplier at (ell={ell}, omega={omega}); residual {res:.3e}"
        )
    # state just right of the middle vertex, on either semicircle
    seg = _rotation(omega, L1) @ v
    stateB = np.array([seg[0], 0.5 * seg[1]])
    end = _rotation(omega, L2) @ stateB
    # continuity and Kirchhoff at both vertices of the cell
    vres = max(
        abs(end[0] - mu * v[0]),
        abs(2.0 * end[1] - mu * v[1]),
        abs(seg[1] - 2.0 * stateB[1]),
    )

    mode = BlochMode(ell=float(ell), omega=float(omega), L1=L1, L2=L2, branch=branch,
                     state0=v, stateB=stateB, multiplier=mu, x0=0.5 * L1,
                     vertex_residual=float(vres))
    mode.scale = 1.0
    if x0 is None:
        x0 = 0.5 * L1
        if abs(mode.f(x0)) < 1e-8 and L2 > 0:
            x0 = L1 + 0.5 * L2
    mode.x0 = float(x0)
    fx0 = complex(mode.f(x0))
    if abs(fx0) < 1e-8:
        raise InconsistentBandError("Bloch function vanishes at the symmetry point")
    sup = _sup_abs(mode)
    mode.scale = abs(fx0) / fx0 / sup
    s = complex(np.sqrt(complex(omega)))
    a0, b0 = v[0], (v[1] / s if abs(s) > 0 else np.nan)
    cB, dB = stateB[0], (stateB[1] / s if abs(s) > 0 else np.nan)
    mode.coefficients = {k: complex(val) * mode.scale
                         for k, val in (("a0", a0), ("b0", b0), ("c", cB), ("d", dB))}
    try:
        mode.omega_p, mode.omega_pp = band_derivatives(ell, omega, L1, L2)
    except BandEdgeError:
        pass
    return mode


def _sup_abs(mode, n=2001):
    P = mode.L1 + mode.L2
    xs = np.linspace(0.0, P, n)
    vals = np.abs(mode.f(xs))
    i = int(np.argmax(vals))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    best = vals[i]
    if hi > lo:
        r = minimize_scalar(lambda t: -abs(complex(mode.f(t))), bounds=(lo, hi),
                            method="bounded", options={"xatol": 1e-13})
        best = max(best, -r.fun)
    # vertices and symmetry points are candidates too
    for t in (0.0, mode.L1, P, 0.5 * mode.L1, mode.L1 + 0.5 * mode.L2):
        best = max(best, abs(complex(mode.f(t))))
    return float(best)


def necklace_mode(ell: float, branch: int, L1: float, L2: float) -> BlochMode:
    omega = band_frequency(ell, branch, L1, L2)
    return bloch_eigenfunction(ell, omega, L1, L2, branch=branch)


def gamma_coefficient(mode: BlochMode, grid=None) -> float:
    """``||f||_4^4 / ||f||_2^2`` over one cell (both semicircles counted)."""
    if grid is None:
        grid = build_necklace(MetricGraphSpec("necklace", mode.L1, mode.L2, n_cells=1,
                                              pts_per_edge=600))
    f = mode.sample(grid)
    return integrate(grid, f, 4) / integrate(grid, f, 2)


# --------------------------------------------------------------------------
# ladder


LADDER_FAMILIES = ("symmetric", "antisymmetric", "lowest", "flat")


def ladder_band(ell: float, k: int, family: str, sign: int = 1) -> float:
    """Reference closed forms for the ladder with unit rail and rung lengths.

    ``ell`` is the Bloch phase per rail section (``[-pi, pi]``).  These do not
    all solve the Kirchhoff trace equation; :func:`ladder_band_kirchhoff` does.
    """
    if family not in LADDER_FAMILIES:
        raise DomainError(f"unknown ladder family {family!r}")
    c = math.cos(ell)
    if family == "flat":
        if k < 0:
            raise DomainError("flat ladder bands need k >= 0")
        return ((2 * k + 1) * math.pi) ** 2
    if family == "symmetric":
        if abs(ell) > 0.5 * math.pi + 1e-15:
            raise DomainError("symmetric ladder band needs |ell| <= pi/2")
        return (sign * math.acos(min(1.0, max(-1.0, 2.0 * c - 1.0))) + 2 * k * math.pi) ** 2
    if family == "antisymmetric":
        if not (0.5 * math.pi - 1e-15 <= abs(ell) <= math.pi + 1e-15):
            raise DomainError("antisymmetric ladder band needs pi/2 <= |ell| <= pi")
        return (math.acos(min(1.0, max(-1.0, 1.0 + 2.0 * c))) + k * math.pi) ** 2
    if abs(ell) > 0.5 * math.pi + 1e-15:
        raise DomainError("lowest ladder band needs |ell| <= pi/2")
    return -math.acosh(max(1.0, 1.0 + 2.0 * c)) ** 2


def ladder_band_kirchhoff(ell: float, k: int, family: str, sign: int = 1) -> float:
    """Ladder bands (unit lengths) of the Kirchhoff Laplacian, derived from the transfer matrix.

    Symmetric modes (equal on both rails, constant rungs) satisfy
    ``cos(sqrt(omega)) = (2 cos(ell) + 1) / 3``; modes odd under the rail
    swap satisfy ``cos(sqrt(omega)) = (2 cos(ell) - 1) / 3``; rung-localised
    modes give the flat bands ``(m pi)**2``.
    """
    if family == "flat":
        if k < 1:
            raise DomainError("flat ladder bands need m = k >= 1")
        return (k * math.pi) ** 2
    c = math.cos(ell)
    if family == "symmetric":
        r = (2.0 * c + 1.0) / 3.0
    elif family == "antisymmetric":
        r = (2.0 * c - 1.0) / 3.0
    else:
        raise DomainError(f"unknown ladder family {family!r}")
    return (sign * math.acos(r) + 2 * k * math.pi) ** 2


# --------------------------------------------------------------------------
# finite-difference Bloch oracle


def _cell_edges(spec: MetricGraphSpec):
    """Edges of one periodic cell as ``(tail, head, length, head_wraps)``; 2 vertices."""
    if spec.topology == "necklace":
        if spec.L2 == 0:
            return 1, [(0, 0, spec.L1, True)]
        return 2, [(0, 1, spec.L1, False), (1, 0, spec.L2, True), (1, 0, spec.L2, True)]
    return 2, [(0, 1, spec.Lr, False), (0, 0, spec.Ls, True), (1, 1, spec.Ls, True)]


def fd_bloch_eigs(spec: MetricGraphSpec, ell: float, n_eigs: int = 6) -> np.ndarray:
    """Lowest eigenvalues of the discrete Kirchhoff Laplacian on one cell with Bloch closure.

    The phase across a cell is ``theta = ell * period`` with the period
    ``2 pi`` on the necklace (so ``theta = 2 pi ell``) and ``Ls`` on the
    ladder (``ell`` is then the phase per unit length).
    """
    spec.validate()
    nv, edges = _cell_edges(spec)
    theta = ell * spec.period
    mu = np.exp(1j * theta)
    mean = sum(e[2] for e in edges) / len(edges)
    # node numbering: vertices first, then edge interiors
    n = nv
    chains = []
    for tail, head, length, wraps in edges:
        m = max(int(round(spec.pts_per_edge * length / mean)), MIN_INTERIOR)
        idx = list(range(n, n + m))
        n += m
        chains.append((tail, idx, head, length / (m + 1), mu if wraps else 1.0))
    K = np.zeros((n, n), dtype=complex)
    wts = np.zeros(n)
    for tail, idx, head, h, ph in chains:
        nodes = [tail] + idx + [head]
        phases = [1.0] * (len(nodes) - 1) + [ph]
        for a in range(len(nodes) - 1):
            i, j = nodes[a], nodes[a + 1]
            pi_, pj = phases[a], phases[a + 1]
            v = {}
            v[i] = v.get(i, 0) - pi_
            v[j] = v.get(j, 0) + pj
            for r, vr in v.items():
                for s_, vs in v.items():
                    K[r, s_] += np.conj(vr) * vs / h
            wts[i] += 0.5 * h
            wts[j] += 0.5 * h
    if n <= 4000:
        d = 1.0 / np.sqrt(wts)
        vals = sla.eigh(d[:, None] * K * d[None, :], eigvals_only=True,
                        subset_by_index=[0, min(n_eigs, n) - 1])
        return np.sort(vals.real)
    Ks = sp.csr_matrix(K)
    try:
        vals = spla.eigsh(Ks, k=n_eigs, M=sp.diags(wts), sigma=-1.0, which="LM",
                          return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise NumericError(f"eigen-iteration did not converge: {exc}") from exc
    return np.sort(vals.real)
