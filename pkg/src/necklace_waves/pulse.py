"""Initial data for traveling modulating pulses, plus exact solitons."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientCellsError, InvalidSpecError, NoHomoclinicError, NoSolitonError
from .graph import GraphGrid, StateField

MACHINE_EPS_TAIL = 1e-16


@dataclass(frozen=True)
class Envelope:
    """``A(X) = gamma**-0.5 sech(kappa X)``, the homoclinic of the normal form."""

    omega_pp: float
    gamma: float

    @property
    def kappa(self) -> float:
        return math.sqrt(2.0 / self.omega_pp)

    @property
    def amplitude(self) -> float:
        return 1.0 / math.sqrt(self.gamma)

    def __call__(self, X):
        return self.amplitude / np.cosh(self.kappa * np.asarray(X, dtype=float))

    def second_derivative(self, X):
        s = 1.0 / np.cosh(self.kappa * np.asarray(X, dtype=float))
        return self.amplitude * self.kappa ** 2 * (s - 2.0 * s ** 3)

    def residual(self, X):
        """``omega''/2 A'' - A + 2 gamma A**3`` at ``X``."""
        A = self(X)
        return 0.5 * self.omega_pp * self.second_derivative(X) - A + 2.0 * self.gamma * A ** 3


def sech_envelope(omega_pp: float, gamma: float) -> Envelope:
    if not omega_pp > 0:
        raise NoHomoclinicError(f"omega'' = {omega_pp} <= 0: the normal form has no sech solution")
    if not gamma > 0:
        raise InvalidSpecError(f"gamma must be positive, got {gamma}")
    return Envelope(float(omega_pp), float(gamma))


@dataclass(frozen=True)
class CellBudget:
    n0: int
    n1: int

    @property
    def total(self) -> int:
        return 2 * self.n0 + self.n1

    def satisfied_by(self, n0: int, eps: float, kappa: float) -> bool:
        return n0 >= _n0_min(eps, kappa)


def _n0_min(eps, kappa):
    return math.ceil(-math.log(MACHINE_EPS_TAIL / eps) / (2.0 * math.pi * eps * kappa))


def cell_counts(eps: float, kappa: float, c0: float, T: float) -> CellBudget:
    """Half-width ``n0`` (tail below machine precision) and travel ``n1`` in cells."""
    if min(eps, kappa, T) <= 0 or c0 < 0:
        raise InvalidSpecError("eps, kappa and T must be positive and c0 non-negative")
    return CellBudget(_n0_min(eps, kappa), math.ceil(c0 * T / (2.0 * math.pi)))


@dataclass
class PulseProfile:
    envelope: Envelope
    eps: float
    n0: int
    x_c: float
    ell0: float
    mode: object


def pulse_profile(grid: GraphGrid, bif, eps: float, n0: int | None = None) -> PulseProfile:
    if n0 is None:
        n0 = grid.spec.n_cells // 2
    env = sech_envelope(bif.omega_pp, bif.gamma)
    return PulseProfile(env, float(eps), int(n0), grid.symmetry_point(n0), bif.ell0, bif.mode)


def build_initial_data(grid: GraphGrid, bif, eps: float, n0: int | None = None,
                       check_tail: bool = True, mode=None, gamma=None) -> StateField:
    """Leading-order modulating pulse centred at the segment midpoint of cell ``n0``.

    ``mode``/``gamma`` override the Bloch mode and its coefficient, e.g. to
    check that the field does not depend on the mode normalisation.
    """
    if grid.spec.topology != "necklace":
        raise InvalidSpecError("modulating pulses are built on necklace grids")
    if abs(grid.spec.L1 - bif.L1) > 1e-12 or abs(grid.spec.L2 - bif.L2) > 1e-12:
        raise InvalidSpecError("bifurcation data was computed for other edge lengths")
    mode = bif.mode if mode is None else mode
    gamma = bif.gamma if gamma is None else gamma
    prof = pulse_profile(grid, bif, eps, n0)
    env = sech_envelope(bif.omega_pp, gamma)
    xi = grid.x - prof.x_c
    psi = eps * env(eps * xi) * mode.sample(grid) * np.exp(1j * bif.ell0 * xi)
    if check_tail:
        _check_tail(grid, psi, eps)
    return StateField(psi, 0.0)


def _check_tail(grid, psi, eps):
    ends = (grid.cell == 0) | (grid.cell >= grid.spec.n_cells - 1)
    edge_nodes = np.abs(psi[ends]).max() if ends.any() else 0.0
    if edge_nodes > 1e-12 * eps:
        raise InsufficientCellsError(
            f"pulse tail {edge_nodes:.3e} at the grid ends exceeds 1e-12*eps; use more cells"
        )


# --------------------------------------------------------------------------
# reversibility


@dataclass(frozen=True)
class ReversibilityReport:
    x0: float
    im_value: float
    re_derivative: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.im_value <= self.tol and self.re_derivative <= self.tol


def _axial_chain(grid):
    """Nodes on the axis (segments and their end vertices), sorted by ``x``."""
    # the upper rail stands in for the axis on a ladder
    on_axis = grid.side == (1 if grid.spec.topology == "ladder" else 0)
    idx = np.nonzero(on_axis)[0]
    return idx[np.argsort(grid.x[idx], kind="stable")]


def reversibility_check(field, grid: GraphGrid, x0: float, tol: float = 1e-8
                        ) -> ReversibilityReport:
    """``|Im psi(x0)|`` and ``|Re d psi/dx (x0)|`` along the axis."""
    psi = field.values if isinstance(field, StateField) else np.asarray(field)
    chain = _axial_chain(grid)
    xs = grid.x[chain]
    k = int(np.searchsorted(xs, x0))
    if k < len(xs) and abs(xs[k] - x0) <= 1e-12 * max(1.0, abs(x0)):
        i = chain[k]
        value = psi[i]
        a, b = chain[k - 1], chain[k + 1]
        deriv = (psi[b] - psi[a]) / (grid.x[b] - grid.x[a])
    else:
        if k == 0 or k == len(xs):
            raise InvalidSpecError(f"x0={x0} lies outside the grid axis")
        a, b = chain[k - 1], chain[k]
        t = (x0 - grid.x[a]) / (grid.x[b] - grid.x[a])
        value = (1.0 - t) * psi[a] + t * psi[b]
        deriv = (psi[b] - psi[a]) / (grid.x[b] - grid.x[a])
    return ReversibilityReport(float(x0), abs(float(np.imag(value))),
                               abs(float(np.real(deriv))), tol)


# --------------------------------------------------------------------------
# exact solitons


@dataclass(frozen=True)
class HomogeneousSoliton:
    """``phi(xi) = exp(i c xi / 2) eta sech(eta xi)`` with ``eta = sqrt(sigma - c**2/4)``."""

    sigma: float
    c: float

    @property
    def eta(self) -> float:
        return math.sqrt(self.sigma - 0.25 * self.c ** 2)

    @property
    def amplitude(self) -> float:
        return self.eta

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(0.5j * self.c * xi) * self.eta / np.cosh(self.eta * xi)

    def derivatives(self, xi):
        """``phi, phi', phi''`` in closed form."""
        xi = np.asarray(xi, dtype=float)
        e, c = self.eta, self.c
        s = 1.0 / np.cosh(e * xi)
        th = np.tanh(e * xi)
        u = e * s
        u1 = -e * e * s * th
        u2 = e ** 3 * (s - 2.0 * s ** 3)
        ph = np.exp(0.5j * c * xi)
        phi = ph * u
        d1 = ph * (u1 + 0.5j * c * u)
        d2 = ph * (u2 + 1j * c * u1 - 0.25 * c * c * u)
        return phi, d1, d2

    def residual(self, xi):
        """Traveling-wave profile equation ``phi'' - i c phi' - sigma phi + 2|phi|^2 phi``."""
        phi, d1, d2 = self.derivatives(xi)
        return d2 - 1j * self.c * d1 - self.sigma * phi + 2.0 * np.abs(phi) ** 2 * phi

    def field(self, x, t=0.0, x_center=0.0):
        """``psi(t, x) = phi(x - x_center - c t) exp(i sigma t)``."""
        return self(np.asarray(x) - x_center - self.c * t) * np.exp(1j * self.sigma * t)


def homogeneous_soliton(sigma: float, c: float) -> HomogeneousSoliton:
    if not sigma > 0.25 * c * c:
        raise NoSolitonError(f"need sigma > c^2/4, got sigma={sigma}, c={c}")
    return HomogeneousSoliton(float(sigma), float(c))


def ladder_soliton(sigma: float, c: float, grid: GraphGrid, t: float = 0.0,
                   x_center: float | None = None) -> StateField:
    """The scalar soliton copied onto both rails; each rung holds its vertex value.

    Rung nodes carry the axial coordinate of their rung, so evaluating the
    profile at ``grid.x`` gives the two copies on the rails and the constant
    rung values in one go.
    """
    if grid.spec.topology != "ladder":
        raise InvalidSpecError("ladder_soliton needs a ladder grid")
    sol = homogeneous_soliton(sigma, c)
    if x_center is None:
        x_center = 0.5 * grid.spec.n_cells * grid.spec.Ls
    return StateField(sol.field(grid.x, t, x_center), float(t))
