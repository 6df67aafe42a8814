"""Finite-difference grids on periodic metric graphs.

Two topologies are supported:

* ``necklace`` -- a chain of cells, each made of a straight segment of
  length ``L1`` followed by a pair of semicircles of length ``L2`` that
  share both endpoints.  With ``L2 == 0`` the graph degenerates to a line.
* ``ladder`` -- two rails of ``n_cells`` sections of length ``Ls`` joined
  by ``n_cells + 1`` rungs of length ``Lr``.

Every vertex is a single grid node shared by all incident edges, so
continuity holds by construction.  The Laplacian uses the lumped
(trapezoidal) mass, which makes it self-adjoint in the weighted inner
product and turns the Kirchhoff flux balance into the vertex row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidSpecError

TOPOLOGIES = ("necklace", "ladder")
BOUNDARIES = ("none", "dirichlet_ends")
MIN_INTERIOR = 5


@dataclass(frozen=True)
class MetricGraphSpec:
    """Geometry and resolution of a finite piece of a periodic graph."""

    topology: str = "necklace"
    L1: float = math.pi
    L2: float = math.pi
    Ls: float = 1.0
    Lr: float = 1.0
    n_cells: int = 1
    pts_per_edge: int = 30
    boundary: str = "none"

    def validate(self) -> "MetricGraphSpec":
        if self.topology not in TOPOLOGIES:
            raise InvalidSpecError(f"unknown topology {self.topology!r}")
        if self.boundary not in BOUNDARIES:
            raise InvalidSpecError(f"unknown boundary {self.boundary!r}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise InvalidSpecError(f"n_cells must be a positive integer, got {self.n_cells}")
        if int(self.pts_per_edge) != self.pts_per_edge or self.pts_per_edge < 1:
            raise InvalidSpecError(
                f"pts_per_edge must be a positive integer, got {self.pts_per_edge}"
            )
        if self.topology == "necklace":
            if not self.L1 > 0:
                raise InvalidSpecError(f"L1 must be positive, got {self.L1}")
            if not self.L2 >= 0:
                raise InvalidSpecError(f"L2 must be non-negative, got {self.L2}")
        else:
            if not (self.Ls > 0 and self.Lr > 0):
                raise InvalidSpecError(f"Ls and Lr must be positive, got {self.Ls}, {self.Lr}")
        return self

    @property
    def period(self) -> float:
        """Axial length of one cell."""
        if self.topology == "necklace":
            return self.L1 + self.L2
        return self.Ls

    @property
    def cell_measure(self) -> float:
        """Total edge length of one cell (both semicircles / one rung counted)."""
        if self.topology == "necklace":
            return self.L1 + 2.0 * self.L2
        return 2.0 * self.Ls + self.Lr


@dataclass(frozen=True)
class Edge:
    kind: str
    cell: int
    nodes: np.ndarray
    length: float

    @property
    def h(self) -> float:
        return self.length / (len(self.nodes) - 1)


@dataclass(frozen=True, eq=False)
class GraphGrid:
    """Discretised graph.

    Attributes
    ----------
    x : ndarray
        Axial coordinate of every node.  Semicircle and rail nodes share
        the axial range of the parallel edge; rung nodes sit at the axial
        position of their rung.
    local : ndarray
        Position inside the node's cell (necklace: ``[0, L1 + L2]``, the
        semicircles occupying ``[L1, L1 + L2]``; ladder rails ``[0, Ls]``,
        rungs ``[-Lr/2, Lr/2]``).
    side : ndarray
        ``+1``/``-1`` on the upper/lower semicircle or rail, ``0`` elsewhere.
    weights : ndarray
        Trapezoidal quadrature weights (units of length).
    """

    spec: MetricGraphSpec
    x: np.ndarray
    local: np.ndarray
    cell: np.ndarray
    side: np.ndarray
    edge_of: np.ndarray
    weights: np.ndarray
    edges: tuple
    vertices: np.ndarray
    dirichlet: np.ndarray
    _degree: np.ndarray = field(repr=False, default=None)

    @property
    def N(self) -> int:
        return len(self.x)

    @property
    def total_length(self) -> float:
        return float(sum(e.length for e in self.edges))

    @property
    def degree(self) -> np.ndarray:
        """Number of incident edges per vertex node (aligned with ``vertices``)."""
        return self._degree[self.vertices]

    def edge_counts(self):
        """Interior node count of each edge."""
        return [len(e.nodes) - 2 for e in self.edges]

    def symmetry_point(self, cell: int = 0, where: str = "segment") -> float:
        """Axial coordinate of a reflection-symmetry point of ``cell``."""
        s = self.spec
        if s.topology == "ladder":
            return (cell + 0.5) * s.Ls
        origin = cell * s.period
        if where == "segment" or s.L2 == 0:
            return origin + 0.5 * s.L1
        return origin + s.L1 + 0.5 * s.L2

    def to_dict(self) -> dict:
        s = self.spec
        if s.topology == "necklace":
            lengths = {"L1": s.L1, "L2": s.L2}
        else:
            lengths = {"Ls": s.Ls, "Lr": s.Lr}
        return {
            "topology": s.topology,
            "lengths": lengths,
            "n_cells": s.n_cells,
            "boundary": s.boundary,
            "edges": [
                {"kind": e.kind, "cell": e.cell, "length": e.length, "nodes": len(e.nodes) - 2}
                for e in self.edges
            ],
            "N": self.N,
        }


def _interior_count(length, mean_length, pts_per_edge):
    return max(int(round(pts_per_edge * length / mean_length)), MIN_INTERIOR)


class _Builder:
    """Accumulates nodes and edges; vertices are created explicitly."""

    def __init__(self):
        self.x, self.local, self.cell, self.side, self.edge_of = [], [], [], [], []
        self.edges = []
        self.vertices = []

    def vertex(self, x, local, cell, side=0):
        idx = len(self.x)
        self.x.append(x)
        self.local.append(local)
        self.cell.append(cell)
        self.side.append(side)
        self.edge_of.append(-1)
        self.vertices.append(idx)
        return idx

    def edge(self, kind, cell, tail, head, length, n_int, x_of, local_of, side=0):
        """Add an edge from vertex ``tail`` to ``head`` with ``n_int`` interior nodes.

        ``x_of`` and ``local_of`` map the fraction ``t in (0, 1)`` along the
        edge to axial and cell-local coordinates.
        """
        eid = len(self.edges)
        t = np.arange(1, n_int + 1) / (n_int + 1)
        start = len(self.x)
        self.x.extend(x_of(t))
        self.local.extend(local_of(t))
        self.cell.extend([cell] * n_int)
        self.side.extend([side] * n_int)
        self.edge_of.extend([eid] * n_int)
        nodes = np.concatenate(([tail], np.arange(start, start + n_int), [head]))
        self.edges.append(Edge(kind, cell, nodes, float(length)))

    def finish(self, spec):
        x = np.asarray(self.x, dtype=float)
        n = len(x)
        weights = np.zeros(n)
        degree = np.zeros(n, dtype=int)
        for e in self.edges:
            h = e.h
            weights[e.nodes[:-1]] += 0.5 * h
            weights[e.nodes[1:]] += 0.5 * h
            degree[e.nodes[0]] += 1
            degree[e.nodes[-1]] += 1
        vertices = np.asarray(self.vertices, dtype=int)
        dirichlet = np.zeros(n, dtype=bool)
        if spec.boundary == "dirichlet_ends":
            if spec.topology == "necklace":
                ends = [vertices[0], vertices[-1]]
            else:
                ends = [vertices[0], vertices[1], vertices[-2], vertices[-1]]
            dirichlet[ends] = True
        return GraphGrid(
            spec=spec,
            x=x,
            local=np.asarray(self.local, dtype=float),
            cell=np.asarray(self.cell, dtype=int),
            side=np.asarray(self.side, dtype=int),
            edge_of=np.asarray(self.edge_of, dtype=int),
            weights=weights,
            edges=tuple(self.edges),
            vertices=vertices,
            dirichlet=dirichlet,
            _degree=degree,
        )


def build_necklace(spec: MetricGraphSpec) -> GraphGrid:
    """Grid of ``spec.n_cells`` necklace cells starting at axial position 0."""
    spec.validate()
    if spec.topology != "necklace":
        raise InvalidSpecError("build_necklace needs topology='necklace'")
    L1, L2, P = spec.L1, spec.L2, spec.period
    homogeneous = L2 == 0
    mean = L1 if homogeneous else (L1 + 2 * L2) / 3.0
    n_seg = _interior_count(L1, mean, spec.pts_per_edge)
    n_semi = 0 if homogeneous else _interior_count(L2, mean, spec.pts_per_edge)

    b = _Builder()
    left = b.vertex(0.0, 0.0, 0)
    for n in range(spec.n_cells):
        o = n * P
        if homogeneous:
            right = b.vertex(o + P, 0.0, n + 1)
            b.edge("line", n, left, right, L1, n_seg,
                   lambda t, o=o: o + t * L1, lambda t: t * L1)
            left = right
            continue
        mid = b.vertex(o + L1, L1, n)
        b.edge("segment", n, left, mid, L1, n_seg,
               lambda t, o=o: o + t * L1, lambda t: t * L1)
        right = b.vertex(o + P, 0.0, n + 1)
        for sgn, kind in ((1, "semi+"), (-1, "semi-")):
            b.edge(kind, n, mid, right, L2, n_semi,
                   lambda t, o=o: o + L1 + t * L2, lambda t: L1 + t * L2, side=sgn)
        left = right
    return b.finish(spec)


def build_ladder(spec: MetricGraphSpec) -> GraphGrid:
    """Ladder with rails along ``[0, n_cells * Ls]`` and a rung at every rail vertex."""
    spec.validate()
    if spec.topology != "ladder":
        raise InvalidSpecError("build_ladder needs topology='ladder'")
    Ls, Lr = spec.Ls, spec.Lr
    mean = (2 * Ls + Lr) / 3.0
    n_rail = _interior_count(Ls, mean, spec.pts_per_edge)
    n_rung = _interior_count(Lr, mean, spec.pts_per_edge)

    b = _Builder()
    top, bot = [], []
    for j in range(spec.n_cells + 1):
        xj = j * Ls
        cj = min(j, spec.n_cells - 1)
        loc = 0.0 if j < spec.n_cells else Ls
        top.append(b.vertex(xj, loc, cj, side=1))
        bot.append(b.vertex(xj, loc, cj, side=-1))
        b.edge("rung", cj, top[j], bot[j], Lr, n_rung,
               lambda t, xj=xj: np.full_like(t, xj),
               lambda t: Lr * (0.5 - t))
        if j > 0:
            o = (j - 1) * Ls
            for sgn, kind, ends in ((1, "rail+", top), (-1, "rail-", bot)):
                b.edge(kind, j - 1, ends[j - 1], ends[j], Ls, n_rail,
                       lambda t, o=o: o + t * Ls, lambda t: t * Ls, side=sgn)
    return b.finish(spec)


def build_grid(spec: MetricGraphSpec) -> GraphGrid:
    if spec.topology == "ladder":
        return build_ladder(spec)
    return build_necklace(spec)


def stiffness_matrix(grid: GraphGrid) -> sp.csr_matrix:
    """Symmetric matrix ``S`` with ``u^H S u = sum_edges |u_{i+1} - u_i|^2 / h``."""
    rows, cols, vals = [], [], []
    for e in grid.edges:
        a, b = e.nodes[:-1], e.nodes[1:]
        w = np.full(len(a), 1.0 / e.h)
        rows += [a, b, a, b]
        cols += [a, b, b, a]
        vals += [w, w, -w, -w]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(grid.N, grid.N))


def assemble_laplacian(grid: GraphGrid, apply_dirichlet: bool = True) -> sp.csr_matrix:
    """Discrete second derivative with Neumann--Kirchhoff vertex coupling.

    Interior rows are the three-point stencil.  At a vertex the row is
    ``sum_e (u_e1 - u_v) / h_e`` divided by the vertex weight
    ``sum_e h_e / 2``, i.e. the Kirchhoff balance after eliminating one ghost
    node per incident edge.  Degree-one ends without Dirichlet flags get a
    Neumann condition.  With ``apply_dirichlet`` the rows of pinned nodes are
    zeroed; the time stepper replaces them with identity rows.
    """
    S = stiffness_matrix(grid)
    L = -sp.diags(1.0 / grid.weights) @ S
    L = sp.csr_matrix(L)
    if apply_dirichlet and grid.dirichlet.any():
        keep = sp.diags((~grid.dirichlet).astype(float))
        L = sp.csr_matrix(keep @ L)
        L.eliminate_zeros()
    return L


def integrate(grid: GraphGrid, field, p: float = 2.0) -> float:
    """Quadrature of ``|field|**p`` over the whole graph."""
    if p < 1:
        raise InvalidSpecError(f"p must be >= 1, got {p}")
    return float(np.dot(grid.weights, np.abs(field) ** p))


def inner(grid: GraphGrid, u, v) -> complex:
    """Weighted inner product ``sum w conj(u) v``."""
    return complex(np.dot(grid.weights, np.conj(u) * v))


@dataclass
class StateField:
    """Complex nodal values of a wave function at time ``t``."""

    values: np.ndarray
    t: float = 0.0

    def per_edge(self, grid: GraphGrid):
        """Nodal values split by edge (endpoints included, so vertices repeat)."""
        return [self.values[e.nodes] for e in grid.edges]

    def to_json_dict(self, grid: GraphGrid) -> dict:
        return {
            "t": float(self.t),
            "edges": [
                {"kind": e.kind, "cell": e.cell,
                 "values": [[float(z.real), float(z.imag)] for z in self.values[e.nodes]]}
                for e in grid.edges
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict, grid: GraphGrid) -> "StateField":
        values = np.zeros(grid.N, dtype=complex)
        for e, rec in zip(grid.edges, data["edges"]):
            arr = np.asarray(rec["values"], dtype=float)
            values[e.nodes] = arr[:, 0] + 1j * arr[:, 1]
        return cls(values, float(data["t"]))
