"""Finite-graph model of the universal connection on the space of lattice connections.

A connection is an algebra-valued field on the oriented edges of a finite
connected graph; based gauge algebra elements are vertex fields vanishing at
the basepoint.  The covariant derivative uses the midpoint-averaged bracket,
its adjoint is the exact matrix transpose with the basepoint row removed, and
the Green's operator is a cached dense Cholesky solve of the based Laplacian.

Algebra values are stored in real coordinates: 1 per point for u(1)
(coefficient of i) and 3 for su(2) (coefficients of i*sigma_j); the invariant
inner product is the Euclidean dot product on these coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, ShapeError, SingularOperatorError
from .lattice import SU2, U1

MAX_VERTICES = 512

ALG_DIM = {U1: 1, SU2: 3}


def alg_bracket(group: str, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Coordinate bracket: zero for u(1); [i a.sigma, i b.sigma] = i(-2 a x b).sigma."""
    if group == U1:
        return np.zeros(np.broadcast(x, y).shape)
    return -2.0 * np.cross(x, y)


@dataclass(frozen=True)
class GraphX:
    """Finite connected oriented graph with a basepoint."""

    n_vertices: int
    edges: tuple  # ((tail, head), ...)
    basepoint: int = 0
    plaquettes: tuple = ()  # ((e_right, e_top, e_left, e_bottom) ids per face, unused on rings)

    def __post_init__(self):
        if self.n_vertices < 3:
            raise ConfigError(f"graph needs >= 3 vertices, got {self.n_vertices}")
        if self.n_vertices > MAX_VERTICES:
            raise ConfigError(f"graph exceeds the dense-solve cap of {MAX_VERTICES} vertices")
        if not 0 <= self.basepoint < self.n_vertices:
            raise ConfigError("basepoint outside vertex range")
        adj = [[] for _ in range(self.n_vertices)]
        for t, h in self.edges:
            adj[t].append(h)
            adj[h].append(t)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != self.n_vertices:
            raise ConfigError("graph is not connected")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @classmethod
    def ring(cls, n: int, basepoint: int = 0) -> "GraphX":
        edges = tuple((i, (i + 1) % n) for i in range(n))
        return cls(n, edges, basepoint)

    @classmethod
    def torus(cls, nx: int, ny: int, basepoint: int = 0) -> "GraphX":
        """Grid graph on a torus; x-edges first, then y-edges."""
        def vid(i, j):
            return (i % nx) * ny + (j % ny)
        edges = []
        for i in range(nx):
            for j in range(ny):
                edges.append((vid(i, j), vid(i + 1, j)))
        for i in range(nx):
            for j in range(ny):
                edges.append((vid(i, j), vid(i, j + 1)))
        ex = lambda i, j: (i % nx) * ny + (j % ny)              # noqa: E731
        ey = lambda i, j: nx * ny + (i % nx) * ny + (j % ny)    # noqa: E731
        plaq = []
        for i in range(nx):
            for j in range(ny):
                plaq.append((ex(i, j), ey(i + 1, j), ex(i, j + 1), ey(i, j)))
        return cls(nx * ny, tuple(edges), basepoint, tuple(plaq))


def parse_graph(spec: str) -> GraphX:
    """Parse 'ring:n' or 'torus:nx:ny'."""
    parts = spec.split(":")
    if parts[0] == "ring" and len(parts) == 2:
        return GraphX.ring(int(parts[1]))
    if parts[0] == "torus" and len(parts) == 3:
        return GraphX.torus(int(parts[1]), int(parts[2]))
    raise ConfigError(f"unknown graph spec {spec!r}")


def _check_vertex(graph: GraphX, group: str, mu: np.ndarray) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (graph.n_vertices, ALG_DIM[group]):
        raise ShapeError(f"vertex field shape {mu.shape}, expected "
                         f"{(graph.n_vertices, ALG_DIM[group])}")
    return mu


def _check_edge(graph: GraphX, group: str, xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (graph.n_edges, ALG_DIM[group]):
        raise ShapeError(f"edge field shape {xi.shape}, expected "
                         f"{(graph.n_edges, ALG_DIM[group])}")
    return xi


def project_based(graph: GraphX, mu: np.ndarray) -> np.ndarray:
    out = np.array(mu, dtype=float)
    out[graph.basepoint] = 0.0
    return out


def cov_deriv(graph: GraphX, group: str, omega: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """(d_w mu)(e) = mu(head) - mu(tail) + [w(e), (mu(head)+mu(tail))/2]."""
    omega = _check_edge(graph, group, omega)
    mu = _check_vertex(graph, group, mu)
    tails = np.array([t for t, _ in graph.edges])
    heads = np.array([h for _, h in graph.edges])
    grad = mu[heads] - mu[tails]
    avg = 0.5 * (mu[heads] + mu[tails])
    return grad + alg_bracket(group, omega, avg)


def _cov_matrix(graph: GraphX, group: str, omega: np.ndarray) -> np.ndarray:
    """Dense matrix of cov_deriv on based coordinates (basepoint column removed)."""
    g = ALG_DIM[group]
    nv, ne = graph.n_vertices, graph.n_edges
    keep = [v for v in range(nv) if v != graph.basepoint]
    D = np.zeros((ne * g, (nv - 1) * g))
    basis = np.zeros((nv, g))
    for col, v in enumerate(keep):
        for c in range(g):
            basis[v, c] = 1.0
            D[:, col * g + c] = cov_deriv(graph, group, omega, basis).ravel()
            basis[v, c] = 0.0
    return D


def adjoint_cov_deriv(graph: GraphX, group: str, omega: np.ndarray,
                      xi: np.ndarray) -> np.ndarray:
    """Exact inner-product adjoint of cov_deriv, projected to based fields."""
    omega = _check_edge(graph, group, omega)
    xi = _check_edge(graph, group, xi)
    tails = np.array([t for t, _ in graph.edges])
    heads = np.array([h for _, h in graph.edges])
    # <d mu, xi> = sum_e <mu_h - mu_t, xi_e> + <(mu_h+mu_t)/2, -[w_e, xi_e]>
    out = np.zeros((graph.n_vertices, ALG_DIM[group]))
    np.add.at(out, heads, xi)
    np.add.at(out, tails, -xi)
    br = -0.5 * alg_bracket(group, omega, xi)
    np.add.at(out, heads, br)
    np.add.at(out, tails, br)
    return project_based(graph, out)


class GreenOperator:
    """Inverse of the based covariant Laplacian, dense Cholesky, cached per omega."""

    def __init__(self, graph: GraphX, group: str, omega: np.ndarray,
                 tolerance: float = 1e-10):
        self.graph = graph
        self.group = group
        self.omega = _check_edge(graph, group, omega)
        self.tolerance = tolerance
        D = _cov_matrix(graph, group, omega)
        L = D.T @ D
        try:
            self._chol = np.linalg.cholesky(L)
        except np.linalg.LinAlgError:
            eigvals, eigvecs = np.linalg.eigh(L)
            raise SingularOperatorError(
                f"based Laplacian not SPD; smallest eigenvalue {eigvals[0]:.3e} "
                f"along {eigvecs[:, 0]}")
        self._L = L
        self._keep = [v for v in range(graph.n_vertices) if v != graph.basepoint]

    def _to_coords(self, mu: np.ndarray) -> np.ndarray:
        return mu[self._keep].ravel()

    def _from_coords(self, x: np.ndarray) -> np.ndarray:
        g = ALG_DIM[self.group]
        out = np.zeros((self.graph.n_vertices, g))
        out[self._keep] = x.reshape(len(self._keep), g)
        return out

    def solve(self, v: np.ndarray) -> np.ndarray:
        """u with (d* d) u = v on based fields; relative residual checked."""
        v = _check_vertex(self.graph, self.group, v)
        rhs = self._to_coords(project_based(self.graph, v))
        y = np.linalg.solve(self._chol, rhs)
        x = np.linalg.solve(self._chol.T, y)
        res = np.linalg.norm(self._L @ x - rhs)
        scale = max(np.linalg.norm(rhs), 1.0)
        if res > self.tolerance * scale:
            raise SingularOperatorError(f"Green solve residual {res:.3e} above tolerance")
        return self._from_coords(x)


def green(graph: GraphX, group: str, omega: np.ndarray, v: np.ndarray) -> np.ndarray:
    return GreenOperator(graph, group, omega).solve(v)


def connection_form(graph: GraphX, group: str, omega: np.ndarray, xi: np.ndarray,
                    gop: GreenOperator | None = None) -> np.ndarray:
    """G_w d_w* xi: the universal connection applied to a tangent edge field."""
    gop = gop or GreenOperator(graph, group, omega)
    return gop.solve(adjoint_cov_deriv(graph, group, omega, xi))


def horizontal_project(graph: GraphX, group: str, omega: np.ndarray, xi: np.ndarray,
                       gop: GreenOperator | None = None) -> np.ndarray:
    """xi - d_w (G_w d_w* xi): orthogonal projection onto ker d_w*."""
    mu = connection_form(graph, group, omega, xi, gop)
    return _check_edge(graph, group, xi) - cov_deriv(graph, group, omega, mu)


def ad_star(graph: GraphX, group: str, xi1: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Adjoint of mu -> [xi1, mu_avg]; closed form -1/2 sum_{e at v} [xi1(e), eta(e)],
    basepoint row zeroed.  Antisymmetric in (xi1, eta)."""
    xi1 = _check_edge(graph, group, xi1)
    eta = _check_edge(graph, group, eta)
    tails = np.array([t for t, _ in graph.edges])
    heads = np.array([h for _, h in graph.edges])
    br = -0.5 * alg_bracket(group, xi1, eta)
    out = np.zeros((graph.n_vertices, ALG_DIM[group]))
    np.add.at(out, heads, br)
    np.add.at(out, tails, br)
    return project_based(graph, out)


def _require_horizontal(graph: GraphX, group: str, omega: np.ndarray, xi: np.ndarray,
                        tol: float = 1e-8) -> None:
    res = np.max(np.abs(adjoint_cov_deriv(graph, group, omega, xi)))
    if res > tol:
        raise DomainError(f"edge field is not horizontal: |d* xi| = {res:.3e} > {tol}")


def universal_curvature_FA(graph: GraphX, group: str, omega: np.ndarray,
                           xi1: np.ndarray, xi2: np.ndarray,
                           gop: GreenOperator | None = None) -> np.ndarray:
    """G_w ad*_{xi1}(xi2) on horizontal edge fields; identically zero for u(1)."""
    _require_horizontal(graph, group, omega, xi1)
    _require_horizontal(graph, group, omega, xi2)
    if group == U1:
        return np.zeros((graph.n_vertices, 1))
    gop = gop or GreenOperator(graph, group, omega)
    return gop.solve(ad_star(graph, group, xi1, xi2))


def run_property_suite(graph: GraphX, group: str, seed: int = 0) -> list:
    """Residuals for the full property battery on seeded random data.

    Returns (name, residual, tolerance, passed) tuples; deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    g = ALG_DIM[group]
    omega = rng.standard_normal((graph.n_edges, g))
    gop = GreenOperator(graph, group, omega)
    mu = project_based(graph, rng.standard_normal((graph.n_vertices, g)))
    xi = rng.standard_normal((graph.n_edges, g))
    eta = rng.standard_normal((graph.n_edges, g))

    results = []

    def check(name, residual, tol):
        residual = float(residual)
        results.append((name, residual, tol, residual <= tol))

    # exact matrix adjoint
    lhs = np.sum(cov_deriv(graph, group, omega, mu) * xi)
    rhs = np.sum(mu * adjoint_cov_deriv(graph, group, omega, xi))
    check("adjoint_identity", abs(lhs - rhs), 1e-12)

    # Green inverse
    v = adjoint_cov_deriv(graph, group, omega, cov_deriv(graph, group, omega, mu))
    check("green_inverse", np.max(np.abs(gop.solve(v) - mu)), 1e-9)

    # connection form reproduces vertical generators
    vert = cov_deriv(graph, group, omega, mu)
    check("vertical_reproduction",
          np.max(np.abs(connection_form(graph, group, omega, vert, gop) - mu)), 1e-9)

    # horizontal projector: image in ker d*, idempotent, norm non-increasing
    ph = horizontal_project(graph, group, omega, xi, gop)
    check("projector_horizontal",
          np.max(np.abs(adjoint_cov_deriv(graph, group, omega, ph))), 1e-10)
    ph2 = horizontal_project(graph, group, omega, ph, gop)
    check("projector_idempotent", np.max(np.abs(ph2 - ph)), 1e-10)
    check("projector_contraction",
          max(np.linalg.norm(ph) - np.linalg.norm(xi), 0.0), 1e-12)

    # ad* antisymmetry and defining pairing
    check("ad_star_antisymmetry",
          np.max(np.abs(ad_star(graph, group, xi, eta) + ad_star(graph, group, eta, xi))),
          1e-12)
    pair_lhs = np.sum(ad_star(graph, group, xi, eta) * mu)
    bracket_term = alg_bracket(group, xi, 0.5 * (mu[[h for _, h in graph.edges]]
                                                 + mu[[t for t, _ in graph.edges]]))
    pair_rhs = np.sum(eta * bracket_term)
    check("ad_star_pairing", abs(pair_lhs - pair_rhs), 1e-12)

    # curvature checks on horizontal fields
    h1 = horizontal_project(graph, group, omega, xi, gop)
    h2 = horizontal_project(graph, group, omega, eta, gop)
    if group == U1:
        fa = universal_curvature_FA(graph, group, omega, h1, h2, gop)
        check("abelian_FA_vanishing", np.max(np.abs(fa)), 0.0)
    else:
        f12 = universal_curvature_FA(graph, group, omega, h1, h2, gop)
        f21 = universal_curvature_FA(graph, group, omega, h2, h1, gop)
        check("FA_antisymmetry", np.max(np.abs(f12 + f21)), 1e-10)

    if group == U1:
        q = FiberPoint(vertex=1 % graph.n_vertices, element=np.exp(0.3j))
    else:
        from .lattice import group_exp, su2_from_coords
        q = FiberPoint(vertex=1 % graph.n_vertices,
                       element=group_exp(SU2, su2_from_coords(np.array([0.2, -0.1, 0.4]))))
    z1 = FiberTangent(edge=0, magnitude=1.0)
    z2 = FiberTangent(edge=1 % graph.n_edges, magnitude=-0.5)
    V1, V2 = (h1, z1), (h2, z2)
    full12 = universal_curvature_full(graph, group, omega, q, V1, V2, gop)
    full21 = universal_curvature_full(graph, group, omega, q, V2, V1, gop)
    check("full_curvature_antisymmetry", np.max(np.abs(full12 + full21)), 1e-10)

    return results


@dataclass
class FiberPoint:
    """Point of the trivialized bundle over the graph: vertex plus group coordinate
    (u(1): unit complex; su(2): 2x2 matrix)."""

    vertex: int
    element: np.ndarray


@dataclass
class FiberTangent:
    """Lattice tangent at a fiber point: an outgoing edge id with a magnitude for
    the base direction, plus a vertical algebra coordinate."""

    edge: int
    magnitude: float = 0.0
    vertical: np.ndarray = None

    def vertical_part(self, group: str) -> np.ndarray:
        if self.vertical is None:
            return np.zeros(ALG_DIM[group])
        return np.asarray(self.vertical, dtype=float)


def _ad_inverse(group: str, element, value: np.ndarray) -> np.ndarray:
    """Ad_{U^{-1}} on algebra coordinates."""
    if group == U1:
        return value
    from .lattice import su2_coords, su2_from_coords
    U = np.asarray(element, dtype=complex)
    X = su2_from_coords(value)
    return su2_coords(np.conj(U.T) @ X @ U)


def pair_edge_with_tangent(graph: GraphX, group: str, xi: np.ndarray,
                           q: FiberPoint, zeta: FiberTangent) -> np.ndarray:
    """The lattice meaning of xi(zeta) at q: the edge value of xi at zeta's edge,
    scaled by zeta's magnitude and conjugated to the fiber point.

    This is the single swappable modeling choice for the mixed curvature term.
    """
    xi = _check_edge(graph, group, xi)
    val = zeta.magnitude * xi[zeta.edge]
    return _ad_inverse(group, q.element, val)


def universal_caloron_connection(graph: GraphX, group: str, omega: np.ndarray,
                                 q: FiberPoint, xi: np.ndarray, zeta: FiberTangent,
                                 gop: GreenOperator | None = None) -> np.ndarray:
    """G_w d_w*(q)(xi) + w_q(zeta): based-field evaluation at the fiber point plus
    the vertical coordinate of zeta (the lattice w-evaluation annihilates the
    horizontal base direction by construction)."""
    mu = connection_form(graph, group, omega, xi, gop)
    first = _ad_inverse(group, q.element, mu[q.vertex])
    return first + zeta.vertical_part(group)


def _omega_plaquette_curvature(graph: GraphX, group: str, omega: np.ndarray,
                               q: FiberPoint, z1: FiberTangent,
                               z2: FiberTangent) -> np.ndarray:
    """F_w(q)(z1, z2) from the plaquette containing the two edge directions;
    identically zero on graphs without faces (rings)."""
    if not graph.plaquettes:
        return np.zeros(ALG_DIM[group])
    for face in graph.plaquettes:
        if z1.edge in face and z2.edge in face:
            break
    else:
        return np.zeros(ALG_DIM[group])
    # forward-difference curl + bracket on the face (x-like edges bottom/top,
    # y-like edges left/right, all oriented positively)
    e_b, e_r, e_t, e_l = face[0], face[1], face[2], face[3]
    curl = (omega[e_r] - omega[e_l]) - (omega[e_t] - omega[e_b])
    curl = curl + alg_bracket(group, omega[e_b], omega[e_l])
    x_like, y_like = (e_b, e_t), (e_l, e_r)
    if z1.edge in x_like and z2.edge in y_like:
        sign = 1.0
    elif z1.edge in y_like and z2.edge in x_like:
        sign = -1.0
    else:
        return np.zeros(ALG_DIM[group])
    val = sign * z1.magnitude * z2.magnitude * curl
    return _ad_inverse(group, q.element, val)


def universal_curvature_full(graph: GraphX, group: str, omega: np.ndarray,
                             q: FiberPoint, V1: tuple, V2: tuple,
                             gop: GreenOperator | None = None) -> np.ndarray:
    """Total universal curvature on a pair of (edge field, fiber tangent) vectors:
    G_w ad*_{xi1}(xi2) at q, plus F_w(q)(z1, z2), plus the mixed term
    (xi1(z2) - xi2(z1) - w([z1, z2])) / 2."""
    xi1, z1 = V1
    xi2, z2 = V2
    _require_horizontal(graph, group, omega, xi1)
    _require_horizontal(graph, group, omega, xi2)
    if group == U1:
        first = np.zeros((graph.n_vertices, 1))
    else:
        gop = gop or GreenOperator(graph, group, omega)
        first = gop.solve(ad_star(graph, group, xi1, xi2))
    term1 = _ad_inverse(group, q.element, first[q.vertex])
    term2 = _omega_plaquette_curvature(graph, group, omega, q, z1, z2)
    # horizontal fiber tangents have zero vertical coordinate, so the bracket of
    # their vertical parts vanishes; kept for non-horizontal diagnostics
    br = alg_bracket(group, z1.vertical_part(group), z2.vertical_part(group))
    term3 = 0.5 * (pair_edge_with_tangent(graph, group, xi1, q, z2)
                   - pair_edge_with_tangent(graph, group, xi2, q, z1)
                   - br)
    return term1 + term2 + term3
