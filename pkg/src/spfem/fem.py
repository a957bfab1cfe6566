"""P1 Lagrange machinery: fields, matrix/vector assembly, error norms.

Dirichlet conditions are handled by eliminating boundary vertices, so
all assembled operators act on interior degrees of freedom unless
``interior_only=False`` is requested.  Assembly is vectorized over
elements and single-pass, which makes it bit-reproducible for a fixed
mesh.
"""

import numpy as np
import scipy.sparse as sp

from .linsolve import SparseSymMatrix
from .quadrature import tet_rule


class ScalarFunction:
    """Analytic scalar field on the cube, vectorized over (..., 3) arrays.

    ``grad``, when given, maps (..., 3) points to (..., 3) gradients and
    is required only by H1-seminorm error evaluation.
    """

    def __init__(self, fn, grad=None, name=None):
        self._fn = fn
        self.grad = grad
        self.name = name or getattr(fn, "__name__", "scalar")

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        return np.asarray(self._fn(points), dtype=float)

    @classmethod
    def constant(cls, c):
        c = float(c)
        return cls(lambda p: np.full(p.shape[:-1], c),
                   grad=lambda p: np.zeros(p.shape),
                   name=f"const({c})")


ZERO = ScalarFunction.constant(0.0)


class FeField:
    """Piecewise-linear field given by one coefficient per mesh vertex."""

    def __init__(self, mesh, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (mesh.n_vertices,):
            raise ValueError("coefficient count must equal vertex count")
        self.mesh = mesh
        self.coeffs = coeffs

    @classmethod
    def zero(cls, mesh):
        return cls(mesh, np.zeros(mesh.n_vertices))

    @classmethod
    def from_interior(cls, mesh, vec):
        coeffs = np.zeros(mesh.n_vertices)
        coeffs[mesh.interior_vertices] = vec
        return cls(mesh, coeffs)

    @classmethod
    def interpolate(cls, mesh, f, dirichlet=False):
        coeffs = np.asarray(f(mesh.vertices), dtype=float).copy()
        if dirichlet:
            coeffs[mesh.boundary_mask] = 0.0
        return cls(mesh, coeffs)

    def interior(self):
        return self.coeffs[self.mesh.interior_vertices]

    def element_values(self, mesh, rule):
        if mesh is not self.mesh:
            raise ValueError("field evaluated on a foreign mesh")
        local = self.coeffs[mesh.tets]                 # (nt, 4)
        return local @ rule.points.T                   # (nt, nq)

    def element_gradients(self, mesh, rule):
        if mesh is not self.mesh:
            raise ValueError("field evaluated on a foreign mesh")
        local = self.coeffs[mesh.tets]
        g = np.einsum("na,nad->nd", local, mesh.grads)  # constant per element
        return np.broadcast_to(g[:, None, :],
                               (mesh.n_tets, len(rule.points), 3))

    def __add__(self, other):
        return FeField(self.mesh, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return FeField(self.mesh, self.coeffs - other.coeffs)

    def __rmul__(self, scalar):
        return FeField(self.mesh, float(scalar) * self.coeffs)


class LinearCombination:
    """Weighted sum of field-like terms, evaluable per quadrature point."""

    def __init__(self, terms):
        self.terms = [(float(c), f) for c, f in terms]

    def element_values(self, mesh, rule):
        out = 0.0
        for c, f in self.terms:
            out = out + c * values_on_elements(f, mesh, rule)
        return out

    def element_gradients(self, mesh, rule):
        out = 0.0
        for c, f in self.terms:
            out = out + c * gradients_on_elements(f, mesh, rule)
        return out


class CachedQuadValues:
    """Freeze a field's quadrature-point values per (mesh, rule degree).

    Useful for static fields (doping profiles, exact-solution series)
    that are re-evaluated at every iteration of an outer loop.
    """

    def __init__(self, field):
        self.field = field
        self._cache = {}

    def element_values(self, mesh, rule):
        key = (id(mesh), rule.degree)
        vals = self._cache.get(key)
        if vals is None:
            vals = values_on_elements(self.field, mesh, rule)
            self._cache[key] = vals
        return vals

    def element_gradients(self, mesh, rule):
        return gradients_on_elements(self.field, mesh, rule)


def values_on_elements(obj, mesh, rule):
    """(nt, nq) values of a field-like object at all quadrature points."""
    if hasattr(obj, "element_values"):
        return obj.element_values(mesh, rule)
    if callable(obj):
        return obj(mesh.physical_points(rule))
    raise TypeError(f"cannot evaluate {type(obj).__name__} on elements")


def gradients_on_elements(obj, mesh, rule):
    """(nt, nq, 3) gradients of a field-like object at quadrature points."""
    if hasattr(obj, "element_gradients"):
        return obj.element_gradients(mesh, rule)
    grad = getattr(obj, "grad", None)
    if grad is not None:
        return np.asarray(grad(mesh.physical_points(rule)), dtype=float)
    raise TypeError(f"no gradient available for {type(obj).__name__}")


def _restrict(csr, mesh, interior_only):
    if not interior_only:
        return SparseSymMatrix(csr)
    ids = mesh.interior_vertices
    return SparseSymMatrix(csr[np.ix_(ids, ids)].tocsr())


def _scatter(mesh, element_mats):
    nv = mesh.n_vertices
    rows = np.repeat(mesh.tets[:, :, None], 4, axis=2)
    cols = np.repeat(mesh.tets[:, None, :], 4, axis=1)
    coo = sp.coo_matrix(
        (element_mats.ravel(), (rows.ravel(), cols.ravel())), shape=(nv, nv))
    return coo.tocsr()


def assemble_stiffness(mesh, interior_only=True):
    """Dirichlet Laplacian stiffness matrix (gradient-gradient form)."""
    local = np.einsum("nad,nbd->nab", mesh.grads, mesh.grads)
    local *= mesh.volumes[:, None, None]
    return _restrict(_scatter(mesh, local), mesh, interior_only)


def assemble_mass(mesh, interior_only=True):
    """L2 mass matrix from the exact P1 element integrals |K|/20*(1+I)."""
    base = (np.ones((4, 4)) + np.eye(4)) / 20.0
    local = mesh.volumes[:, None, None] * base[None, :, :]
    return _restrict(_scatter(mesh, local), mesh, interior_only)


def assemble_weighted_mass(mesh, w, rule=None, interior_only=True):
    """Matrix of (w u, v) with w evaluated at quadrature points."""
    rule = rule or tet_rule(2)
    if rule.degree < 2:
        raise ValueError("weighted mass needs quadrature degree >= 2")
    wvals = values_on_elements(w, mesh, rule)          # (nt, nq)
    local = np.einsum("q,nq,qa,qb->nab", rule.weights, wvals,
                      rule.points, rule.points)
    local *= mesh.volumes[:, None, None]
    return _restrict(_scatter(mesh, local), mesh, interior_only)


def assemble_load(mesh, g, rule=None):
    """Interior load vector with entries int(g * basis_i)."""
    rule = rule or tet_rule(2)
    if rule.degree < 2:
        raise ValueError("load assembly needs quadrature degree >= 2")
    gvals = values_on_elements(g, mesh, rule)
    local = np.einsum("q,nq,qa->na", rule.weights, gvals, rule.points)
    local *= mesh.volumes[:, None]
    full = np.zeros(mesh.n_vertices)
    np.add.at(full, mesh.tets.ravel(), local.ravel())
    return full[mesh.interior_vertices]


def l2_norm_error(mesh, fh, f, rule=None):
    """L2 norm of (fh - f) by elementwise quadrature."""
    rule = rule or tet_rule(5)
    diff = values_on_elements(fh, mesh, rule) - values_on_elements(f, mesh, rule)
    per_elem = (diff * diff) @ rule.weights
    return float(np.sqrt(max(per_elem @ mesh.volumes, 0.0)))


def h1_semi_error(mesh, fh, f, rule=None):
    """H1 seminorm of (fh - f) by elementwise quadrature."""
    rule = rule or tet_rule(5)
    diff = gradients_on_elements(fh, mesh, rule) - gradients_on_elements(f, mesh, rule)
    per_elem = np.einsum("nqd,nqd,q->n", diff, diff, rule.weights)
    return float(np.sqrt(max(per_elem @ mesh.volumes, 0.0)))


def h1_error(mesh, fh, f, rule=None):
    """Full H1 norm of (fh - f)."""
    rule = rule or tet_rule(5)
    l2 = l2_norm_error(mesh, fh, f, rule)
    semi = h1_semi_error(mesh, fh, f, rule)
    return float(np.hypot(l2, semi))
