"""Structured tetrahedral meshes of the unit cube.

Each grid cell is split into six tetrahedra sharing the cell's main
diagonal (Kuhn/Freudenthal subdivision), which keeps every element an
affine copy of one of six congruent reference simplices.  Vertices are
ordered lexicographically with z varying fastest, and homogeneous
Dirichlet boundary conditions are encoded by flagging every vertex that
lies on the cube surface.
"""

import itertools

import numpy as np


class Mesh:
    """Immutable tetrahedral mesh of (0,1)^3 with m cells per axis.

    Attributes
    ----------
    m : int
        Cells per axis.
    vertices : (nv, 3) float array
    tets : (nt, 4) int array
        Vertex indices, positively oriented.
    boundary_mask : (nv,) bool array
        True for vertices on the cube surface.
    interior_index : (nv,) int array
        Interior dof id per vertex, -1 on the boundary.
    interior_vertices : (n_interior,) int array
        Vertex ids of the interior dofs, ascending.
    volumes : (nt,) float array
    grads : (nt, 4, 3) float array
        Constant gradients of the four P1 basis functions per element.
    """

    def __init__(self, m, vertices, tets, boundary_mask):
        self.m = m
        self.vertices = vertices
        self.tets = tets
        self.boundary_mask = boundary_mask
        self.interior_index = np.full(len(vertices), -1, dtype=int)
        self.interior_vertices = np.flatnonzero(~boundary_mask)
        self.interior_index[self.interior_vertices] = np.arange(
            len(self.interior_vertices))
        self.volumes, self.grads = _geometry(vertices, tets)
        self._point_cache = {}

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_tets(self):
        return len(self.tets)

    @property
    def n_interior(self):
        return len(self.interior_vertices)

    def physical_points(self, rule):
        """Physical coordinates of the rule's points on every element,
        shape (nt, nq, 3).  Cached per rule degree."""
        pts = self._point_cache.get(rule.degree)
        if pts is None:
            coords = self.vertices[self.tets]          # (nt, 4, 3)
            pts = np.einsum("qa,nad->nqd", rule.points, coords)
            self._point_cache[rule.degree] = pts
        return pts


def _geometry(vertices, tets):
    coords = vertices[tets]                            # (nt, 4, 3)
    edges = coords[:, 1:, :] - coords[:, :1, :]        # (nt, 3, 3)
    vols = np.linalg.det(edges) / 6.0
    inv = np.linalg.inv(edges)                         # (nt, 3, 3), rows ~ dual basis
    # gradients of barycentric functions 1..3 are the columns of inv,
    # and the zeroth is minus their sum
    g123 = np.transpose(inv, (0, 2, 1))                # (nt, 3, 3)
    g0 = -g123.sum(axis=1, keepdims=True)
    grads = np.concatenate([g0, g123], axis=1)         # (nt, 4, 3)
    return vols, grads


_KUHN_PERMS = list(itertools.permutations(range(3)))


def build_structured_mesh(m):
    """Kuhn-subdivided structured mesh with m cells per axis."""
    if m < 1:
        raise ValueError(f"cells per axis must be >= 1, got {m}")
    n1 = m + 1
    idx = np.arange(n1)
    gx, gy, gz = np.meshgrid(idx, idx, idx, indexing="ij")
    vertices = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()]) / m

    def vid(ix, iy, iz):
        return (ix * n1 + iy) * n1 + iz

    on_boundary = (gx == 0) | (gx == m) | (gy == 0) | (gy == m) \
        | (gz == 0) | (gz == m)
    boundary_mask = on_boundary.ravel()

    tets = []
    for ix in range(m):
        for iy in range(m):
            for iz in range(m):
                base = np.array([ix, iy, iz])
                for perm in _KUHN_PERMS:
                    corner = base.copy()
                    path = [vid(*corner)]
                    for axis in perm:
                        corner[axis] += 1
                        path.append(vid(*corner))
                    tets.append(path)
    tets = np.asarray(tets, dtype=int)

    # enforce positive orientation (odd permutations give negative volume)
    coords = vertices[tets]
    signed = np.linalg.det(coords[:, 1:, :] - coords[:, :1, :])
    flip = signed < 0
    flipped = tets[flip]
    flipped[:, [2, 3]] = flipped[:, [3, 2]]
    tets[flip] = flipped

    return Mesh(m, vertices, tets, boundary_mask)


def mesh_size(mesh):
    """Largest element diameter (max pairwise vertex distance)."""
    coords = mesh.vertices[mesh.tets]
    h = 0.0
    for a, b in itertools.combinations(range(4), 2):
        d = np.linalg.norm(coords[:, a, :] - coords[:, b, :], axis=1)
        h = max(h, d.max())
    return float(h)


def write_mesh(mesh, path):
    """Plain-text dump: header, vertex lines, tet lines (0-based ids)."""
    with open(path, "w") as f:
        f.write(f"m {mesh.m} nv {mesh.n_vertices} nt {mesh.n_tets}\n")
        for x, y, z in mesh.vertices:
            f.write(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n")
        for t in mesh.tets:
            f.write(f"t {t[0]} {t[1]} {t[2]} {t[3]}\n")
