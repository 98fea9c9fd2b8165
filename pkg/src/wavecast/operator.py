"""Discrete wave operator on the stretched grid.

The second-order form is u_tt = A u - q(t) b with

    (A u)_ij = (1/c_ij) * five-point staggered Laplacian,

c the squared-slowness coefficient (relative permittivity), sampled on
primary nodes.  A is complex non-Hermitian in the stretched region but
complex symmetric under the weight

    M = diag(dual_step_x * dual_step_y * c),

i.e. M A = (M A)^T exactly up to roundoff; the short recurrence of the
field evaluator relies on this.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import InvalidParameterError, ValidationError


@dataclass(frozen=True)
class MediumMap:
    """Coefficient c >= some positive floor on the unknown nodes.

    c must equal 1 everywhere except strictly inside (-1, 1)^2: the
    stretched region is derived for a homogeneous exterior, so a
    contrast touching the boundary breaks absorption.
    """

    values: np.ndarray

    @staticmethod
    def uniform(grid, c=1.0):
        if c <= 0.0:
            raise InvalidParameterError(f"coefficient must be positive, got {c}")
        return MediumMap(values=np.full(grid.shape, float(c)))

    @staticmethod
    def from_function(grid, fn):
        """Sample fn(x, y) on strictly interior nodes; 1 elsewhere."""
        mask = grid.interior_mask
        vals = np.ones(grid.shape)
        xs = grid.axis_x.unknown_coords.real
        ys = grid.axis_y.unknown_coords.real
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        sampled = np.asarray(fn(gx, gy), dtype=float)
        if sampled.shape != grid.shape:
            raise InvalidParameterError(
                "medium function must broadcast to the grid shape"
            )
        vals[mask] = sampled[mask]
        return MediumMap(values=vals)

    def validate(self, grid):
        if self.values.shape != grid.shape:
            raise InvalidParameterError("medium shape does not match grid")
        if not np.all(self.values > 0.0):
            raise InvalidParameterError("medium coefficient must be positive")
        off = ~grid.interior_mask
        if not np.all(self.values[off] == 1.0):
            raise ValidationError(
                "medium must be homogeneous (c = 1) outside the strict "
                "interior; contrasts may not touch the absorbing region"
            )


@dataclass(frozen=True)
class WaveOperator:
    """Assembled sparse operator with its symmetrizing weight."""

    grid: object
    medium: MediumMap
    a_mat: scipy.sparse.csr_matrix
    m_diag: np.ndarray

    @property
    def n(self):
        return self.a_mat.shape[0]

    def matvec(self, v):
        return self.a_mat @ v

    def weighted(self):
        """M A as a sparse matrix (complex symmetric)."""
        return scipy.sparse.diags(self.m_diag) @ self.a_mat

    def symmetry_defect(self):
        """max |(M A) - (M A)^T| over all entries."""
        s = self.weighted()
        d = s - s.T
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())

    def scale(self):
        s = self.weighted()
        return float(np.abs(s.data).max())

    def sample_source(self, x, y, amplitude=1.0):
        """Point source: discrete delta at the nearest interior node.

        Returns (b, flat_index); b integrates to `amplitude` against
        the dual cell areas.
        """
        ix, iy, _, _ = self.grid.nearest_interior_node(x, y)
        area = (
            self.grid.axis_x.steps_dual[ix] * self.grid.axis_y.steps_dual[iy]
        )
        b = np.zeros(self.n)
        b[self.grid.node_index(ix, iy)] = amplitude / area.real
        return b, self.grid.node_index(ix, iy)

    def probe_index(self, x, y):
        ix, iy, _, _ = self.grid.nearest_interior_node(x, y)
        return self.grid.node_index(ix, iy)

    def dump(self, path):
        """Write the operator in coordinate format plus the weight."""
        coo = self.a_mat.tocoo()
        np.savez(
            path,
            row=coo.row,
            col=coo.col,
            data=coo.data,
            m_diag=self.m_diag,
            shape=np.array(self.grid.shape),
        )


def assemble_operator(grid, medium=None):
    """Build A and M for a grid and medium (uniform c = 1 by default)."""
    if medium is None:
        medium = MediumMap.uniform(grid)
    medium.validate(grid)
    ax, ay = grid.axis_x, grid.axis_y
    wx, wy = grid.shape
    c = medium.values

    # per-unknown step views: wm/wp the primary steps left/right of the
    # node, dw the dual step at the node
    wxm = ax.steps_primary[:wx]
    wxp = ax.steps_primary[1 : wx + 1]
    dwx = ax.steps_dual
    wym = ay.steps_primary[:wy]
    wyp = ay.steps_primary[1 : wy + 1]
    dwy = ay.steps_dual

    cxm = 1.0 / (dwx * wxm)
    cxp = 1.0 / (dwx * wxp)
    cym = 1.0 / (dwy * wym)
    cyp = 1.0 / (dwy * wyp)

    inv_c = 1.0 / c
    center = -(cxm + cxp)[:, None] - (cym + cyp)[None, :]
    center = center * inv_c
    east = np.broadcast_to(cxp[:, None], (wx, wy)) * inv_c
    west = np.broadcast_to(cxm[:, None], (wx, wy)) * inv_c
    north = np.broadcast_to(cyp[None, :], (wx, wy)) * inv_c
    south = np.broadcast_to(cym[None, :], (wx, wy)) * inv_c

    north = north.copy()
    south = south.copy()
    north[:, -1] = 0.0  # Dirichlet neighbours drop out
    south[:, 0] = 0.0

    n = wx * wy
    a_mat = scipy.sparse.diags(
        [
            center.ravel(),
            east[:-1, :].ravel(),
            west[1:, :].ravel(),
            north.ravel()[:-1],
            south.ravel()[1:],
        ],
        [0, wy, -wy, 1, -1],
        shape=(n, n),
        format="csr",
        dtype=complex,
    )
    m_diag = (dwx[:, None] * dwy[None, :] * c).ravel().astype(complex)
    return WaveOperator(grid=grid, medium=medium, a_mat=a_mat, m_diag=m_diag)
