"""Finite-difference discretization of H = -nu*Lap + i*k*(v - lambda).

Cell-centered tensor grids with mirrored ghost cells for Neumann walls,
odd-reflection ghosts for Dirichlet walls, and wraparound for periodic
directions.  The cell-centered choice keeps the summation-by-parts pair
exact: Re<Hg, g> = nu*<Kg, g> holds to round-off for every assembled
operator, which the resolvent and energy modules rely on.

All inner products are weighted by the cell volume h^d, so with a
uniform grid the weighted operator norms coincide with the Euclidean
ones and SVD-based quantities need no mass-matrix plumbing.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError
from .profiles import VelocityProfile

DEFAULT_N_1D = 512
DEFAULT_N_2D = 128

_KINDS = ("interval", "torus1d", "torus2d", "rectangle")
_BCS = ("neumann", "dirichlet", "periodic")


@dataclass(frozen=True)
class GridDomain:
    """Discretized cross section: kind, per-axis extents and point counts."""

    kind: str
    lengths: Tuple[float, ...]
    n: Tuple[int, ...]
    bc: str
    origin: Tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown domain kind {self.kind!r}")
        if self.bc not in _BCS:
            raise ValidationError(f"unknown boundary condition {self.bc!r}")
        periodic_kind = self.kind in ("torus1d", "torus2d")
        if periodic_kind != (self.bc == "periodic"):
            raise ValidationError("periodic bc exactly on torus kinds")
        if any(ni <= 0 for ni in self.n) or any(L <= 0 for L in self.lengths):
            raise ValidationError("grid needs positive extents and point counts")
        if len(self.lengths) != len(self.n) or len(self.n) != len(self.origin):
            raise ValidationError("per-axis tuples must have equal length")

    @property
    def dim(self):
        return len(self.n)

    @property
    def h(self):
        return tuple(L / ni for L, ni in zip(self.lengths, self.n))

    @property
    def size(self):
        return int(np.prod(self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    def axis_nodes(self, axis):
        h = self.h[axis]
        return self.origin[axis] + h * (np.arange(self.n[axis]) + 0.5)

    @property
    def nodes(self):
        """Cell centers: shape (N,) in 1-D, (N, 2) in 2-D (C-order)."""
        if self.dim == 1:
            return self.axis_nodes(0)
        x0, x1 = np.meshgrid(self.axis_nodes(0), self.axis_nodes(1), indexing="ij")
        return np.column_stack([x0.ravel(), x1.ravel()])


def make_interval(n=DEFAULT_N_1D, length=1.0, bc="neumann", origin=0.0):
    return GridDomain("interval", (float(length),), (int(n),), bc, (float(origin),))


def make_torus1d(n=DEFAULT_N_1D, length=1.0, origin=0.0):
    return GridDomain("torus1d", (float(length),), (int(n),), "periodic", (float(origin),))


def make_torus2d(n=DEFAULT_N_2D, lengths=(1.0, 1.0), origin=(0.0, 0.0)):
    n = (n, n) if np.isscalar(n) else tuple(n)
    return GridDomain("torus2d", tuple(map(float, lengths)),
                      tuple(map(int, n)), "periodic", tuple(map(float, origin)))


def make_rectangle(n=DEFAULT_N_2D, lengths=(1.0, 1.0), bc="neumann",
                   origin=(0.0, 0.0)):
    n = (n, n) if np.isscalar(n) else tuple(n)
    return GridDomain("rectangle", tuple(map(float, lengths)),
                      tuple(map(int, n)), bc, tuple(map(float, origin)))


def domain_for_profile(profile: VelocityProfile, n=None, bc=None):
    """Default grid matching a catalog profile's natural domain."""
    hint = profile.domain_hint
    if hint == "interval":
        return make_interval(n or DEFAULT_N_1D, bc=bc or "neumann")
    if hint == "torus2d":
        return make_torus2d(n or DEFAULT_N_2D)
    if hint == "rectangle":
        return make_rectangle(n or DEFAULT_N_2D, lengths=(2.0, 2.0),
                              bc=bc or "neumann", origin=(-1.0, -1.0))
    raise ValidationError(
        f"profile {profile.name!r} has no operator domain ({hint} is "
        "geometry-only)"
    )


def _stiffness_1d(n, h, bc):
    """Second-order 3-point -Lap on a cell-centered line, 1/h^2 scaled."""
    main = np.full(n, 2.0)
    off = np.full(n - 1, -1.0)
    K = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    if bc == "periodic":
        K[0, n - 1] = -1.0
        K[n - 1, 0] = -1.0
    elif bc == "neumann":
        # mirrored ghost: u[-1] = u[0]
        K[0, 0] = 1.0
        K[n - 1, n - 1] = 1.0
    elif bc == "dirichlet":
        # odd-reflection ghost u[-1] = -u[0] pins u = 0 at the wall face
        K[0, 0] = 3.0
        K[n - 1, n - 1] = 3.0
    return (K.tocsr() / h ** 2)


def mass_stiffness(domain: GridDomain):
    """Diagonal h^d mass matrix and the (nu-free) stiffness -Lap_h."""
    vol = domain.cell_volume
    M = sp.identity(domain.size, format="csr") * vol
    if domain.dim == 1:
        K = _stiffness_1d(domain.n[0], domain.h[0], domain.bc)
    else:
        K0 = _stiffness_1d(domain.n[0], domain.h[0], domain.bc)
        K1 = _stiffness_1d(domain.n[1], domain.h[1], domain.bc)
        I0 = sp.identity(domain.n[0], format="csr")
        I1 = sp.identity(domain.n[1], format="csr")
        K = sp.kron(K0, I1, format="csr") + sp.kron(I0, K1, format="csr")
    return M, K


@dataclass(frozen=True)
class OperatorMatrix:
    """Assembled sparse H_{nu,k,lambda} together with its parameters."""

    matrix: sp.csr_matrix
    nu: float
    k: float
    lam: float
    domain: GridDomain
    profile: VelocityProfile


@dataclass(frozen=True)
class ScalarField:
    values: np.ndarray
    domain: GridDomain

    def __post_init__(self):
        if len(self.values) != self.domain.size:
            raise ValidationError("field length does not match its domain")


def assemble(domain: GridDomain, profile: VelocityProfile, nu, k, lam=0.0):
    """Assemble H = nu*K + i*k*diag(v - lambda) on the given grid."""
    if nu <= 0:
        raise ValidationError("nu must be positive")
    if profile.dim != domain.dim:
        raise ValidationError(
            f"profile {profile.name!r} is {profile.dim}-D but the domain "
            f"is {domain.dim}-D"
        )
    _, K = mass_stiffness(domain)
    v = np.asarray(profile.eval(domain.nodes), dtype=float)
    H = (nu * K).astype(complex) + sp.diags(1j * k * (v - lam)).tocsr()
    return OperatorMatrix(H.tocsr(), float(nu), float(k), float(lam),
                          domain, profile)


def shift_lambda(op: OperatorMatrix, lam):
    """Same operator at a different level: H' = H - i*k*(lam - lam0)."""
    delta = lam - op.lam
    H = op.matrix - sp.identity(op.domain.size, format="csr") * (1j * op.k * delta)
    return OperatorMatrix(H.tocsr(), op.nu, op.k, float(lam), op.domain,
                          op.profile)


def apply(op: OperatorMatrix, g: ScalarField) -> ScalarField:
    if g.domain is not op.domain and g.domain != op.domain:
        raise ValidationError("field and operator live on different domains")
    return ScalarField(op.matrix @ g.values, op.domain)


# ---------------------------------------------------------------------------
# weighted inner products and discrete calculus helpers


def inner(domain: GridDomain, u, v) -> complex:
    """h^d-weighted scalar product <u, v> = sum conj(u) v * h^d."""
    return complex(np.vdot(u, v) * domain.cell_volume)


def norm(domain: GridDomain, u) -> float:
    return float(np.linalg.norm(u) * np.sqrt(domain.cell_volume))


def _pad_axis(arr, axis, bc):
    """Ghost layer on both ends of one axis according to the bc."""
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    lo[axis] = slice(0, 1)
    hi[axis] = slice(-1, None)
    first, last = arr[tuple(lo)], arr[tuple(hi)]
    if bc == "periodic":
        left, right = arr[tuple(hi)], arr[tuple(lo)]
    elif bc == "neumann":
        left, right = first, last
    else:  # dirichlet, odd reflection about the wall face
        left, right = -first, -last
    return np.concatenate([left, arr, right], axis=axis)


def grad(domain: GridDomain, u):
    """Centered-difference gradient, shape (N,) in 1-D or (N, 2) in 2-D."""
    shaped = np.asarray(u).reshape(domain.n)
    comps = []
    for axis in range(domain.dim):
        padded = _pad_axis(shaped, axis, domain.bc)
        fw = [slice(None)] * domain.dim
        bw = [slice(None)] * domain.dim
        fw[axis] = slice(2, None)
        bw[axis] = slice(0, -2)
        d = (padded[tuple(fw)] - padded[tuple(bw)]) / (2.0 * domain.h[axis])
        comps.append(d.ravel())
    if domain.dim == 1:
        return comps[0]
    return np.column_stack(comps)


def grad_norm(domain: GridDomain, u) -> float:
    g = grad(domain, u)
    if domain.dim == 1:
        return norm(domain, g)
    return float(np.sqrt(sum(norm(domain, g[:, a]) ** 2
                             for a in range(domain.dim))))
