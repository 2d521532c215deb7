"""Ground states of -sigma*Lap + |grad w|^2 and the semiclassical
exponent fit: the smallest eigenvalue scales like sigma^{(m-1)/m} when
the critical points of w have degeneracy index m.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import discretize as dz
from .discretize import GridDomain, domain_for_profile
from .errors import NumericalError, ValidationError
from .profiles import VelocityProfile

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class GroundStateResult:
    sigma: float
    lambda_min: float
    eigvec_norm_check: float
    profile_w: VelocityProfile


def _speed_squared(w: VelocityProfile, domain: GridDomain):
    gv = np.asarray(w.grad(domain.nodes), dtype=float)
    if domain.dim == 1:
        return gv ** 2
    return np.sum(gv ** 2, axis=1)


def ground_state(domain: GridDomain, w: VelocityProfile, sigma) -> GroundStateResult:
    """Smallest eigenvalue of sigma*K + diag(|grad w|^2).

    Shift-inverted Lanczos with a small negative shift (the operator is
    positive semidefinite, so the shifted matrix is always nonsingular),
    followed by inverse-iteration polish until the residual is below
    1e-8.
    """
    if not 0.0 < sigma <= 1.0:
        raise ValidationError("sigma must lie in (0, 1]")
    if domain.bc == "dirichlet":
        raise ValidationError("ground_state expects Neumann or periodic walls")
    if w.dim != domain.dim:
        raise ValidationError("profile and domain dimension mismatch")

    _, K = dz.mass_stiffness(domain)
    pot = _speed_squared(w, domain)
    A = (sigma * K + sp.diags(pot)).tocsc()

    scale = abs(sigma) * 4.0 * sum(1.0 / h ** 2 for h in domain.h) \
        + float(np.max(pot, initial=0.0))
    shift = -1e-10 * max(scale, 1.0)
    v0 = np.random.default_rng(1).standard_normal(domain.size)
    try:
        vals, vecs = spla.eigsh(A, k=1, sigma=shift, which="LM", v0=v0)
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        raise NumericalError("ground-state eigensolve did not converge") from exc
    lam = float(vals[0])
    phi = vecs[:, 0]

    lu = spla.splu(A - shift * sp.identity(domain.size, format="csc"))
    for _ in range(20):
        residual = float(np.linalg.norm(A @ phi - lam * phi)
                         / np.linalg.norm(phi))
        if residual <= RESIDUAL_TOL:
            break
        phi = lu.solve(phi)
        phi /= np.linalg.norm(phi)
        lam = float(phi @ (A @ phi))
    else:
        raise NumericalError(
            f"ground-state residual stalled at {residual:.2e}"
        )
    return GroundStateResult(float(sigma), max(lam, 0.0), residual, w)


def _resolution_for(domain: GridDomain, sigma):
    """Scale the point count like sigma^{-1/4}, capped at 4096, never
    below the provided grid."""
    target = int(math.ceil(64.0 * sigma ** -0.25))
    n = tuple(min(4096, max(ni, target)) for ni in domain.n)
    return GridDomain(domain.kind, domain.lengths, n, domain.bc, domain.origin)


def fit_semiclassical_exponent(domain: GridDomain, w: VelocityProfile,
                               sigma_grid):
    """Log-log slope of lambda_min(sigma) and the fitted constant
    c_sp = max sigma^{(m-1)/m} / lambda_min over the grid."""
    sigmas = np.asarray(sorted(sigma_grid), dtype=float)
    if len(sigmas) < 6:
        raise ValidationError("sigma_grid needs at least 6 points")
    if sigmas[-1] / sigmas[0] < 99.0:
        raise ValidationError("sigma_grid must span at least two decades")
    lams = []
    for s in sigmas:
        res = ground_state(_resolution_for(domain, s), w, s)
        if res.lambda_min < 1e-14:
            raise NumericalError(
                f"lambda_min = {res.lambda_min:g} at sigma = {s:g}: "
                "degenerate potential, exponent fit aborted"
            )
        lams.append(res.lambda_min)
    lams = np.asarray(lams)
    slope, _ = np.polyfit(np.log(sigmas), np.log(lams), 1)
    m = w.m_index
    c_sp_fit = float(np.max(sigmas ** ((m - 1.0) / m) / lams))
    return float(slope), c_sp_fit


def default_sigma_grid(lo=1e-5, hi=1e-1, points=9):
    return list(np.logspace(math.log10(lo), math.log10(hi), points))


def semiclassical_domain(w: VelocityProfile, n=None, bc="neumann"):
    """Natural eigenproblem domain for a profile (H^1 setting)."""
    if w.domain_hint == "torus2d":
        return domain_for_profile(w, n=n)
    return domain_for_profile(w, n=n, bc=bc)
