"""Time integration of dg/dt = nu*Lap(g) - i*k*v*g.

Crank-Nicolson steps with a reusable sparse factorization.  The implicit
midpoint rule is contractive for a dissipative generator, so the norm
trajectory is nonincreasing to round-off regardless of dt; that property
is asserted by the tests rather than assumed.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import discretize as dz
from .discretize import GridDomain, ScalarField
from .errors import NumericalError, ValidationError
from .profiles import VelocityProfile
from .resolvent import decay_rate_bound

MAX_SNAPSHOTS = 32


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    norms: np.ndarray
    grad_norms: np.ndarray
    snapshots: Optional[List[Tuple[float, ScalarField]]]
    params: dict

    def fhat_norms(self):
        """Norms of the physical Fourier mode: restore the e^{-nu k^2 t} factor."""
        nu, k = self.params["nu"], self.params["k"]
        return self.norms * np.exp(-nu * k * k * self.times)


def reference_rate(profile: VelocityProfile, nu, k):
    """Decay scale used for default step sizes; diffusive when k = 0."""
    if k == 0:
        return nu * math.pi ** 2
    return decay_rate_bound(nu, k, profile.m_index).rate


def default_initial_field(domain: GridDomain, profile: VelocityProfile,
                          seed=0) -> ScalarField:
    """Mix of the (zero-mean) profile and the first Laplacian mode, plus a
    small seeded perturbation, normalized.  Avoids starting in a single
    fast-decaying subspace."""
    nodes = domain.nodes
    v = np.asarray(profile.eval(nodes), dtype=float)
    v = v - v.mean()
    y = nodes if domain.dim == 1 else nodes[:, 0]
    L = domain.lengths[0]
    y0 = domain.origin[0]
    s = (y - y0) / L
    if domain.bc == "dirichlet":
        mode = np.sin(np.pi * s)
    elif domain.bc == "neumann":
        mode = np.cos(np.pi * s)
    else:
        mode = np.exp(2j * np.pi * s)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(domain.size) + 1j * rng.standard_normal(domain.size)

    def unit(u):
        nrm = dz.norm(domain, u)
        return u / nrm if nrm > 0 else u

    g0 = unit(v.astype(complex)) + unit(mode.astype(complex)) + 0.1 * unit(noise)
    return ScalarField(unit(g0), domain)


def evolve(domain: GridDomain, profile: VelocityProfile, nu, k,
           g0: Optional[ScalarField] = None, t_end=None, dt=None,
           snapshot_times=None, seed=0) -> Trajectory:
    """Crank-Nicolson trajectory g <- (I + dt/2 H)^{-1} (I - dt/2 H) g."""
    rate = reference_rate(profile, nu, k)
    if dt is None:
        dt = 0.05 / rate
    if t_end is None:
        t_end = 5.0 / rate
    if dt <= 0:
        raise ValidationError("dt must be positive")
    if t_end < dt:
        raise ValidationError("t_end must be at least dt")
    nsteps = int(round(t_end / dt))
    if nsteps < 8:
        raise ValidationError(
            f"dt = {dt:g} leaves only {nsteps} samples before t_end = "
            f"{t_end:g}; at least 8 are required"
        )
    if g0 is None:
        g0 = default_initial_field(domain, profile, seed=seed)
    g = np.asarray(g0.values, dtype=complex)
    if not np.all(np.isfinite(g)) or np.linalg.norm(g) == 0.0:
        raise ValidationError("g0 must be finite and nonzero")

    op = dz.assemble(domain, profile, nu, k)
    H = op.matrix
    eye = sp.identity(domain.size, format="csr", dtype=complex)
    A = (eye + (dt / 2.0) * H).tocsc()
    B = (eye - (dt / 2.0) * H).tocsr()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise NumericalError("Crank-Nicolson factorization failed") from exc

    _, K = dz.mass_stiffness(domain)

    def gnorm(u):
        return math.sqrt(max(dz.inner(domain, u, K @ u).real, 0.0))

    snap_req = None
    if snapshot_times is not None:
        snap_req = sorted(float(t) for t in snapshot_times)
        if len(snap_req) > MAX_SNAPSHOTS:
            raise ValidationError(
                f"at most {MAX_SNAPSHOTS} snapshot times are stored"
            )

    times = [0.0]
    norms = [dz.norm(domain, g)]
    grads = [gnorm(g)]
    snapshots = [] if snap_req is not None else None
    if snap_req is not None:
        snap_iter = iter(snap_req)
        next_snap = next(snap_iter, None)
        if next_snap is not None and next_snap <= dt / 2.0:
            snapshots.append((0.0, ScalarField(g.copy(), domain)))
            next_snap = next(snap_iter, None)
    for step in range(1, nsteps + 1):
        g = lu.solve(B @ g)
        t = step * dt
        times.append(t)
        norms.append(dz.norm(domain, g))
        grads.append(gnorm(g))
        if snap_req is not None:
            while next_snap is not None and next_snap <= t + dt / 2.0:
                snapshots.append((t, ScalarField(g.copy(), domain)))
                next_snap = next(snap_iter, None)

    return Trajectory(
        times=np.asarray(times),
        norms=np.asarray(norms),
        grad_norms=np.asarray(grads),
        snapshots=snapshots,
        params={"nu": float(nu), "k": float(k), "profile": profile.name,
                "bc": domain.bc, "dt": float(dt), "n": domain.n},
    )


def fit_decay_rate(traj: Trajectory, skip_fraction=0.2):
    """Least-squares exponential fit of the norm trajectory.

    Discards the initial transient (skip_fraction of the samples), guards
    against underflow, and returns (c1_fit, rate_fit) for the model
    ||g(t)|| ~ c1 * ||g0|| * exp(-rate * t).
    """
    if not 0.0 <= skip_fraction < 1.0:
        raise ValidationError("skip_fraction must lie in [0, 1)")
    start = int(len(traj.times) * skip_fraction)
    t = np.asarray(traj.times[start:], dtype=float)
    y = np.asarray(traj.norms[start:], dtype=float)
    keep = y > 1e-300
    t, y = t[keep], y[keep]
    if len(t) < 8:
        raise ValidationError("fewer than 8 usable samples for the rate fit")
    slope, intercept = np.polyfit(t, np.log(y), 1)
    rate_fit = -float(slope)
    c1_fit = float(np.exp(intercept) / traj.norms[0])
    return c1_fit, rate_fit
