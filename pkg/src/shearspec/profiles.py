"""Catalog of analytic shear velocity profiles.

Each profile carries exact closed-form derivatives, its critical points,
and the degeneracy index m that enters the decay-rate formulas.  All
catalog profiles except the disk one are shifted to zero average over
their domain; the removed constant is kept in ``mean_shift`` so the raw
profile is recoverable as ``v_raw(y) = eval(y) + mean_shift``.

Profiles are immutable after construction and safe to share across
threads.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class VelocityProfile:
    """A shear velocity v on a 1-D interval or a 2-D cross section.

    ``eval``/``grad``/``hess`` are vectorized: 1-D profiles map an array
    of points to arrays of the same shape; 2-D profiles map ``(..., 2)``
    points to values ``(...,)``, gradients ``(..., 2)`` and Hessians
    ``(..., 2, 2)``.  ``deriv(y, j)`` gives the exact j-th derivative for
    1-D profiles (used by the nondegeneracy checks).
    """

    name: str
    dim: int
    m_index: int
    eval: Callable
    grad: Callable
    hess: Callable
    critical_points: tuple
    zero_mean: bool
    sup_norm: float
    mean_shift: float
    domain_hint: str  # interval | torus2d | rectangle | disk
    deriv: Optional[Callable] = None
    beta0_default: float = 0.2  # calibrated hypocoercivity seed constant

    def __post_init__(self):
        if self.m_index < 1:
            raise ValidationError(f"profile {self.name}: m_index must be >= 1")
        if (self.m_index == 1) != (len(self.critical_points) == 0):
            raise ValidationError(
                f"profile {self.name}: m_index = 1 exactly when there are "
                "no critical points"
            )
        for p in self.critical_points:
            g = np.atleast_1d(np.asarray(self.grad(np.asarray(p, dtype=float))))
            if np.linalg.norm(g) >= 1e-10:
                raise ValidationError(
                    f"profile {self.name}: gradient does not vanish at "
                    f"declared critical point {p}"
                )

    def raw(self, y):
        """Profile before the zero-average shift."""
        return self.eval(y) + self.mean_shift


def _sup_on_grid(f, lo, hi, n=4097):
    y = np.linspace(lo, hi, n)
    return float(np.max(np.abs(f(y))))


def _couette():
    def ev(y):
        return np.asarray(y, dtype=float) - 0.5

    return VelocityProfile(
        name="couette",
        dim=1,
        m_index=1,
        eval=ev,
        grad=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        hess=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        critical_points=(),
        zero_mean=True,
        sup_norm=0.5,
        mean_shift=0.5,
        domain_hint="interval",
        deriv=lambda y, j: (
            ev(y) if j == 0
            else np.ones_like(np.asarray(y, dtype=float)) if j == 1
            else np.zeros_like(np.asarray(y, dtype=float))
        ),
        beta0_default=0.2,
    )


def _poiseuille():
    # raw v = 4 y (1 - y), average 2/3 on (0, 1)
    def ev(y):
        y = np.asarray(y, dtype=float)
        return 4.0 * y * (1.0 - y) - 2.0 / 3.0

    def dv(y, j):
        y = np.asarray(y, dtype=float)
        if j == 0:
            return ev(y)
        if j == 1:
            return 4.0 - 8.0 * y
        if j == 2:
            return np.full_like(y, -8.0)
        return np.zeros_like(y)

    return VelocityProfile(
        name="poiseuille",
        dim=1,
        m_index=2,
        eval=ev,
        grad=lambda y: dv(y, 1),
        hess=lambda y: dv(y, 2),
        critical_points=(0.5,),
        zero_mean=True,
        sup_norm=2.0 / 3.0,
        mean_shift=2.0 / 3.0,
        domain_hint="interval",
        deriv=dv,
        beta0_default=0.2,
    )


def _monomial(m):
    if m is None or int(m) != m or m < 1:
        raise ValidationError("monomial_m requires an integer parameter m >= 1")
    m = int(m)
    # raw v = (y - 1/2)^m; the average vanishes for odd m only
    shift = (0.5 ** (m + 1) - (-0.5) ** (m + 1)) / (m + 1)

    def ev(y):
        y = np.asarray(y, dtype=float)
        return (y - 0.5) ** m - shift

    def dv(y, j):
        y = np.asarray(y, dtype=float)
        if j == 0:
            return ev(y)
        if j > m:
            return np.zeros_like(y)
        coeff = 1.0
        for i in range(j):
            coeff *= m - i
        return coeff * (y - 0.5) ** (m - j)

    return VelocityProfile(
        name=f"monomial_m:{m}",
        dim=1,
        m_index=m,
        eval=ev,
        grad=lambda y: dv(y, 1),
        hess=lambda y: dv(y, 2),
        critical_points=(0.5,) if m >= 2 else (),
        zero_mean=True,
        sup_norm=_sup_on_grid(ev, 0.0, 1.0),
        mean_shift=shift,
        domain_hint="interval",
        deriv=dv,
        beta0_default=0.2,
    )


def _kolmogorov():
    # v = cos(2 pi y1) on the unit torus; critical set is the pair of
    # circles y1 in {0, 1/2}, two representatives are listed
    twopi = 2.0 * np.pi

    def ev(p):
        p = np.asarray(p, dtype=float)
        return np.cos(twopi * p[..., 0])

    def gr(p):
        p = np.asarray(p, dtype=float)
        g = np.zeros(p.shape, dtype=float)
        g[..., 0] = -twopi * np.sin(twopi * p[..., 0])
        return g

    def he(p):
        p = np.asarray(p, dtype=float)
        h = np.zeros(p.shape[:-1] + (2, 2), dtype=float)
        h[..., 0, 0] = -(twopi ** 2) * np.cos(twopi * p[..., 0])
        return h

    return VelocityProfile(
        name="kolmogorov",
        dim=2,
        m_index=2,
        eval=ev,
        grad=gr,
        hess=he,
        critical_points=((0.0, 0.5), (0.5, 0.5)),
        zero_mean=True,
        sup_norm=1.0,
        mean_shift=0.0,
        domain_hint="torus2d",
        beta0_default=0.05,
    )


def _saddle():
    # v = y1^2 - y2^2 on [-1, 1]^2, zero mean by symmetry
    def ev(p):
        p = np.asarray(p, dtype=float)
        return p[..., 0] ** 2 - p[..., 1] ** 2

    def gr(p):
        p = np.asarray(p, dtype=float)
        g = np.empty(p.shape, dtype=float)
        g[..., 0] = 2.0 * p[..., 0]
        g[..., 1] = -2.0 * p[..., 1]
        return g

    def he(p):
        p = np.asarray(p, dtype=float)
        h = np.zeros(p.shape[:-1] + (2, 2), dtype=float)
        h[..., 0, 0] = 2.0
        h[..., 1, 1] = -2.0
        return h

    return VelocityProfile(
        name="saddle",
        dim=2,
        m_index=2,
        eval=ev,
        grad=gr,
        hess=he,
        critical_points=((0.0, 0.0),),
        zero_mean=True,
        sup_norm=1.0,
        mean_shift=0.0,
        domain_hint="rectangle",
        beta0_default=0.05,
    )


def _radial(m):
    if m is None or int(m) != m or m < 1:
        raise ValidationError("radial_m requires an integer parameter m >= 1")
    m = int(m)

    # v = 1 - |y|^m on the unit disk, exposed for geometry checks only
    # (no evolution discretization on the disk); not mean-shifted since
    # its level sets are what matters
    def ev(p):
        p = np.asarray(p, dtype=float)
        r = np.sqrt(np.sum(p ** 2, axis=-1))
        return 1.0 - r ** m

    def gr(p):
        p = np.asarray(p, dtype=float)
        r = np.sqrt(np.sum(p ** 2, axis=-1))
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(r > 0, r ** (m - 2.0), 1.0 if m == 2 else 0.0)
        return -m * fac[..., None] * p

    def he(p):
        p = np.asarray(p, dtype=float)
        r = np.sqrt(np.sum(p ** 2, axis=-1))
        rs = np.where(r > 0, r, 1.0)  # origin only valid for even m
        eye = np.eye(p.shape[-1])
        outer = p[..., :, None] * p[..., None, :]
        return -m * (
            (m - 2.0) * (rs ** (m - 4.0))[..., None, None] * outer
            + (rs ** (m - 2.0))[..., None, None] * eye
        )

    return VelocityProfile(
        name=f"radial_m:{m}",
        dim=2,
        m_index=m,
        eval=ev,
        grad=gr,
        hess=he,
        critical_points=((0.0, 0.0),) if m >= 2 else (),
        zero_mean=False,
        sup_norm=1.0,
        mean_shift=0.0,
        domain_hint="disk",
        beta0_default=0.05,
    )


_CATALOG = {
    "couette": lambda m: _couette(),
    "poiseuille": lambda m: _poiseuille(),
    "monomial_m": _monomial,
    "kolmogorov": lambda m: _kolmogorov(),
    "saddle": lambda m: _saddle(),
    "radial_m": _radial,
}

_PARAMETRIC = {"monomial_m", "radial_m"}


def catalog_names():
    return sorted(_CATALOG)


def get_profile(name, m=None):
    """Look up a catalog profile, e.g. ``get_profile("monomial_m", m=4)``.

    Raises ValidationError for unknown names or invalid parameters.
    """
    if name not in _CATALOG:
        raise ValidationError(
            f"unknown profile {name!r}; available: {', '.join(catalog_names())}"
        )
    if name in _PARAMETRIC and m is None:
        raise ValidationError(f"profile {name!r} needs a parameter, e.g. {name}:2")
    if name not in _PARAMETRIC and m is not None:
        raise ValidationError(f"profile {name!r} takes no parameter")
    return _CATALOG[name](m)


def parse_profile_spec(spec):
    """Parse a CLI profile spec ``name`` or ``name:param``."""
    if ":" in spec:
        name, _, param = spec.partition(":")
        try:
            m = int(param)
        except ValueError as exc:
            raise ValidationError(f"bad profile parameter {param!r}") from exc
        return get_profile(name, m=m)
    return get_profile(spec)
