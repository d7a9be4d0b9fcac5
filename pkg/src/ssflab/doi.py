"""Double-operator-integral kernels for resolvent-power denominators.

For a pair of Hermitian matrices and a scalar function ``f``, the difference
``f(H) - f(H0)`` equals a double operator integral: in the two eigenbases it
acts as a Hadamard (entrywise) multiplier by the kernel

    K(x, y) = (f(x) - f(y)) / (g(x) - g(y)),

applied to ``T = g(H) - g(H0)``.  Here ``g`` is the resolvent power
``g(x) = (x - z)^{-m}``, whose divided-difference denominator factors through
the telescoping cofactor

    p(x, y; z) = sum_{j=0}^{m-1} (x - z)^(m-1-j) (y - z)^j,

with ``(x-z)^m - (y-z)^m = (x - y) p(x, y; z)``.  The module provides the
cofactor algebra, grid certificates for its lower bounds, the kernel in
direct and factored form, the exact finite-dimensional identity check, and
boundedness reports for the transformer hypotheses (sup norm, weighted
derivative, equal limits at both infinities).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .functions import ScalarFunction, resolvent_function, smoothstep_cutoff
from .spectral import (
    ABS_FLOOR,
    SpectralDecomposition,
    apply_function,
    schatten_norm,
    singular_values,
)
from .ssf import PowerChangeOfVariable, build_power_map

__all__ = [
    "AntidiagonalCollisionError",
    "BoundedRegion",
    "CofactorPolynomial",
    "CutoffSplitReport",
    "DegenerateKernelError",
    "DoiKernel",
    "ExteriorRegion",
    "KernelHypothesesReport",
    "LowerBoundCertificate",
    "cofactor_lower_bound_cert",
    "divided_difference",
    "doi_apply",
    "doi_identity_residual",
    "geometric_sum_roots",
    "kernel_dlambda",
    "kernel_eval",
    "kernel_hypotheses_report",
    "resolvent_cutoff_split",
    "resolvent_kernel",
]


class DegenerateKernelError(ValueError):
    """Kernel denominator vanishes away from the diagonal coincidence band."""


class AntidiagonalCollisionError(DegenerateKernelError):
    """Two distinct eigenvalues collide through the denominator function."""


# ---------------------------------------------------------------------------
# telescoping cofactor algebra


def _p_eval(m: int, z: complex, lam, mu) -> np.ndarray:
    a = np.asarray(lam, dtype=complex) - z
    b = np.asarray(mu, dtype=complex) - z
    acc = np.ones(np.broadcast(a, b).shape, dtype=complex)
    for k in range(1, m):
        acc = acc * b + a**k
    return acc


def _p_dlam(m: int, z: complex, lam, mu) -> np.ndarray:
    a = np.asarray(lam, dtype=complex) - z
    b = np.asarray(mu, dtype=complex) - z
    acc = np.zeros(np.broadcast(a, b).shape, dtype=complex)
    for j in range(m - 2, -1, -1):
        acc = acc * b + (m - 1 - j) * a ** (m - 2 - j)
    return acc


@dataclass(frozen=True)
class CofactorPolynomial:
    """The telescoping cofactor ``p(x, y; z)`` of ``(x-z)^m - (y-z)^m``.

    On the diagonal it collapses to ``m (x - z)^(m-1)``; off the diagonal it
    carries the full divided-difference denominator of the resolvent power.
    """

    m: int
    z: complex

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1 or self.m % 2 == 0:
            raise ValueError(f"power m must be an odd integer >= 1, got {self.m!r}")
        if complex(self.z).imag == 0.0:
            raise ValueError("cofactor certificates require Im z != 0")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "z", complex(self.z))

    def __call__(self, lam, mu):
        return _p_eval(self.m, self.z, lam, mu)

    def dlam(self, lam, mu):
        return _p_dlam(self.m, self.z, lam, mu)

    def dmu(self, lam, mu):
        # p is symmetric under swapping its two arguments
        return _p_dlam(self.m, self.z, mu, lam)

    def ratio_form(self, lam, mu):
        """Equivalent evaluation through the geometric sum in (y-z)/(x-z)."""
        a = np.asarray(lam, dtype=complex) - self.z
        b = np.asarray(mu, dtype=complex) - self.z
        sigma = b / a
        acc = np.zeros(sigma.shape or (), dtype=complex)
        for _ in range(self.m):
            acc = acc * sigma + 1.0
        return a ** (self.m - 1) * acc


def geometric_sum_roots(m: int) -> np.ndarray:
    """Roots of ``1 + s + ... + s^(m-1)``: the non-trivial m-th roots of unity."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return np.exp(2j * np.pi * np.arange(1, m) / m)


# ---------------------------------------------------------------------------
# lower-bound grid certificates


@dataclass(frozen=True)
class BoundedRegion:
    """The square ``[-r, r]^2``."""

    r: float

    def to_json(self) -> dict:
        return {"kind": "bounded", "r": self.r}


@dataclass(frozen=True)
class ExteriorRegion:
    """Points with ``max(|x|, |y|) >= r``, capped at ``lam_max`` per axis."""

    r: float
    lam_max: float

    def to_json(self) -> dict:
        return {"kind": "exterior", "r": self.r, "lam_max": self.lam_max}


@dataclass(frozen=True)
class LowerBoundCertificate:
    m: int
    z: complex
    region: Union[BoundedRegion, ExteriorRegion]
    grid_n: int
    c_observed: float
    slack: float
    passed: bool
    min_location: tuple

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "z": [self.z.real, self.z.imag],
            "region": self.region.to_json(),
            "grid_n": self.grid_n,
            "c_observed": self.c_observed,
            "slack": self.slack,
            "pass": self.passed,
            "min_location": list(self.min_location),
        }


_GRAD_SAFETY = 1.5


def _exterior_axis(r: float, lam_max: float, grid_n: int) -> np.ndarray:
    n_tail = grid_n // 3
    n_in = grid_n - 2 * n_tail
    if n_in < 3 or n_tail < 2:
        raise ValueError(f"grid_n={grid_n} too small for an exterior certificate")
    inner = np.linspace(-r, r, n_in)
    pos = np.geomspace(r, lam_max, n_tail + 1)[1:]
    return np.concatenate([-pos[::-1], inner, pos])


def _half_spacings(axis: np.ndarray) -> np.ndarray:
    gaps = np.diff(axis)
    left = np.concatenate([[gaps[0]], gaps])
    right = np.concatenate([gaps, [gaps[-1]]])
    return 0.5 * np.maximum(left, right)


def cofactor_lower_bound_cert(
    p: CofactorPolynomial,
    region: Union[BoundedRegion, ExteriorRegion],
    grid_n: int,
) -> LowerBoundCertificate:
    """Grid certificate for a lower bound on the cofactor.

    Bounded mode certifies ``min |p|`` over the square; exterior mode
    certifies ``min |p| / (|x| + |y|)^(m-1)`` over the capped exterior.  The
    reported slack is a Lipschitz correction from the local grid spacing and
    analytic partial derivatives, so ``c_observed - slack > 0`` is a sound
    one-sided claim at grid resolution.
    """
    if grid_n < 11:
        raise ValueError("grid_n must be at least 11")
    m, z = p.m, p.z
    if isinstance(region, BoundedRegion):
        if region.r <= 0:
            raise ValueError("bounded region requires r > 0")
        axis = np.linspace(-region.r, region.r, grid_n)
        mask = np.ones((grid_n, grid_n), dtype=bool)
    elif isinstance(region, ExteriorRegion):
        if not (0 < region.r < region.lam_max):
            raise ValueError("exterior region requires 0 < r < lam_max")
        axis = _exterior_axis(region.r, region.lam_max, grid_n)
        eps = 1e-12 * region.r
        lam_in = np.abs(axis) >= region.r - eps
        mask = lam_in[:, None] | lam_in[None, :]
    else:
        raise TypeError(f"unknown region {region!r}")

    lam = axis[:, None]
    mu = axis[None, :]
    pv = np.abs(p(lam, mu))
    glam = np.abs(p.dlam(lam, mu))
    gmu = np.abs(p.dmu(lam, mu))

    if isinstance(region, BoundedRegion):
        q = pv
        grad_lam, grad_mu = glam, gmu
    else:
        # interior nodes are masked out below but still flow through the
        # arithmetic; pin their normalization to 1 so nothing divides by zero
        s = np.where(mask, np.abs(lam) + np.abs(mu), 1.0)
        norm = s ** (m - 1)
        q = pv / norm
        grad_lam = glam / norm + (m - 1) * pv / (norm * s)
        grad_mu = gmu / norm + (m - 1) * pv / (norm * s)

    hs = _half_spacings(axis)
    slack_local = _GRAD_SAFETY * (hs[:, None] * grad_lam + hs[None, :] * grad_mu)
    q_masked = np.where(mask, q, np.inf)
    lower = np.where(mask, q - slack_local, np.inf)
    c_observed = float(np.min(q_masked))
    lb = float(np.min(lower))
    i, j = np.unravel_index(int(np.argmin(lower)), lower.shape)
    return LowerBoundCertificate(
        m=m,
        z=z,
        region=region,
        grid_n=grid_n,
        c_observed=c_observed,
        slack=c_observed - lb,
        passed=bool(lb > 0.0),
        min_location=(float(axis[i]), float(axis[j])),
    )


# ---------------------------------------------------------------------------
# kernels


def divided_difference(f: ScalarFunction, lam, mu, delta0: float = 1e-5):
    """First divided difference of ``f`` with a coincidence band.

    Within ``|x - y| <= delta0 * (1 + |x|)`` the derivative at the midpoint
    replaces the ratio (second-order accurate there).
    """
    lam_a = np.asarray(lam, dtype=float)
    mu_a = np.asarray(mu, dtype=float)
    band = np.abs(lam_a - mu_a) <= delta0 * (1.0 + np.abs(lam_a))
    lam_b, mu_b, band = np.broadcast_arrays(lam_a, mu_a, band)
    mid = 0.5 * (lam_b + mu_b)
    out = np.empty(band.shape, dtype=complex)
    if np.any(band):
        out[band] = np.asarray(f.d1(mid[band]), dtype=complex)
    reg = ~band
    if np.any(reg):
        out[reg] = (
            np.asarray(f(lam_b[reg]), dtype=complex) - np.asarray(f(mu_b[reg]), dtype=complex)
        ) / (lam_b[reg] - mu_b[reg])
    if np.isscalar(lam) and np.isscalar(mu):
        return complex(out)
    return out


@dataclass(frozen=True)
class DoiKernel:
    """Divided-difference kernel ``(f(x) - f(y)) / (g(x) - g(y))``.

    ``mode="direct"`` evaluates the ratio; ``mode="factored"`` uses the
    algebraic factorization through the telescoping cofactor, which requires
    ``g`` to be the resolvent power ``(x - z)^{-m}`` (fields ``m``, ``z``).
    ``delta0`` scales the diagonal coincidence band, inside which the
    derivative limit ``f'(x)/g'(x)`` is used.
    """

    f: ScalarFunction
    g: ScalarFunction
    mode: str = "direct"
    delta0: float = 1e-5
    m: Optional[int] = None
    z: Optional[complex] = None

    def __post_init__(self):
        if self.mode not in ("direct", "factored"):
            raise ValueError(f"unknown kernel mode {self.mode!r}")
        if self.mode == "factored" and (self.m is None or self.z is None):
            raise ValueError("factored mode requires resolvent parameters m and z")
        if self.delta0 <= 0:
            raise ValueError("coincidence band scale must be positive")
        if self.g.derivative is None or self.f.derivative is None:
            raise ValueError("kernel functions need attached first derivatives")

    def __call__(self, lam, mu):
        return kernel_eval(self, lam, mu)

    def dlambda(self, lam, mu):
        return kernel_dlambda(self, lam, mu)


def resolvent_kernel(
    f: ScalarFunction, m: int, z: complex, mode: str = "direct", delta0: float = 1e-5
) -> DoiKernel:
    """Kernel with denominator function ``g(x) = (x - z)^{-m}``."""
    if int(m) < 1 or int(m) % 2 == 0:
        raise ValueError(f"resolvent power must be an odd integer >= 1, got {m!r}")
    g = resolvent_function(z, int(m))
    return DoiKernel(f=f, g=g, mode=mode, delta0=delta0, m=int(m), z=complex(z))


_DENOM_ABS_TOL = 1e-13


def _band_mask(k: DoiKernel, lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return np.abs(lam - mu) <= k.delta0 * (1.0 + np.abs(lam))


def kernel_eval(k: DoiKernel, lam, mu):
    """Evaluate the kernel on broadcastable real arguments."""
    scalar = np.isscalar(lam) and np.isscalar(mu)
    lam_b, mu_b = np.broadcast_arrays(
        np.asarray(lam, dtype=float), np.asarray(mu, dtype=float)
    )
    band = _band_mask(k, lam_b, mu_b)
    mid = 0.5 * (lam_b + mu_b)
    out = np.empty(lam_b.shape, dtype=complex)
    if np.any(band):
        gp = np.asarray(k.g.d1(mid[band]), dtype=complex)
        out[band] = np.asarray(k.f.d1(mid[band]), dtype=complex) / gp
    reg = ~band
    if np.any(reg):
        lr, mr = lam_b[reg], mu_b[reg]
        if k.mode == "direct":
            den = np.asarray(k.g(lr), dtype=complex) - np.asarray(k.g(mr), dtype=complex)
            if np.any(np.abs(den) < _DENOM_ABS_TOL):
                bad = int(np.argmin(np.abs(den)))
                raise DegenerateKernelError(
                    f"denominator {np.abs(den).min():.3e} below {_DENOM_ABS_TOL:g} at "
                    f"(x, y) = ({lr.ravel()[bad]}, {mr.ravel()[bad]}) outside the band"
                )
            num = np.asarray(k.f(lr), dtype=complex) - np.asarray(k.f(mr), dtype=complex)
            out[reg] = num / den
        else:
            m, z = k.m, k.z
            pv = _p_eval(m, z, lr, mr)
            pscale = (np.abs(lr - z) + np.abs(mr - z)) ** (m - 1)
            if np.any(np.abs(pv) < _DENOM_ABS_TOL * np.maximum(pscale, 1.0)):
                raise DegenerateKernelError("telescoping cofactor vanished off-diagonal")
            phi = divided_difference(k.f, lr, mr, k.delta0)
            big_g = (lr - z) ** m * (mr - z) ** m / pv
            out[reg] = -phi * big_g
    return complex(out) if scalar else out


def kernel_dlambda(k: DoiKernel, lam, mu):
    """Partial derivative of the kernel in its first argument."""
    scalar = np.isscalar(lam) and np.isscalar(mu)
    lam_b, mu_b = np.broadcast_arrays(
        np.asarray(lam, dtype=float), np.asarray(mu, dtype=float)
    )
    band = _band_mask(k, lam_b, mu_b)
    mid = 0.5 * (lam_b + mu_b)
    out = np.empty(lam_b.shape, dtype=complex)
    if np.any(band):
        if k.f.derivative2 is None or k.g.derivative2 is None:
            raise ValueError("diagonal kernel derivative needs second derivatives")
        fp = np.asarray(k.f.d1(mid[band]), dtype=complex)
        fpp = np.asarray(k.f.d2(mid[band]), dtype=complex)
        gp = np.asarray(k.g.d1(mid[band]), dtype=complex)
        gpp = np.asarray(k.g.d2(mid[band]), dtype=complex)
        out[band] = 0.5 * (fpp * gp - fp * gpp) / (gp * gp)
    reg = ~band
    if np.any(reg):
        lr, mr = lam_b[reg], mu_b[reg]
        if k.mode == "direct":
            den = np.asarray(k.g(lr), dtype=complex) - np.asarray(k.g(mr), dtype=complex)
            if np.any(np.abs(den) < _DENOM_ABS_TOL):
                raise DegenerateKernelError("denominator vanished off-diagonal")
            num = np.asarray(k.f(lr), dtype=complex) - np.asarray(k.f(mr), dtype=complex)
            fp = np.asarray(k.f.d1(lr), dtype=complex)
            gp = np.asarray(k.g.d1(lr), dtype=complex)
            out[reg] = fp / den - num * gp / (den * den)
        else:
            m, z = k.m, k.z
            pv = _p_eval(m, z, lr, mr)
            pd = _p_dlam(m, z, lr, mr)
            phi = divided_difference(k.f, lr, mr, k.delta0)
            # derivative of the first divided difference in its first slot
            dphi = (
                np.asarray(k.f(mr), dtype=complex)
                - np.asarray(k.f(lr), dtype=complex)
                - np.asarray(k.f.d1(lr), dtype=complex) * (mr - lr)
            ) / (lr - mr) ** 2
            big_g = (lr - z) ** m * (mr - z) ** m / pv
            dbig_g = big_g * (m / (lr - z) - pd / pv)
            out[reg] = -(dphi * big_g + phi * dbig_g)
    return complex(out) if scalar else out


# ---------------------------------------------------------------------------
# the exact finite-dimensional identity


def doi_apply(
    d0: SpectralDecomposition, d: SpectralDecomposition, k: DoiKernel, t
) -> np.ndarray:
    """Apply the kernel as a Hadamard multiplier in the two eigenbases.

    Rows live in the eigenbasis of ``d`` (second operator), columns in the
    eigenbasis of ``d0``.
    """
    t = np.asarray(t, dtype=complex)
    if t.shape != (d.dim, d0.dim):
        raise ValueError(f"operand shape {t.shape} does not match ({d.dim}, {d0.dim})")
    kmat = kernel_eval(k, d0.eigenvalues[None, :], d.eigenvalues[:, None])
    u0 = d0.eigenvectors
    u = d.eigenvectors
    mixed = u.conj().T @ t @ u0
    return u @ (kmat * mixed) @ u0.conj().T


def doi_identity_residual(
    d0: SpectralDecomposition,
    d: SpectralDecomposition,
    f: ScalarFunction,
    m: int,
    z: complex,
    collision_rtol: float = 1e-6,
    delta0: float = 1e-5,
) -> float:
    """Max-entry residual of ``f(H) - f(H0) = K o (g(H) - g(H0))``.

    ``g`` is the resolvent power ``(x - z)^{-m}``.  Distinct eigenvalues
    whose ``g``-values collide (the antidiagonal zero set of the telescoping
    cofactor) make the kernel ill-posed; such configurations raise
    :class:`AntidiagonalCollisionError` instead of degrading silently.
    """
    if d0.dim != d.dim:
        raise ValueError("dimension mismatch")
    k = resolvent_kernel(f, m, z, mode="direct", delta0=delta0)
    gl = np.asarray(k.g(d0.eigenvalues), dtype=complex)
    gm = np.asarray(k.g(d.eigenvalues), dtype=complex)
    diff = np.abs(gm[:, None] - gl[None, :])
    band = (
        np.abs(d.eigenvalues[:, None] - d0.eigenvalues[None, :])
        <= delta0 * (1.0 + np.abs(d0.eigenvalues[None, :]))
    )
    gscale = max(float(np.abs(gl).max()), float(np.abs(gm).max()), ABS_FLOOR)
    colliding = (~band) & (diff < collision_rtol * gscale)
    if np.any(colliding):
        j, i = np.argwhere(colliding)[0]
        raise AntidiagonalCollisionError(
            f"eigenvalues {d0.eigenvalues[i]:.6g} and {d.eigenvalues[j]:.6g} collide "
            f"through g (|dg| = {diff[j, i]:.3e} < {collision_rtol:g} * {gscale:.3e})"
        )
    t = apply_function(d, k.g) - apply_function(d0, k.g)
    lhs = apply_function(d, k.f) - apply_function(d0, k.f)
    approx = doi_apply(d0, d, k, t)
    return float(np.abs(lhs - approx).max())


# ---------------------------------------------------------------------------
# transformer-hypotheses report


@dataclass(frozen=True)
class KernelHypothesesReport:
    sup_abs: float
    sup_weighted_dlambda: float
    limit_mismatch: float
    edge: float
    region_sups: dict
    dlambda_tail_exponent: float

    def to_json(self) -> dict:
        return {
            "sup_abs": self.sup_abs,
            "sup_weighted_dlambda": self.sup_weighted_dlambda,
            "limit_mismatch": self.limit_mismatch,
            "edge": self.edge,
            "region_sups": {k: dict(v) for k, v in self.region_sups.items()},
            "dlambda_tail_exponent": self.dlambda_tail_exponent,
        }


def kernel_hypotheses_report(
    k: DoiKernel, lam_grid, mu_grid, region_r: float
) -> KernelHypothesesReport:
    """Sampled boundedness checks behind the Hadamard-transformer estimates.

    Reports ``sup |K|``, ``sup (1 + x^2) |dK/dx|``, the mismatch between the
    two infinite limits sampled at the grid edge, the same sups split over
    the bounded square / strips / exterior at radius ``region_r``, and the
    fitted tail decay exponent of ``sup_y |dK/dx|``.
    """
    lam = np.asarray(lam_grid, dtype=float)
    mu = np.asarray(mu_grid, dtype=float)
    if lam.ndim != 1 or mu.ndim != 1:
        raise ValueError("grids must be 1-d")
    kv = kernel_eval(k, lam[:, None], mu[None, :])
    dk = kernel_dlambda(k, lam[:, None], mu[None, :])
    weighted = (1.0 + lam[:, None] ** 2) * np.abs(dk)

    edge = float(min(-lam.min(), lam.max()))
    top = kernel_eval(k, np.full_like(mu, edge), mu)
    bot = kernel_eval(k, np.full_like(mu, -edge), mu)
    limit_mismatch = float(np.abs(top - bot).max())

    lam_small = np.abs(lam[:, None]) <= region_r
    mu_small = np.abs(mu[None, :]) <= region_r
    regions = {
        "square": lam_small & mu_small,
        "strip_lam_large": (~lam_small) & mu_small,
        "strip_mu_large": lam_small & (~mu_small),
        "exterior": (~lam_small) & (~mu_small),
    }
    region_sups = {}
    for name, msk in regions.items():
        if np.any(msk):
            region_sups[name] = {
                "sup_abs": float(np.abs(kv[msk]).max()),
                "sup_weighted_dlambda": float(weighted[msk].max()),
            }
        else:
            region_sups[name] = {"sup_abs": 0.0, "sup_weighted_dlambda": 0.0}

    # tail decay of sup_y |dK/dx| against |x|, fitted on the outer decade
    sup_rows = np.abs(dk).max(axis=1)
    tail = np.abs(lam) >= edge / 10.0
    x = np.abs(lam[tail])
    y = sup_rows[tail]
    good = y > 0
    if good.sum() > 1:
        exponent = -float(np.polyfit(np.log(x[good]), np.log(y[good]), 1)[0])
    else:
        exponent = float("inf")

    return KernelHypothesesReport(
        sup_abs=float(np.abs(kv).max()),
        sup_weighted_dlambda=float(weighted.max()),
        limit_mismatch=limit_mismatch,
        edge=edge,
        region_sups=region_sups,
        dlambda_tail_exponent=exponent,
    )


# ---------------------------------------------------------------------------
# cutoff decomposition of the transformed resolvent


@dataclass(frozen=True)
class CutoffSplitReport:
    residual: float
    scale: float
    relative_residual: float
    trace_norm_total: float
    trace_norm_inner: float
    trace_norm_outer: float

    def to_json(self) -> dict:
        return {
            "residual": self.residual,
            "scale": self.scale,
            "relative_residual": self.relative_residual,
            "trace_norm_total": self.trace_norm_total,
            "trace_norm_inner": self.trace_norm_inner,
            "trace_norm_outer": self.trace_norm_outer,
        }


def resolvent_cutoff_split(
    d0: SpectralDecomposition,
    d: SpectralDecomposition,
    m: int,
    r: float,
    phi: Optional[PowerChangeOfVariable] = None,
) -> CutoffSplitReport:
    """Split ``(phi(H)-i)^{-1} - (phi(H0)-i)^{-1}`` by a smooth cutoff.

    With ``theta`` vanishing on ``[-r, r]`` and equal to 1 outside
    ``[-2r, 2r]``, and ``phi`` the monotone map equal to ``x^m`` beyond
    ``r``, the transformed resolvent difference decomposes exactly into an
    inner part driven by ``(1-theta)/(phi - i)`` and an outer part driven by
    ``theta/(x^m - i)``.  Reports the max-entry residual of the decomposition
    and the trace norms of all three differences.
    """
    if phi is None:
        phi = build_power_map(m, r)
    elif phi.cutoff > r:
        raise ValueError("cutoff of the power map must not exceed the split radius")
    theta = smoothstep_cutoff(r)

    def whole(x):
        return 1.0 / (np.asarray(phi(x), dtype=complex) - 1j)

    def inner(x):
        return (1.0 - np.asarray(theta(x), dtype=complex)) / (
            np.asarray(phi(x), dtype=complex) - 1j
        )

    def outer(x):
        return np.asarray(theta(x), dtype=complex) / (
            np.asarray(x, dtype=complex) ** m - 1j
        )

    lhs = apply_function(d, whole) - apply_function(d0, whole)
    t_inner = apply_function(d, inner) - apply_function(d0, inner)
    t_outer = apply_function(d, outer) - apply_function(d0, outer)
    residual = float(np.abs(lhs - (t_inner + t_outer)).max())
    scale = max(float(np.abs(lhs).max()), ABS_FLOOR)
    return CutoffSplitReport(
        residual=residual,
        scale=scale,
        relative_residual=residual / scale,
        trace_norm_total=schatten_norm(singular_values(lhs), 1),
        trace_norm_inner=schatten_norm(singular_values(t_inner), 1),
        trace_norm_outer=schatten_norm(singular_values(t_outer), 1),
    )
