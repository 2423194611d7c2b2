"""Recover the dominant soil parameters (N, phi) from one steady-state wheel measurement."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from ..errors import DataError
from .wheel import DEFAULT_SOIL, DEFAULT_WHEEL, ContactKernel, entry_angle, slip_ratio

log = logging.getLogger(__name__)


@dataclass
class InteractionSample:
    t: float
    F_N: float
    M_R: float
    omega: float
    v: float
    z: float
    label: str | None = None


@dataclass
class IdentifiedProperties:
    N: float
    phi: float          # degrees
    s: float
    theta1: float       # rad
    converged: bool
    residuals: tuple = (0.0, 0.0)   # (dF_N, dM_R), N and N*m
    label: str | None = None
    t: float | None = None
    slip_clamped: bool = False


@dataclass
class SolverConfig:
    N_bounds: tuple = (0.05, 2.5)
    phi_bounds: tuple = (0.0, 60.0)    # degrees
    rtol: float = 1e-6
    max_outer: int = 50
    max_bisect: int = 200
    quadrature_n: int = 200
    exit_angle: float = 0.0
    phi_start: float | None = None     # default: middle of phi_bounds


@dataclass
class IdentificationReport:
    results: list = field(default_factory=list)
    rejected: list = field(default_factory=list)   # (sample, reason)


def _bisect_decreasing(f, target, lo, hi, max_iter):
    """Root of f(x) = target for f strictly decreasing on [lo, hi].

    Returns ``(x, bracketed)``; without a bracket the nearer bound comes back.
    """
    f_lo, f_hi = f(lo), f(hi)
    if target > f_lo:
        return lo, False
    if target < f_hi:
        return hi, False
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-13 * (1.0 + abs(mid)):
            break
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), True


def _bisect_increasing(f, target, lo, hi, max_iter):
    return _bisect_decreasing(lambda u: -f(u), -target, lo, hi, max_iter)


def identify_from_state(F_N, M_R, s, theta1, geometry=DEFAULT_WHEEL, soil=DEFAULT_SOIL,
                        config=None) -> IdentifiedProperties:
    """Alternating bisection: N against the load, then phi against the torque, to a fixed point.

    The load falls strictly with N (the stress base r(cos - cos theta1) stays
    below 1 m) and the torque rises strictly with phi; the only coupling is the
    tau*sin(theta) term in the load, so the outer loop contracts quickly.
    """
    config = config or SolverConfig()
    if not F_N > 0:
        raise DataError(f"vertical load must be positive, got {F_N}")
    if M_R < 0:
        raise DataError(f"driving torque must be non-negative, got {M_R}")
    kernel = ContactKernel(s, theta1, geometry, soil, config.quadrature_n, config.exit_angle)
    N_lo, N_hi = config.N_bounds
    p_lo, p_hi = config.phi_bounds
    phi = config.phi_start if config.phi_start is not None else 0.5 * (p_lo + p_hi)
    N = 0.5 * (N_lo + N_hi)

    converged = False
    dF = dM = math.inf
    for _ in range(config.max_outer):
        tan_phi = math.tan(math.radians(phi))
        N, ok_N = _bisect_decreasing(lambda n: kernel.load(n, tan_phi), F_N, N_lo, N_hi, config.max_bisect)
        sigma = kernel.sigma(N)
        phi, ok_phi = _bisect_increasing(
            lambda p: kernel.torque(N, math.tan(math.radians(p)), sigma), M_R, p_lo, p_hi, config.max_bisect)
        tan_phi = math.tan(math.radians(phi))
        dF = float(kernel.load(N, tan_phi, sigma)) - F_N
        dM = float(kernel.torque(N, tan_phi, sigma)) - M_R
        if not (ok_N and ok_phi):
            break
        if abs(dF) <= config.rtol * abs(F_N) and abs(dM) <= config.rtol * max(abs(M_R), 1e-300):
            converged = True
            break
    if not converged:
        log.debug("identification did not converge: F_N=%g M_R=%g s=%g theta1=%g -> N=%g phi=%g",
                  F_N, M_R, s, theta1, N, phi)
    return IdentifiedProperties(N=float(N), phi=float(phi), s=s, theta1=theta1,
                                converged=converged, residuals=(dF, dM))


def identify_dominant(sample: InteractionSample, geometry=DEFAULT_WHEEL, soil=DEFAULT_SOIL,
                      config=None) -> IdentifiedProperties:
    s, clamped = slip_ratio(sample.omega, sample.v, geometry.r_s)
    theta1 = entry_angle(sample.z, geometry.r)
    res = identify_from_state(sample.F_N, sample.M_R, s, theta1, geometry, soil, config)
    res.label, res.t, res.slip_clamped = sample.label, sample.t, clamped
    return res


def identify_log(samples, geometry=DEFAULT_WHEEL, soil=DEFAULT_SOIL, config=None) -> IdentificationReport:
    """Identify every sample; precondition failures land in ``rejected`` with a reason."""
    report = IdentificationReport()
    for sample in samples:
        try:
            report.results.append(identify_dominant(sample, geometry, soil, config))
        except DataError as exc:
            report.rejected.append((sample, f"{type(exc).__name__}: {exc}"))
    return report
