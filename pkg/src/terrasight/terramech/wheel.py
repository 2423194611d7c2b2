"""Rigid wheel on deformable soil: Bekker normal stress, Janosi shear, integrated load and torque.

Units are strict SI throughout (m, Pa, N, rad). The friction angle is the one
exception: public functions take it in degrees and convert internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, SlipUndefined, WheelBuried


@dataclass(frozen=True)
class WheelGeometry:
    r: float = 0.140    # soil-contact radius, m
    b: float = 0.150    # width, m
    h: float = 0.010    # lug height, m
    r_s: float = 0.145  # slip-kinematics radius, m

    def __post_init__(self):
        if min(self.r, self.b, self.h, self.r_s) <= 0:
            raise DataError(f"wheel dimensions must be positive: {self}")
        if not (self.r <= self.r_s <= self.r + self.h):
            raise DataError(f"r_s={self.r_s} outside [r, r + h] = [{self.r}, {self.r + self.h}]")


@dataclass(frozen=True)
class SoilNondominantParams:
    """Empirically fixed soil constants, Pa-based.

    ``k_c`` and ``k_phi`` have N-dependent units; they are plain numeric
    constants in the pressure-sinkage law (kPa values scaled by 1e3).
    """
    k_c: float = 100e3
    k_phi: float = 1400e3
    c: float = 1e3
    K_shear: float = 0.016

    def __post_init__(self):
        if min(self.k_c, self.k_phi, self.K_shear) <= 0 or self.c < 0:
            raise DataError(f"soil moduli must be positive and cohesion non-negative: {self}")

    def pressure_modulus(self, geometry: WheelGeometry) -> float:
        return self.k_c / geometry.b + self.k_phi


DEFAULT_WHEEL = WheelGeometry()
DEFAULT_SOIL = SoilNondominantParams()

SLIP_EPS = 1e-3  # m/s
GRADING = 3


def slip_ratio(omega, v, r_s, eps=SLIP_EPS):
    """Longitudinal slip ``(r_s*omega - v) / (r_s*omega)`` clamped into [0, 1].

    Returns ``(s, clamped)``. Raises ``SlipUndefined`` when the wheel's
    circumferential speed is not above ``eps``.
    """
    vw = r_s * omega
    if not vw > eps:
        raise SlipUndefined(f"wheel speed r_s*omega={vw:.3g} m/s <= {eps:g} m/s")
    s = (vw - v) / vw
    if s < 0.0:
        return 0.0, True
    if s > 1.0:
        return 1.0, True
    return s, False


def entry_angle(z, r):
    """Contact entry angle from sinkage, inverting z = r(1 - cos theta1)."""
    if z < 0:
        raise DataError(f"negative sinkage z={z}")
    if z >= r:
        raise WheelBuried(f"sinkage z={z} m >= wheel radius {r} m")
    return math.acos(1.0 - z / r)


def sinkage_from_entry_angle(theta1, r):
    return r * (1.0 - math.cos(theta1))


def _check_arc(theta, theta1):
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) > theta1 + 1e-12):
        raise DataError(f"theta outside contact arc |theta| <= {theta1}")
    return theta


def normal_stress(theta, N, theta1, geometry=DEFAULT_WHEEL, soil=DEFAULT_SOIL):
    theta = _check_arc(theta, theta1)
    base = np.maximum(geometry.r * (np.cos(theta) - math.cos(theta1)), 0.0)
    return soil.pressure_modulus(geometry) * base ** N


def shear_displacement(theta, s, theta1, r):
    theta = _check_arc(theta, theta1)
    if not 0.0 <= s <= 1.0:
        raise DataError(f"slip ratio {s} outside [0, 1]")
    return r * ((theta1 - theta) - (1.0 - s) * (math.sin(theta1) - np.sin(theta)))


def shear_stress(theta, N, phi_deg, s, theta1, geometry=DEFAULT_WHEEL, soil=DEFAULT_SOIL):
    if not phi_deg < 90.0:
        raise DataError(f"friction angle {phi_deg} deg must be below 90")
    sigma = normal_stress(theta, N, theta1, geometry, soil)
    j = shear_displacement(theta, s, theta1, geometry.r)
    return (soil.c + sigma * math.tan(math.radians(phi_deg))) * (1.0 - np.exp(-j / soil.K_shear))


def simpson_weights(n):
    if n < 2 or n % 2:
        raise DataError(f"Simpson quadrature needs an even interval count, got {n}")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


class ContactKernel:
    """Everything about one contact state (s, theta1) that does not depend on N or phi.

    The shear factor ``1 - exp(-j/K)`` and the quadrature nodes are fixed for a
    given slip and entry angle, so identification evaluates the load and torque
    integrals as a power and a handful of dot products per trial point.
    """

    def __init__(self, s, theta1, geometry=DEFAULT_WHEEL, soil=DEFAULT_SOIL,
                 quadrature_n=200, exit_angle=0.0):
        if not 0.0 <= s <= 1.0:
            raise DataError(f"slip ratio {s} outside [0, 1]")
        if not 0.0 <= theta1 < math.pi / 2:
            raise DataError(f"entry angle {theta1} outside [0, pi/2)")
        if not 0.0 <= exit_angle <= theta1:
            raise DataError(f"exit angle {exit_angle} outside [0, theta1]")
        self.s, self.theta1 = s, theta1
        self.geometry, self.soil = geometry, soil
        # Simpson in t with theta = theta1 - L t^3: the stress vanishes like
        # (theta1 - theta)^N at entry, which plain Simpson resolves poorly for small N.
        span = theta1 + exit_angle
        t = np.linspace(0.0, 1.0, quadrature_n + 1)
        self.theta = theta1 - span * t ** GRADING
        self.w = simpson_weights(quadrature_n) / quadrature_n * (span * GRADING * t ** (GRADING - 1))
        self.base = np.maximum(geometry.r * (np.cos(self.theta) - math.cos(theta1)), 0.0)
        self.k = soil.pressure_modulus(geometry)
        j = geometry.r * ((theta1 - self.theta) - (1.0 - s) * (math.sin(theta1) - np.sin(self.theta)))
        g = 1.0 - np.exp(-j / soil.K_shear)
        self.w_cos = self.w * np.cos(self.theta)
        self.w_gsin = self.w * g * np.sin(self.theta)
        self.w_g = self.w * g
        self.cohesive_load = soil.c * self.w_gsin.sum()
        self.cohesive_torque = soil.c * self.w_g.sum()
        self.rb = geometry.r * geometry.b
        self.r2b = geometry.r * self.rb

    def sigma(self, N):
        return self.k * self.base ** N

    def load(self, N, tan_phi, sigma=None):
        if sigma is None:
            sigma = self.sigma(N)
        return self.rb * (sigma @ self.w_cos + tan_phi * (sigma @ self.w_gsin) + self.cohesive_load)

    def torque(self, N, tan_phi, sigma=None):
        if sigma is None:
            sigma = self.sigma(N)
        return self.r2b * (self.cohesive_torque + tan_phi * (sigma @ self.w_g))

    def forces(self, N, phi_deg):
        sigma = self.sigma(N)
        t = math.tan(math.radians(phi_deg))
        return self.load(N, t, sigma), self.torque(N, t, sigma)


def forward_wheel(N, phi_deg, s, theta1, geometry=DEFAULT_WHEEL, soil=DEFAULT_SOIL,
                  quadrature_n=200, exit_angle=0.0):
    """Vertical load F_N (N) and driving torque M_R (N*m) for a steady-state wheel.

    F_N = r b Int[sigma cos + tau sin], M_R = r^2 b Int[tau] over
    [-exit_angle, theta1], composite Simpson with ``quadrature_n`` intervals on
    a mesh graded cubically toward the entry angle.
    """
    if not phi_deg < 90.0:
        raise DataError(f"friction angle {phi_deg} deg must be below 90")
    if theta1 == 0.0:
        return 0.0, 0.0
    kernel = ContactKernel(s, theta1, geometry, soil, quadrature_n, exit_angle)
    F, M = kernel.forces(N, phi_deg)
    if not (math.isfinite(F) and math.isfinite(M)):
        raise DataError(f"non-finite wheel forces at N={N}, phi={phi_deg}, s={s}, theta1={theta1}")
    return float(F), float(M)
