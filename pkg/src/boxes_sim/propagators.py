"""Free-particle time evolution, closed form and on the grid.

RETARDED moves a state forward in time. ADVANCED is its inverse: it carries
a final condition backward, which on the grid means multiplying each mode by
the conjugate kernel exp(+i hbar k^2 dt / 2m).
"""
from __future__ import annotations

import enum
import os
from dataclasses import replace

import numpy as np
import scipy.fft

from .core import ComplexField, GaussianPacket, PhysicalParams
from .errors import AliasingRisk, NegativeDt


class Direction(enum.Enum):
    RETARDED = "retarded"
    ADVANCED = "advanced"

    @property
    def sign(self) -> int:
        return 1 if self is Direction.RETARDED else -1


def fft_workers() -> int:
    """Thread count for FFTs, capped by BOXES_SIM_THREADS (default 1)."""
    raw = os.environ.get("BOXES_SIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def propagate_packet_analytic(
    packet: GaussianPacket,
    dt: float,
    params: PhysicalParams,
    direction: Direction = Direction.RETARDED,
) -> GaussianPacket:
    if dt < 0:
        raise NegativeDt(f"dt must be >= 0, got {dt}")
    if dt == 0:
        return packet
    s = direction.sign * dt
    kx, ky = packet.wavevector
    v = params.hbar / params.mass
    return replace(
        packet,
        center=(packet.center[0] + v * kx * s, packet.center[1] + v * ky * s),
        chirp=packet.chirp + params.hbar * s / (2.0 * params.mass * packet.sigma**2),
        global_phase=packet.global_phase + params.hbar * (kx * kx + ky * ky) * s / (2.0 * params.mass),
        t_ref=packet.t_ref + s,
    )


def kinetic_phase(spec, dt: float, params: PhysicalParams, direction: Direction) -> np.ndarray:
    kx = 2.0 * np.pi * np.fft.fftfreq(spec.nx, spec.dx)
    ky = 2.0 * np.pi * np.fft.fftfreq(spec.ny, spec.dy)
    k2 = kx[:, None] ** 2 + ky[None, :] ** 2
    return np.exp(-1j * direction.sign * params.hbar * k2 * dt / (2.0 * params.mass))


def propagate_field_spectral(
    field: ComplexField,
    dt: float,
    params: PhysicalParams,
    direction: Direction = Direction.RETARDED,
    window_velocity: tuple[float, float] | None = None,
) -> ComplexField:
    """Exact free evolution of a periodic grid field.

    With ``window_velocity`` the returned grid is translated by the nearest
    whole number of samples to velocity * (signed dt), so a moving packet
    stays inside the window. Because the evolved field is periodic on the
    lattice this is a pure relabeling, not an approximation.
    """
    if dt < 0:
        raise NegativeDt(f"dt must be >= 0, got {dt}")
    spec = field.spec
    if not spec.nyquist_ok(params):
        raise AliasingRisk(
            f"grid Nyquist {min(spec.nyquist):.4g} does not exceed required {params.k_required:.4g}"
        )
    s = direction.sign * dt
    if dt == 0:
        values = field.values
    else:
        w = fft_workers()
        spectrum = scipy.fft.fft2(field.values, workers=w)
        spectrum *= kinetic_phase(spec, dt, params, direction)
        values = scipy.fft.ifft2(spectrum, workers=w)
    if window_velocity is not None:
        sx = int(round(window_velocity[0] * s / spec.dx))
        sy = int(round(window_velocity[1] * s / spec.dy))
        values = np.roll(values, (-sx, -sy), axis=(0, 1))
        spec = spec.shifted(sx, sy)
    return ComplexField(spec, values, field.t + s)


def centroid_trajectory(packet: GaussianPacket, params: PhysicalParams, times) -> list[tuple[float, float]]:
    times = list(times)
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be non-decreasing")
    out = []
    for t in times:
        dt = t - packet.t_ref
        d = Direction.RETARDED if dt >= 0 else Direction.ADVANCED
        out.append(propagate_packet_analytic(packet, abs(dt), params, d).center)
    return out
