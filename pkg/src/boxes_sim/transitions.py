"""Collapse and transition probabilities, overlaps, and transition densities."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import ComplexField, GaussianPacket, GridSpec, packet_to_field
from .errors import BeforeArrival, GridMismatch, TimeMismatch, ZeroDensity
from .optics import Box, detector_packet, packet_on_path, source_packet

# |phi* psi| mass below this fraction of ||phi|| ||psi|| counts as no overlap.
ZERO_DENSITY_RTOL = 1e-12
_TIME_RTOL = 1e-9


class Formulation(enum.Enum):
    CF = "CF"
    TSF = "TSF"

    @classmethod
    def parse(cls, text) -> Formulation:
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ValueError(f"unknown formulation {text!r}; expected cf or tsf") from None


@dataclass(frozen=True)
class TransitionResult:
    amplitude: complex
    probability: float
    formulation: Formulation
    eval_time: float
    box: Box
    prefactor: float = 1.0

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1.0 + 1e-12:
            raise ValueError(f"probability out of range: {self.probability}")


def _check_compatible(a: ComplexField, b: ComplexField):
    if not a.spec.same_lattice(b.spec):
        raise GridMismatch(f"grids differ: {a.spec} vs {b.spec}")
    if abs(a.t - b.t) > _TIME_RTOL * max(1.0, abs(a.t), abs(b.t)):
        raise TimeMismatch(f"fields are at different times: {a.t} vs {b.t}")


def overlap(bra: ComplexField, ket: ComplexField) -> complex:
    """Riemann-sum inner product sum(conj(bra) * ket) dx dy.

    ``bra`` is passed unconjugated.
    """
    _check_compatible(bra, ket)
    return complex(np.vdot(bra.values, ket.values) * bra.spec.cell_area)


def gaussian_overlap(a: GaussianPacket, b: GaussianPacket) -> complex:
    """Closed-form <a|b> over the whole plane."""
    wa, wb = a.complex_width, b.complex_width
    alpha_a = (1.0 / (4.0 * a.sigma**2 * wa)).conjugate()
    alpha_b = 1.0 / (4.0 * b.sigma**2 * wb)
    p = alpha_a + alpha_b
    total = 0j
    for ax in (0, 1):
        ca, cb = a.center[ax], b.center[ax]
        ka, kb = a.wavevector[ax], b.wavevector[ax]
        q = 2 * alpha_a * ca + 2 * alpha_b * cb - 1j * ka + 1j * kb
        r = -alpha_a * ca**2 - alpha_b * cb**2 + 1j * ka * ca - 1j * kb * cb
        total += q * q / (4 * p) + r
    pref = (1.0 / (math.sqrt(2 * math.pi) * a.sigma * wa)).conjugate() / (math.sqrt(2 * math.pi) * b.sigma * wb)
    return pref * (math.pi / p) * cmath.exp(total + 1j * (b.global_phase - a.global_phase))


def quadrature_grid(scenario, *packets: GaussianPacket) -> GridSpec:
    """Scenario grid, co-moving: centered on the mean of the packet centers."""
    cx = sum(p.center[0] for p in packets) / len(packets)
    cy = sum(p.center[1] for p in packets) / len(packets)
    g = scenario.grid
    return GridSpec.centered((cx, cy), g.nx, g.dx, g.ny, g.dy, params=scenario.params)


def retarded_packet(scenario, box: Box, t: float) -> GaussianPacket:
    """Unit-normalized source packet carried along the route to ``box``."""
    p0 = source_packet(scenario.network, scenario.params)
    return packet_on_path(scenario.network, scenario.network.route(box), p0, t, scenario.params)


def advanced_packet(scenario, box: Box, t: float) -> GaussianPacket:
    """Detector eigenstate in ``box`` carried from arrival time to ``t``."""
    d = detector_packet(scenario.network, scenario.params, box, scenario.detector)
    return packet_on_path(scenario.network, scenario.network.route(box), d, t, scenario.params)


def collapse_probability_cf(scenario, box, t: float | None = None) -> TransitionResult:
    """Collapse probability into ``box``: |<phi| a psi>|^2 with branch amplitude a."""
    box = Box.parse(box)
    arrival = scenario.network.arrival_time
    t = arrival if t is None else float(t)
    if t < arrival * (1 - 1e-12):
        raise BeforeArrival(f"collapse evaluated at t={t} before arrival at t={arrival}")
    psi = retarded_packet(scenario, box, t)
    phi = advanced_packet(scenario, box, t)
    spec = quadrature_grid(scenario, psi, phi)
    branch_amp = scenario.splitter.amplitude_to(box)
    amp = overlap(packet_to_field(phi, spec), packet_to_field(psi, spec).scaled(branch_amp))
    return TransitionResult(amp, abs(amp) ** 2, Formulation.CF, t, box, 1.0)


def tsf_amplitude(scenario, box: Box, t: float) -> complex:
    psi = retarded_packet(scenario, box, t)
    phi = advanced_packet(scenario, box, t)
    spec = quadrature_grid(scenario, psi, phi)
    amp = overlap(packet_to_field(phi, spec), packet_to_field(psi, spec))
    if scenario.advanced_attenuation:
        amp *= abs(scenario.splitter.amplitude_to(box))
    return amp


def transition_probability_tsf(scenario, final_box, t: float | None = None) -> TransitionResult:
    """Transition probability into ``final_box``: prior * |<phi|psi>|^2.

    Both wavefunctions are unit-normalized along the realized path. The prior
    over final conditions is the splitter weight for that box, 1/2 when
    balanced.
    """
    box = Box.parse(final_box)
    t = scenario.network.arrival_time if t is None else float(t)
    amp = tsf_amplitude(scenario, box, t)
    prior = scenario.splitter.weight_to(box)
    return TransitionResult(amp, prior * abs(amp) ** 2, Formulation.TSF, t, box, prior)


def probability(scenario, formulation, box, t: float | None = None) -> TransitionResult:
    if Formulation.parse(formulation) is Formulation.CF:
        return collapse_probability_cf(scenario, box, t)
    return transition_probability_tsf(scenario, box, t)


def transition_density(psi: ComplexField, phi: ComplexField) -> ComplexField:
    """conj(phi) * psi scaled so that sum |conj(phi) psi| dx dy = 1."""
    _check_compatible(psi, phi)
    prod = np.conj(phi.values) * psi.values
    area = psi.spec.cell_area
    mass = float(np.abs(prod).sum() * area)
    scale = math.sqrt(
        float(np.sum(np.abs(psi.values) ** 2) * area) * float(np.sum(np.abs(phi.values) ** 2) * area)
    )
    if mass == 0 or mass <= ZERO_DENSITY_RTOL * scale:
        raise ZeroDensity(f"|phi* psi| integrates to {mass:.3g}; the states do not overlap")
    return ComplexField(psi.spec, prod / mass, psi.t)
