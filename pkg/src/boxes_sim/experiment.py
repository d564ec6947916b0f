"""Scenario assembly, panel snapshots and Monte Carlo outcome sampling.

Random numbers come from numpy's PCG64 (``numpy.random.default_rng``). Run
``i`` of an ensemble with root seed ``s`` draws from its own generator
seeded with ``run_seed(s, i)``, a 64-bit integer derived through
``numpy.random.SeedSequence([s, i])``. That integer is stored on the run
record, so any single run can be replayed with ``sample_outcome``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import config as configmod
from .core import ComplexField, GaussianPacket, GridSpec, PhysicalParams, packet_to_field
from .errors import AliasingRisk, InvalidConfig, InvalidGeometry, MissingFinalCondition
from .optics import SOURCE, SPLITTER, Box, PathNetwork, SplitterSpec, packet_on_path, source_packet
from .transitions import (
    Formulation,
    advanced_packet,
    collapse_probability_cf,
    retarded_packet,
    transition_density,
    transition_probability_tsf,
)

# Padding around the apparatus in snapshot frames, in density stds.
SNAPSHOT_PAD_STDS = 8.0
# Corridor around a leg used as its "on the path" window, in units of sigma0.
LEG_HALF_WIDTH_SIGMAS = 3.0
LEG_CLEARANCE_SIGMAS = 7.0
BAND_SIGMAS = 4.0


class Outcome(enum.Enum):
    B1 = "B1"
    B2 = "B2"
    NO_DETECTION = "NoDetection"


@dataclass(frozen=True)
class Scenario:
    params: PhysicalParams
    network: PathNetwork
    splitter: SplitterSpec
    detector: GaussianPacket
    panel_times: tuple[float, ...]
    grid: GridSpec
    snapshot_n: int = 512
    advanced_attenuation: bool = False
    renormalize_outcomes: bool = False
    n_runs: int = 100000
    seed: int | None = None

    def __post_init__(self):
        times = tuple(float(t) for t in self.panel_times)
        object.__setattr__(self, "panel_times", times)
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("panel_times must be non-decreasing")
        if not math.isclose(times[-1], self.network.arrival_time, rel_tol=1e-12, abs_tol=1e-9):
            raise ValueError(
                f"last panel time {times[-1]} must equal the arrival time {self.network.arrival_time}"
            )

    @property
    def arrival_time(self) -> float:
        return self.network.arrival_time


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    seed: int
    formulation: Formulation
    outcome: Outcome
    p_b1: float
    p_b2: float
    renormalized: bool

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "seed": self.seed,
            "formulation": self.formulation.value,
            "outcome": self.outcome.value,
            "p_b1": self.p_b1,
            "p_b2": self.p_b2,
            "renormalized": self.renormalized,
        }


def default_panel_times(arrival: float) -> tuple[float, ...]:
    return (0.0, arrival / 4.0, 3.0 * arrival / 4.0, arrival)


def build_scenario(config: dict | None = None) -> Scenario:
    """Build a validated scenario from a nested config mapping (see config.SCHEMA)."""
    c = configmod.normalize(config)
    ph, geo, sp, gr, run = c["physics"], c["geometry"], c["splitter"], c["grid"], c["run"]
    params = PhysicalParams(hbar=ph["hbar"], mass=ph["mass"], sigma0=ph["sigma"], kx=ph["kx"])
    try:
        network = PathNetwork(
            nodes={SOURCE: geo["source"], SPLITTER: geo["splitter"], "B1": geo["box1"], "B2": geo["box2"]},
            speed=params.speed,
        )
    except InvalidGeometry as exc:
        raise InvalidConfig([("geometry", str(exc))]) from None
    try:
        splitter = SplitterSpec(sp["t_amp"], sp["r_amp"])
    except ValueError as exc:
        raise InvalidConfig([("splitter.t_amp/r_amp", str(exc))]) from None
    try:
        grid = GridSpec(gr["nx"], gr["ny"], gr["dx"], gr["dy"], params=params)
    except AliasingRisk as exc:
        raise InvalidConfig([("grid.dx/dy", str(exc))]) from None
    panel = run["panel_times"] or default_panel_times(network.arrival_time)
    try:
        return Scenario(
            params=params,
            network=network,
            splitter=splitter,
            detector=GaussianPacket.from_params(params),
            panel_times=panel,
            grid=grid,
            snapshot_n=gr["snapshot_n"],
            advanced_attenuation=sp["advanced_attenuation"],
            renormalize_outcomes=run["renormalize_outcomes"],
            n_runs=run["n_runs"],
            seed=run["seed"],
        )
    except ValueError as exc:
        raise InvalidConfig([("run.panel_times", str(exc))]) from None


# -- snapshots ---------------------------------------------------------------


def snapshot_grid(scenario: Scenario) -> GridSpec:
    """Square frame over the whole apparatus, padded for the widest packet."""
    (x0, y0), (x1, y1) = scenario.network.bounding_box()
    p = scenario.params
    T = scenario.arrival_time
    widest = max(max(abs(t), abs(T - t)) for t in scenario.panel_times)
    std = p.sigma0 * math.sqrt(1.0 + (p.hbar * widest / (2 * p.mass * p.sigma0**2)) ** 2)
    extent = max(x1 - x0, y1 - y0) + 2 * SNAPSHOT_PAD_STDS * std
    n = scenario.snapshot_n
    d = extent / n
    return GridSpec.centered(((x0 + x1) / 2, (y0 + y1) / 2), n, d, params=p)


def cf_wavefunction(scenario: Scenario, t: float, spec: GridSpec):
    """Retarded wavefunction with both splitter branches superposed."""
    net, params = scenario.network, scenario.params
    if t < net.splitter_time:
        p = packet_on_path(net, (SOURCE, SPLITTER), source_packet(net, params), t, params)
        return packet_to_field(p, spec)
    total = None
    for box in Box:
        f = packet_to_field(retarded_packet(scenario, box, t), spec).scaled(scenario.splitter.amplitude_to(box))
        total = f if total is None else total + f
    return total


def tsf_density(scenario: Scenario, final_box: Box, t: float, spec: GridSpec):
    psi = packet_to_field(retarded_packet(scenario, final_box, t), spec)
    phi = packet_to_field(advanced_packet(scenario, final_box, t), spec)
    return transition_density(psi, phi)


def snapshot_sequence(scenario: Scenario, formulation, final_box=None, spec: GridSpec | None = None):
    """One non-negative density field per panel time.

    CF panels hold |psi|^2 of the split wavefunction. TSF panels hold
    |phi* psi| normalized to unit integral, for the given final box.
    """
    form = Formulation.parse(formulation)
    if form is Formulation.TSF and final_box is None:
        raise MissingFinalCondition("TSF snapshots need a final box (b1 or b2)")
    spec = spec or snapshot_grid(scenario)
    out = []
    for t in scenario.panel_times:
        if form is Formulation.CF:
            psi = cf_wavefunction(scenario, t, spec)
            dens = np.abs(psi.values) ** 2
        else:
            dens = np.abs(tsf_density(scenario, Box.parse(final_box), t, spec).values)
        out.append((t, ComplexField(spec, dens, t)))
    return out


def _segment_distance(X, Y, a, b):
    ax, ay = a
    bx, by = b
    ux, uy = bx - ax, by - ay
    L2 = ux * ux + uy * uy
    s = np.clip(((X - ax) * ux + (Y - ay) * uy) / L2, 0.0, 1.0)
    return np.hypot(X - (ax + s * ux), Y - (ay + s * uy))


def leg_partition(spec: GridSpec, network: PathNetwork) -> dict[tuple[str, str], np.ndarray]:
    """Assign every sample to the nearest leg; masks cover the grid exactly once."""
    X, Y = spec.mesh()
    legs = network.edges
    d = np.stack([_segment_distance(X, Y, network.nodes[a], network.nodes[b]) for a, b in legs])
    nearest = np.argmin(d, axis=0)
    return {leg: nearest == i for i, leg in enumerate(legs)}


def leg_window(spec: GridSpec, network: PathNetwork, leg, sigma0: float) -> np.ndarray:
    """Corridor along a leg beyond the splitter junction.

    Samples within LEG_HALF_WIDTH_SIGMAS * sigma0 of the leg axis whose
    distance along the leg from its start is at least
    LEG_CLEARANCE_SIGMAS * sigma0. The junction itself is shared by every
    path and is excluded.
    """
    a, b = leg
    (ax, ay), (bx, by) = network.nodes[a], network.nodes[b]
    L = math.hypot(bx - ax, by - ay)
    ux, uy = (bx - ax) / L, (by - ay) / L
    X, Y = spec.mesh()
    along = (X - ax) * ux + (Y - ay) * uy
    across = np.abs(-(X - ax) * uy + (Y - ay) * ux)
    return (along >= LEG_CLEARANCE_SIGMAS * sigma0) & (along <= L) & (across <= LEG_HALF_WIDTH_SIGMAS * sigma0)


def integrated(field, mask=None) -> float:
    v = field.values.real
    if mask is not None:
        v = v[mask]
    return float(v.sum() * field.spec.cell_area)


# -- sampling ----------------------------------------------------------------


def outcome_probabilities(scenario: Scenario, formulation, renormalize: bool | None = None):
    """(p_b1, p_b2, p_none) used for sampling.

    With ``renormalize`` the detection deficit is dropped and the two box
    probabilities are rescaled to sum to one.
    """
    form = Formulation.parse(formulation)
    renormalize = scenario.renormalize_outcomes if renormalize is None else renormalize
    fn = collapse_probability_cf if form is Formulation.CF else transition_probability_tsf
    p1 = fn(scenario, Box.B1).probability
    p2 = fn(scenario, Box.B2).probability
    if renormalize:
        s = p1 + p2
        p1, p2 = p1 / s, p2 / s
        return p1, p2, 0.0
    return p1, p2, max(0.0, 1.0 - p1 - p2)


def run_seed(root: int, index: int) -> int:
    return int(np.random.SeedSequence([root, index]).generate_state(1, np.uint64)[0])


def _draw(seed: int, p1: float, p2: float) -> Outcome:
    u = np.random.default_rng(seed).random()
    if u < p1:
        return Outcome.B1
    if u < p1 + p2:
        return Outcome.B2
    return Outcome.NO_DETECTION


def _record(run_id, seed, form, p1, p2) -> RunRecord:
    outcome = _draw(seed, p1, p2)
    # A TSF detection updates our ignorance about which transition happened;
    # nothing physical collapses.
    renormalized = form is Formulation.TSF and outcome is not Outcome.NO_DETECTION
    return RunRecord(run_id, seed, form, outcome, p1, p2, renormalized)


def sample_outcome(scenario: Scenario, formulation, seed: int, run_id: int = 0) -> RunRecord:
    form = Formulation.parse(formulation)
    p1, p2, _ = outcome_probabilities(scenario, form)
    return _record(run_id, int(seed), form, p1, p2)


def run_ensemble(scenario: Scenario, formulation, n_runs: int, seed: int, on_record=None) -> dict:
    """Sample ``n_runs`` independent trials and summarize outcome frequencies.

    ``on_record`` receives each RunRecord as it is produced. Each frequency
    is checked against a BAND_SIGMAS binomial band around its probability.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    form = Formulation.parse(formulation)
    p1, p2, p0 = outcome_probabilities(scenario, form)
    counts = {o.value: 0 for o in Outcome}
    for i in range(n_runs):
        rec = _record(i, run_seed(seed, i), form, p1, p2)
        counts[rec.outcome.value] += 1
        if on_record is not None:
            on_record(rec)
    probs = {Outcome.B1.value: p1, Outcome.B2.value: p2, Outcome.NO_DETECTION.value: p0}
    freqs = {k: counts[k] / n_runs for k in counts}
    bands = {k: BAND_SIGMAS * math.sqrt(probs[k] * (1 - probs[k]) / n_runs) for k in counts}
    passed = {k: abs(freqs[k] - probs[k]) <= bands[k] for k in counts}
    return {
        "formulation": form.value,
        "n_runs": n_runs,
        "seed": seed,
        "outcome_model": "renormalized" if scenario.renormalize_outcomes else "explicit_deficit",
        "probabilities": probs,
        "counts": counts,
        "frequencies": freqs,
        "confidence": {"band_sigmas": BAND_SIGMAS, "half_widths": bands, "pass": passed},
        "all_pass": all(passed.values()),
    }
