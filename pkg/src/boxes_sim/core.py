"""Physical parameters, Gaussian packets, grids and grid fields."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AliasingRisk, GridTooSmall, ZeroField

# Half-width of the sampling window, in density standard deviations, that a
# packet must fit inside.
COVERAGE_STDS = 6.0
# Spectral half-width, in momentum standard deviations, kept below Nyquist.
NYQUIST_STDS = 8.0


@dataclass(frozen=True)
class PhysicalParams:
    hbar: float = 1.0
    mass: float = 1.0
    sigma0: float = 50.0  # std of |psi|^2 per axis
    kx: float = 0.4

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.sigma0 > 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        if not self.kx >= 0:
            raise ValueError(f"kx must be non-negative, got {self.kx}")

    @property
    def speed(self) -> float:
        return self.hbar * self.kx / self.mass

    @property
    def sigma_k(self) -> float:
        return 1.0 / (2.0 * self.sigma0)

    @property
    def k_required(self) -> float:
        """Largest wavevector a grid must resolve for these parameters."""
        return self.kx + NYQUIST_STDS * self.sigma_k


@dataclass(frozen=True)
class GaussianPacket:
    """Isotropic free Gaussian wavepacket in closed form.

    The wavefunction is

        psi(r) = exp(-|r-c|^2 / (4 sigma^2 (1 + i chirp)) + i k.(r-c) + i phase)
                 / (sqrt(2 pi) sigma (1 + i chirp))

    where ``sigma`` is the density std at the waist and ``chirp`` is the
    dimensionless spreading ratio hbar*t/(2 m sigma^2) measured from the waist.
    The prefactor keeps the L2 norm at exactly one for every chirp.
    """

    center: tuple[float, float] = (0.0, 0.0)
    sigma: float = 50.0
    wavevector: tuple[float, float] = (0.4, 0.0)
    chirp: float = 0.0
    global_phase: float = 0.0
    t_ref: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "wavevector", (float(self.wavevector[0]), float(self.wavevector[1])))

    @classmethod
    def from_params(cls, params: PhysicalParams, center=(0.0, 0.0), direction=(1.0, 0.0), t_ref=0.0):
        """Unspread packet with the parameters' width and momentum magnitude."""
        ux, uy = _unit(direction)
        return cls(
            center=center,
            sigma=params.sigma0,
            wavevector=(params.kx * ux, params.kx * uy),
            t_ref=t_ref,
        )

    @property
    def complex_width(self) -> complex:
        return 1.0 + 1j * self.chirp

    @property
    def density_std(self) -> float:
        return self.sigma * math.sqrt(1.0 + self.chirp**2)

    @property
    def k_magnitude(self) -> float:
        return math.hypot(*self.wavevector)

    def evaluate(self, x, y):
        w = self.complex_width
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        arg = -(dx * dx + dy * dy) / (4.0 * self.sigma**2 * w)
        arg = arg + 1j * (self.wavevector[0] * dx + self.wavevector[1] * dy + self.global_phase)
        return np.exp(arg) / (math.sqrt(2.0 * math.pi) * self.sigma * w)

    def with_direction(self, direction) -> GaussianPacket:
        """Same packet with its wavevector turned to ``direction``.

        For an isotropic envelope this equals a rigid rotation about the
        center, which is how an ideal thin mirror acts on the packet.
        """
        ux, uy = _unit(direction)
        k = self.k_magnitude
        return replace(self, wavevector=(k * ux, k * uy))


@dataclass(frozen=True)
class GridSpec:
    """Uniform sample lattice; sample (i, j) sits at origin + (i*dx, j*dy).

    Passing ``params`` checks the anti-aliasing bound at construction.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple[float, float] = (0.0, 0.0)
    params: PhysicalParams | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if n < 16 or n & (n - 1):
                raise ValueError(f"{name} must be a power of two >= 16, got {n}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError(f"dx, dy must be positive, got {self.dx}, {self.dy}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        if self.params is not None:
            self.require_nyquist(self.params.k_required)

    @classmethod
    def centered(cls, center, n, dx, ny=None, dy=None, params=None) -> GridSpec:
        ny = n if ny is None else ny
        dy = dx if dy is None else dy
        origin = (center[0] - (n // 2) * dx, center[1] - (ny // 2) * dy)
        return cls(n, ny, dx, dy, origin, params=params)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def nyquist(self) -> tuple[float, float]:
        return (math.pi / self.dx, math.pi / self.dy)

    @property
    def center(self) -> tuple[float, float]:
        return (self.origin[0] + (self.nx // 2) * self.dx, self.origin[1] + (self.ny // 2) * self.dy)

    def nyquist_ok(self, params: PhysicalParams) -> bool:
        k = params.k_required
        return min(self.nyquist) > k

    def require_nyquist(self, kx_needed: float, ky_needed: float | None = None):
        ky_needed = kx_needed if ky_needed is None else ky_needed
        nqx, nqy = self.nyquist
        if not (nqx > kx_needed and nqy > ky_needed):
            raise AliasingRisk(
                f"Nyquist wavevector ({nqx:.4g}, {nqy:.4g}) does not exceed required "
                f"({kx_needed:.4g}, {ky_needed:.4g}); reduce dx/dy"
            )

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.origin[0] + self.dx * np.arange(self.nx)
        y = self.origin[1] + self.dy * np.arange(self.ny)
        return x, y

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="ij")

    def shifted(self, sx: int, sy: int = 0) -> GridSpec:
        """Same lattice translated by a whole number of samples."""
        return replace(self, origin=(self.origin[0] + sx * self.dx, self.origin[1] + sy * self.dy))

    def same_lattice(self, other: GridSpec) -> bool:
        return (self.nx, self.ny, self.dx, self.dy, self.origin) == (
            other.nx, other.ny, other.dx, other.dy, other.origin
        )


@dataclass(frozen=True, eq=False)
class ComplexField:
    spec: GridSpec
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.spec.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def scaled(self, factor) -> ComplexField:
        return ComplexField(self.spec, self.values * factor, self.t)

    def __add__(self, other: ComplexField) -> ComplexField:
        if not self.spec.same_lattice(other.spec) or self.t != other.t:
            raise ValueError("cannot add fields on different grids or times")
        return ComplexField(self.spec, self.values + other.values, self.t)


def _unit(v) -> tuple[float, float]:
    n = math.hypot(v[0], v[1])
    if n == 0:
        raise ValueError("direction must be non-zero")
    return (v[0] / n, v[1] / n)


def check_coverage(packet: GaussianPacket, spec: GridSpec):
    x, y = spec.axes()
    r = COVERAGE_STDS * packet.density_std
    cx, cy = packet.center
    if cx - r < x[0] or cx + r > x[-1] or cy - r < y[0] or cy + r > y[-1]:
        raise GridTooSmall(
            f"packet at ({cx:.6g}, {cy:.6g}) with density std {packet.density_std:.6g} needs "
            f"+/-{r:.6g} but grid spans x[{x[0]:.6g}, {x[-1]:.6g}] y[{y[0]:.6g}, {y[-1]:.6g}]"
        )


def packet_to_field(packet: GaussianPacket, spec: GridSpec) -> ComplexField:
    check_coverage(packet, spec)
    sk = NYQUIST_STDS / (2.0 * packet.sigma)
    spec.require_nyquist(abs(packet.wavevector[0]) + sk, abs(packet.wavevector[1]) + sk)
    X, Y = spec.mesh()
    return ComplexField(spec, packet.evaluate(X, Y), packet.t_ref)


def field_norm(field: ComplexField) -> float:
    """Squared L2 norm as a Riemann sum."""
    v = field.values
    return float(np.sum(v.real**2 + v.imag**2) * field.spec.cell_area)


def density_moments(field: ComplexField):
    """Centroid and per-axis std of |psi|^2."""
    rho = np.abs(field.values) ** 2
    total = rho.sum()
    if total == 0:
        raise ZeroField("cannot take moments of a zero field")
    x, y = field.spec.axes()
    px = rho.sum(axis=1) / total
    py = rho.sum(axis=0) / total
    mx = float(px @ x)
    my = float(py @ y)
    sx = math.sqrt(float(px @ (x - mx) ** 2))
    sy = math.sqrt(float(py @ (y - my) ** 2))
    return (mx, my), (sx, sy)


def mirror_x(field: ComplexField) -> ComplexField:
    """Reflect x -> -x."""
    s = field.spec
    origin = (-(s.origin[0] + (s.nx - 1) * s.dx), s.origin[1])
    return ComplexField(replace(s, origin=origin), field.values[::-1, :], field.t)
