"""Physical gate unitaries, timing noise and fidelity calibration.

All frequencies are angular (hbar = 1) and dimensionless: the Zeeman
difference of an exchange-coupled spin pair sets the scale.  Only the
product of gate frequency and duration jitter enters any fidelity, so
absolute scales are free choices.

Gate families:

``1qld``
    Driven single-spin gate (lab frame, on- or off-resonant).
``h``
    Exchange gate within a pair tuned to J = dEz, a Hadamard on the
    odd-parity (computational) subspace of the pair.
``cz``
    Exchange gate between two spins tuned to J = dEz/sqrt(3), a CZ after
    virtual phase corrections.
``cnot``
    Driven two-spin CNOT, block-diagonal in the control spin.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2

FAMILIES = ("1qld", "h", "cz", "cnot")

# Small-angle inversion constants: 1 - Fbar = (omega * sigma)^2 / k.
_FBAR_K = {"1qld": 6.0, "h": 10.0, "cz": 10.0, "cnot": 2.0}


class CalibrationError(ValueError):
    """Requested fidelity outside the validity of the small-angle expansion."""


@dataclass(frozen=True)
class GateParams:
    """Physical parameters defining one gate instance.

    ``j``/``delta_ez``/``ez`` describe exchange gates, ``rabi``/``omega``/
    ``omega_q`` the driven ones.  ``omega_r`` is always derived, never
    stored, so it cannot go stale.
    """

    family: str
    duration: float
    j: float = 0.0
    delta_ez: float = 0.0
    ez: float = 0.0
    rabi: float = 0.0
    omega: float = 0.0
    omega_q: float = 0.0
    # CNOT extras: idle-block rotation axis angle from z (radians) and the
    # optional explicit rotation angles theta1 = 2 * theta2.
    idle_axis_angle: float = math.pi / 6
    theta2: float | None = None
    theta1: float | None = None

    def __post_init__(self):
        for name in ("j", "delta_ez", "ez", "rabi", "omega", "omega_q", "duration"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown gate family {self.family!r}")

    @property
    def delta_omega(self) -> float:
        """Drive detuning for the 1Q gate."""
        return self.omega_q - self.omega

    @property
    def omega_r(self) -> float:
        """Generalized rotation frequency of the gate."""
        if self.family == "1qld":
            return math.hypot(self.rabi, self.delta_omega)
        if self.family == "cnot":
            return self.rabi
        return math.hypot(self.j, self.delta_ez)


@dataclass(frozen=True)
class NoiseConfig:
    """Per-family timing noise plus shuttling and measurement errors."""

    sigma_t: dict = field(default_factory=dict)
    target_fbar: dict = field(default_factory=dict)
    p_sh_ld: float = 0.0
    p_sh_st: float = 0.0
    p_meas_ld: float = 0.0
    p_meas_st: float = 0.0

    def __post_init__(self):
        for name in ("p_sh_ld", "p_sh_st", "p_meas_ld", "p_meas_st"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability, got {v}")
        for fam, s in self.sigma_t.items():
            if s < 0:
                raise ValueError(f"sigma_t[{fam}] must be >= 0")

    @classmethod
    def from_common_infidelity(cls, p: float, p_sh_ld: float = 0.0,
                               p_sh_st: float = 0.0) -> "NoiseConfig":
        """All gate families at infidelity ``p``; measurement errors at ``p``."""
        fbar = {fam: 1.0 - p for fam in FAMILIES}
        sigma = {fam: calibrate_sigma(fam, 1.0 - p) for fam in FAMILIES} if p > 0 \
            else {fam: 0.0 for fam in FAMILIES}
        return cls(sigma_t=sigma, target_fbar=fbar, p_sh_ld=p_sh_ld,
                   p_sh_st=p_sh_st, p_meas_ld=p, p_meas_st=p)


@dataclass(frozen=True)
class GateLocation:
    """One physical gate site with its frozen sampled duration."""

    site: int
    family: str
    params: GateParams


def canonical_params(family: str, variant: str = "", duration: float | None = None) -> GateParams:
    """Reference parameters realising each gate family's calibration point.

    ``variant`` selects the target within a family: ``"x"``/``"h"`` for the
    driven single-spin gate, ``"anti"`` for the anti-controlled CNOT.
    """
    if family == "h":
        omega_r = SQRT2
        t0 = math.pi / omega_r
        p = GateParams(family="h", j=1.0, delta_ez=1.0, ez=10.0,
                       duration=t0 if duration is None else duration)
    elif family == "cz":
        omega_r = 2.0 / SQRT3
        t0 = 2.0 * math.pi / omega_r
        p = GateParams(family="cz", j=1.0 / SQRT3, delta_ez=1.0, ez=10.0,
                       duration=t0 if duration is None else duration)
    elif family == "1qld":
        if variant == "h":
            # Detuned drive with delta_omega = rabi puts the rotation axis
            # halfway between x and z.
            rabi = 1.0 / SQRT2
            p = GateParams(family="1qld", rabi=rabi, omega=10.0,
                           omega_q=10.0 + rabi,
                           duration=math.pi if duration is None else duration)
        else:
            p = GateParams(family="1qld", rabi=1.0, omega=10.0, omega_q=10.0,
                           duration=math.pi if duration is None else duration)
    elif family == "cnot":
        p = GateParams(family="cnot", rabi=1.0, j=0.05, delta_ez=1.0, ez=10.0,
                       duration=math.pi if duration is None else duration)
    else:
        raise ValueError(f"unknown gate family {family!r}")
    return p


def nominal_duration(family: str) -> float:
    """Calibrated gate time T0 of a family's canonical parameters."""
    return canonical_params(family).duration


def family_frequency(family: str) -> float:
    """The gate frequency entering the fidelity formulas."""
    return canonical_params(family).omega_r


def unitary_drive_1q(params: GateParams) -> np.ndarray:
    """Exact lab-frame unitary of the driven single-spin gate."""
    omega_r = params.omega_r
    t = params.duration
    if omega_r <= 0.0:
        if t == 0.0:
            return np.eye(2, dtype=complex)
        raise ValueError("omega_r = 0 with nonzero duration: rotation axis undefined")
    dw = params.delta_omega
    c = math.cos(omega_r * t / 2)
    s = math.sin(omega_r * t / 2)
    diag = c - 1j * (dw / omega_r) * s
    off = -1j * (params.rabi / omega_r) * s
    ph = np.exp(-1j * params.omega * t / 2)
    return np.array([[diag * ph, off * ph],
                     [off * ph.conjugate(), diag.conjugate() * ph.conjugate()]])


def unitary_exchange(params: GateParams) -> np.ndarray:
    """Exact lab-frame exchange-gate unitary on two spins.

    Basis order (uu, ud, du, dd).  Spin conserving: the even-parity corners
    only carry phases and the parity sectors never mix.
    """
    omega_r = params.omega_r
    t = params.duration
    if omega_r <= 0.0:
        if t == 0.0:
            return np.eye(4, dtype=complex)
        raise ValueError("omega_r = 0 with nonzero duration: rotation axis undefined")
    c = math.cos(omega_r * t / 2)
    s = math.sin(omega_r * t / 2)
    phase_j = np.exp(1j * params.j * t / 2)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = np.exp(-1j * params.ez * t)
    u[3, 3] = np.exp(1j * params.ez * t)
    u[1, 1] = (c - 1j * (params.delta_ez / omega_r) * s) * phase_j
    u[2, 2] = (c + 1j * (params.delta_ez / omega_r) * s) * phase_j
    u[1, 2] = u[2, 1] = -1j * (params.j / omega_r) * s * phase_j
    return u


def _rotation(angle: float, axis: np.ndarray) -> np.ndarray:
    """exp(-i * angle/2 * axis . sigma) for a unit axis (x, y, z)."""
    c = math.cos(angle / 2)
    s = math.sin(angle / 2)
    nx, ny, nz = axis
    return np.array([[c - 1j * s * nz, -s * (ny + 1j * nx)],
                     [s * (ny - 1j * nx), c + 1j * s * nz]])


def unitary_cnot(params: GateParams, anti: bool = False) -> np.ndarray:
    """Driven CNOT between two spins, block-diagonal in the control spin.

    Block-local phase offsets (virtual Z on the control) are folded in so
    that theta2 = pi yields CNOT exactly.  The idle block rotates by
    theta1 = 2 * theta2 about a tilted axis set by ``idle_axis_angle``.
    """
    theta2 = params.theta2 if params.theta2 is not None else params.rabi * params.duration
    theta1 = params.theta1 if params.theta1 is not None else 2.0 * theta2
    if abs(theta1 - 2.0 * theta2) > 1e-12:
        raise ValueError("synchronisation condition theta1 = 2*theta2 violated")
    a = params.idle_axis_angle
    idle_axis = np.array([math.sin(a), 0.0, math.cos(a)])
    # Idle block: R(theta1) with calibration phase making theta1 = 2*pi -> I.
    r_idle = -_rotation(theta1, idle_axis)
    # Driven block: x rotation with calibration phase making theta2 = pi -> X.
    r_drive = 1j * _rotation(theta2, np.array([1.0, 0.0, 0.0]))
    u = np.zeros((4, 4), dtype=complex)
    if anti:
        u[:2, :2] = r_drive
        u[2:, 2:] = r_idle
    else:
        u[:2, :2] = r_idle
        u[2:, 2:] = r_drive
    return u


def exchange_virtual_z(params: GateParams) -> np.ndarray:
    """Deterministic virtual phase correction calibrating an exchange gate.

    Diagonal correction cancelling the Zeeman corner phases and the
    odd-sector exchange phase at the nominal duration; applied from the
    left it turns the raw exchange unitary at T0 into the exact encoded
    H or CZ.
    """
    t0 = nominal_duration(params.family)
    corner = np.exp(1j * params.ez * t0)
    mid = 1j * np.exp(-1j * params.j * t0 / 2)
    if params.family == "h":
        return np.diag([corner, mid, mid, corner.conjugate()])
    if params.family == "cz":
        mid = -np.exp(-1j * params.j * t0 / 2)
        return np.diag([corner, mid, mid, -corner.conjugate()])
    raise ValueError(f"not an exchange family: {params.family!r}")


def ideal_gate(family: str, variant: str = "") -> np.ndarray:
    """Calibrated target unitary of a gate family."""
    if family == "h":
        u = np.eye(4, dtype=complex)
        u[1:3, 1:3] = HADAMARD
        return u
    if family == "cz":
        return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    if family == "cnot":
        u = np.eye(4, dtype=complex)
        if variant == "anti":
            u[:2, :2] = PAULI_X
        else:
            u[2:, 2:] = PAULI_X
        return u
    if family == "1qld":
        return HADAMARD.copy() if variant == "h" else PAULI_X.copy()
    raise ValueError(f"unknown gate family {family!r}")


def calibrated_gate(family: str, duration: float, variant: str = "") -> np.ndarray:
    """Noisy gate with all virtual phase corrections folded in.

    Equal to the ideal gate followed by the residual rotation caused by the
    duration error; reproduces the closed-form average-fidelity expressions
    exactly.
    """
    p = canonical_params(family, variant)
    t0 = p.duration
    dtheta = p.omega_r * (duration - t0)
    if family == "1qld":
        axis = np.array([p.rabi, 0.0, p.delta_omega]) / p.omega_r
        return ideal_gate(family, variant) @ _rotation(dtheta, axis)
    if family in ("h", "cz"):
        axis = np.array([p.j, 0.0, p.delta_ez]) / p.omega_r
        res = np.eye(4, dtype=complex)
        res[1:3, 1:3] = _rotation(dtheta, axis)
        return ideal_gate(family) @ res
    if family == "cnot":
        axis = np.array([math.sin(p.idle_axis_angle), 0.0, math.cos(p.idle_axis_angle)])
        res = np.zeros((4, 4), dtype=complex)
        if variant == "anti":
            res[:2, :2] = _rotation(dtheta, np.array([1.0, 0.0, 0.0]))
            res[2:, 2:] = _rotation(2 * dtheta, axis)
        else:
            res[:2, :2] = _rotation(2 * dtheta, axis)
            res[2:, 2:] = _rotation(dtheta, np.array([1.0, 0.0, 0.0]))
        return ideal_gate(family, variant) @ res
    raise ValueError(f"unknown gate family {family!r}")


def average_fidelity(u: np.ndarray, u_target: np.ndarray) -> float:
    """Average gate fidelity (d + |Tr(U_target^dag U)|^2) / (d (d + 1))."""
    if u.shape != u_target.shape or u.shape[0] != u.shape[1]:
        raise ValueError(f"dimension mismatch: {u.shape} vs {u_target.shape}")
    d = u.shape[0]
    tr = np.trace(u_target.conj().T @ u)
    return float((d + abs(tr) ** 2) / (d * (d + 1)))


def analytic_fbar(family: str, sigma_t: float) -> float:
    """Small-angle analytic average fidelity at duration jitter ``sigma_t``."""
    s = family_frequency(family) * sigma_t
    return 1.0 - s * s / _FBAR_K[family]


def exact_fbar(family: str, sigma_t: float) -> float:
    """Closed-form Gaussian average of the exact fidelity expressions."""
    s2 = (family_frequency(family) * sigma_t) ** 2
    if family == "1qld":
        return (4.0 + 2.0 * math.exp(-s2 / 2)) / 6.0
    if family in ("h", "cz"):
        return (10.0 + 8.0 * math.exp(-s2 / 8) + 2.0 * math.exp(-s2 / 2)) / 20.0
    if family == "cnot":
        return (8.0 + 2.0 * math.exp(-2 * s2) + 4.0 * math.exp(-9 * s2 / 8)
                + 4.0 * math.exp(-s2 / 8) + 2.0 * math.exp(-s2 / 2)) / 20.0
    raise ValueError(f"unknown gate family {family!r}")


def numeric_fbar(family: str, sigma_t: float, variant: str = "", order: int = 101) -> float:
    """Gauss-Hermite quadrature of average_fidelity over Normal(T0, sigma)."""
    if sigma_t == 0.0:
        return 1.0
    t0 = nominal_duration(family)
    target = ideal_gate(family, variant)
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    total = 0.0
    for x, w in zip(nodes, weights):
        t = t0 + SQRT2 * sigma_t * x
        total += w * average_fidelity(calibrated_gate(family, t, variant), target)
    return total / math.sqrt(math.pi)


def calibrate_sigma(family: str, target_fbar: float) -> float:
    """Duration jitter reproducing ``target_fbar`` for the family.

    Inverts the small-angle expressions; valid only for infidelities below
    ten percent where the expansion holds.
    """
    if not 0.9 < target_fbar <= 1.0:
        raise CalibrationError(
            f"target fidelity {target_fbar} outside small-angle validity (0.9, 1]")
    if target_fbar == 1.0:
        return 0.0
    k = _FBAR_K[family]
    return math.sqrt(k * (1.0 - target_fbar)) / family_frequency(family)


def calibration_report(targets: dict) -> list[dict]:
    """Analytic-vs-numeric calibration rows, one per family."""
    rows = []
    for family, fbar in targets.items():
        sigma = calibrate_sigma(family, fbar)
        rows.append({
            "family": family,
            "omega": family_frequency(family),
            "t0": nominal_duration(family),
            "sigma_t": sigma,
            "fbar_analytic": analytic_fbar(family, sigma),
            "fbar_numeric": numeric_fbar(family, sigma),
        })
    return rows


def dump_calibration(targets: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(calibration_report(targets), fh, indent=2)


def sample_locations(rng: np.random.Generator, families: list[str],
                     noise: NoiseConfig) -> list[GateLocation]:
    """Freeze one duration draw per gate site for a whole campaign.

    ``families`` lists the gate family of each site in order; the returned
    table is immutable and reused by every Monte-Carlo shot.
    """
    locations = []
    for site, family in enumerate(families):
        sigma = noise.sigma_t.get(family, 0.0)
        t0 = nominal_duration(family)
        t = t0 if sigma == 0.0 else rng.normal(t0, sigma)
        params = replace(canonical_params(family), duration=t)
        locations.append(GateLocation(site=site, family=family, params=params))
    return locations
