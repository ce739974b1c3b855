"""Coupled spectator-function equations for n+n+core trimers.

Two identical neutrons (spin-singlet, s-wave) plus a core of mass A*m_n,
pairwise separable interactions.  The bound-state problem is the coupled
homogeneous system

    F_n(q) = K_nn F_n + K_nc F_c,      F_c(q) = 2 K_cn F_n,

with kernels built from one-particle-exchange Born terms (angular
integrals in closed form) times the two-body propagators of module
model.  Discretized on a MomentumGrid the trimer condition is
det(1 - K(E)) = 0; we track the ordered eigenvalues lambda_k(E) of a
symmetrized (real, symmetric) version of K, which cross 1 exactly at the
trimer energies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from .errors import ConfigurationError, DomainError, NumericalError
from .model import (
    KEV_PER_MEV,
    ChannelLabel,
    PairChannel,
    PoleKind,
    SystemConfig,
    pole_momentum,
    reduced_mass,
    resolve_config,
    two_body_propagator,
)
from .quadrature import MomentumGrid, build_grid

# ---------------------------------------------------------------------------
# internal engine: natural units (MeV, hbar*c = 1)


class _Engine:
    """Masses, channel parameters, and propagators of a resolved config, in MeV."""

    def __init__(self, config: SystemConfig):
        config = resolve_config(config)
        self.config = config
        c = config.constants
        self.hbar_c = c.hbar_c
        self.m_n = c.nucleon_mass
        self.m_c = config.core_mass_number * c.nucleon_mass
        m_tot = 2.0 * self.m_n + self.m_c
        self.mu_nc = reduced_mass(config, ChannelLabel.neutron_core)
        self.mu_nn = reduced_mass(config, ChannelLabel.neutron_neutron)
        # spectator reduced masses: one particle against the remaining pair
        self.M_n = self.m_n * (self.m_n + self.m_c) / m_tot
        self.M_c = self.m_c * 2.0 * self.m_n / m_tot
        self.beta_nc = config.nc_channel.beta_inv_fm * c.hbar_c
        self.beta_nn = config.nn_channel.beta_inv_fm * c.hbar_c
        self.kB_nc = pole_momentum(config.nc_channel, self.mu_nc, c)
        self.kB_nn = pole_momentum(config.nn_channel, self.mu_nn, c)

    def tau_nc(self, z):
        return two_body_propagator(
            self.config.nc_channel, self.mu_nc, z, self.config.constants
        )

    def tau_nn(self, z):
        return two_body_propagator(
            self.config.nn_channel, self.mu_nn, z, self.config.constants
        )

    def threshold(self) -> float:
        """Lowest scattering threshold in MeV (0 or the dimer energy -eps2)."""
        if self.config.nc_channel.pole_kind is PoleKind.bound:
            return -self.config.nc_channel.epsilon2_keV / KEV_PER_MEV
        return 0.0


def _swave_exchange(q, qp, E, ca, cb, inv2mu_ag, inv2mu_bg, inv_mg, beta_a, beta_b):
    """Closed form of the s-wave projected one-particle-exchange integral.

    Integrand is a product of three factors linear in x = cos(angle):
    the two form-factor denominators and the exchange propagator.
    Partial fractions give a sum of logarithms; the double-root branch
    handles the case of coincident form-factor denominators (exact on
    the diagonal of symmetric blocks).
    """
    A1 = qp**2 + cb**2 * q**2 + beta_a**2
    B1 = 2.0 * cb * q * qp
    A2 = q**2 + ca**2 * qp**2 + beta_b**2
    B2 = 2.0 * ca * q * qp
    A3 = E - q**2 * inv2mu_ag - qp**2 * inv2mu_bg
    B3 = -q * qp * inv_mg

    L1 = np.log((A1 + B1) / (A1 - B1))
    L2 = np.log((A2 + B2) / (A2 - B2))
    L3 = np.log((A3 + B3) / (A3 - B3))

    D12 = A1 * B2 - A2 * B1
    D13 = A1 * B3 - A3 * B1
    D23 = A2 * B3 - A3 * B2

    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            B1 * L1 / (D12 * D13)
            - B2 * L2 / (D12 * D23)
            + B3 * L3 / (D13 * D23)
        )
    # coincident form-factor denominators: confluent partial fractions
    degenerate = np.abs(D12) <= 1e-10 * (np.abs(A1 * B2) + np.abs(A2 * B1))
    if np.any(degenerate):
        A = 0.5 * (A1 + A2)
        B = 0.5 * (B1 + B2)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = B3**2 / (A * B3 - B * A3) ** 2
            b = B / (B * A3 - A * B3)
            a = -c * B / B3
            LA = np.log((A + B) / (A - B))
            confluent = a * LA / B + 2.0 * b / (A**2 - B**2) + c * L3 / B3
        out = np.where(degenerate, confluent, out)
    return out


def _born_blocks(eng: _Engine, p, E):
    """Z_nn(q,q') and Z_nc(q,q') on the momentum array p (MeV), energy E (MeV)."""
    q = p[:, None]
    qp = p[None, :]
    c_n = eng.m_n / (eng.m_n + eng.m_c)
    Znn = _swave_exchange(
        q, qp, E, c_n, c_n,
        1.0 / (2.0 * eng.mu_nc), 1.0 / (2.0 * eng.mu_nc), 1.0 / eng.m_c,
        eng.beta_nc, eng.beta_nc,
    )
    Znc = _swave_exchange(
        q, qp, E, 0.5, eng.m_c / (eng.m_c + eng.m_n),
        1.0 / (2.0 * eng.mu_nn), 1.0 / (2.0 * eng.mu_nc), 1.0 / eng.m_n,
        eng.beta_nc, eng.beta_nn,
    )
    return Znn, Znc


# ---------------------------------------------------------------------------
# public kernel object


@dataclass(frozen=True)
class KernelMatrix:
    """Discretized kernel K(E) acting on stacked (F_n, F_c) spectator amplitudes."""

    energy: complex  # MeV, relative to three-body breakup
    matrix: np.ndarray  # (2N, 2N)
    grid: MomentumGrid

    @property
    def nn(self) -> np.ndarray:
        n = self.grid.count
        return self.matrix[:n, :n]

    @property
    def nc(self) -> np.ndarray:
        n = self.grid.count
        return self.matrix[:n, n:]

    @property
    def cn(self) -> np.ndarray:
        n = self.grid.count
        return self.matrix[n:, :n]


def build_kernel(config: SystemConfig, grid: MomentumGrid, E) -> KernelMatrix:
    """Kernel K(E); trimer condition det(1 - K(E)) = 0.

    E in MeV relative to three-body breakup.  Real E must lie below the
    lowest scattering threshold; on-cut energies belong to the
    scattering module.  Complex E is evaluated directly (Schwarz:
    K(conj E) = conj K(E)).
    """
    eng = _Engine(config)
    E = complex(E)
    if E.imag == 0.0:
        if E.real > eng.threshold():
            raise DomainError(
                f"E = {E.real:.6g} MeV lies on a scattering cut (threshold at "
                f"{eng.threshold():.6g} MeV); use the scattering module for "
                "on-shell energies"
            )
        E = E.real
    p = grid.nodes * eng.hbar_c
    w = grid.weights * eng.hbar_c
    Znn, Znc = _born_blocks(eng, p, E)
    tau_n = eng.tau_nc(E - p**2 / (2.0 * eng.M_n))
    tau_c = eng.tau_nn(E - p**2 / (2.0 * eng.M_c))
    u = 2.0 * np.pi * p**2 * w
    n = grid.count
    dtype = float if isinstance(E, float) else complex
    K = np.zeros((2 * n, 2 * n), dtype=dtype)
    if dtype is float:
        tau_n, tau_c, Znn, Znc = tau_n.real, tau_c.real, Znn.real, Znc.real
    K[:n, :n] = Znn * (tau_n * u)[None, :]
    K[:n, n:] = Znc * (tau_c * u)[None, :]
    K[n:, :n] = 2.0 * Znc.T * (tau_n * u)[None, :]
    return KernelMatrix(energy=E, matrix=K, grid=grid)


def _ordered_eigenvalues(config: SystemConfig, grid: MomentumGrid, E: float):
    """Eigenvalues of K(E), descending, via an exactly symmetric similarity.

    Below threshold all tau are real negative, so scaling by
    sqrt(-tau * u) per column/row turns K into a real symmetric matrix
    with the same spectrum.
    """
    eng = _Engine(config)
    if E > eng.threshold():
        raise DomainError(
            f"E = {E:.6g} MeV is not below the lowest threshold "
            f"({eng.threshold():.6g} MeV)"
        )
    p = grid.nodes * eng.hbar_c
    w = grid.weights * eng.hbar_c
    Znn, Znc = _born_blocks(eng, p, E)
    tau_n = eng.tau_nc(E - p**2 / (2.0 * eng.M_n)).real
    tau_c = eng.tau_nn(E - p**2 / (2.0 * eng.M_c)).real
    if np.any(tau_n >= 0) or np.any(tau_c >= 0):
        raise NumericalError("propagator changed sign below threshold")
    u = 2.0 * np.pi * p**2 * w
    s_n = np.sqrt(-tau_n * u)
    s_c = np.sqrt(-tau_c * u)
    n = grid.count
    S = np.zeros((2 * n, 2 * n))
    S[:n, :n] = -Znn.real * s_n[:, None] * s_n[None, :]
    S[:n, n:] = -math.sqrt(2.0) * Znc.real * s_n[:, None] * s_c[None, :]
    S[n:, :n] = S[:n, n:].T
    return np.sort(eigh(S, eigvals_only=True))[::-1]


def trimer_determinant(config: SystemConfig, grid: MomentumGrid, E: float) -> float:
    """Monotone surrogate 1 - lambda_max(E); sign changes bracket the ground trimer."""
    return float(1.0 - _ordered_eigenvalues(config, grid, E)[0])


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class TrimerLevel:
    index: int
    epsilon3_keV: float  # binding relative to three-body breakup, > 0


@dataclass(frozen=True)
class ThreeBodySpectrum:
    levels: tuple[TrimerLevel, ...]
    config_snapshot: SystemConfig

    def __post_init__(self):
        energies = [lv.epsilon3_keV for lv in self.levels]
        if any(e <= 0 for e in energies) or any(np.diff(energies) >= 0):
            raise ConfigurationError("spectrum levels must be positive, decreasing")


def find_trimers(
    config: SystemConfig,
    grid: MomentumGrid,
    search_window: tuple[float, float] = (1e-9, 1e9),
    max_states: int = 8,
) -> ThreeBodySpectrum:
    """All trimer binding energies eps3 (keV) inside search_window.

    search_window is a binding-energy interval (keV, positive).  Levels
    are reported only when bound relative to the n+(n+core) threshold,
    i.e. eps3 > eps2 of a bound n-core channel (strict).  Each root is
    refined by bracketed bisection to 1e-10 relative on the energy where
    the k-th kernel eigenvalue crosses 1.
    """
    lo, hi = search_window
    if not (0 < lo < hi):
        raise ConfigurationError("search_window must satisfy 0 < lo < hi (keV)")
    config = resolve_config(config)
    eng = _Engine(config)
    # bound levels live strictly below the lowest scattering threshold
    b_min = max(lo, -eng.threshold() * KEV_PER_MEV * (1.0 + 1e-12), 1e-300)
    if b_min >= hi:
        return ThreeBodySpectrum(levels=(), config_snapshot=config)
    E_hi = -b_min / KEV_PER_MEV  # least bound end
    E_lo = -hi / KEV_PER_MEV
    ev_hi = _ordered_eigenvalues(config, grid, E_hi)
    ev_lo = _ordered_eigenvalues(config, grid, E_lo)
    levels = []
    for k in range(min(max_states, len(ev_hi))):
        if not (ev_lo[k] < 1.0 < ev_hi[k]):
            continue

        def crossing(E, k=k):
            return _ordered_eigenvalues(config, grid, E)[k] - 1.0

        root = brentq(crossing, E_lo, E_hi, rtol=1e-12, xtol=1e-300, maxiter=200)
        levels.append(TrimerLevel(index=k, epsilon3_keV=-root * KEV_PER_MEV))
    return ThreeBodySpectrum(levels=tuple(levels), config_snapshot=config)


# ---------------------------------------------------------------------------
# discrete scale factor


class ResonantPairs(enum.Enum):
    all_three = "all_three"
    nc_only = "nc_only"


@dataclass(frozen=True)
class ScaleFactor:
    s0: float
    mass_ratio: float
    energy_ratio: float

    def __post_init__(self):
        if self.s0 <= 0 or self.energy_ratio <= 1:
            raise ConfigurationError("scale factor requires s0 > 0, ratio > 1")


class NoEfimovRegime:
    """Returned when the transcendental equation has no positive root."""

    def __repr__(self):
        return "NO_EFIMOV_REGIME"


NO_EFIMOV_REGIME = NoEfimovRegime()


def _scale_equation(A: float, resonant_pairs: ResonantPairs):
    """The transcendental function g(s) whose positive root is s0.

    Mellin transform of the zero-range spectator equations at unitarity
    (masses in units of m_n).  For nc_only the nn channel decouples and
    the single-channel condition applies; for all_three the 2x2 coupled
    condition 1 - M_nn - 2 M_nc M_cn = 0 is used.
    """
    mu_nc = A / (A + 1.0)
    mu_nn = 0.5
    M_n = (A + 1.0) / (A + 2.0)
    M_c = 2.0 * A / (A + 2.0)
    phi_nn = math.acos(1.0 / (A + 1.0))
    phi_nc = math.acos(math.sqrt(mu_nn * mu_nc))
    P_nn = (A / mu_nc) * math.sqrt(M_n / mu_nc)
    P_nc = (1.0 / mu_nn) * math.sqrt(M_c / mu_nn)
    P_cn = (1.0 / mu_nc) * math.sqrt(M_n / mu_nc)

    if resonant_pairs is ResonantPairs.all_three:

        def g(s):
            ch = math.cosh(math.pi * s / 2.0)
            m_nn = P_nn * math.sinh(s * (math.pi / 2.0 - phi_nn)) / (s * ch)
            m_nc = P_nc * math.sinh(s * (math.pi / 2.0 - phi_nc)) / (s * ch)
            m_cn = P_cn * math.sinh(s * (math.pi / 2.0 - phi_nc)) / (s * ch)
            return 1.0 - m_nn - 2.0 * m_nc * m_cn

        return g

    def g(s):
        ch = math.cosh(math.pi * s / 2.0)
        return 1.0 - P_nn * math.sinh(s * (math.pi / 2.0 - phi_nn)) / (s * ch)

    return g


def efimov_scale_factor(
    mass_ratio: float, resonant_pairs: ResonantPairs = ResonantPairs.all_three
) -> ScaleFactor | NoEfimovRegime:
    """Positive root s0 of the scale-invariance condition, to 1e-12.

    mass_ratio A is the core mass in units of the neutron mass.
    """
    if mass_ratio <= 0:
        raise ConfigurationError("mass_ratio must be > 0")
    g = _scale_equation(mass_ratio, resonant_pairs)
    # g(0+) < 0 in the Efimov regime (kernel strength exceeds 1), g(inf) -> 1
    s_lo, s_hi = 1e-8, 1.0
    if g(s_lo) >= 0.0:
        return NO_EFIMOV_REGIME
    while g(s_hi) < 0.0:
        s_hi *= 2.0
        if s_hi > 1e4:
            return NO_EFIMOV_REGIME
    s0 = brentq(g, s_lo, s_hi, xtol=1e-15, rtol=8.9e-16, maxiter=300)
    return ScaleFactor(
        s0=s0, mass_ratio=mass_ratio, energy_ratio=math.exp(2.0 * math.pi / s0)
    )


# ---------------------------------------------------------------------------
# threshold scan and calibration


@dataclass(frozen=True)
class ScanPoint:
    epsilon2_keV: float
    bound_excited_count: int


@dataclass(frozen=True)
class Crossing:
    state_index: int
    epsilon2_star_keV: float


@dataclass(frozen=True)
class ThresholdScan:
    points: tuple[ScanPoint, ...]
    crossings: tuple[Crossing, ...]


def _with_epsilon2(config: SystemConfig, eps2_keV: float) -> SystemConfig:
    nc = replace(config.nc_channel, epsilon2_keV=eps2_keV, scattering_length_fm=None)
    return resolve_config(replace(config, nc_channel=nc))


def _excited_count(config: SystemConfig, grid: MomentumGrid, eps2_keV: float) -> int:
    """Number of excited trimers bound relative to the dimer at this eps2 (strict)."""
    cfg = _with_epsilon2(config, eps2_keV)
    ev = _ordered_eigenvalues(cfg, grid, -eps2_keV / KEV_PER_MEV)
    return int(np.sum(ev[1:] > 1.0))


def threshold_scan(
    config_template: SystemConfig,
    epsilon2_values: np.ndarray,
    grid: MomentumGrid,
) -> ThresholdScan:
    """Count bound excited trimers along an ascending eps2 scan; locate crossings.

    A crossing eps2*(n) is where excited state n satisfies eps3(n) = eps2
    (the state dissolves into the n+dimer continuum); located by
    bisection in eps2, well inside the 0.1 keV contract.
    """
    eps2 = np.asarray(epsilon2_values, dtype=float)
    if eps2.size == 0 or np.any(eps2 <= 0):
        raise ConfigurationError("epsilon2 values must be positive")
    if np.any(np.diff(eps2) <= 0):
        raise ConfigurationError("epsilon2 values must be strictly ascending")
    counts = [_excited_count(config_template, grid, e) for e in eps2]
    points = tuple(
        ScanPoint(epsilon2_keV=float(e), bound_excited_count=c)
        for e, c in zip(eps2, counts)
    )
    crossings = []
    for i in range(len(eps2) - 1):
        c_hi, c_lo = counts[i], counts[i + 1]
        for n in range(c_lo + 1, c_hi + 1):
            # excited state n corresponds to eigenvalue index n (0-based)
            def at_threshold(e2, n=n):
                cfg = _with_epsilon2(config_template, e2)
                ev = _ordered_eigenvalues(cfg, grid, -e2 / KEV_PER_MEV)
                return float(ev[n] - 1.0)

            star = brentq(
                at_threshold, eps2[i], eps2[i + 1], rtol=1e-10, xtol=1e-300,
                maxiter=200,
            )
            crossings.append(Crossing(state_index=n, epsilon2_star_keV=float(star)))
    crossings.sort(key=lambda c: c.state_index)
    return ThresholdScan(points=points, crossings=tuple(crossings))


def calibrate_range_parameter(
    config_template: SystemConfig,
    grid: MomentumGrid,
    target_epsilon2_star_keV: float = 220.0,
    state_index: int = 1,
    beta_bounds: tuple[float, float] = (0.25, 6.0),
) -> SystemConfig:
    """Adjust beta_nc so excited state `state_index` dissolves at the target eps2.

    Single-scalar calibration: returns the template with beta_nc replaced
    so that eps2*(state_index) = target.  Raises NumericalError if the
    bracket does not contain a solution.
    """
    target = target_epsilon2_star_keV

    def misfit(beta):
        nc = replace(
            config_template.nc_channel,
            beta_inv_fm=beta,
            epsilon2_keV=target,
            scattering_length_fm=None,
        )
        cfg = resolve_config(replace(config_template, nc_channel=nc))
        ev = _ordered_eigenvalues(cfg, grid, -target / KEV_PER_MEV)
        return float(ev[state_index] - 1.0)

    lo, hi = beta_bounds
    f_lo, f_hi = misfit(lo), misfit(hi)
    if f_lo * f_hi > 0:
        raise NumericalError(
            f"calibration bracket beta in [{lo}, {hi}] fm^-1 does not straddle "
            f"the target (misfits {f_lo:.3g}, {f_hi:.3g})"
        )
    beta = brentq(misfit, lo, hi, rtol=1e-10, xtol=1e-300, maxiter=200)
    nc = replace(config_template.nc_channel, beta_inv_fm=beta)
    return resolve_config(replace(config_template, nc_channel=nc))


# ---------------------------------------------------------------------------
# 19B preset


def boron19_config(
    a_nc_fm: float = -179.0, beta_inv_fm: float = 40.0
) -> SystemConfig:
    """n+n+17B with a near-threshold virtual n-core channel.

    Large beta plays the role of a zero-range regulator; the physics is
    controlled by the scattering lengths.
    """
    return resolve_config(
        SystemConfig(
            core_mass_number=17,
            nc_channel=PairChannel(
                ChannelLabel.neutron_core,
                PoleKind.virtual if a_nc_fm < 0 else PoleKind.bound,
                beta_inv_fm=beta_inv_fm,
                scattering_length_fm=a_nc_fm,
            ),
            nn_channel=PairChannel(
                ChannelLabel.neutron_neutron,
                PoleKind.virtual,
                beta_inv_fm=beta_inv_fm,
                scattering_length_fm=-18.5,
            ),
        )
    )


def boron19_check(
    config: SystemConfig | None = None,
    grid: MomentumGrid | None = None,
) -> ThreeBodySpectrum:
    """Spectrum of the 19B-like system (defaults: A=17, a_nc = -179 fm)."""
    if config is None:
        config = boron19_config()
    if grid is None:
        grid = build_grid(160, 0.05)
    return find_trimers(config, grid, search_window=(1e-9, 1e12), max_states=8)
