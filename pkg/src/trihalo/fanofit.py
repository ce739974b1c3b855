"""Fano and Breit-Wigner lineshapes with a damped least-squares fitter.

sigma(E) = sigma0 (q + eps)^2 / (1 + eps^2),  eps = (E - E_r)/(Gamma/2)

Residuals are relative (divided by the data, floored at 1e-12 * max
sigma) because the Fano profile spans orders of magnitude near its zero.
The fitter is a hand-rolled Levenberg-Marquardt on the analytic
Jacobian: deterministic, no RNG, no external optimizer state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, FlatDataError

STEP_TOL = 1e-10
GRAD_TOL = 1e-12
MAX_ITERATIONS = 500
RESIDUAL_FLOOR_SCALE = 1e-12


@dataclass(frozen=True)
class FanoParameters:
    sigma0_fm2: float
    q: float
    E_r_keV: float
    Gamma_keV: float

    def __post_init__(self):
        if not (self.sigma0_fm2 > 0 and self.Gamma_keV > 0):
            raise ConfigurationError("Fano parameters need sigma0 > 0, Gamma > 0")
        if not math.isfinite(self.q):
            raise ConfigurationError("Fano q must be finite")

    def as_array(self):
        return np.array([self.sigma0_fm2, self.q, self.E_r_keV, self.Gamma_keV])


@dataclass(frozen=True)
class BreitWignerParameters:
    sigma_bg_fm2: float
    amplitude_fm2: float
    E_r_keV: float
    Gamma_keV: float

    def __post_init__(self):
        if self.sigma_bg_fm2 < 0:
            raise ConfigurationError("Breit-Wigner background must be >= 0")
        if not (self.amplitude_fm2 > 0 and self.Gamma_keV > 0):
            raise ConfigurationError("Breit-Wigner needs amplitude > 0, Gamma > 0")

    def as_array(self):
        return np.array(
            [self.sigma_bg_fm2, self.amplitude_fm2, self.E_r_keV, self.Gamma_keV]
        )


def fano_profile(E, p: FanoParameters):
    eps = (np.asarray(E, dtype=float) - p.E_r_keV) / (p.Gamma_keV / 2.0)
    out = p.sigma0_fm2 * (p.q + eps) ** 2 / (1.0 + eps**2)
    return out if out.ndim else float(out)


def breit_wigner_profile(E, p: BreitWignerParameters):
    eps = (np.asarray(E, dtype=float) - p.E_r_keV) / (p.Gamma_keV / 2.0)
    out = p.sigma_bg_fm2 + p.amplitude_fm2 / (1.0 + eps**2)
    return out if out.ndim else float(out)


# raw-array model evaluations used inside the fitter (no dataclass
# validation so intermediate iterates may roam)


def _fano_value(E, th):
    s0, q, Er, G = th
    eps = (E - Er) / (G / 2.0)
    return s0 * (q + eps) ** 2 / (1.0 + eps**2)


def _fano_jacobian(E, th):
    s0, q, Er, G = th
    eps = (E - Er) / (G / 2.0)
    denom = 1.0 + eps**2
    F = (q + eps) ** 2 / denom
    dq = 2.0 * s0 * (q + eps) / denom
    deps = 2.0 * s0 * (q + eps) * (1.0 - q * eps) / denom**2
    dEr = deps * (-2.0 / G)
    dG = deps * (-eps / G)
    return np.column_stack([F, dq, dEr, dG])


def _bw_value(E, th):
    bg, amp, Er, G = th
    eps = (E - Er) / (G / 2.0)
    return bg + amp / (1.0 + eps**2)


def _bw_jacobian(E, th):
    bg, amp, Er, G = th
    eps = (E - Er) / (G / 2.0)
    denom = 1.0 + eps**2
    damp = 1.0 / denom
    deps = -2.0 * amp * eps / denom**2
    dEr = deps * (-2.0 / G)
    dG = deps * (-eps / G)
    return np.column_stack([np.ones_like(E), damp, dEr, dG])


_MODELS = {
    "fano": (_fano_value, _fano_jacobian),
    "breit_wigner": (_bw_value, _bw_jacobian),
}


@dataclass(frozen=True)
class FitResult:
    model: str
    params: FanoParameters | BreitWignerParameters
    residual_norm: float
    iterations: int
    converged: bool
    covariance: np.ndarray  # 4x4


def _canonical(model: str, th):
    """Fold sign ambiguities: Gamma < 0 mirrors onto Gamma > 0 (q -> -q)."""
    th = np.array(th, dtype=float)
    if th[3] < 0:
        th[3] = -th[3]
        if model == "fano":
            th[1] = -th[1]
    return th


def auto_seed(model: str, E, sigma, window=None):
    """Initial parameter guess per the documented seeding rule.

    With a resonance window: E_r at the peak/dip midpoint, Gamma their
    separation, q = sign(peak - dip) * 2, sigma0 the median of the outer
    quartiles of sigma.  Without one (monotone curve), fall back to the
    mesh midpoint and a quarter-range width.
    """
    E = np.asarray(E, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    m = len(sigma)
    quartile = max(1, m // 4)
    outer = np.concatenate([sigma[:quartile], sigma[-quartile:]])
    s0 = float(np.median(outer))
    if s0 <= 0:
        s0 = max(float(np.max(sigma)) * 1e-3, 1e-30)
    if window is not None:
        Er = 0.5 * (window.peak_keV + window.dip_keV)
        G = abs(window.peak_keV - window.dip_keV)
        q = 2.0 if window.peak_keV > window.dip_keV else -2.0
    else:
        Er = 0.5 * (E[0] + E[-1])
        G = 0.25 * (E[-1] - E[0])
        q = 2.0
    G = max(G, 1e-6 * (E[-1] - E[0]))
    if model == "breit_wigner":
        bg = float(np.min(sigma))
        amp = max(float(np.max(sigma)) - bg, 1e-30)
        return np.array([bg, amp, float(E[np.argmax(sigma)]), G])
    return np.array([s0, q, Er, G])


def _to_params(model: str, th):
    th = _canonical(model, th)
    if model == "fano":
        return FanoParameters(
            sigma0_fm2=float(th[0]), q=float(th[1]),
            E_r_keV=float(th[2]), Gamma_keV=float(th[3]),
        )
    return BreitWignerParameters(
        sigma_bg_fm2=float(max(th[0], 0.0)), amplitude_fm2=float(th[1]),
        E_r_keV=float(th[2]), Gamma_keV=float(th[3]),
    )


def fit(curve_or_E, sigma=None, model: str = "fano", seed="auto") -> FitResult:
    """Damped least-squares fit of a lineshape to (E, sigma) data.

    Accepts a CrossSectionCurve or two arrays.  seed is "auto", a
    parameter dataclass, or a length-4 array.  Converges when the
    relative parameter step < 1e-10 or the gradient norm < 1e-12;
    returns best-so-far with converged=False after 500 iterations.
    """
    if sigma is None:
        E = np.asarray(curve_or_E.energies_keV, dtype=float)
        sig = np.asarray(curve_or_E.sigmas_fm2, dtype=float)
    else:
        E = np.asarray(curve_or_E, dtype=float)
        sig = np.asarray(sigma, dtype=float)
    if model not in _MODELS:
        raise ConfigurationError(f"unknown model {model!r}")
    if len(E) < 8:
        raise ConfigurationError("fit requires at least 8 points")
    if np.any(np.diff(E) <= 0):
        raise ConfigurationError("fit energies must be strictly increasing")
    smax = float(np.max(np.abs(sig)))
    if smax == 0.0 or float(np.max(sig) - np.min(sig)) < 1e-12 * smax:
        raise FlatDataError("cross-section data is flat; nothing to fit")

    value, jacobian = _MODELS[model]
    floor = RESIDUAL_FLOOR_SCALE * smax
    denom = np.maximum(np.abs(sig), floor)

    if isinstance(seed, (FanoParameters, BreitWignerParameters)):
        th = seed.as_array()
    elif isinstance(seed, str) and seed == "auto":
        th = auto_seed(model, E, sig)
    else:
        th = np.array(seed, dtype=float)
        if th.shape != (4,):
            raise ConfigurationError("seed must be 4 parameters")
    th = _canonical(model, th)

    if model == "fano":
        def feasible(t):
            return t[0] > 0 and t[3] > 0 and np.isfinite(t).all()
    else:
        def feasible(t):
            return t[0] >= 0 and t[1] > 0 and t[3] > 0 and np.isfinite(t).all()

    if not feasible(th):
        raise ConfigurationError(f"infeasible {model} seed {th.tolist()}")

    def residuals(t):
        return (value(E, t) - sig) / denom

    r = residuals(th)
    cost = float(r @ r)
    lam = 1e-3
    iterations = 0
    converged = False
    J = jacobian(E, th) / denom[:, None]
    for iterations in range(1, MAX_ITERATIONS + 1):
        g = J.T @ r
        if float(np.linalg.norm(g)) < GRAD_TOL:
            converged = True
            break
        JTJ = J.T @ J
        diag = np.diag(JTJ).copy()
        diag[diag <= 0] = 1e-30
        accepted = False
        for _ in range(50):
            try:
                step = np.linalg.solve(JTJ + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = th + step
            if not feasible(trial):
                lam *= 10.0
                continue
            r_trial = residuals(trial)
            cost_trial = float(r_trial @ r_trial)
            if np.isfinite(cost_trial) and cost_trial <= cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            converged = True  # no descent direction left: stationary
            break
        rel_step = float(
            np.max(np.abs(step) / np.maximum(np.abs(th), 1e-300))
        )
        th, r, cost = trial, r_trial, cost_trial
        J = jacobian(E, th) / denom[:, None]
        lam = max(lam / 3.0, 1e-15)
        if rel_step < STEP_TOL:
            converged = True
            break
        g = J.T @ r
        if float(np.linalg.norm(g)) < GRAD_TOL:
            converged = True
            break

    params = _to_params(model, th)
    th_c = _canonical(model, th)
    J = jacobian(E, th_c) / denom[:, None]
    r = residuals(th_c)
    m = len(E)
    dof = max(m - 4, 1)
    variance = float(r @ r) / dof
    JTJ = J.T @ J
    try:
        cov = np.linalg.inv(JTJ) * variance
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(JTJ) * variance
    cov = 0.5 * (cov + cov.T)
    return FitResult(
        model=model,
        params=params,
        residual_norm=float(np.sqrt(np.mean(r**2))),
        iterations=iterations,
        converged=converged,
        covariance=cov,
    )


@dataclass(frozen=True)
class QConsistency:
    q_values: tuple[float, ...]
    max_relative_spread: float


def q_consistency(fits) -> QConsistency:
    """Spread diagnostic max |q_i - q_j| / |mean q| over converged Fano fits.

    No pass/fail judgment here; thresholding is the caller's policy.
    """
    fits = list(fits)
    if len(fits) < 2:
        raise ConfigurationError("q_consistency needs at least 2 fits")
    bad = [i for i, f in enumerate(fits) if not f.converged or f.model != "fano"]
    if bad:
        raise ConfigurationError(
            f"q_consistency requires converged Fano fits; offending fits: {bad}"
        )
    qs = [f.params.q for f in fits]
    qbar = abs(float(np.mean(qs)))
    spread = (max(qs) - min(qs)) / qbar if qbar > 0 else math.inf
    return QConsistency(q_values=tuple(qs), max_relative_spread=float(spread))
