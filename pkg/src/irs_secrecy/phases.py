"""Unit-modulus phase optimization by Riemannian gradient ascent.

For fixed beamformer and on/off pattern the objective reduces to two complex
amplitudes, u = sum_l x_l theta_l^T c_l (user) and e = sum_l x_l theta_l^T d_l
(eavesdropper), with c_l = diag(conj(h_l)) G_l w and d_l the eavesdropper
analogue. The unclamped rate difference log2(1 + |u|^2/s2) -
log2(1 + |e|^2/s2e) is ascended over the product of unit circles: Wirtinger
gradient, tangent projection, elementwise renormalization as the retraction,
Armijo backtracking on the step. Switched-off surfaces have exactly zero
gradient and their phases are held frozen.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import ChannelSet, SolutionState, SystemConfig

__all__ = [
    "PhaseGradient",
    "phase_objective",
    "phase_objective_gradient",
    "mo_ascend",
    "phase_grid_oracle",
]

LN2 = math.log(2.0)
GRID_MAX_ELEMENTS = 4


@dataclass(frozen=True)
class PhaseGradient:
    """Euclidean Wirtinger gradient (w.r.t. conjugate phases) and its tangent
    projection onto the product of circles."""

    euclidean: np.ndarray
    riemannian: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "euclidean", np.asarray(self.euclidean, dtype=complex))
        object.__setattr__(self, "riemannian", np.asarray(self.riemannian, dtype=complex))


def _signal_stacks(ch: ChannelSet, sol: SolutionState):
    """Per-element amplitudes c, d (stacked over surfaces) and the element
    activity weights from the on/off vector."""
    gw = np.einsum("lnt,t->ln", ch.g_ap_irs, sol.beamformer)
    c = (np.conj(ch.h_irs_user) * gw).reshape(-1)
    d = (np.conj(ch.g_irs_eve) * gw).reshape(-1)
    active = np.repeat(sol.onoff.astype(float), ch.n_refl)
    return c, d, active


def _objective_from_stacks(theta, c, d, active, cfg):
    u = np.sum(active * theta * c)
    e = np.sum(active * theta * d)
    return (math.log1p(abs(u) ** 2 / cfg.noise_user)
            - math.log1p(abs(e) ** 2 / cfg.noise_eve)) / LN2


def phase_objective(ch: ChannelSet, sol: SolutionState, cfg: SystemConfig,
                    phases: np.ndarray | None = None) -> float:
    """Unclamped rate difference at the given (or the solution's) phases."""
    c, d, active = _signal_stacks(ch, sol)
    theta = sol.phases if phases is None else np.asarray(phases, dtype=complex)
    return _objective_from_stacks(theta, c, d, active, cfg)


def phase_objective_gradient(ch: ChannelSet, sol: SolutionState,
                             cfg: SystemConfig) -> PhaseGradient:
    """Wirtinger gradient of the phase objective and its tangent projection.

    Block l of the Euclidean gradient is
    (1/ln 2) x_l [ u conj(c_l) / (s2 + |u|^2) - e conj(d_l) / (s2e + |e|^2) ];
    the Riemannian part removes the radial component elementwise:
    g - Re(g conj(theta)) theta.
    """
    c, d, active = _signal_stacks(ch, sol)
    theta = sol.phases
    u = np.sum(active * theta * c)
    e = np.sum(active * theta * d)
    euclidean = active / LN2 * (u * np.conj(c) / (cfg.noise_user + abs(u) ** 2)
                                - e * np.conj(d) / (cfg.noise_eve + abs(e) ** 2))
    riemannian = euclidean - np.real(euclidean * np.conj(theta)) * theta
    return PhaseGradient(euclidean=euclidean, riemannian=riemannian)


def mo_ascend(ch: ChannelSet, sol: SolutionState, cfg: SystemConfig,
              max_iter: int = 500, tol: float = 1e-8, armijo: float = 1e-4,
              patience: int = 3):
    """Riemannian gradient ascent with Armijo backtracking.

    Starts from sol.phases (must be unit modulus), retracts each trial step by
    elementwise renormalization, and accepts a step only on sufficient
    increase, so the objective trace is non-decreasing. Stops once `patience`
    consecutive accepted steps improve by less than tol (a single small step
    can be an overshoot artifact of the step-size warm start), when the
    gradient vanishes, or at max_iter. Returns (phases, trace).
    """
    c, d, active = _signal_stacks(ch, sol)
    act_idx = np.flatnonzero(active > 0.0)
    theta = np.array(sol.phases, dtype=complex)
    value = _objective_from_stacks(theta, c, d, active, cfg)
    trace = [value]
    if len(act_idx) == 0:
        return theta, np.asarray(trace)

    step = 1.0
    small_steps = 0
    for _ in range(max_iter):
        u = np.sum(active * theta * c)
        e = np.sum(active * theta * d)
        grad = active / LN2 * (u * np.conj(c) / (cfg.noise_user + abs(u) ** 2)
                               - e * np.conj(d) / (cfg.noise_eve + abs(e) ** 2))
        xi = grad - np.real(grad * np.conj(theta)) * theta
        sq_norm = float(np.sum(np.abs(xi) ** 2))
        if sq_norm <= 1e-300:
            break

        accepted = False
        while step > 1e-18:
            trial = theta.copy()
            moved = theta[act_idx] + step * xi[act_idx]
            trial[act_idx] = moved / np.abs(moved)
            trial_value = _objective_from_stacks(trial, c, d, active, cfg)
            if trial_value >= value + armijo * step * sq_norm:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break

        delta = trial_value - value
        theta, value = trial, trial_value
        trace.append(value)
        step = min(step * 2.0, 1e6)
        small_steps = small_steps + 1 if delta < tol else 0
        if small_steps >= patience:
            break
    return theta, np.asarray(trace)


def phase_grid_oracle(ch: ChannelSet, sol: SolutionState, cfg: SystemConfig,
                      resolution: int):
    """Exhaustive grid search over the active elements' phase angles.

    Only usable when at most four elements are active; all inactive phases
    stay frozen at their current values. Returns (phases, objective) for the
    best grid point on the [0, 2pi)^k lattice with `resolution` points per
    axis.
    """
    c, d, active = _signal_stacks(ch, sol)
    act_idx = np.flatnonzero(active > 0.0)
    k = len(act_idx)
    if k > GRID_MAX_ELEMENTS:
        raise ValueError(f"grid oracle limited to {GRID_MAX_ELEMENTS} active elements")
    theta = np.array(sol.phases, dtype=complex)
    if k == 0:
        return theta, _objective_from_stacks(theta, c, d, active, cfg)

    angles = 2.0 * np.pi * np.arange(resolution) / resolution
    ring = np.exp(1j * angles)
    u_grid = np.zeros((resolution,) * k, dtype=complex)
    e_grid = np.zeros((resolution,) * k, dtype=complex)
    for axis, idx in enumerate(act_idx):
        shape = [1] * k
        shape[axis] = resolution
        u_grid = u_grid + c[idx] * ring.reshape(shape)
        e_grid = e_grid + d[idx] * ring.reshape(shape)
    values = (np.log1p(np.abs(u_grid) ** 2 / cfg.noise_user)
              - np.log1p(np.abs(e_grid) ** 2 / cfg.noise_eve)) / LN2
    flat_best = int(np.argmax(values))
    best_idx = np.unravel_index(flat_best, values.shape)
    theta[act_idx] = ring[list(best_idx)]
    return theta, float(values[best_idx])
