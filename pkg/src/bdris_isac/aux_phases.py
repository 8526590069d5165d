"""Closed-form update of the target phases.

For a fixed precoder and phase-shift matrix each target phase decouples
into min over xi of |zeta - p e^{j xi}|^2, whose global minimizer is the
argument of zeta. The zero-amplitude case is degenerate (every phase is
optimal) and maps deterministically to phase 0.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelSet
from .system_model import AuxPhases, effective_channels

TWO_PI = 2.0 * np.pi


def wrap_phase(angle: np.ndarray) -> np.ndarray:
    """Map angles into [0, 2*pi); folds the rounding case mod == 2*pi to 0."""
    wrapped = np.mod(angle, TWO_PI)
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def optimal_aux_phases(channels: ChannelSet, Theta: np.ndarray, W: np.ndarray) -> AuxPhases:
    """Globally optimal target phases for fixed (W, Theta).

    theta[i, k] is the argument of f_i^H Theta G w_k and phi[k] the
    argument of f_t^H Theta G w_k, both wrapped into [0, 2*pi).
    """
    inner = effective_channels(channels, Theta) @ W
    sens = channels.f_target.conj() @ Theta @ channels.G @ W
    return AuxPhases(
        theta=wrap_phase(np.angle(inner)),
        phi=wrap_phase(np.angle(sens)),
    )
