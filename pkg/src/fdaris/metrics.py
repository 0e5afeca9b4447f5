"""Communication and radar performance metrics of a design point.

All functions work in linear units (W, ratios); dB conversion belongs to
the I/O layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import CascadedChannels, FrequencyOffsets
from .scenario import ScenarioConfig


@dataclass
class IsacDesign:
    """Full decision-variable block of one design point.

    ``r0`` is an optional dedicated radar covariance; the optimizer never
    allocates one (it is provably unnecessary) but the metrics accept it
    so that ablation experiments can quantify its effect.
    """

    w: np.ndarray                    # (K, N_t) beamformers
    theta: np.ndarray                # (M,) unit-modulus RIS phases
    offsets: FrequencyOffsets
    u: np.ndarray                    # (N_r,) radar equalizer
    r0: np.ndarray | None = None     # optional (N_t, N_t) PSD covariance

    def power(self) -> float:
        """Total transmit power, beamformers plus radar covariance."""
        p = float(np.sum(np.abs(self.w) ** 2))
        if self.r0 is not None:
            p += float(np.real(np.trace(self.r0)))
        return p


def user_sinr(design: IsacDesign, cascaded: CascadedChannels, k: int,
              noise_w: float) -> float:
    """SINR of user k under the cascaded channels."""
    h = cascaded.h_tilde[k]
    gains = np.abs(design.w @ h.conj()) ** 2      # |h~_k^H w_k'|^2 for all k'
    signal = gains[k]
    interference = float(np.sum(gains)) - float(signal)
    if design.r0 is not None:
        interference += float(np.real(h.conj() @ design.r0 @ h))
    return float(signal / (interference + noise_w))


def sum_rate(design: IsacDesign, cascaded: CascadedChannels,
             noise_w: float) -> float:
    """Achievable sum rate in bits/s/Hz."""
    k_users = cascaded.h_tilde.shape[0]
    return float(sum(np.log2(1.0 + user_sinr(design, cascaded, k, noise_w))
                     for k in range(k_users)))


def _echo_power(u: np.ndarray, h: np.ndarray, design: IsacDesign) -> float:
    """Sum_k |u^H H w_k|^2 + u^H H R0 H^H u for one echo matrix H."""
    v = u.conj() @ h                       # (N_t,)
    total = float(np.sum(np.abs(design.w @ v) ** 2))
    if design.r0 is not None:
        total += float(np.real(v @ design.r0 @ v.conj()))
    return total


def scnr(design: IsacDesign, cascaded: CascadedChannels,
         cfg: ScenarioConfig) -> float:
    """Radar SCNR after receive equalization."""
    u = np.asarray(design.u, dtype=complex)
    nrm2 = float(np.real(u.conj() @ u))
    if nrm2 <= 0.0:
        raise ValueError("equalizer u must be nonzero")
    num = cfg.beta_target * _echo_power(u, cascaded.h_bt, design)
    den = nrm2 * cfg.noise_radar_watt
    for c in range(cascaded.h_bc.shape[0]):
        den += cfg.beta_clutter * _echo_power(u, cascaded.h_bc[c], design)
    return num / den
