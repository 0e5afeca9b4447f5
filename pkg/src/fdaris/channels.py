"""Channel and steering-vector synthesis for the FDA + RIS link set.

Every array phase is referenced to the carrier ``f_ref``; the per-antenna
frequency offsets enter only through distance phases, so each channel
factors into a zero-offset part (cached on the ChannelSet) times a scalar
offset phase per transmit antenna. The ``with_offsets`` rebuild exploits
exactly that factorization and reuses the frozen NLoS draws.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .scenario import C_LIGHT, Geometry, LinkGeometry, ScenarioConfig, path_loss


@dataclass(frozen=True)
class FrequencyOffsets:
    """Per-antenna FDA frequency offsets in Hz."""

    offsets: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.offsets, dtype=float)
        object.__setattr__(self, "offsets", arr)
        if arr.ndim != 1:
            raise ValueError("offsets must be a 1-D vector")
        if np.any(arr < 0.0):
            raise ValueError("offsets must be nonnegative")

    def validate(self, f_max: float):
        if np.any(self.offsets > f_max * (1.0 + 1e-12)):
            raise ValueError("offsets exceed the per-antenna cap")

    @classmethod
    def zero(cls, n_tx: int) -> "FrequencyOffsets":
        return cls(np.zeros(n_tx))

    @classmethod
    def uniform_ramp(cls, n_tx: int, f_max: float) -> "FrequencyOffsets":
        """Ramp 0, d, 2d, ... with d = f_max / (n_tx - 1)."""
        if n_tx == 1:
            return cls(np.zeros(1))
        return cls(np.arange(n_tx) * (f_max / (n_tx - 1)))


def _ris_array_phase(cfg: ScenarioConfig, azimuth: float, elevation: float):
    """Geometric RIS path-length term per element, in meters.

    Elements are indexed elevation-fastest: m_ele = m % M_ele,
    m_azi = m // M_ele (0-based contiguous indexing).
    """
    m = np.arange(cfg.m_ris)
    m_ele = m % cfg.m_ele
    m_azi = m // cfg.m_ele
    d = cfg.d_ris_element
    sa, se = np.sin(azimuth), np.sin(elevation)
    return m_ele * d * sa * se + m_azi * d * sa * np.cos(elevation)


def _bs_array_phase(cfg: ScenarioConfig, n_ant: int, angle: float):
    """ULA path-length term (n-1) * d_B * sin(angle), in meters."""
    return np.arange(n_ant) * cfg.d_bs_antenna * np.sin(angle)


def _unit(phase_m, freq):
    """exp(-j 2 pi (freq / c) * phase_m) elementwise."""
    return np.exp(-2j * np.pi * freq / C_LIGHT * np.asarray(phase_m))


def build_bs_ris(geom: Geometry, offsets: FrequencyOffsets,
                 cfg: ScenarioConfig, exact: bool = False) -> np.ndarray:
    """BS-to-RIS LoS channel, shape (M, N_t).

    The default uses the narrowband approximation: array phases at f_ref,
    the BS-RIS distance phase at the full per-antenna frequency.  With
    ``exact=True`` every term is scaled by the per-antenna frequency
    (validation reference only).
    """
    beta = path_loss(geom.d_bs, cfg.exponent_br, cfg.pathloss_beta0_db)
    freqs = cfg.f_ref + offsets.offsets
    a_ris = _ris_array_phase(cfg, geom.aoa_azi, geom.aoa_ele)
    a_bs = _bs_array_phase(cfg, cfg.n_tx, geom.aod_bs)
    if exact:
        phase = (geom.d_bs - a_bs[None, :] + a_ris[:, None]) * freqs[None, :]
    else:
        phase = (geom.d_bs * freqs[None, :]
                 + (a_ris[:, None] - a_bs[None, :]) * cfg.f_ref)
    return np.sqrt(beta) * np.exp(-2j * np.pi * phase / C_LIGHT)


def build_ris_bs(geom: Geometry, offsets: FrequencyOffsets,
                 cfg: ScenarioConfig) -> np.ndarray:
    """Effective RIS-to-BS receive channels, shape (N_t, N_r, M)."""
    beta = path_loss(geom.d_bs, cfg.exponent_br, cfg.pathloss_beta0_db)
    freqs = cfg.f_ref + offsets.offsets
    a_ris = _ris_array_phase(cfg, geom.aoa_azi, geom.aoa_ele)
    a_rx = _bs_array_phase(cfg, cfg.n_rx, geom.aod_bs)
    phase = (geom.d_bs * freqs[:, None, None]
             + (a_rx[None, :, None] - a_ris[None, None, :]) * cfg.f_ref)
    return np.sqrt(beta) * np.exp(-2j * np.pi * phase / C_LIGHT)


def _los_ris_user(geom_link: LinkGeometry, freqs, cfg: ScenarioConfig):
    """Unit-modulus LoS RIS-to-user vectors for each frequency, (N_t, M)."""
    a_ris = _ris_array_phase(cfg, geom_link.azimuth_rad, geom_link.elevation_rad)
    freqs = np.atleast_1d(freqs)
    phase = (-geom_link.distance_m * freqs[:, None] + a_ris[None, :] * cfg.f_ref)
    return np.exp(-2j * np.pi * phase / C_LIGHT)


def build_ris_user(geom: Geometry, offsets: FrequencyOffsets,
                   cfg: ScenarioConfig, rng: np.random.Generator):
    """Rician RIS-user channels.

    Returns (h_ru, los0, nlos):
      h_ru  (K, N_t, M) full channels,
      los0  (K, M) zero-offset LoS components,
      nlos  (K, N_t, M) raw CN(0, 1) draws, one per (user, antenna) slice.
    """
    freqs = cfg.f_ref + offsets.offsets
    k_users, n_tx, m = cfg.k_users, cfg.n_tx, cfg.m_ris
    nlos = (rng.standard_normal((k_users, n_tx, m))
            + 1j * rng.standard_normal((k_users, n_tx, m))) / np.sqrt(2.0)
    h_ru = np.empty((k_users, n_tx, m), dtype=complex)
    los0 = np.empty((k_users, m), dtype=complex)
    kappa = cfg.rician_kappa
    for k, link in enumerate(geom.users):
        beta = path_loss(link.distance_m, cfg.exponent_ru, cfg.pathloss_beta0_db)
        los = _los_ris_user(link, freqs, cfg)
        los0[k] = _los_ris_user(link, cfg.f_ref, cfg)[0]
        h_ru[k] = (np.sqrt(kappa * beta / (kappa + 1.0)) * los
                   + np.sqrt(beta / (kappa + 1.0)) * nlos[k])
    return h_ru, los0, nlos


def _steering_pair(link: LinkGeometry, freqs, cfg: ScenarioConfig):
    """Transmit/receive RIS steering vectors of one scatterer, (N_t, M) each.

    The transmit and receive phases differ only in the sign of the
    distance term.
    """
    a_ris = _ris_array_phase(cfg, link.azimuth_rad, link.elevation_rad)
    freqs = np.atleast_1d(freqs)
    base = a_ris[None, :] * cfg.f_ref
    tx = np.exp(-2j * np.pi * (-link.distance_m * freqs[:, None] + base) / C_LIGHT)
    rx = np.exp(-2j * np.pi * (+link.distance_m * freqs[:, None] + base) / C_LIGHT)
    return tx, rx


def build_radar_steering(geom: Geometry, offsets: FrequencyOffsets,
                         cfg: ScenarioConfig):
    """Target and clutter steering vectors for every FDA frequency."""
    freqs = cfg.f_ref + offsets.offsets
    a_tar_t, a_tar_r = _steering_pair(geom.target, freqs, cfg)
    a_clu_t = np.empty((cfg.c_clutters, cfg.n_tx, cfg.m_ris), dtype=complex)
    a_clu_r = np.empty_like(a_clu_t)
    for c, link in enumerate(geom.clutters):
        a_clu_t[c], a_clu_r[c] = _steering_pair(link, freqs, cfg)
    return a_tar_t, a_tar_r, a_clu_t, a_clu_r


@dataclass(frozen=True)
class ChannelSet:
    """All synthesized channels of one scenario realization.

    The ``*_0`` members are the zero-offset caches (identical across
    transmit antennas, so stored once). ``beta_ru`` and the stored
    distances let the solver rebuild frequency-dependent parts in closed
    form without resampling fading.
    """

    offsets: FrequencyOffsets
    h_br: np.ndarray            # (M, N_t)
    h_ru: np.ndarray            # (K, N_t, M)
    a_tar_t: np.ndarray         # (N_t, M)
    a_tar_r: np.ndarray         # (N_t, M)
    a_clu_t: np.ndarray         # (C, N_t, M)
    a_clu_r: np.ndarray         # (C, N_t, M)
    h_rb: np.ndarray            # (N_t, N_r, M)
    h_br0: np.ndarray           # (M, N_t)
    h_rb0: np.ndarray           # (N_r, M)
    h_ru_los0: np.ndarray       # (K, M)
    h_ru_nlos: np.ndarray       # (K, N_t, M) raw CN(0,1) draws
    a_tar_t0: np.ndarray        # (M,)
    a_tar_r0: np.ndarray        # (M,)
    a_clu_t0: np.ndarray        # (C, M)
    a_clu_r0: np.ndarray        # (C, M)
    beta_ru: np.ndarray         # (K,)
    d_bs: float
    d_ru: np.ndarray            # (K,)
    d_rt: float
    d_rc: np.ndarray            # (C,)

    @property
    def n_tx(self) -> int:
        return self.h_br.shape[1]

    @property
    def n_rx(self) -> int:
        return self.h_rb.shape[1]

    @property
    def m_ris(self) -> int:
        return self.h_br.shape[0]

    @property
    def k_users(self) -> int:
        return self.h_ru.shape[0]

    @property
    def c_clutters(self) -> int:
        return self.a_clu_t.shape[0]


def build_channel_set(geom: Geometry, offsets: FrequencyOffsets,
                      cfg: ScenarioConfig, rng: np.random.Generator) -> ChannelSet:
    offsets.validate(cfg.f_max)
    if offsets.offsets.shape != (cfg.n_tx,):
        raise ValueError("offset vector length must equal n_tx")
    zero = FrequencyOffsets.zero(cfg.n_tx)

    h_br = build_bs_ris(geom, offsets, cfg)
    h_rb = build_ris_bs(geom, offsets, cfg)
    h_ru, los0, nlos = build_ris_user(geom, offsets, cfg, rng)
    a_tar_t, a_tar_r, a_clu_t, a_clu_r = build_radar_steering(geom, offsets, cfg)

    h_br0 = build_bs_ris(geom, zero, cfg)
    h_rb0 = build_ris_bs(geom, zero, cfg)[0]
    a_tar_t0, a_tar_r0, a_clu_t0, a_clu_r0 = build_radar_steering(geom, zero, cfg)

    beta_ru = np.array([
        path_loss(link.distance_m, cfg.exponent_ru, cfg.pathloss_beta0_db)
        for link in geom.users
    ])
    return ChannelSet(
        offsets=offsets,
        h_br=h_br, h_ru=h_ru,
        a_tar_t=a_tar_t, a_tar_r=a_tar_r,
        a_clu_t=a_clu_t, a_clu_r=a_clu_r,
        h_rb=h_rb,
        h_br0=h_br0, h_rb0=h_rb0, h_ru_los0=los0, h_ru_nlos=nlos,
        a_tar_t0=a_tar_t0[0], a_tar_r0=a_tar_r0[0],
        a_clu_t0=a_clu_t0[:, 0], a_clu_r0=a_clu_r0[:, 0],
        beta_ru=beta_ru,
        d_bs=geom.d_bs,
        d_ru=np.array([u.distance_m for u in geom.users]),
        d_rt=geom.target.distance_m,
        d_rc=np.array([c.distance_m for c in geom.clutters]),
    )


def with_offsets(ch: ChannelSet, offsets: FrequencyOffsets,
                 cfg: ScenarioConfig) -> ChannelSet:
    """Rebuild the frequency-dependent channels for new offsets.

    Keeps geometry and the NLoS draws frozen (block fading within one
    solver run); every channel is the cached zero-offset part rotated by
    the per-antenna distance phase.
    """
    offsets.validate(cfg.f_max)
    df = offsets.offsets
    rot = lambda dist: np.exp(-2j * np.pi * df * dist / C_LIGHT)  # noqa: E731

    kappa = cfg.rician_kappa
    h_br = ch.h_br0 * rot(ch.d_bs)[None, :]
    h_rb = ch.h_rb0[None] * rot(ch.d_bs)[:, None, None]
    a_tar_t = ch.a_tar_t0[None, :] * rot(-ch.d_rt)[:, None]
    a_tar_r = ch.a_tar_r0[None, :] * rot(+ch.d_rt)[:, None]
    a_clu_t = np.empty_like(ch.a_clu_t)
    a_clu_r = np.empty_like(ch.a_clu_r)
    for c in range(ch.c_clutters):
        a_clu_t[c] = ch.a_clu_t0[c][None, :] * rot(-ch.d_rc[c])[:, None]
        a_clu_r[c] = ch.a_clu_r0[c][None, :] * rot(+ch.d_rc[c])[:, None]

    h_ru = np.empty_like(ch.h_ru)
    for k in range(ch.k_users):
        beta = ch.beta_ru[k]
        los = ch.h_ru_los0[k][None, :] * rot(-ch.d_ru[k])[:, None]
        h_ru[k] = (np.sqrt(kappa * beta / (kappa + 1.0)) * los
                   + np.sqrt(beta / (kappa + 1.0)) * ch.h_ru_nlos[k])
    return replace(ch, offsets=offsets, h_br=h_br, h_rb=h_rb, h_ru=h_ru,
                   a_tar_t=a_tar_t, a_tar_r=a_tar_r,
                   a_clu_t=a_clu_t, a_clu_r=a_clu_r)


@dataclass(frozen=True)
class CascadedChannels:
    """Effective end-to-end channels for a fixed RIS phase vector."""

    theta: np.ndarray     # (M,)
    h_tilde: np.ndarray   # (K, N_t) cascaded user channels
    h_bt: np.ndarray      # (N_r, N_t) target echo link
    h_bc: np.ndarray      # (C, N_r, N_t) clutter echo links


def cascade(ch: ChannelSet, theta: np.ndarray) -> CascadedChannels:
    """Assemble cascaded user and echo channels for RIS phases ``theta``."""
    theta = np.asarray(theta, dtype=complex)
    if theta.shape != (ch.m_ris,):
        raise ValueError("theta has wrong length")
    if np.max(np.abs(np.abs(theta) - 1.0)) > 1e-9:
        raise ValueError("theta entries must have unit modulus")

    # h_tilde[k, n] = h_{k,n}^H Theta h_BR,n
    h_tilde = np.einsum("knm,m,mn->kn", ch.h_ru.conj(), theta, ch.h_br)

    def echo(a_t, a_r):
        # column n: H_RB,n Theta a_r,n (a_t,n)^H Theta h_BR,n
        scal = np.einsum("nm,m,mn->n", a_t.conj(), theta, ch.h_br)
        vec = np.einsum("nrm,m,nm->rn", ch.h_rb, theta, a_r)
        return vec * scal[None, :]

    h_bt = echo(ch.a_tar_t, ch.a_tar_r)
    h_bc = np.stack([echo(ch.a_clu_t[c], ch.a_clu_r[c])
                     for c in range(ch.c_clutters)])
    return CascadedChannels(theta=theta, h_tilde=h_tilde, h_bt=h_bt, h_bc=h_bc)


# --- binary regression dump ------------------------------------------------
#
# Layout: magic b"FDCH", version u32, dims (M, N_t, N_r, K, C) as u32,
# then the arrays below in order, each as row-major float64 data
# (complex arrays as interleaved re/im doubles).

_MAGIC = b"FDCH"
_VERSION = 1
_ARRAY_FIELDS = (
    "h_br", "h_ru", "a_tar_t", "a_tar_r", "a_clu_t", "a_clu_r", "h_rb",
    "h_br0", "h_rb0", "h_ru_los0", "h_ru_nlos",
    "a_tar_t0", "a_tar_r0", "a_clu_t0", "a_clu_r0",
)
_REAL_FIELDS = ("beta_ru", "d_ru", "d_rc")


def save_channel_set(ch: ChannelSet, path):
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<6I", _VERSION, ch.m_ris, ch.n_tx, ch.n_rx,
                             ch.k_users, ch.c_clutters))
        fh.write(struct.pack("<2d", ch.d_bs, ch.d_rt))
        fh.write(np.ascontiguousarray(ch.offsets.offsets, dtype=np.float64).tobytes())
        for name in _REAL_FIELDS:
            fh.write(np.ascontiguousarray(getattr(ch, name), dtype=np.float64).tobytes())
        for name in _ARRAY_FIELDS:
            fh.write(np.ascontiguousarray(getattr(ch, name), dtype=np.complex128).tobytes())


def load_channel_set(path) -> ChannelSet:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a channel dump")
        version, m, n_tx, n_rx, k, c = struct.unpack("<6I", fh.read(24))
        if version != _VERSION:
            raise ValueError(f"unsupported dump version {version}")
        d_bs, d_rt = struct.unpack("<2d", fh.read(16))

        def real(shape):
            n = int(np.prod(shape))
            return np.frombuffer(fh.read(8 * n), dtype=np.float64).reshape(shape).copy()

        def cplx(shape):
            n = int(np.prod(shape))
            return np.frombuffer(fh.read(16 * n), dtype=np.complex128).reshape(shape).copy()

        offsets = FrequencyOffsets(real((n_tx,)))
        shapes_real = {"beta_ru": (k,), "d_ru": (k,), "d_rc": (c,)}
        reals = {name: real(shapes_real[name]) for name in _REAL_FIELDS}
        shapes = {
            "h_br": (m, n_tx), "h_ru": (k, n_tx, m),
            "a_tar_t": (n_tx, m), "a_tar_r": (n_tx, m),
            "a_clu_t": (c, n_tx, m), "a_clu_r": (c, n_tx, m),
            "h_rb": (n_tx, n_rx, m),
            "h_br0": (m, n_tx), "h_rb0": (n_rx, m),
            "h_ru_los0": (k, m), "h_ru_nlos": (k, n_tx, m),
            "a_tar_t0": (m,), "a_tar_r0": (m,),
            "a_clu_t0": (c, m), "a_clu_r0": (c, m),
        }
        arrays = {name: cplx(shapes[name]) for name in _ARRAY_FIELDS}
    return ChannelSet(offsets=offsets, d_bs=d_bs, d_rt=d_rt, **reals, **arrays)
