"""Quality-of-transmission estimation for a lightpath.

Noise is referred to a 12.5 GHz reference bandwidth throughout, so SNR
values here are OSNR-like and comparable with the transceiver catalog's
required SNR. The NLI model is the incoherent closed-form GN model (SPM +
XPM per span) with each channel's power spectral density scaled by a
first-order ISRS tilt factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, QotDomainError
from .netgraph import (
    BAND_START_THZ,
    BANDS,
    N_SLOTS,
    SLOT_GHZ,
    Span,
    band_center_thz,
    band_of_frequency,
    channel_center_thz,
)

H_PLANCK = 6.62607015e-34
C_LIGHT = 299792458.0


def db2lin(x: float) -> float:
    return 10.0 ** (x / 10.0)


def lin2db(x: float) -> float:
    if x == math.inf:
        return math.inf
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


def _pair(value, name) -> tuple[float, float]:
    if isinstance(value, dict):
        try:
            return (float(value["c"] if "c" in value else value["C"]),
                    float(value["l"] if "l" in value else value["L"]))
        except KeyError:
            raise ConfigError(f"{name}: expected keys c and l") from None
    if isinstance(value, (int, float)):
        return (float(value), float(value))
    c, l = value
    return (float(c), float(l))


@dataclass(frozen=True)
class QotParams:
    """Physical-layer parameters. Per-band tuples are ordered ``(C, L)``."""

    attenuation_db_per_km: tuple[float, float] = (0.20, 0.22)
    noise_figure_db: tuple[float, float] = (5.0, 6.0)
    ref_bandwidth_ghz: float = SLOT_GHZ
    launch_offset_dbm: tuple[float, float] = (1.0, 1.0)
    launch_tilt_db_per_thz: float = 0.0
    aging_margin_db: float = 1.0
    isrs_coeff: float = 0.028  # Raman gain slope, 1/(W km THz)
    osnr_tx_db: float = 26.0
    mws_penalty_db: float = 1.0
    gamma_per_w_km: float = 1.3
    dispersion_ps_nm_km: float = 17.0
    eol_interferer_ghz: float = 75.0
    # launch profile dBm refers to a channel this wide; others scale with
    # bandwidth (flat PSD). 0 applies the profile per channel regardless of width.
    launch_ref_bandwidth_ghz: float = 75.0

    def __post_init__(self):
        if self.aging_margin_db < 0:
            raise ConfigError("aging_margin_db must be >= 0")
        if self.ref_bandwidth_ghz != SLOT_GHZ:
            raise ConfigError("reference bandwidth must equal the slot width (12.5 GHz)")

    # config keys as documented for the run configuration file
    _KEYS = {
        "attenuation_db_per_km": "attenuation_db_per_km",
        "noise_figure_db": "noise_figure_db",
        "aging_margin_db": "aging_margin_db",
        "launch_offset_dbm": "launch_offset_dbm",
        "launch_tilt_db_per_thz": "launch_tilt_db_per_thz",
        "isrs_coeff": "isrs_coeff",
        "osnr_tx_db": "osnr_tx_db",
        "mws_penalty_db": "mws_penalty_db",
        "gamma_per_w_km": "gamma_per_w_km",
        "dispersion_ps_nm_km": "dispersion_ps_nm_km",
        "eol_interferer_ghz": "eol_interferer_ghz",
        "launch_ref_bandwidth_ghz": "launch_ref_bandwidth_ghz",
    }

    @classmethod
    def from_mapping(cls, data: dict | None) -> "QotParams":
        data = dict(data or {})
        kwargs = {}
        for key, value in data.items():
            if key not in cls._KEYS:
                raise ConfigError(f"qot.{key}: unknown key")
            if key in ("attenuation_db_per_km", "noise_figure_db", "launch_offset_dbm"):
                kwargs[key] = _pair(value, f"qot.{key}")
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)

    def attenuation(self, band: str) -> float:
        return self.attenuation_db_per_km[BANDS.index(band)]

    def noise_figure(self, band: str) -> float:
        return self.noise_figure_db[BANDS.index(band)]

    @property
    def beta2_abs(self) -> float:
        """|beta2| in s^2/m at 1550 nm."""
        lam = 1550e-9
        d = self.dispersion_ps_nm_km * 1e-6  # s/m^2
        return d * lam ** 2 / (2 * math.pi * C_LIGHT)

    def with_(self, **changes) -> "QotParams":
        return type(self)(**{**{f.name: getattr(self, f.name) for f in fields(self)}, **changes})


@dataclass(frozen=True)
class Channel:
    """A co-propagating signal as seen by the NLI model."""

    f_thz: float
    symbol_rate_gbd: float
    power_w: float


@dataclass(frozen=True)
class SnrReport:
    snr_total: float
    snr_ase: float
    snr_nli: float
    osnr_tx_used: float
    eol: bool

    def margin(self, required_db: float) -> float:
        return self.snr_total - required_db


def launch_power(f_thz: float, params: QotParams, bandwidth_ghz: float | None = None) -> float:
    """Channel launch power in dBm: band offset plus linear tilt.

    With a nonzero ``launch_ref_bandwidth_ghz`` the profile value belongs to a
    channel of that width and ``bandwidth_ghz`` rescales it at constant PSD.
    """
    band = band_of_frequency(f_thz)
    if band is None:
        raise QotDomainError(f"{f_thz:.4f} THz is outside the C and L bands")
    offset = params.launch_offset_dbm[BANDS.index(band)]
    p = offset + params.launch_tilt_db_per_thz * (f_thz - band_center_thz(band))
    if bandwidth_ghz is not None and params.launch_ref_bandwidth_ghz > 0:
        p += 10 * math.log10(bandwidth_ghz / params.launch_ref_bandwidth_ghz)
    return p


def launch_power_w(f_thz: float, params: QotParams, bandwidth_ghz: float | None = None) -> float:
    return 1e-3 * db2lin(launch_power(f_thz, params, bandwidth_ghz))


def ase_noise(spans: Sequence[Span], band: str, params: QotParams, f_thz: float | None = None) -> float:
    """Accumulated EDFA ASE power (W) in the reference bandwidth."""
    nu = (band_center_thz(band) if f_thz is None else f_thz) * 1e12
    b_ref = params.ref_bandwidth_ghz * 1e9
    total = 0.0
    for span in spans:
        gain = db2lin(span.gain_db(band))
        total += H_PLANCK * nu * db2lin(span.noise_figure(band)) * (gain - 1.0) * b_ref
    return total


def isrs_factors(f_thz, power_w, l_eff_km: float, coeff: float) -> np.ndarray:
    """First-order ISRS power tilt at half the effective length.

    Power flows from high to low frequencies; the factors average to one
    when weighted by channel power.
    """
    f = np.asarray(f_thz, dtype=float)
    p = np.asarray(power_w, dtype=float)
    if coeff == 0 or f.size == 0:
        return np.ones_like(f)
    p_tot = p.sum()
    x = -coeff * p_tot * 0.5 * l_eff_km * (f - f.mean())
    e = np.exp(x - x.max())
    return p_tot * e / np.dot(p, e)


def _span_nli_psd(f_cut, rs_cut, g_cut, f_int, rs_int, g_int, alpha_db_km, length_km, params):
    """GN PSD of NLI (W/Hz) at the center of the channel under test, one span."""
    a = alpha_db_km / (10 * math.log10(math.e)) / 1e3  # power attenuation, 1/m
    l_m = length_km * 1e3
    l_eff = (1 - math.exp(-a * l_m)) / a if a > 0 else l_m
    l_asym = 1.0 / a
    b2 = params.beta2_abs
    gamma = params.gamma_per_w_km * 1e-3
    spm = g_cut ** 2 * math.asinh(0.5 * math.pi ** 2 * l_asym * b2 * rs_cut ** 2)
    xpm = kernels.xpm_psi_sum(f_cut, rs_cut, f_int, rs_int, 2.0 * g_int ** 2, b2, l_asym)
    return (16.0 / 27.0) * gamma ** 2 * g_cut * l_eff ** 2 / (2 * math.pi * b2 * l_asym) * (spm + xpm)


def _l_eff_km(alpha_db_km: float, length_km: float) -> float:
    a = alpha_db_km / (10 * math.log10(math.e))
    return (1 - math.exp(-a * length_km)) / a if a > 0 else length_km


def _tile(lo: int, hi: int, width: int) -> list[tuple[int, int]]:
    """Cover slots [lo, hi) with (start, width) blocks of ``width``; the last may be narrower."""
    return [(s, min(width, hi - s)) for s in range(lo, hi, width)]


@lru_cache(maxsize=4096)
def _eol_load(band: str, start: int, width: int, params: QotParams, other_band: bool = True):
    """Synthetic full load around a channel occupying ``width`` slots at ``start``.

    The channel's band (and the other band too when ``other_band``) is packed
    with interferers of the reference width at the launch PSD. In the
    channel's own band the packing starts flush at the channel edges, so no
    real neighbour can sit closer than the synthetic ones; band-edge
    remainders become narrower interferers.
    """
    ref = int(round(params.eol_interferer_ghz / SLOT_GHZ))
    rolloff = 0.0625
    blocks = []
    for b in BANDS:
        if b == band:
            above = _tile(start + width, N_SLOTS, ref)
            below = [(N_SLOTS - s - w, w) for s, w in _tile(N_SLOTS - start, N_SLOTS, ref)]
            blocks += [(b, s, w) for s, w in below + above]
        elif other_band:
            blocks += [(b, s, w) for s, w in _tile(0, N_SLOTS, ref)]
    f = np.array([channel_center_thz(b, s, w) for b, s, w in blocks])
    bw = np.array([w * SLOT_GHZ for _, _, w in blocks])
    p = np.array([launch_power_w(fc, params, g) for fc, g in zip(f, bw)])
    return f, bw / (1 + rolloff), p


def eol_interferers(channel: Channel, bandwidth_ghz: float, params: QotParams, other_band: bool = True):
    """Full-load interferers around ``channel``; off-grid centers snap to the nearest slot."""
    band = band_of_frequency(channel.f_thz)
    if band is None:
        raise QotDomainError(f"{channel.f_thz:.4f} THz is outside the C and L bands")
    width = int(round(bandwidth_ghz / SLOT_GHZ))
    start = int(round((channel.f_thz - BAND_START_THZ[band]) * 1e3 / SLOT_GHZ - width / 2))
    start = min(max(start, 0), N_SLOTS - width)
    return _eol_load(band, start, width, params, other_band)


def nli_noise(channel: Channel, interferers, spans: Sequence[Span], params: QotParams,
              full_fill: bool = False, bandwidth_ghz: float | None = None) -> float:
    """NLI power (W) in the reference bandwidth, accumulated incoherently over spans.

    ``interferers`` is a sequence of :class:`Channel` or a tuple of arrays
    ``(f_thz, symbol_rate_gbd, power_w)``. With ``full_fill`` the interferer
    set is replaced by the synthetic full load: the worse of both bands
    filled and only the channel's own band filled. The second case matters
    under ISRS, where a lit neighbour band drains power from the higher one.
    """
    if full_fill:
        bw = bandwidth_ghz if bandwidth_ghz is not None else channel.symbol_rate_gbd * 1.0625
        return max(nli_noise(channel, eol_interferers(channel, bw, params, other), spans, params)
                   for other in (True, False))
    if isinstance(interferers, tuple) and len(interferers) == 3 and not isinstance(interferers[0], Channel):
        f_k, rs_k, p_k = (np.asarray(x, dtype=float) for x in interferers)
    else:
        f_k = np.array([c.f_thz for c in interferers], dtype=float)
        rs_k = np.array([c.symbol_rate_gbd for c in interferers], dtype=float)
        p_k = np.array([c.power_w for c in interferers], dtype=float)
    band = band_of_frequency(channel.f_thz)
    if band is None:
        raise QotDomainError(f"{channel.f_thz:.4f} THz is outside the C and L bands")
    f_all = np.concatenate(([channel.f_thz], f_k))
    p_all = np.concatenate(([channel.power_w], p_k))
    total = 0.0
    # spans of one link are identical; evaluate each distinct span once
    counts: dict[Span, int] = {}
    for span in spans:
        counts[span] = counts.get(span, 0) + 1
    for span, n in counts.items():
        alpha = span.attenuation(band)
        rho = isrs_factors(f_all, p_all, _l_eff_km(alpha, span.length_km), params.isrs_coeff)
        g_cut = rho[0] * channel.power_w / (channel.symbol_rate_gbd * 1e9)
        g_int = rho[1:] * p_k / (rs_k * 1e9)
        psd = _span_nli_psd(channel.f_thz * 1e12, channel.symbol_rate_gbd * 1e9, g_cut,
                            f_k * 1e12, rs_k * 1e9, g_int, alpha, span.length_km, params)
        total += n * psd
    return total * params.ref_bandwidth_ghz * 1e9


def combine_snr(p_signal: float, ase_w: float, nli_w: float, params: QotParams,
                eol: bool, mws: bool = False) -> SnrReport:
    """Inverse-SNR addition of link ASE, link NLI and transceiver noise.

    End-of-life aging scales the link noise (ASE and NLI) by the aging
    margin, so the reported components still combine exactly to the total.
    """
    aging = db2lin(params.aging_margin_db) if eol else 1.0
    inv_ase = aging * ase_w / p_signal
    inv_nli = aging * nli_w / p_signal
    osnr_tx = params.osnr_tx_db - (params.mws_penalty_db if mws else 0.0)
    inv_tx = 1.0 / db2lin(osnr_tx) if math.isfinite(osnr_tx) else 0.0
    inv_total = inv_ase + inv_nli + inv_tx
    return SnrReport(
        snr_total=lin2db(1.0 / inv_total) if inv_total > 0 else math.inf,
        snr_ase=lin2db(1.0 / inv_ase) if inv_ase > 0 else math.inf,
        snr_nli=lin2db(1.0 / inv_nli) if inv_nli > 0 else math.inf,
        osnr_tx_used=osnr_tx,
        eol=eol,
    )


@lru_cache(maxsize=200_000)
def link_eol_terms(spans: tuple[Span, ...], band: str, start: int, width: int,
                   symbol_rate_gbd: float, params: QotParams) -> tuple[float, float, float]:
    """(signal power, ASE, full-fill NLI) of one channel over one link, cached."""
    f = channel_center_thz(band, start, width)
    p = launch_power_w(f, params, width * SLOT_GHZ)
    ch = Channel(f, symbol_rate_gbd, p)
    ase = ase_noise(spans, band, params, f)
    nli = nli_noise(ch, (), spans, params, full_fill=True, bandwidth_ghz=width * SLOT_GHZ)
    return p, ase, nli


def estimate_snr(lightpath, state, params: QotParams, eol: bool = True) -> SnrReport:
    """SNR of a (possibly tentative) lightpath against a plan state.

    ``lightpath`` needs ``links``, ``band``, ``start``, ``width``,
    ``symbol_rate_gbd``, ``mws`` and ``id`` (``None`` for a candidate).
    ``state`` needs ``topology`` and ``link_channels(link, exclude)``.
    End-of-life NLI is the worse of the synthetic full load and the
    present load on each link.
    """
    topo = state.topology
    f = channel_center_thz(lightpath.band, lightpath.start, lightpath.width)
    if band_of_frequency(f) != lightpath.band:
        raise QotDomainError(f"channel center {f:.4f} THz not inside band {lightpath.band}")
    rs = lightpath.symbol_rate_gbd
    p_sig = launch_power_w(f, params, lightpath.width * SLOT_GHZ)
    ch = Channel(f, rs, p_sig)
    ase = nli = 0.0
    for li in lightpath.links:
        spans = topo.links[li].spans
        actual = nli_noise(ch, state.link_channels(li, exclude=lightpath.id), spans, params)
        if eol:
            _, a, fill = link_eol_terms(spans, lightpath.band, lightpath.start, lightpath.width, rs, params)
            ase += a
            nli += max(fill, actual)
        else:
            ase += ase_noise(spans, lightpath.band, params, f)
            nli += actual
    return combine_snr(p_sig, ase, nli, params, eol, mws=lightpath.mws)
