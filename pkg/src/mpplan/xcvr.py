"""Bandwidth-variable transceiver catalog and multi-wavelength source groups."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .netgraph import MAX_WIDTH, MIN_WIDTH, SLOT_GHZ

BANDWIDTHS_GHZ = tuple(w * SLOT_GHZ for w in range(MIN_WIDTH, MAX_WIDTH + 1))
MWS_LINES = 4
RATE_STEP_GBPS = 50


@dataclass(frozen=True, order=True)
class XcvrConfig:
    bandwidth_ghz: float
    net_rate_gbps: int
    req_snr_db: float
    symbol_rate_gbd: float
    entropy: float

    @property
    def width(self) -> int:
        return int(round(self.bandwidth_ghz / SLOT_GHZ))

    def label(self) -> str:
        return f"{self.bandwidth_ghz:g}GHz/{self.net_rate_gbps}G"


@dataclass(frozen=True)
class CatalogParams:
    rolloff: float = 0.0625
    entropy_min: float = 2.0
    entropy_max: float = 6.0
    entropy_step: float = 0.05
    fec_overhead_bits: float = 0.8
    gap_db: float = 1.5

    @classmethod
    def from_mapping(cls, data: dict | None) -> "CatalogParams":
        names = set(cls.__dataclass_fields__)
        kwargs = {}
        for key, value in (data or {}).items():
            if key not in names:
                raise ConfigError(f"xcvr.{key}: unknown key")
            kwargs[key] = float(value)
        return cls(**kwargs)


def required_snr_symbol_db(entropy: float, gap_db: float = 0.0) -> float:
    """Gap-adjusted Shannon inverse: SNR per symbol needed for ``entropy`` bit/symbol."""
    return 10 * math.log10(2.0 ** entropy - 1.0) + gap_db


def symbol_to_reference_db(snr_db: float, symbol_rate_gbd: float) -> float:
    """Refer an SNR measured in the symbol-rate bandwidth to 12.5 GHz."""
    return snr_db + 10 * math.log10(symbol_rate_gbd / SLOT_GHZ)


def entropy_grid(params: CatalogParams) -> list[float]:
    if not 0 <= params.rolloff <= 0.2:
        raise ConfigError(f"roll-off {params.rolloff} outside [0, 0.2]")
    if params.entropy_step <= 0:
        raise ConfigError("entropy_step must be positive")
    if not 2.0 <= params.entropy_min <= params.entropy_max <= 6.0:
        raise ConfigError(
            f"entropy grid [{params.entropy_min}, {params.entropy_max}] not within [2, 6] bit/symbol"
        )
    n = int(math.floor((params.entropy_max - params.entropy_min) / params.entropy_step + 1e-9))
    return [round(params.entropy_min + i * params.entropy_step, 10) for i in range(n + 1)]


def generate_catalog(params: CatalogParams | None = None) -> list[XcvrConfig]:
    params = params or CatalogParams()
    grid = entropy_grid(params)
    out = []
    for bw in BANDWIDTHS_GHZ:
        rs = bw / (1 + params.rolloff)
        for h in grid:
            raw = 2 * rs * (h - params.fec_overhead_bits)
            rate = int(math.floor(raw / RATE_STEP_GBPS + 1e-9)) * RATE_STEP_GBPS
            if rate <= 0:
                continue
            req = symbol_to_reference_db(required_snr_symbol_db(h, params.gap_db), rs)
            out.append(XcvrConfig(bw, rate, req, rs, h))
    out.sort(key=lambda c: (c.bandwidth_ghz, c.net_rate_gbps, c.req_snr_db))
    return out


def preselect(catalog: list[XcvrConfig]) -> list[XcvrConfig]:
    """Keep the rate/SNR Pareto front of each bandwidth.

    Among configs with equal (bandwidth, rate) only the lowest-SNR one survives.
    """
    by_bw: dict[float, list[XcvrConfig]] = {}
    for c in catalog:
        by_bw.setdefault(c.bandwidth_ghz, []).append(c)
    kept = []
    for bw, configs in by_bw.items():
        best_snr = math.inf
        for c in sorted(configs, key=lambda c: (-c.net_rate_gbps, c.req_snr_db)):
            if c.req_snr_db < best_snr:
                kept.append(c)
                best_snr = c.req_snr_db
    kept.sort(key=lambda c: (c.bandwidth_ghz, c.net_rate_gbps))
    return kept


def default_catalog() -> list[XcvrConfig]:
    return preselect(generate_catalog())


def catalog_csv(catalog: list[XcvrConfig]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bandwidth_ghz", "symbol_rate_gbd", "entropy", "net_rate_gbps", "req_snr_db"])
    for c in catalog:
        w.writerow([f"{c.bandwidth_ghz:g}", f"{c.symbol_rate_gbd:.6g}", f"{c.entropy:g}",
                    c.net_rate_gbps, f"{c.req_snr_db:.6g}"])
    return buf.getvalue()


@dataclass
class MwsGroup:
    """A 4-line fixed-FSR comb feeding lightpaths of one demand on one path.

    ``lines[i]`` is the lightpath id using comb line ``i`` or ``None`` when
    the line is spare. The FSR equals the line configuration bandwidth.
    """

    id: int
    demand_id: int
    source: str
    links: tuple[int, ...]
    band: str
    config: XcvrConfig
    block_start: int
    lines: list = field(default_factory=lambda: [None] * MWS_LINES)
    spare_reserved: list = field(default_factory=lambda: [False] * MWS_LINES)

    @property
    def fsr_ghz(self) -> float:
        return self.config.bandwidth_ghz

    def line_start(self, i: int) -> int:
        return self.block_start + i * self.config.width

    @property
    def used_lines(self) -> int:
        return sum(lp is not None for lp in self.lines)

    def lasers_saved(self, active_ids=None) -> int:
        """Lasers saved on the transmitter side: used (active) lines minus one."""
        used = [lp for lp in self.lines if lp is not None and (active_ids is None or lp in active_ids)]
        return max(0, len(used) - 1)

    def spare_lines(self) -> list[int]:
        return [i for i, lp in enumerate(self.lines) if lp is None]


@dataclass(frozen=True)
class FeasibleOption:
    """A config that passes the EOL check at its tentative first-fit slot."""

    config: XcvrConfig
    band: str
    start: int
    snr_db: float


def _by_width(catalog: list[XcvrConfig]) -> list[tuple[int, list[XcvrConfig]]]:
    groups: dict[int, list[XcvrConfig]] = {}
    for c in catalog:
        groups.setdefault(c.width, []).append(c)
    return sorted(groups.items())


def feasible_options(catalog, links, state, qot, mws: bool = False) -> list[FeasibleOption]:
    from .netgraph import first_fit
    from .qot import estimate_snr
    from .state import Candidate

    out = []
    for width, configs in _by_width(catalog):
        fit = first_fit(state.grid, links, width)
        if fit is None:
            continue
        band, start = fit
        # all configs of one bandwidth share the symbol rate, hence the SNR
        snr = estimate_snr(Candidate(tuple(links), band, start, configs[0], mws), state, qot, eol=True)
        out.extend(FeasibleOption(c, band, start, snr.snr_total)
                   for c in configs if c.req_snr_db <= snr.snr_total)
    return out


def feasible_configs(catalog, candidate, state, qot) -> list[XcvrConfig]:
    """Configs whose required SNR is met by the EOL estimate of ``candidate``.

    ``candidate`` needs ``links`` and ``mws``; each bandwidth is evaluated
    at its tentative first-fit position on the candidate's path.
    """
    return [o.config for o in feasible_options(catalog, candidate.links, state, qot,
                                               mws=getattr(candidate, "mws", False))]
