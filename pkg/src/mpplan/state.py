"""Mutable planning state shared by the RCSA heuristic and the planner."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OccupancyError
from .netgraph import SpectrumAssignment, SpectrumGrid, Topology, allocate, channel_center_thz, release
from .qot import QotParams, launch_power_w
from .xcvr import MwsGroup, XcvrConfig


@dataclass
class Demand:
    id: int
    source: str
    destination: str
    art: list[float] = field(default_factory=list)  # ART per period, index 0 = period 1
    requested: float = 0.0  # target of the current planning stage
    lightpaths: list[int] = field(default_factory=list)  # placement order
    underprovisioned: bool = False
    shortfall: float = 0.0

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError(f"demand {self.id}: source equals destination")
        if self.requested < 0 or any(a < 0 for a in self.art):
            raise ValueError(f"demand {self.id}: negative traffic")


@dataclass
class Lightpath:
    id: int
    demand_id: int
    path: tuple[str, ...]
    links: tuple[int, ...]
    config: XcvrConfig
    band: str
    start: int
    active: bool = True
    mws_group: int | None = None
    period: int = 0
    snr_db: float = float("nan")  # EOL estimate at placement time

    @property
    def width(self) -> int:
        return self.config.width

    @property
    def rate(self) -> int:
        return self.config.net_rate_gbps

    @property
    def symbol_rate_gbd(self) -> float:
        return self.config.symbol_rate_gbd

    @property
    def mws(self) -> bool:
        return self.mws_group is not None

    @property
    def assignment(self) -> SpectrumAssignment:
        return SpectrumAssignment(self.links, self.band, self.start, self.width)


@dataclass
class Candidate:
    """A tentative lightpath for QoT evaluation; never stored in the state."""

    links: tuple[int, ...]
    band: str
    start: int
    config: XcvrConfig
    mws: bool = False
    id: int | None = None

    @property
    def width(self) -> int:
        return self.config.width

    @property
    def symbol_rate_gbd(self) -> float:
        return self.config.symbol_rate_gbd


class PlanState:
    """Grid occupancy, lightpaths, comb groups and demands of one planning run."""

    def __init__(self, topology: Topology, qot: QotParams, reserve_inactive_spectrum: bool = True):
        self.topology = topology
        self.qot = qot
        self.reserve_inactive_spectrum = reserve_inactive_spectrum
        self.grid = SpectrumGrid.for_topology(topology)
        self.lightpaths: list[Lightpath] = []
        self.groups: list[MwsGroup] = []
        self.demands: dict[int, Demand] = {}
        self.period = 0
        self.trace: list[dict] = []
        self._link_lps: list[dict[int, tuple[float, float, float]]] = [{} for _ in topology.links]
        self._link_cache: list[tuple | None] = [None] * len(topology.links)
        self._paths: dict[tuple[str, str, int], list[tuple[str, ...]]] = {}

    # -- queries -----------------------------------------------------------

    def active_rate(self, demand_id: int) -> int:
        d = self.demands[demand_id]
        return sum(self.lightpaths[i].rate for i in d.lightpaths if self.lightpaths[i].active)

    def link_channels(self, link: int, exclude: int | None = None):
        """Active channels on a link as arrays ``(f_thz, symbol_rate_gbd, power_w)``."""
        cached = self._link_cache[link]
        if cached is None:
            entries = self._link_lps[link]
            ids = np.fromiter(entries.keys(), dtype=np.int64, count=len(entries))
            vals = np.array(list(entries.values()), dtype=float).reshape(-1, 3)
            cached = (ids, vals[:, 0].copy(), vals[:, 1].copy(), vals[:, 2].copy())
            self._link_cache[link] = cached
        ids, f, rs, p = cached
        if exclude is not None and exclude in self._link_lps[link]:
            keep = ids != exclude
            return f[keep], rs[keep], p[keep]
        return f, rs, p

    def k_paths(self, source: str, destination: str, k: int):
        key = (source, destination, k)
        if key not in self._paths:
            from .rcsa import k_shortest_paths

            self._paths[key] = [tuple(p) for p in k_shortest_paths(self.topology, source, destination, k)]
        return self._paths[key]

    # -- mutation ----------------------------------------------------------

    def _transmit(self, lp: Lightpath, on: bool) -> None:
        for li in lp.links:
            if on:
                f = channel_center_thz(lp.band, lp.start, lp.width)
                self._link_lps[li][lp.id] = (f, lp.symbol_rate_gbd, launch_power_w(f, self.qot, lp.config.bandwidth_ghz))
            else:
                self._link_lps[li].pop(lp.id, None)
            self._link_cache[li] = None

    def add_lightpath(self, demand_id: int, path, links, config: XcvrConfig, band: str, start: int,
                      snr_db: float, mws_group: int | None = None, reserved_by: int | None = None) -> Lightpath:
        lp = Lightpath(len(self.lightpaths), demand_id, tuple(path), tuple(links), config, band, start,
                       True, mws_group, self.period, snr_db)
        if reserved_by is not None:
            release(self.grid, lp.assignment, reserved_by)
        allocate(self.grid, lp.assignment, lp.id + 1)
        self.lightpaths.append(lp)
        self.demands[demand_id].lightpaths.append(lp.id)
        self._transmit(lp, True)
        return lp

    def deactivate(self, lp: Lightpath) -> None:
        if not lp.active:
            return
        lp.active = False
        self._transmit(lp, False)
        if not self.reserve_inactive_spectrum:
            release(self.grid, lp.assignment, lp.id + 1)

    def activate(self, lp: Lightpath) -> None:
        if lp.active:
            return
        if not self.reserve_inactive_spectrum:
            # raises OccupancyError if the slot was taken meanwhile
            allocate(self.grid, lp.assignment, lp.id + 1)
        elif not np.all(self.grid.owner[list(lp.links), "CL".index(lp.band), lp.start:lp.start + lp.width]
                        == lp.id + 1):
            raise OccupancyError(f"lightpath {lp.id} lost its reserved spectrum")
        lp.active = True
        self._transmit(lp, True)

    def log(self, event: str, lp: Lightpath) -> None:
        self.trace.append({
            "event": event,
            "period": self.period,
            "demand": lp.demand_id,
            "lightpath": lp.id,
            "path": list(lp.path),
            "config": lp.config.label(),
            "band": lp.band,
            "start": lp.start,
            "width": lp.width,
            "mws": lp.mws,
        })
