"""Multi-period planning flows: Proactive, Incremental and Incremental Max."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from enum import Enum
from statistics import NormalDist
from typing import Sequence

from .netgraph import Topology
from .qot import QotParams
from .rcsa import EPS, Mode, order_demands, place_demand
from .state import Demand, PlanState
from .xcvr import XcvrConfig, default_catalog


class Flow(str, Enum):
    PROACTIVE = "proactive"
    INCREMENTAL = "incremental"
    INCREMENTAL_MAX = "incremental_max"


ALL_FLOWS = (Flow.PROACTIVE, Flow.INCREMENTAL, Flow.INCREMENTAL_MAX)


@dataclass(frozen=True)
class GrowthModel:
    """Independent Gaussian per-demand, per-period relative traffic growth."""

    mean: float = 0.25
    std: float = 0.10
    seed: int = 0

    def uniform(self, realization: int, period: int, demand_id: int) -> float:
        """Counter-based uniform in (0, 1) keyed by (seed, realization, period, demand)."""
        msg = struct.pack("<qqqq", self.seed, realization, period, demand_id)
        x = int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "little")
        return ((x >> 11) + 0.5) / 2.0 ** 53

    def draw(self, realization: int, period: int, demand_id: int) -> float:
        if self.std == 0:
            return self.mean
        u = self.uniform(realization, period, demand_id)
        return NormalDist(self.mean, self.std).inv_cdf(u)


def grow_traffic(demands: Sequence[Demand], period: int, growth: GrowthModel,
                 realization: int = 0) -> dict[int, float]:
    """ART of ``period`` from the previous period's ART (no clamping)."""
    if period < 2:
        raise ValueError("growth applies from period 2 on")
    return {d.id: d.art[period - 2] * (1.0 + growth.draw(realization, period, d.id)) for d in demands}


def estimate_final_traffic(initial_art: float, periods: int, mean_growth: float, overhead: float) -> float:
    if periods < 1 or overhead < 0:
        raise ValueError("periods must be >= 1 and overhead >= 0")
    return initial_art * (1.0 + mean_growth) ** (periods - 1) * (1.0 + overhead)


def deactivate_overprovisioned(demand: Demand, state: PlanState, requested: float) -> None:
    """Keep LPs active (in placement order) until ``requested`` is met; park the rest."""
    acc = 0.0
    for lp_id in demand.lightpaths:
        lp = state.lightpaths[lp_id]
        if acc >= requested - EPS:
            state.deactivate(lp)
        elif lp.active:
            acc += lp.rate


def activate_inactive(demand: Demand, state: PlanState, order: str = "rate") -> list[int]:
    """Turn parked LPs back on until the demand's request is met.

    ``order="rate"`` activates the highest-rate LPs first (ties: placement
    order); ``order="placement"`` uses placement order only.
    """
    shortfall = demand.requested - state.active_rate(demand.id)
    parked = [state.lightpaths[i] for i in demand.lightpaths if not state.lightpaths[i].active]
    if order == "rate":
        parked.sort(key=lambda lp: (-lp.rate, demand.lightpaths.index(lp.id)))
    elif order != "placement":
        raise ValueError(f"unknown activation order {order!r}")
    activated = []
    for lp in parked:
        if shortfall <= EPS:
            break
        state.activate(lp)
        state.log("activate", lp)
        activated.append(lp.id)
        shortfall -= lp.rate
    return activated


@dataclass
class PlanConfig:
    catalog: list[XcvrConfig] = field(default_factory=default_catalog)
    qot: QotParams = field(default_factory=QotParams)
    overhead: float = 0.25
    k_paths: int = 3
    reserve_inactive_spectrum: bool = True
    mws: bool = True
    mws_reserve_spare: bool = True
    activation_order: str = "rate"
    just_enough_tie: str = "max_rate"


@dataclass
class Snapshot:
    """End-of-period view of a plan, sufficient to recompute every metric."""

    flow: str
    realization: int
    period: int
    demands: list[dict]
    lightpaths: list[dict]
    groups: list[dict]

    def records(self):
        head = {"kind": "period", "flow": self.flow, "realization": self.realization, "period": self.period}
        yield head
        for d in self.demands:
            yield {"kind": "demand", **d}
        for lp in self.lightpaths:
            yield {"kind": "lightpath", **lp}
        for g in self.groups:
            yield {"kind": "group", **g}

    @classmethod
    def from_records(cls, records) -> list["Snapshot"]:
        out: list[Snapshot] = []
        for rec in records:
            kind = rec.pop("kind")
            if kind == "period":
                out.append(cls(rec["flow"], rec["realization"], rec["period"], [], [], []))
            else:
                getattr(out[-1], kind + "s").append(rec)
        return out


def take_snapshot(state: PlanState, flow: str, realization: int) -> Snapshot:
    t = state.period
    demands = [
        {"id": d.id, "src": d.source, "dst": d.destination, "art": d.art[t - 1],
         "provisioned": state.active_rate(d.id), "underprovisioned": d.underprovisioned,
         "shortfall": d.shortfall}
        for d in sorted(state.demands.values(), key=lambda d: d.id)
    ]
    lps = [
        {"id": lp.id, "demand": lp.demand_id, "path": list(lp.path), "bandwidth_ghz": lp.config.bandwidth_ghz,
         "rate": lp.rate, "req_snr_db": lp.config.req_snr_db, "snr_db": lp.snr_db, "band": lp.band,
         "start": lp.start, "width": lp.width, "active": lp.active, "group": lp.mws_group, "period": lp.period}
        for lp in state.lightpaths
    ]
    groups = [{"id": g.id, "demand": g.demand_id, "lines": list(g.lines)} for g in state.groups]
    return Snapshot(flow, realization, t, demands, lps, groups)


@dataclass
class FlowResult:
    flow: str
    realization: int
    snapshots: list[Snapshot]
    state: PlanState


def _settle_period(state: PlanState, demands: Sequence[Demand]) -> None:
    for d in demands:
        short = d.requested - state.active_rate(d.id)
        d.underprovisioned = short > EPS
        d.shortfall = short if d.underprovisioned else 0.0


def run_flow(flow: Flow | str, topology: Topology, initial: Sequence[tuple[str, str, float]], periods: int,
             growth: GrowthModel, config: PlanConfig | None = None, realization: int = 0) -> FlowResult:
    """Plan ``periods`` periods of one growth realization with one flow.

    ``initial`` lists ``(src, dst, period-1 ART)``; demand ids are list indices.
    """
    flow = Flow(flow)
    config = config or PlanConfig()
    if periods < 1:
        raise ValueError("periods must be >= 1")
    state = PlanState(topology, config.qot, config.reserve_inactive_spectrum)
    demands = [Demand(i, s, d, [float(a)]) for i, (s, d, a) in enumerate(initial)]
    for d in demands:
        state.demands[d.id] = d
    ordered = order_demands(demands, topology)
    mode = Mode.HIGHEST if flow is Flow.INCREMENTAL_MAX else Mode.JUST_ENOUGH

    def place(d: Demand):
        place_demand(d, state, mode, config.catalog, config.qot, k=config.k_paths,
                     mws=config.mws, reserve_spare=config.mws_reserve_spare, tie=config.just_enough_tie)

    if flow is Flow.PROACTIVE:
        state.period = 0
        for d in ordered:
            d.requested = estimate_final_traffic(d.art[0], periods, growth.mean, config.overhead)
            place(d)
        for d in ordered:
            deactivate_overprovisioned(d, state, d.art[0])

    snapshots = []
    for t in range(1, periods + 1):
        state.period = t
        if t >= 2:
            grown = grow_traffic(demands, t, growth, realization)
            for d in demands:
                d.art.append(grown[d.id])
        for d in ordered:
            d.requested = d.art[t - 1]
            if flow is Flow.PROACTIVE:
                activate_inactive(d, state, config.activation_order)
            place(d)
        _settle_period(state, demands)
        snapshots.append(take_snapshot(state, flow.value, realization))
    return FlowResult(flow.value, realization, snapshots, state)
