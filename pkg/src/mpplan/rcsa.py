"""Routing, configuration and spectrum assignment for one planning stage.

Every ordering is tie-broken deterministically: paths by (length, node
sequence), demands by (shortest-path length desc, id), configurations by
the rules in :func:`select_configuration`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import TopologyError
from .netgraph import SpectrumAssignment, Topology, allocate, first_fit_run
from .qot import QotParams, estimate_snr
from .state import Candidate, Demand, Lightpath, PlanState
from .xcvr import MWS_LINES, MwsGroup, XcvrConfig, feasible_options

EPS = 1e-9

__all__ = [
    "Demand", "Lightpath", "Mode", "PlacementResult", "form_mws", "k_shortest_paths",
    "order_demands", "place_demand", "select_configuration", "shortest_path",
]


class Mode(str, Enum):
    JUST_ENOUGH = "just_enough"
    HIGHEST = "highest"


def _key(cost: float) -> float:
    return round(cost, 6)


def _dijkstra(topo: Topology, s: str, d: str, banned_nodes=frozenset(), banned_edges=frozenset()):
    heap = [(0.0, (s,), 0.0)]
    done = set()
    while heap:
        _, path, cost = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == d:
            return cost, path
        for nbr, link in topo.neighbors(node):
            if nbr in done or nbr in banned_nodes or (link.a, link.b) in banned_edges:
                continue
            c = cost + link.length_km
            heapq.heappush(heap, (_key(c), path + (nbr,), c))
    return None


def shortest_path(topo: Topology, s: str, d: str) -> tuple[float, tuple[str, ...]]:
    for n in (s, d):
        if n not in topo._adj:
            raise TopologyError(f"unknown node {n!r}")
    res = _dijkstra(topo, s, d)
    if res is None:
        raise TopologyError(f"{s!r} and {d!r} are not connected")
    return res


def k_shortest_paths(topo: Topology, s: str, d: str, k: int = 3) -> list[list[str]]:
    """Yen's k loopless shortest paths ordered by (length, node sequence)."""
    if s == d:
        raise ValueError("source equals destination")
    first = _dijkstra(topo, s, d)
    if first is None or k < 1:
        return []
    found = [first[1]]
    candidates: list[tuple[float, tuple[str, ...]]] = []
    seen = {first[1]}
    while len(found) < k:
        prev = found[-1]
        for i in range(len(prev) - 1):
            root = prev[:i + 1]
            banned_edges = set()
            for p in found:
                if p[:i + 1] == root:
                    u, v = p[i], p[i + 1]
                    banned_edges.add((u, v) if u < v else (v, u))
            spur = _dijkstra(topo, prev[i], d, frozenset(root[:-1]), frozenset(banned_edges))
            if spur is None:
                continue
            path = root[:-1] + spur[1]
            if path not in seen:
                seen.add(path)
                heapq.heappush(candidates, (_key(topo.path_length(path)), path))
        if not candidates:
            break
        found.append(heapq.heappop(candidates)[1])
    return [list(p) for p in found]


def order_demands(demands: Iterable[Demand], topo: Topology) -> list[Demand]:
    """Descending shortest-path length; ties by demand id."""
    keyed = []
    for d in demands:
        length, _ = shortest_path(topo, d.source, d.destination)
        keyed.append((-_key(length), d.id, d))
    keyed.sort(key=lambda t: (t[0], t[1]))
    return [d for _, _, d in keyed]


def select_configuration(mode: Mode | str, remaining: float, feasible: Sequence[XcvrConfig],
                         tie: str = "max_rate") -> XcvrConfig | None:
    """Pick a transceiver configuration; ``None`` when nothing is feasible.

    Highest: max rate, then min bandwidth, then min required SNR.
    JustEnough: if one config covers ``remaining``, the narrowest such
    config; among those ``tie="max_rate"`` takes the best rate the
    bandwidth supports and ``tie="min_rate"`` the smallest sufficient one
    (then min SNR). Otherwise as Highest.
    """
    if tie not in ("max_rate", "min_rate"):
        raise ValueError(f"unknown tie rule {tie!r}")
    if not feasible:
        return None
    mode = Mode(mode)
    highest = min(feasible, key=lambda c: (-c.net_rate_gbps, c.bandwidth_ghz, c.req_snr_db))
    if mode is Mode.HIGHEST:
        return highest
    enough = [c for c in feasible if c.net_rate_gbps >= remaining - EPS]
    if not enough:
        return highest
    sign = -1 if tie == "max_rate" else 1
    return min(enough, key=lambda c: (c.bandwidth_ghz, sign * c.net_rate_gbps, c.req_snr_db))


@dataclass
class PlacementResult:
    demand_id: int
    placed: list[int] = field(default_factory=list)
    groups: list[int] = field(default_factory=list)
    met: bool = True
    shortfall: float = 0.0


def _line_snr(state: PlanState, qot: QotParams, links, band, start, config) -> float:
    return estimate_snr(Candidate(tuple(links), band, start, config, mws=True), state, qot, eol=True).snr_total


def form_mws(demand: Demand, path: Sequence[str], links: Sequence[int], config: XcvrConfig,
             remaining: float, state: PlanState, qot: QotParams, reserve_spare: bool = True,
             catalog: Sequence[XcvrConfig] = ()) -> MwsGroup | None:
    """Place 3 or 4 lightpaths on one fixed-FSR comb, or return ``None``.

    The comb needs four contiguous ``config``-wide blocks free on the whole
    path. Every line carries the comb's OSNR_TX penalty; if ``config`` no
    longer fits under it, the highest-rate config of the same bandwidth from
    ``catalog`` that does is used instead. The group is formed only if that
    config still needs at least three lines for ``remaining``.
    """
    w = config.width
    fit = first_fit_run(state.grid, links, MWS_LINES * w)
    if fit is None:
        return None
    band, block = fit
    snrs = [_line_snr(state, qot, links, band, block + i * w, config) for i in range(MWS_LINES)]
    worst = min(snrs)
    same_bw = [c for c in catalog if c.width == w] or [config]
    ok = [c for c in same_bw if c.req_snr_db <= worst and c.net_rate_gbps <= config.net_rate_gbps]
    if not ok:
        return None
    line_cfg = max(ok, key=lambda c: (c.net_rate_gbps, -c.req_snr_db))
    n_lines = min(MWS_LINES, math.ceil((remaining - EPS) / line_cfg.net_rate_gbps))
    if n_lines < 3:
        return None
    group = MwsGroup(len(state.groups), demand.id, path[0], tuple(links), band, line_cfg, block)
    state.groups.append(group)
    for i in range(n_lines):
        lp = state.add_lightpath(demand.id, path, links, line_cfg, band, group.line_start(i), snrs[i],
                                 mws_group=group.id)
        group.lines[i] = lp.id
        state.log("place", lp)
    if reserve_spare:
        for i in range(n_lines, MWS_LINES):
            allocate(state.grid, SpectrumAssignment(tuple(links), band, group.line_start(i), w), -(group.id + 1))
            group.spare_reserved[i] = True
    return group


def _use_spare_line(demand: Demand, links, path, state: PlanState, qot: QotParams) -> Lightpath | None:
    for group in state.groups:
        if group.demand_id != demand.id or group.links != tuple(links):
            continue
        for i in group.spare_lines():
            start = group.line_start(i)
            reserved = group.spare_reserved[i]
            if not reserved and not state.grid.is_free(links, group.band, start, group.config.width):
                continue
            snr = _line_snr(state, qot, links, group.band, start, group.config)
            if group.config.req_snr_db > snr:
                continue
            lp = state.add_lightpath(demand.id, path, links, group.config, group.band, start, snr,
                                     mws_group=group.id, reserved_by=-(group.id + 1) if reserved else None)
            group.lines[i] = lp.id
            group.spare_reserved[i] = False
            state.log("spare", lp)
            return lp
    return None


def place_demand(demand: Demand, state: PlanState, mode: Mode | str, catalog: Sequence[XcvrConfig],
                 qot: QotParams, k: int = 3, mws: bool = True, reserve_spare: bool = True,
                 tie: str = "max_rate") -> PlacementResult:
    """Place lightpaths until ``demand.requested`` is covered by active capacity.

    Paths are tried in k-shortest order; a path is abandoned when no
    configuration is both spectrally placeable and SNR-feasible on it.
    """
    result = PlacementResult(demand.id)
    remaining = demand.requested - state.active_rate(demand.id)
    if remaining > EPS:
        for path in state.k_paths(demand.source, demand.destination, k):
            links = state.topology.path_links(path)
            while remaining > EPS:
                if mws:
                    lp = _use_spare_line(demand, links, path, state, qot)
                    if lp is not None:
                        result.placed.append(lp.id)
                        remaining -= lp.rate
                        continue
                options = feasible_options(catalog, links, state, qot)
                cfg = select_configuration(mode, remaining, [o.config for o in options], tie)
                if cfg is None:
                    break
                n_needed = math.ceil((remaining - EPS) / cfg.net_rate_gbps)
                if mws and n_needed >= 3:
                    group = form_mws(demand, path, links, cfg, remaining, state, qot, reserve_spare, catalog)
                    if group is not None:
                        result.groups.append(group.id)
                        for lp_id in group.lines:
                            if lp_id is not None:
                                result.placed.append(lp_id)
                                remaining -= group.config.net_rate_gbps
                        continue
                opt = next(o for o in options if o.config == cfg)
                lp = state.add_lightpath(demand.id, path, links, cfg, opt.band, opt.start, opt.snr_db)
                state.log("place", lp)
                result.placed.append(lp.id)
                remaining -= cfg.net_rate_gbps
            if remaining <= EPS:
                break
    result.met = remaining <= EPS
    result.shortfall = 0.0 if result.met else remaining
    demand.underprovisioned = not result.met
    demand.shortfall = result.shortfall
    return result
