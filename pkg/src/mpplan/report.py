"""Per-period metrics, cross-realization aggregation and result files.

Output files per flow (``<flow>`` is the flow value, e.g. ``proactive``):

``<flow>_a_traffic.csv``
    period, art_mean, art_std, provisioned_mean, provisioned_std,
    provisioned_norm_mean, provisioned_norm_std, underprovisioned_mean,
    shortfall_mean, l_band_share
``<flow>_b_lightpaths.csv``
    period, active_lps_mean, active_lps_std
``<flow>_c_lasers.csv``
    period, lasers_saved_mean, lasers_saved_std
``<flow>_d_bandwidth.csv``
    period, then one mean-count column per bandwidth ``bw_37.5`` .. ``bw_150``

plus one ``summary.txt`` shared by all flows. ``provisioned_norm`` is the
provisioned traffic divided by the mean ART across realizations. Numbers
use six significant digits.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from statistics import mean, stdev
from typing import Iterable, Mapping, Sequence

from .xcvr import BANDWIDTHS_GHZ


@dataclass(frozen=True)
class PeriodMetrics:
    period: int
    art_total: float
    provisioned: float
    ratio: float
    active_lps: int
    lasers_saved: int
    histogram: tuple[int, ...]  # active LPs per bandwidth, BANDWIDTHS_GHZ order
    l_band: bool
    underprovisioned: int
    shortfall: float


def compute_metrics(snapshot) -> PeriodMetrics:
    """Metrics of one period; only active lightpaths count."""
    lps = {lp["id"]: lp for lp in snapshot.lightpaths}
    active = [lp for lp in snapshot.lightpaths if lp["active"]]
    art = sum(d["art"] for d in snapshot.demands)
    prov = float(sum(lp["rate"] for lp in active))
    hist = [0] * len(BANDWIDTHS_GHZ)
    for lp in active:
        hist[BANDWIDTHS_GHZ.index(lp["bandwidth_ghz"])] += 1
    saved = 0
    for g in snapshot.groups:
        used = sum(1 for i in g["lines"] if i is not None and lps[i]["active"])
        saved += max(0, used - 1)
    if art > 0:
        ratio = prov / art
    else:
        ratio = 1.0 if prov == 0 else math.inf
    return PeriodMetrics(
        period=snapshot.period,
        art_total=float(art),
        provisioned=prov,
        ratio=ratio,
        active_lps=len(active),
        lasers_saved=saved,
        histogram=tuple(hist),
        l_band=any(lp["band"] == "L" for lp in active),
        underprovisioned=sum(1 for d in snapshot.demands if d["underprovisioned"]),
        shortfall=float(sum(d["shortfall"] for d in snapshot.demands)),
    )


def l_band_onset(series: Sequence[PeriodMetrics]) -> int | None:
    """First period with an active L-band lightpath, ``None`` if there is none."""
    return next((m.period for m in series if m.l_band), None)


def _ms(values: Sequence[float]) -> tuple[float, float]:
    if len(values) == 1:
        return float(values[0]), 0.0
    return mean(values), stdev(values)


@dataclass
class Aggregate:
    """Per-period sample mean and standard deviation across realizations.

    ``onsets`` keeps each realization's L-band onset (``None`` if the band
    is never lit). ``mean_onset`` counts a never-lit realization as
    ``periods + 1``.
    """

    flow: str
    periods: list[int]
    realizations: int
    stats: dict[str, list[tuple[float, float]]]
    histogram: list[tuple[float, ...]]
    l_band_share: list[float]
    onsets: list[int | None]

    @property
    def mean_onset(self) -> float:
        horizon = len(self.periods) + 1
        return mean(horizon if o is None else o for o in self.onsets)

    def final(self, key: str) -> float:
        return self.stats[key][-1][0]


_SCALARS = ("art_total", "provisioned", "active_lps", "lasers_saved", "underprovisioned", "shortfall")


def aggregate(runs: Sequence[Sequence[PeriodMetrics]], flow: str = "") -> Aggregate:
    if not runs:
        raise ValueError("need at least one realization")
    n_periods = len(runs[0])
    if any(len(r) != n_periods for r in runs):
        raise ValueError("realizations have different period counts")
    periods = [m.period for m in runs[0]]
    stats: dict[str, list[tuple[float, float]]] = {k: [] for k in _SCALARS}
    stats["provisioned_norm"] = []
    hist, share = [], []
    for t in range(n_periods):
        rows = [r[t] for r in runs]
        for key in _SCALARS:
            stats[key].append(_ms([float(getattr(m, key)) for m in rows]))
        art_mean = stats["art_total"][-1][0]
        norm = [m.provisioned / art_mean if art_mean > 0 else 0.0 for m in rows]
        stats["provisioned_norm"].append(_ms(norm))
        hist.append(tuple(mean(m.histogram[i] for m in rows) for i in range(len(BANDWIDTHS_GHZ))))
        share.append(sum(m.l_band for m in rows) / len(rows))
    return Aggregate(flow, periods, len(runs), stats, hist, share, [l_band_onset(r) for r in runs])


def fmt(x: float) -> str:
    """Six significant digits, no negative zero."""
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def _csv(path: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(str(v) if isinstance(v, int) else fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def panel_files(flow: str) -> dict[str, str]:
    return {p: f"{flow}_{p}_{name}.csv" for p, name in
            (("a", "traffic"), ("b", "lightpaths"), ("c", "lasers"), ("d", "bandwidth"))}


def _bw_label(bw: float) -> str:
    return f"bw_{bw:g}"


def emit(aggregates: Mapping[str, Aggregate], out_dir: str) -> list[str]:
    """Write the four panel CSVs per flow and ``summary.txt``; return the paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for flow, agg in aggregates.items():
        names = panel_files(flow)
        s = agg.stats
        rows_a = [
            (p, *s["art_total"][i], *s["provisioned"][i], *s["provisioned_norm"][i],
             s["underprovisioned"][i][0], s["shortfall"][i][0], agg.l_band_share[i])
            for i, p in enumerate(agg.periods)
        ]
        tables = {
            "a": (["period", "art_mean", "art_std", "provisioned_mean", "provisioned_std",
                   "provisioned_norm_mean", "provisioned_norm_std", "underprovisioned_mean",
                   "shortfall_mean", "l_band_share"], rows_a),
            "b": (["period", "active_lps_mean", "active_lps_std"],
                  [(p, *s["active_lps"][i]) for i, p in enumerate(agg.periods)]),
            "c": (["period", "lasers_saved_mean", "lasers_saved_std"],
                  [(p, *s["lasers_saved"][i]) for i, p in enumerate(agg.periods)]),
            "d": (["period"] + [_bw_label(b) for b in BANDWIDTHS_GHZ],
                  [(p, *agg.histogram[i]) for i, p in enumerate(agg.periods)]),
        }
        for panel, (header, rows) in tables.items():
            path = os.path.join(out_dir, names[panel])
            _csv(path, header, rows)
            written.append(path)
    path = os.path.join(out_dir, "summary.txt")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(summary_text(aggregates))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    written.append(path)
    return written


def modal_bandwidth(agg: Aggregate) -> float:
    h = agg.histogram[-1]
    return BANDWIDTHS_GHZ[max(range(len(h)), key=lambda i: (h[i], -i))]


def bandwidth_share(agg: Aggregate, bw: float) -> float:
    h = agg.histogram[-1]
    total = sum(h)
    return h[BANDWIDTHS_GHZ.index(bw)] / total if total else 0.0


def flow_line(agg: Aggregate) -> str:
    onset = "never" if all(o is None for o in agg.onsets) else fmt(agg.mean_onset)
    return (f"{agg.flow}: final-period LPs {fmt(agg.final('active_lps'))}, "
            f"lasers saved {fmt(agg.final('lasers_saved'))}, L-band onset {onset}")


def summary_text(aggregates: Mapping[str, Aggregate]) -> str:
    lines = []
    any_agg = next(iter(aggregates.values()))
    lines.append(f"periods {len(any_agg.periods)}, realizations {any_agg.realizations}")
    lines.append("")
    for agg in aggregates.values():
        lines.append(flow_line(agg))
        lines.append(f"  provisioned/ART {fmt(agg.stats['provisioned_norm'][-1][0])}, "
                     f"underprovisioned demands {fmt(agg.final('underprovisioned'))}, "
                     f"modal bandwidth {modal_bandwidth(agg):g} GHz, "
                     f"150 GHz share {fmt(bandwidth_share(agg, 150.0))}")
        onsets = ["-" if o is None else str(o) for o in agg.onsets]
        lines.append(f"  onsets {' '.join(onsets)}")
    pro, inc, imax = (aggregates.get(k) for k in ("proactive", "incremental", "incremental_max"))
    lines.append("")
    if pro and inc:
        lps_p, lps_i = pro.final("active_lps"), inc.final("active_lps")
        ratio = lps_i / lps_p if lps_p else math.inf
        lines.append(f"LPs incremental / proactive (final period): {fmt(ratio)}")
    if pro and (inc or imax):
        other = max(a.final("lasers_saved") for a in (inc, imax) if a)
        lines.append(f"lasers saved proactive vs best incremental (final period): "
                     f"{fmt(pro.final('lasers_saved'))} vs {fmt(other)}")
    if pro and inc and imax:
        lines.append("mean L-band onset incremental_max / proactive / incremental: "
                     f"{fmt(imax.mean_onset)} / {fmt(pro.mean_onset)} / {fmt(inc.mean_onset)}")
    return "\n".join(lines) + "\n"
