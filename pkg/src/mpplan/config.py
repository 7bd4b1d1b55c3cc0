"""Run configuration: YAML file plus command-line overrides.

Documented keys (all optional; defaults in parentheses)::

    flow: all | proactive | incremental | incremental_max     (all)
    periods: int >= 1                                         (10)
    realizations: int >= 1                                    (30)
    seed: int                                                 (42)
    oh: float >= 0                                            (0.25)
    reserve_inactive_spectrum: bool                           (true)
    growth: {mean: float (0.25), std: float >= 0 (0.10)}
    demands:
      file: CSV with header src,dst,gbps                      (unset)
      weights: CSV with header node,weight                    (bundled)
      scale: float >= 0                                       (3500)
    planner: {k_paths (3), mws (true), mws_reserve_spare (true),
              activation_order: rate|placement (rate),
              just_enough_tie: max_rate|min_rate (max_rate)}
    netgraph: {topology: SNDlib file path (bundled Nobel-Germany)}
    qot: see QotParams.from_mapping
    xcvr: see CatalogParams.from_mapping
    out: output directory                                     (out)

Relative file paths are resolved against the config file's directory.
When ``demands.file`` is set it wins over the generator.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from dataclasses import dataclass, field, replace
from importlib.resources import files

import yaml

from .errors import ConfigError
from .netgraph import Topology, load_topology, nobel_germany
from .planner import ALL_FLOWS, Flow, GrowthModel, PlanConfig
from .qot import QotParams
from .xcvr import CatalogParams, generate_catalog, preselect

DEFAULT_SCALE = 3500.0
DEMAND_STEP_GBPS = 25


@dataclass
class RunConfig:
    flow: str = "all"
    periods: int = 10
    realizations: int = 30
    seed: int = 42
    oh: float = 0.25
    growth_mean: float = 0.25
    growth_std: float = 0.10
    reserve_inactive_spectrum: bool = True
    k_paths: int = 3
    mws: bool = True
    mws_reserve_spare: bool = True
    activation_order: str = "rate"
    just_enough_tie: str = "max_rate"
    topology: str | None = None
    demand_file: str | None = None
    weights_file: str | None = None
    scale: float = DEFAULT_SCALE
    qot: QotParams = field(default_factory=QotParams)
    xcvr: CatalogParams = field(default_factory=CatalogParams)
    out: str = "out"

    def validate(self) -> "RunConfig":
        if self.flow != "all" and self.flow not in {f.value for f in Flow}:
            raise ConfigError(f"flow: unknown flow {self.flow!r}")
        if self.periods < 1:
            raise ConfigError("periods: must be >= 1")
        if self.realizations < 1:
            raise ConfigError("realizations: must be >= 1")
        if self.oh < 0:
            raise ConfigError("oh: must be >= 0")
        if self.growth_std < 0:
            raise ConfigError("growth.std: must be >= 0")
        if self.k_paths < 1:
            raise ConfigError("planner.k_paths: must be >= 1")
        if self.scale < 0:
            raise ConfigError("demands.scale: must be >= 0")
        if self.activation_order not in ("rate", "placement"):
            raise ConfigError(f"planner.activation_order: unknown value {self.activation_order!r}")
        if self.just_enough_tie not in ("max_rate", "min_rate"):
            raise ConfigError(f"planner.just_enough_tie: unknown value {self.just_enough_tie!r}")
        for key, path in (("netgraph.topology", self.topology), ("demands.file", self.demand_file),
                          ("demands.weights", self.weights_file)):
            if path is not None and not os.path.isfile(path):
                raise ConfigError(f"{key}: file not found: {path}")
        return self

    def flows(self) -> list[Flow]:
        return list(ALL_FLOWS) if self.flow == "all" else [Flow(self.flow)]

    def growth(self) -> GrowthModel:
        return GrowthModel(self.growth_mean, self.growth_std, self.seed)

    def plan_config(self) -> PlanConfig:
        return PlanConfig(
            catalog=preselect(generate_catalog(self.xcvr)),
            qot=self.qot,
            overhead=self.oh,
            k_paths=self.k_paths,
            reserve_inactive_spectrum=self.reserve_inactive_spectrum,
            mws=self.mws,
            mws_reserve_spare=self.mws_reserve_spare,
            activation_order=self.activation_order,
            just_enough_tie=self.just_enough_tie,
        )

    def load_topology(self) -> Topology:
        band = {"C": self.qot.attenuation_db_per_km[0], "L": self.qot.attenuation_db_per_km[1]}
        nf = {"C": self.qot.noise_figure_db[0], "L": self.qot.noise_figure_db[1]}
        if self.topology is None:
            return nobel_germany(band, nf)
        return load_topology(self.topology, band, nf)

    def load_demands(self, topo: Topology) -> list[tuple[str, str, float]]:
        if self.demand_file is not None:
            with open(self.demand_file, encoding="utf-8") as fh:
                return parse_demands(fh.read(), topo, self.demand_file)
        return gravity_demands(topo, load_weights(self.weights_file), self.scale)


_TOP = {"flow", "periods", "realizations", "seed", "oh", "reserve_inactive_spectrum", "growth",
        "demands", "planner", "netgraph", "qot", "xcvr", "out"}
_SECTIONS = {
    "growth": {"mean": "growth_mean", "std": "growth_std"},
    "demands": {"file": "demand_file", "weights": "weights_file", "scale": "scale"},
    "planner": {"k_paths": "k_paths", "mws": "mws", "mws_reserve_spare": "mws_reserve_spare",
                "activation_order": "activation_order", "just_enough_tie": "just_enough_tie"},
    "netgraph": {"topology": "topology"},
}
_TYPES = {"periods": int, "realizations": int, "seed": int, "k_paths": int, "oh": float,
          "growth_mean": float, "growth_std": float, "scale": float,
          "reserve_inactive_spectrum": bool, "mws": bool, "mws_reserve_spare": bool}
_PATHS = {"topology", "demand_file", "weights_file", "out"}


def _coerce(key_path: str, attr: str, value):
    kind = _TYPES.get(attr)
    if kind is None:
        return value if value is None else str(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key_path}: expected true/false, got {value!r}")
        return value
    try:
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key_path}: expected {kind.__name__}, got {value!r}") from None


def config_from_mapping(data: dict | None, base_dir: str = ".") -> RunConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    kwargs = {}
    for key, value in data.items():
        if key not in _TOP:
            raise ConfigError(f"{key}: unknown key")
        if key == "qot":
            kwargs["qot"] = QotParams.from_mapping(value)
        elif key == "xcvr":
            kwargs["xcvr"] = CatalogParams.from_mapping(value)
        elif key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected a mapping")
            for sub, v in value.items():
                if sub not in _SECTIONS[key]:
                    raise ConfigError(f"{key}.{sub}: unknown key")
                attr = _SECTIONS[key][sub]
                kwargs[attr] = _coerce(f"{key}.{sub}", attr, v)
        else:
            kwargs[key] = _coerce(key, key, value)
    for attr in _PATHS:
        if kwargs.get(attr) is not None and not os.path.isabs(kwargs[attr]):
            kwargs[attr] = os.path.normpath(os.path.join(base_dir, kwargs[attr]))
    return RunConfig(**kwargs)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping(data, os.path.dirname(os.path.abspath(path)))


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply non-``None`` overrides (command-line flags take precedence)."""
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


# -- demand files --------------------------------------------------------------

def parse_demands(text: str, topo: Topology, source: str = "<demands>") -> list[tuple[str, str, float]]:
    """Read ``src,dst,gbps`` rows; node pairs are unordered and must be unique."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["src", "dst", "gbps"]:
        raise ConfigError(f"{source}: expected header src,dst,gbps")
    nodes = set(topo.nodes)
    seen = set()
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 3:
            raise ConfigError(f"{source}:{lineno}: expected 3 fields")
        s, d, g = (x.strip() for x in row)
        for n in (s, d):
            if n not in nodes:
                raise ConfigError(f"{source}:{lineno}: unknown node {n!r}")
        if s == d:
            raise ConfigError(f"{source}:{lineno}: source equals destination")
        try:
            gbps = float(g)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad rate {g!r}") from None
        if gbps < 0:
            raise ConfigError(f"{source}:{lineno}: negative rate")
        key = (min(s, d), max(s, d))
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate pair {s}-{d}")
        seen.add(key)
        out.append((s, d, gbps))
    return out


def load_weights(path: str | None) -> dict[str, float]:
    if path is None:
        text = files("mpplan.data").joinpath("nobel-germany-weights.csv").read_text(encoding="utf-8")
        source = "nobel-germany-weights.csv"
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        source = path
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["node", "weight"]:
        raise ConfigError(f"{source}: expected header node,weight")
    weights = {}
    for lineno, row in enumerate(reader, start=2):
        try:
            w = float(row["weight"])
        except (TypeError, ValueError):
            raise ConfigError(f"{source}:{lineno}: bad weight {row['weight']!r}") from None
        if w < 0:
            raise ConfigError(f"{source}:{lineno}: negative weight")
        weights[row["node"].strip()] = w
    return weights


def gravity_demands(topo: Topology, weights: dict[str, float], scale: float) -> list[tuple[str, str, float]]:
    """ART_1(s, d) = scale * w_s * w_d / sum(w), rounded to 25 Gbit/s, all unordered pairs.

    Nodes missing from ``weights`` get weight 0.
    """
    unknown = sorted(set(weights) - set(topo.nodes))
    if unknown:
        raise ConfigError(f"weights: unknown node {unknown[0]!r}")
    if scale < 0:
        raise ConfigError("scale must be >= 0")
    total = sum(weights.values())
    out = []
    for s, d in itertools.combinations(topo.nodes, 2):
        raw = scale * weights.get(s, 0.0) * weights.get(d, 0.0) / total if total > 0 else 0.0
        out.append((s, d, float(DEMAND_STEP_GBPS * math.floor(raw / DEMAND_STEP_GBPS + 0.5))))
    return out


def demands_csv(demands) -> str:
    buf = io.StringIO()
    buf.write("src,dst,gbps\n")
    for s, d, g in demands:
        buf.write(f"{s},{d},{g:g}\n")
    return buf.getvalue()
