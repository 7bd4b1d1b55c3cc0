"""Physical topology, fiber spans and per-link spectrum occupancy.

Nodes are string identifiers. Links are undirected and indexed in
lexicographic order of their ``(a, b)`` endpoint pair (``a < b``), so every
ordering derived from a :class:`Topology` is deterministic.
"""

from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import OccupancyError, TopologyError

SPAN_KM = 80.0
SLOT_GHZ = 12.5
N_SLOTS = 400
GUARD_GHZ = 500.0
BANDS = ("C", "L")
MIN_WIDTH = 3
MAX_WIDTH = 12

# Lower band edges in THz. L sits below C; the guard band is the gap.
BAND_START_THZ = {"C": 191.35, "L": 191.35 - GUARD_GHZ / 1e3 - N_SLOTS * SLOT_GHZ / 1e3}
BAND_WIDTH_THZ = N_SLOTS * SLOT_GHZ / 1e3

DEFAULT_ATTENUATION = {"C": 0.20, "L": 0.22}
DEFAULT_NOISE_FIGURE = {"C": 5.0, "L": 6.0}


def band_index(band: str) -> int:
    try:
        return BANDS.index(band)
    except ValueError:
        raise ValueError(f"unknown band {band!r}") from None


def band_center_thz(band: str) -> float:
    return BAND_START_THZ[band] + BAND_WIDTH_THZ / 2


def channel_center_thz(band: str, start: int, width: int) -> float:
    """Center frequency of a channel covering slots ``start .. start+width-1``."""
    return BAND_START_THZ[band] + (start + width / 2) * SLOT_GHZ / 1e3


def band_of_frequency(f_thz: float) -> str | None:
    for band in BANDS:
        lo = BAND_START_THZ[band]
        if lo <= f_thz <= lo + BAND_WIDTH_THZ:
            return band
    return None


@dataclass(frozen=True)
class Span:
    length_km: float
    attenuation_db_per_km: tuple[float, float] = (DEFAULT_ATTENUATION["C"], DEFAULT_ATTENUATION["L"])
    noise_figure_db: tuple[float, float] = (DEFAULT_NOISE_FIGURE["C"], DEFAULT_NOISE_FIGURE["L"])

    def attenuation(self, band: str) -> float:
        return self.attenuation_db_per_km[band_index(band)]

    def noise_figure(self, band: str) -> float:
        return self.noise_figure_db[band_index(band)]

    def gain_db(self, band: str) -> float:
        """Amplifier gain; exactly compensates the span loss."""
        return self.length_km * self.attenuation(band)


@dataclass(frozen=True)
class Link:
    index: int
    a: str
    b: str
    length_km: float
    spans: tuple[Span, ...]

    @property
    def endpoints(self) -> tuple[str, str]:
        return (self.a, self.b)

    def other(self, node: str) -> str:
        return self.b if node == self.a else self.a


def build_spans(link_length: float, attenuation=None, noise_figure=None) -> list[Span]:
    """Split a link into ``ceil(L / 80)`` equal-length amplified spans."""
    if not link_length > 0 or not math.isfinite(link_length):
        raise TopologyError(f"link length must be positive, got {link_length!r}")
    att = attenuation or DEFAULT_ATTENUATION
    nf = noise_figure or DEFAULT_NOISE_FIGURE
    # tolerate float noise such as 160.00000000001
    n = max(1, math.ceil(link_length / SPAN_KM - 1e-9))
    span = Span(
        link_length / n,
        attenuation_db_per_km=(float(att["C"]), float(att["L"])),
        noise_figure_db=(float(nf["C"]), float(nf["L"])),
    )
    return [span] * n


def great_circle_km(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Haversine distance on a 6371 km sphere, rounded to 0.1 km."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return round(2 * 6371.0 * math.asin(math.sqrt(h)), 1)


class Topology:
    """Immutable undirected graph of nodes and amplified fiber links."""

    def __init__(self, nodes: Iterable[str], links: Iterable[tuple[str, str, float]],
                 attenuation=None, noise_figure=None, name: str = ""):
        self.name = name
        self.nodes: tuple[str, ...] = tuple(sorted(set(nodes)))
        node_set = set(self.nodes)
        seen: dict[tuple[str, str], float] = {}
        for a, b, length in links:
            if a == b:
                raise TopologyError(f"self-loop on node {a!r}")
            for n in (a, b):
                if n not in node_set:
                    raise TopologyError(f"link references unknown node {n!r}")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise TopologyError(f"duplicate link between {key[0]!r} and {key[1]!r}")
            seen[key] = float(length)
        self.links: tuple[Link, ...] = tuple(
            Link(i, a, b, length, tuple(build_spans(length, attenuation, noise_figure)))
            for i, ((a, b), length) in enumerate(sorted(seen.items()))
        )
        self._by_pair = {(lk.a, lk.b): lk for lk in self.links}
        self._adj: dict[str, list[tuple[str, Link]]] = {n: [] for n in self.nodes}
        for lk in self.links:
            self._adj[lk.a].append((lk.b, lk))
            self._adj[lk.b].append((lk.a, lk))
        for n in self._adj:
            self._adj[n].sort(key=lambda t: t[0])
        self._check_connected()

    def _check_connected(self) -> None:
        if not self.nodes:
            raise TopologyError("topology has no nodes")
        stack, seen = [self.nodes[0]], {self.nodes[0]}
        while stack:
            for nbr, _ in self._adj[stack.pop()]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        missing = sorted(set(self.nodes) - seen)
        if missing:
            raise TopologyError(f"graph is disconnected; unreachable from {self.nodes[0]!r}: {missing}")

    def __repr__(self) -> str:
        return f"Topology({self.name!r}, nodes={len(self.nodes)}, links={len(self.links)})"

    def neighbors(self, node: str) -> list[tuple[str, Link]]:
        return self._adj[node]

    def link_between(self, a: str, b: str) -> Link:
        key = (a, b) if a < b else (b, a)
        try:
            return self._by_pair[key]
        except KeyError:
            raise TopologyError(f"no link between {a!r} and {b!r}") from None

    def path_links(self, path: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.link_between(u, v).index for u, v in zip(path, path[1:]))

    def path_length(self, path: Sequence[str]) -> float:
        total = 0.0
        for u, v in zip(path, path[1:]):
            total += self.link_between(u, v).length_km
        return total

    def path_spans(self, path: Sequence[str]) -> list[Span]:
        spans: list[Span] = []
        for u, v in zip(path, path[1:]):
            spans.extend(self.link_between(u, v).spans)
        return spans

    def dump(self) -> str:
        """Canonical plain-text listing used for golden comparisons."""
        out = [f"# topology {self.name}".rstrip(), f"nodes {len(self.nodes)}"]
        out += [f"node {n}" for n in self.nodes]
        out.append(f"links {len(self.links)}")
        for lk in self.links:
            out.append(f"link {lk.a} {lk.b} length_km={lk.length_km:.1f} spans={len(lk.spans)}")
        return "\n".join(out) + "\n"


# -- SNDlib ingestion ------------------------------------------------------

_NODE_RE = re.compile(r"^(\S+)\s*(?:\(\s*([-+0-9.eE]+)\s+([-+0-9.eE]+)\s*\))?\s*$")
_LINK_RE = re.compile(r"^(\S+)\s*\(\s*(\S+)\s+(\S+)\s*\)(.*)$")
_LENGTH_RE = re.compile(r"^(\S+)\s+([-+0-9.eE]+)\s*$")


def _native_sections(text: str) -> dict[str, list[tuple[int, str]]]:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("?"):
            continue
        if current is None:
            m = re.match(r"^([A-Z_]+)\s*\($", line)
            if not m:
                raise TopologyError(f"line {lineno}: expected section header, got {raw.strip()!r}")
            current = m.group(1)
            sections.setdefault(current, [])
            continue
        if line == ")":
            current = None
            continue
        sections[current].append((lineno, line))
    if current is not None:
        raise TopologyError(f"unterminated section {current}")
    return sections


def _parse_native(text: str):
    sections = _native_sections(text)
    if "NODES" not in sections or "LINKS" not in sections:
        raise TopologyError("document lacks NODES or LINKS section")
    coords: dict[str, tuple[float, float] | None] = {}
    for lineno, line in sections["NODES"]:
        m = _NODE_RE.match(line)
        if not m:
            raise TopologyError(f"line {lineno}: malformed node entry {line!r}")
        coords[m.group(1)] = (float(m.group(2)), float(m.group(3))) if m.group(2) else None
    links = []
    for lineno, line in sections["LINKS"]:
        m = _LINK_RE.match(line)
        if not m:
            raise TopologyError(f"line {lineno}: malformed link entry {line!r}")
        links.append((lineno, m.group(1), m.group(2), m.group(3)))
    lengths = {}
    for lineno, line in sections.get("LINK_LENGTHS", []):
        m = _LENGTH_RE.match(line)
        if not m:
            raise TopologyError(f"line {lineno}: malformed link length entry {line!r}")
        lengths[m.group(1)] = float(m.group(2))
    return coords, links, lengths


def _strip_ns(tree: ET.Element) -> None:
    for el in tree.iter():
        if isinstance(el.tag, str) and "}" in el.tag:
            el.tag = el.tag.split("}", 1)[1]


def _parse_xml(text: str):
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise TopologyError(f"line {line}: malformed XML (column {col}): {exc}") from None
    _strip_ns(root)
    coords: dict[str, tuple[float, float] | None] = {}
    for node in root.iter("node"):
        nid = node.get("id")
        if nid is None:
            raise TopologyError("node element without id attribute")
        x, y = node.find("coordinates/x"), node.find("coordinates/y")
        coords[nid] = (float(x.text), float(y.text)) if x is not None and y is not None else None
    links, lengths = [], {}
    for link in root.iter("link"):
        lid = link.get("id")
        src, dst = link.find("source"), link.find("target")
        if lid is None or src is None or dst is None:
            raise TopologyError(f"link {lid!r} lacks id, source or target")
        links.append((0, lid, src.text.strip(), dst.text.strip()))
        length = link.find("length")
        if length is not None:
            lengths[lid] = float(length.text)
    return coords, links, lengths


def parse_topology(text: str, attenuation=None, noise_figure=None, name: str = "") -> Topology:
    """Parse an SNDlib native or XML network document.

    Link lengths come from an optional ``LINK_LENGTHS ( <link_id> <km> )``
    section (native) or ``<length>`` child (XML); otherwise they are the
    great-circle distance between the node coordinates.
    """
    if text.lstrip().startswith("<"):
        coords, raw_links, lengths = _parse_xml(text)
    else:
        coords, raw_links, lengths = _parse_native(text)
    links = []
    for lineno, lid, a, b in raw_links:
        where = f"line {lineno}: " if lineno else ""
        for n in (a, b):
            if n not in coords:
                raise TopologyError(f"{where}link {lid} references unknown node {n!r}")
        if lid in lengths:
            length = lengths[lid]
        elif coords[a] is not None and coords[b] is not None:
            length = great_circle_km(*coords[a], *coords[b])
        else:
            raise TopologyError(f"{where}link {lid} has no length and its nodes lack coordinates")
        links.append((a, b, length))
    if not name:
        m = re.search(r"#\s*network\s+(\S+)", text)
        name = m.group(1) if m else ""
    return Topology(coords.keys(), links, attenuation, noise_figure, name=name)


def load_topology(path, attenuation=None, noise_figure=None) -> Topology:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_topology(text, attenuation, noise_figure)


def nobel_germany(attenuation=None, noise_figure=None) -> Topology:
    """The bundled SNDlib Nobel-Germany instance."""
    from importlib.resources import files

    text = files("mpplan.data").joinpath("nobel-germany.txt").read_text(encoding="utf-8")
    return parse_topology(text, attenuation, noise_figure, name="nobel-germany")


# -- Spectrum --------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumAssignment:
    links: tuple[int, ...]
    band: str
    start: int
    width: int

    def __post_init__(self):
        if not MIN_WIDTH <= self.width <= MAX_WIDTH:
            raise ValueError(f"width {self.width} outside [{MIN_WIDTH}, {MAX_WIDTH}] slots")
        if self.start < 0 or self.start + self.width > N_SLOTS:
            raise ValueError(f"slots {self.start}..{self.start + self.width - 1} outside the band")
        band_index(self.band)

    @property
    def stop(self) -> int:
        return self.start + self.width

    @property
    def bandwidth_ghz(self) -> float:
        return self.width * SLOT_GHZ

    @property
    def center_thz(self) -> float:
        return channel_center_thz(self.band, self.start, self.width)


class SpectrumGrid:
    """Slot ownership per link and band.

    ``owner[link, band, slot]`` is 0 when free, otherwise a nonzero owner
    tag (lightpaths use ``id + 1``, reserved comb lines negative tags).
    """

    def __init__(self, n_links: int, n_slots: int = N_SLOTS):
        self.owner = np.zeros((n_links, len(BANDS), n_slots), dtype=np.int32)

    @classmethod
    def for_topology(cls, topo: Topology) -> "SpectrumGrid":
        return cls(len(topo.links))

    def copy(self) -> "SpectrumGrid":
        new = SpectrumGrid.__new__(SpectrumGrid)
        new.owner = self.owner.copy()
        return new

    def is_free(self, links: Sequence[int], band: str, start: int, width: int) -> bool:
        b = band_index(band)
        return not np.any(self.owner[list(links), b, start:start + width])

    def occupied(self, link: int, band: str) -> np.ndarray:
        return self.owner[link, band_index(band)] != 0

    def band_in_use(self, band: str) -> bool:
        return bool(np.any(self.owner[:, band_index(band)]))

    def __eq__(self, other):
        return isinstance(other, SpectrumGrid) and np.array_equal(self.owner, other.owner)


def first_fit_run(grid: SpectrumGrid, links: Sequence[int], width: int) -> tuple[str, int] | None:
    """First-fit for any run length (used for comb blocks wider than one channel)."""
    if not links:
        raise ValueError("path has no links")
    lk = np.asarray(links, dtype=np.intp)
    for b, band in enumerate(BANDS):
        s = kernels.first_fit(grid.owner, lk, b, int(width))
        if s >= 0:
            return band, s
    return None


def first_fit(grid: SpectrumGrid, links: Sequence[int], width: int) -> tuple[str, int] | None:
    """Lowest ``(band, start)`` free on every link, scanning C fully before L."""
    if not MIN_WIDTH <= width <= MAX_WIDTH:
        raise ValueError(f"width {width} outside [{MIN_WIDTH}, {MAX_WIDTH}] slots")
    return first_fit_run(grid, links, width)


def allocate(grid: SpectrumGrid, assignment: SpectrumAssignment, owner: int = 1) -> SpectrumGrid:
    if owner == 0:
        raise ValueError("owner tag 0 means free")
    b = band_index(assignment.band)
    lk = list(assignment.links)
    view = grid.owner[lk, b, assignment.start:assignment.stop]
    if np.any(view):
        taken = sorted(set(int(x) for x in view.ravel() if x))
        raise OccupancyError(
            f"slots {assignment.band}[{assignment.start}:{assignment.stop}] on links {lk} "
            f"already held by {taken}"
        )
    grid.owner[lk, b, assignment.start:assignment.stop] = owner
    return grid


def release(grid: SpectrumGrid, assignment: SpectrumAssignment, owner: int = 1) -> SpectrumGrid:
    b = band_index(assignment.band)
    lk = list(assignment.links)
    view = grid.owner[lk, b, assignment.start:assignment.stop]
    if not np.all(view == owner):
        raise OccupancyError(
            f"release of {assignment.band}[{assignment.start}:{assignment.stop}] on links {lk} "
            f"by {owner}, but slots are not all held by it"
        )
    grid.owner[lk, b, assignment.start:assignment.stop] = 0
    return grid
