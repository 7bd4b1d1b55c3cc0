import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpplan.errors import OccupancyError, TopologyError
from mpplan.netgraph import (
    BAND_START_THZ, N_SLOTS, SpectrumAssignment, SpectrumGrid, Topology, allocate, band_of_frequency,
    build_spans, channel_center_thz, first_fit, great_circle_km, nobel_germany, parse_topology, release,
)
from oracles import brute_first_fit

NATIVE = """?SNDlib native format
NODES (
  A ( 10.0 50.0 )
  B ( 11.0 50.0 )
  C ( 11.0 51.0 )
)
LINKS (
  L1 ( A B ) 0 0 0 0 ( )
  L2 ( B C ) 0 0 0 0 ( )
)
LINK_LENGTHS (
  L2 200.0
)
"""

XML = """<?xml version="1.0"?>
<network xmlns="http://sndlib.zib.de/network" version="1.0">
 <networkStructure>
  <nodes>
   <node id="A"><coordinates><x>10.0</x><y>50.0</y></coordinates></node>
   <node id="B"><coordinates><x>11.0</x><y>50.0</y></coordinates></node>
  </nodes>
  <links>
   <link id="L1"><source>A</source><target>B</target><length>95.5</length></link>
  </links>
 </networkStructure>
</network>
"""


class TestSpans:
    def test_200km_three_equal_spans(self):
        spans = build_spans(200.0)
        assert len(spans) == 3
        assert spans[0].length_km == pytest.approx(200 / 3)

    def test_80km_single_span(self):
        assert [s.length_km for s in build_spans(80.0)] == [80.0]

    def test_float_noise_does_not_add_span(self):
        assert len(build_spans(160.00000000001)) == 2

    @given(st.floats(0.1, 5000.0))
    def test_total_length_preserved(self, length):
        spans = build_spans(length)
        assert len(spans) == math.ceil(length / 80 - 1e-9)
        assert abs(sum(s.length_km for s in spans) - length) < 1e-9

    def test_gain_compensates_span_loss(self):
        (span,) = build_spans(80.0)
        assert span.gain_db("C") == pytest.approx(16.0)
        assert span.gain_db("L") == pytest.approx(17.6)

    @pytest.mark.parametrize("bad", [0.0, -5.0, float("nan"), float("inf")])
    def test_bad_length(self, bad):
        with pytest.raises(TopologyError):
            build_spans(bad)


class TestParsing:
    def test_native_with_explicit_and_derived_lengths(self):
        topo = parse_topology(NATIVE)
        ab = topo.link_between("A", "B")
        assert ab.length_km == great_circle_km(10.0, 50.0, 11.0, 50.0)
        assert topo.link_between("C", "B").length_km == 200.0
        assert len(topo.link_between("B", "C").spans) == 3

    def test_xml(self):
        topo = parse_topology(XML)
        assert topo.nodes == ("A", "B")
        assert topo.link_between("A", "B").length_km == 95.5

    def test_unknown_node_reports_line(self):
        text = NATIVE.replace("L2 ( B C )", "L2 ( B Z )")
        with pytest.raises(TopologyError, match=r"line \d+.*'Z'"):
            parse_topology(text)

    def test_self_loop_rejected(self):
        with pytest.raises(TopologyError, match="self-loop"):
            Topology(["A", "B"], [("A", "A", 10.0), ("A", "B", 10.0)])

    def test_disconnected_rejected(self):
        with pytest.raises(TopologyError):
            Topology(["A", "B", "C", "D"], [("A", "B", 10.0), ("C", "D", 10.0)])

    def test_duplicate_link_rejected(self):
        with pytest.raises(TopologyError):
            Topology(["A", "B"], [("A", "B", 10.0), ("B", "A", 12.0)])

    def test_nobel_germany(self):
        topo = nobel_germany()
        assert len(topo.nodes) == 17
        assert len(topo.links) == 26
        assert all(20 < lk.length_km < 400 for lk in topo.links)

    def test_haversine_known_distance(self):
        # one degree of longitude on the equator
        assert great_circle_km(0, 0, 1, 0) == pytest.approx(111.2, abs=0.05)

    def test_dump_is_stable(self):
        assert nobel_germany().dump() == nobel_germany().dump()


class TestBands:
    def test_bands_disjoint_with_guard(self):
        c_lo = BAND_START_THZ["C"]
        l_hi = BAND_START_THZ["L"] + N_SLOTS * 0.0125
        assert c_lo - l_hi == pytest.approx(0.5)

    def test_channel_centres_inside_band(self):
        assert band_of_frequency(channel_center_thz("C", 0, 3)) == "C"
        assert band_of_frequency(channel_center_thz("L", N_SLOTS - 12, 12)) == "L"
        assert band_of_frequency(BAND_START_THZ["C"] - 0.25) is None


class TestFirstFit:
    def test_empty_grid(self):
        grid = SpectrumGrid(2)
        assert first_fit(grid, [0, 1], 12) == ("C", 0)

    def test_skips_busy_run_on_any_link(self):
        grid = SpectrumGrid(2)
        allocate(grid, SpectrumAssignment((1,), "C", 2, 3))
        assert first_fit(grid, [0], 4) == ("C", 0)
        assert first_fit(grid, [0, 1], 4) == ("C", 5)

    def test_falls_through_to_l(self):
        grid = SpectrumGrid(1)
        grid.owner[0, 0, :] = 9
        assert first_fit(grid, [0], 3) == ("L", 0)

    def test_full_grid_none(self):
        grid = SpectrumGrid(1)
        grid.owner[:] = 1
        assert first_fit(grid, [0], 3) is None

    @pytest.mark.parametrize("w", [2, 13])
    def test_width_out_of_range(self, w):
        with pytest.raises(ValueError):
            first_fit(SpectrumGrid(1), [0], w)

    def test_matches_brute_force_on_random_grids(self):
        rng = random.Random(7)
        for _ in range(1200):
            n_links = rng.randint(1, 4)
            n_slots = rng.choice([16, 40, N_SLOTS])
            density = rng.random()
            grid = SpectrumGrid(n_links, n_slots)
            mask = np.array([[[rng.random() < density for _ in range(n_slots)] for _ in range(2)]
                             for _ in range(n_links)])
            grid.owner[mask] = 1
            links = sorted(rng.sample(range(n_links), rng.randint(1, n_links)))
            width = rng.randint(3, 12)
            occ = {b: [mask[l, i].tolist() for l in links] for i, b in enumerate("CL")}
            assert first_fit(grid, links, width) == brute_first_fit(occ, width)


class TestAllocation:
    def test_roundtrip(self):
        grid = SpectrumGrid(3)
        a = SpectrumAssignment((0, 2), "L", 10, 4)
        allocate(grid, a, owner=5)
        assert not grid.is_free([0], "L", 10, 4)
        assert grid.is_free([1], "L", 10, 4)
        release(grid, a, owner=5)
        assert grid == SpectrumGrid(3)

    def test_double_booking_rejected(self):
        grid = SpectrumGrid(1)
        allocate(grid, SpectrumAssignment((0,), "C", 0, 4))
        with pytest.raises(OccupancyError):
            allocate(grid, SpectrumAssignment((0,), "C", 3, 3))

    def test_release_by_other_owner_rejected(self):
        grid = SpectrumGrid(1)
        a = SpectrumAssignment((0,), "C", 0, 4)
        allocate(grid, a, owner=1)
        with pytest.raises(OccupancyError):
            release(grid, a, owner=2)

    def test_assignment_outside_band(self):
        with pytest.raises(ValueError):
            SpectrumAssignment((0,), "C", N_SLOTS - 2, 3)

    @settings(max_examples=150)
    @given(st.lists(st.tuples(st.booleans(), st.integers(0, 2), st.sampled_from("CL"),
                              st.integers(0, 60), st.integers(3, 12)), max_size=40))
    def test_no_double_booking_against_shadow(self, ops):
        grid = SpectrumGrid(3, 72)
        shadow = np.zeros((3, 2, 72), dtype=int)
        live = []
        for is_alloc, link, band, start, width in ops:
            b = "CL".index(band)
            if is_alloc or not live:
                a = SpectrumAssignment((link,), band, start, width)
                if grid.is_free([link], band, start, width):
                    allocate(grid, a, owner=len(live) + 1)
                    shadow[link, b, start:start + width] += 1
                    live.append((a, len(live) + 1))
                else:
                    with pytest.raises(OccupancyError):
                        allocate(grid, a, owner=99)
            else:
                a, owner = live.pop()
                release(grid, a, owner)
                shadow[a.links[0], "CL".index(a.band), a.start:a.stop] -= 1
            assert shadow.max() <= 1
            assert np.array_equal(shadow > 0, grid.owner != 0)
