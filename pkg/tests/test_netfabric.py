import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddcsim.config import TOY
from ddcsim.errors import AllocationError, ConfigError, IntegrityError
from ddcsim.netfabric import (
    INTER_RACK,
    INTRA_RACK,
    NetPath,
    bandwidth_demands,
    benes_cells,
    build_fabric,
    find_path_first_fit,
    find_path_max_avail,
    intra_rack_feasible,
    route_flows,
    utilization,
)
from ddcsim.topology import KINDS, DdcConfig
from ddcsim.workload import VmRequest

CPU, RAM, STO = KINDS


def manual_path(fabric, links, gbps):
    return NetPath(tuple(links), ("box", "rack", "box"), gbps, "cpu_ram", INTRA_RACK)


class TestBuild:
    @pytest.mark.parametrize("ports,cells", [(64, 11), (256, 15), (512, 17), (2, 1)])
    def test_benes_cells(self, ports, cells):
        assert benes_cells(ports) == cells

    def test_non_power_of_two(self):
        with pytest.raises(ConfigError):
            build_fabric(DdcConfig(switch_ports={"box": 48, "rack": 256, "inter": 512}))

    def test_defaults(self):
        fabric = build_fabric(DdcConfig())
        assert {c: s.path_cell_count for c, s in fabric.switch_specs.items()} == \
            {"box": 11, "rack": 15, "inter": 17}
        assert len(fabric.links) == 108 * 8 + 18 * 8
        assert not fabric.allocated.any()
        assert fabric.link(0).tier == "intra" and fabric.link(108 * 8).tier == "inter"


class TestDemands:
    @pytest.mark.parametrize("req,expect", [
        (VmRequest(0, 8, 16, 128), (10.0, 2.0)),
        (VmRequest(0, 0, 0, 0), (0.0, 0.0)),
        (VmRequest(0, 32, 32, 128), (40.0, 2.0)),
    ])
    def test_bandwidth(self, req, expect):
        assert bandwidth_demands(req, DdcConfig()) == expect


class TestPaths:
    def test_fresh_first_fit_uses_link_zero(self):
        fabric = build_fabric(DdcConfig())
        p = find_path_first_fit(fabric, 0, 2, 10)
        assert p.links == (0, 16) and p.switches == ("box", "rack", "box")
        assert p.span == INTRA_RACK

    def test_inter_rack_shape(self):
        fabric = build_fabric(DdcConfig())
        p = find_path_first_fit(fabric, 0, 8, 10)
        assert p.switches == ("box", "rack", "inter", "rack", "box")
        assert p.span == INTER_RACK and len(p.links) == 4

    def test_first_fit_skips_full_link(self):
        fabric = build_fabric(DdcConfig())
        fabric.allocated[0] = 195
        assert find_path_first_fit(fabric, 0, 2, 10).links[0] == 1

    def test_saturated_hop(self):
        fabric = build_fabric(DdcConfig())
        fabric.allocated[0:8] = 200
        assert find_path_first_fit(fabric, 0, 2, 1) is None
        assert find_path_max_avail(fabric, 0, 2, 1) is None

    def test_max_avail(self):
        fabric = build_fabric(DdcConfig(uplinks_per_box=2))
        fabric.allocated[0:2] = [190, 150]
        assert find_path_max_avail(fabric, 0, 2, 10).links[0] == 1
        fabric.allocated[0:2] = 0
        assert find_path_max_avail(fabric, 0, 2, 10).links[0] == 0
        fabric.allocated[0:2] = 195
        assert find_path_max_avail(fabric, 0, 2, 10) is None

    @given(st.lists(st.floats(0, 200), min_size=8, max_size=8), st.floats(0.1, 50))
    def test_max_avail_never_beaten_by_sibling(self, alloc, gbps):
        fabric = build_fabric(DdcConfig())
        fabric.allocated[0:8] = alloc
        p = find_path_max_avail(fabric, 0, 2, gbps)
        free = 200 - np.asarray(alloc)
        if p is None:
            assert free.max() < gbps - 1e-9
        else:
            assert free[p.links[0]] == free.max()


class TestReserve:
    def test_reserve_release_inverse(self):
        fabric = build_fabric(DdcConfig())
        p = find_path_first_fit(fabric, 0, 2, 10)
        fabric.reserve(p)
        assert fabric.allocated[0] == 10
        fabric.release_path(p)
        assert not fabric.allocated.any()

    def test_over_capacity(self):
        fabric = build_fabric(DdcConfig())
        with pytest.raises(AllocationError):
            fabric.reserve(manual_path(fabric, (0, 16), 250))
        assert not fabric.allocated.any()

    def test_double_release(self):
        fabric = build_fabric(DdcConfig())
        p = find_path_first_fit(fabric, 0, 2, 10)
        fabric.reserve(p)
        fabric.release_path(p)
        with pytest.raises(IntegrityError):
            fabric.release_path(p)

    def test_shared_link_sums(self):
        fabric = build_fabric(DdcConfig())
        a, b = manual_path(fabric, (0, 16), 10), manual_path(fabric, (0, 32), 7.5)
        fabric.reserve(a)
        fabric.reserve(b)
        # summation oracle
        expect = np.zeros_like(fabric.allocated)
        for p in (a, b):
            for link in p.links:
                expect[link] += p.reserved_gbps
        np.testing.assert_array_equal(fabric.allocated, expect)

    @settings(max_examples=40)
    @given(st.lists(st.tuples(st.integers(0, 107), st.integers(0, 107), st.floats(0.5, 80)),
                    max_size=60), st.randoms())
    def test_release_all_restores_zero(self, flows, rnd):
        fabric = build_fabric(DdcConfig())
        live = []
        for src, dst, gbps in flows:
            if src == dst:
                continue
            p = find_path_first_fit(fabric, src, dst, gbps)
            if p is not None:
                fabric.reserve(p)
                live.append(p)
        assert np.all(fabric.allocated <= fabric.capacity + 1e-9)
        rnd.shuffle(live)
        for p in live:
            fabric.release_path(p)
        assert not fabric.allocated.any()


def joint_feasible(free, cpu_links, ram_links, sto_links, demands):
    """Exhaustive oracle: some choice of one link per hop fits both flows at once."""
    for a, b, c, d in itertools.product(cpu_links, ram_links, ram_links, sto_links):
        use = {}
        for link, gbps in ((a, demands[0]), (b, demands[0]), (c, demands[1]), (d, demands[1])):
            use[link] = use.get(link, 0) + gbps
        if all(use[link] <= free[link] + 1e-9 for link in use):
            return True
    return False


class TestIntraRackFeasible:
    boxes = {CPU: 0, RAM: 2, STO: 4}

    def fabric(self, ram_free):
        fabric = build_fabric(DdcConfig(racks=2, uplinks_per_box=1))
        fabric.allocated[2] = 200 - ram_free
        return fabric

    def test_fresh(self):
        assert intra_rack_feasible(build_fabric(DdcConfig()), self.boxes, (10, 2))

    @pytest.mark.parametrize("ram_free,expect", [(11, False), (13, True)])
    def test_shared_ram_uplink(self, ram_free, expect):
        fabric = self.fabric(ram_free)
        free = fabric.capacity - fabric.allocated
        assert joint_feasible(free, [0], [2], [4], (10, 2)) is expect
        before = fabric.allocated.copy()
        assert intra_rack_feasible(fabric, self.boxes, (10, 2)) is expect
        np.testing.assert_array_equal(fabric.allocated, before)

    def test_rack_uplinks_saturated(self):
        fabric = build_fabric(DdcConfig(racks=2))
        fabric.allocated[16:32] = 200  # both RAM boxes of rack 0
        assert not intra_rack_feasible(fabric, self.boxes, (10, 2))

    def test_cross_rack_is_not_intra(self):
        assert not intra_rack_feasible(build_fabric(DdcConfig()), {CPU: 0, RAM: 8, STO: 4},
                                       (1, 1))

    @settings(max_examples=60)
    @given(st.lists(st.floats(0, 200), min_size=12, max_size=12),
           st.floats(0, 60), st.floats(0, 20))
    def test_greedy_implies_oracle(self, alloc, d1, d2):
        fabric = build_fabric(DdcConfig(racks=2, uplinks_per_box=2))
        fabric.allocated[:12] = alloc
        free = fabric.capacity - fabric.allocated
        greedy = intra_rack_feasible(fabric, self.boxes, (d1, d2))
        if greedy:
            assert joint_feasible(free, [0, 1], [4, 5], [8, 9], (d1, d2))


class TestRoute:
    def test_rollback_on_second_flow(self):
        fabric = build_fabric(DdcConfig(uplinks_per_box=1))
        fabric.allocated[4] = 199  # the only uplink of STO box 4
        before = fabric.allocated.copy()
        assert route_flows(fabric, {CPU: 0, RAM: 2, STO: 4}, (10, 2)) is None
        np.testing.assert_array_equal(fabric.allocated, before)
        assert fabric.live_paths == []


class TestUtilization:
    def test_fresh(self):
        assert utilization(build_fabric(TOY)) == (0.0, 0.0)

    def test_saturated_tier(self):
        fabric = build_fabric(TOY)
        fabric.allocated[fabric.n_box_links:] = 200
        assert utilization(fabric) == (0.0, 1.0)

    def test_mixed(self):
        fabric = build_fabric(TOY)
        for src, dst, gbps in ((0, 2, 10), (0, 8, 25), (3, 9, 40)):
            fabric.reserve(find_path_first_fit(fabric, src, dst, gbps))
        n = fabric.n_box_links
        intra, inter = utilization(fabric)
        # hand sum: 6 box-link hops and 4 rack-link hops
        assert intra == pytest.approx((2 * 10 + 2 * 25 + 2 * 40) / (n * 200))
        assert inter == pytest.approx((2 * 25 + 2 * 40) / ((fabric.capacity.size - n) * 200))
