"""Compare the numba and numpy kernel backends.

Part one times each hot kernel on inputs shaped like the 18-rack reference
cluster. Part two replays the seeded synthetic workload end to end under every
scheduler with each backend and reports total and scheduler-only seconds.

    python3 benchmarks/bench_backends.py [--repeat 5] [--count 2500] [--seed 0]
"""
import argparse
import timeit

import numpy as np

from ddcsim import kernels
from ddcsim.config import preset
from ddcsim.kernels import _numba, _numpy
from ddcsim.netfabric import build_fabric
from ddcsim.schedulers import ALGORITHMS
from ddcsim.simengine import run
from ddcsim.topology import new_cluster
from ddcsim.workload import SyntheticSpec, gen_synthetic


def kernel_cases():
    cfg = preset("table1").config
    state, fabric = new_cluster(cfg), build_fabric(cfg)
    rng = np.random.default_rng(0)
    avail = rng.integers(0, 129, state.n_boxes).astype(np.int64)
    fabric.allocated[:] = rng.uniform(0, 200, fabric.allocated.size)
    need = np.array([8, 8, 2], dtype=np.int64)
    mask = np.ones((cfg.racks, 3), dtype=np.bool_)
    want = np.array([True, False, True])
    bw = fabric.box_uplink_avail()
    ranges = state.kind_range[5]
    cursor = np.array([-1, -1, -1], dtype=np.int64)
    times = np.cumsum(rng.exponential(10, 5000))
    values = rng.random((5000, 5))
    return {
        "rack_argmax": (avail, 0, 2),
        "intra_pool_mask": (avail, state.rack_max, need),
        "super_rack_mask": (avail, state.box_rack, state.box_kind, need, cfg.racks),
        "rack_next_fit": (avail, ranges, cursor, need),
        "rack_best_fit": (avail, ranges, need),
        "first_fit_masked": (avail, state.kind_boxes[1], state.box_rack, mask[:, 1], 8),
        "bfs_find": (avail, state.box_rack, state.box_kind, state.rack_start, bw, 40, need,
                     want, mask, False),
        "bfs_find(nalb)": (avail, state.box_rack, state.box_kind, state.rack_start, bw, 40,
                           need, want, mask, True),
        "pick_link_first": (fabric.allocated, fabric.capacity, 0, 8, 40.0),
        "pick_link_max": (fabric.allocated, fabric.capacity, 0, 8, 40.0),
        "group_avail": (fabric.allocated, fabric.capacity, 0, state.n_boxes, cfg.uplinks_per_box),
        "time_weighted_mean": (times, values, float(times[-1] + 10)),
    }


def bench_kernels(repeat):
    kernels.use_backend("numba")
    kernels.warmup()
    print(f"{'kernel':<20} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for name, args in kernel_cases().items():
        fn = name.split("(")[0]
        row = []
        for mod in (_numpy, _numba):
            f = getattr(mod, fn)
            timer = timeit.Timer(lambda: f(*args))
            n, _ = timer.autorange()
            row.append(min(timer.repeat(repeat, n)) / n * 1e6)
        print(f"{name:<20} {row[0]:>10.2f} {row[1]:>10.2f} {row[0] / row[1]:>7.1f}x")


def bench_runs(repeat, count, seed):
    wl = gen_synthetic(SyntheticSpec(vm_count=count, rng_seed=seed))
    print(f"\n{count}-VM synthetic workload, seed {seed}, best of {repeat}")
    print(f"{'algorithm':<9} {'backend':<7} {'total s':>8} {'sched s':>8}")
    for algo in ALGORITHMS:
        for backend in ("numpy", "numba"):
            kernels.use_backend(backend)
            kernels.warmup()
            best_total = best_sched = float("inf")
            for _ in range(repeat):
                tic = timeit.default_timer()
                m = run(preset("table1"), algo, wl).metrics
                best_total = min(best_total, timeit.default_timer() - tic)
                best_sched = min(best_sched, m.scheduler_seconds)
            print(f"{algo:<9} {backend:<7} {best_total:>8.3f} {best_sched:>8.3f}")
    kernels.use_backend(kernels.default_backend())


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--count", type=int, default=2500)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    bench_kernels(args.repeat)
    bench_runs(args.repeat, args.count, args.seed)


if __name__ == "__main__":
    main()
