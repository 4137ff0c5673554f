"""Convert an Azure 2017 ``vmtable.csv`` into the normalized ddcsim trace CSV.

The raw table has no header; columns are::

    vmid, subscriptionid, deploymentid, vmcreated, vmdeleted, maxcpu, avgcpu,
    p95maxcpu, vmcategory, vmcorecountbucket, vmmemorybucket

Mapping (an assumption, the raw data carries no simulation time base):

* rows are sorted by ``vmcreated`` then ``vmid`` and renumbered from 0;
* ``arrival = (vmcreated - first vmcreated) / seconds_per_unit``;
* ``lifetime = max(vmdeleted - vmcreated, sample_interval) / seconds_per_unit``,
  the floor covering VMs created and deleted within one 300 s sample;
* open-ended buckets (``>24`` cores, ``>64`` GB) map to ``--max-cores`` and
  ``--max-ram-gb``;
* storage is left empty, which the loader reads as 128 GB.

Usage::

    python3 scripts/azure_to_csv.py vmtable.csv out.csv --take 3000
"""
import argparse
import csv
import sys

TRACE_COLUMNS = ("vm_id", "cpu_cores", "ram_gb", "sto_gb", "arrival", "lifetime")
SAMPLE_INTERVAL_S = 300


def bucket(text, open_value):
    text = text.strip()
    if text.startswith(">"):
        return open_value
    value = float(text)
    return int(value) if value.is_integer() else value


def convert(rows, seconds_per_unit=1.0, max_cores=32, max_ram_gb=64, take=None):
    """Yield normalized trace rows from raw vmtable rows."""
    parsed = []
    for line, row in enumerate(rows, start=1):
        if len(row) < 11:
            raise ValueError(f"line {line}: expected 11 columns, got {len(row)}")
        created, deleted = int(row[3]), int(row[4])
        if deleted < created:
            raise ValueError(f"line {line}: vmdeleted precedes vmcreated")
        parsed.append((created, row[0], deleted,
                       bucket(row[9], max_cores), bucket(row[10], max_ram_gb)))
    parsed.sort(key=lambda r: (r[0], r[1]))
    if take is not None:
        parsed = parsed[:take]
    if not parsed:
        return
    origin = parsed[0][0]
    for i, (created, _, deleted, cores, ram) in enumerate(parsed):
        life = max(deleted - created, SAMPLE_INTERVAL_S)
        yield (i, cores, ram, "", (created - origin) / seconds_per_unit,
               life / seconds_per_unit)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("vmtable")
    p.add_argument("out")
    p.add_argument("--seconds-per-unit", type=float, default=1.0)
    p.add_argument("--max-cores", type=int, default=32)
    p.add_argument("--max-ram-gb", type=int, default=64)
    p.add_argument("--take", type=int)
    args = p.parse_args(argv)
    with open(args.vmtable, newline="") as src, open(args.out, "w", newline="") as dst:
        writer = csv.writer(dst, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        writer.writerows(convert(csv.reader(src), args.seconds_per_unit, args.max_cores,
                                 args.max_ram_gb, args.take))
    return 0


if __name__ == "__main__":
    sys.exit(main())
