"""Flag gaps, sensor drift, and dead-sensor behavior before analysis.

Three misbehaving synthetic records show what each QC check reports; the
checks only flag and split, they never touch the samples.
"""

import numpy as np

from gidrain import TimeSeries, build_qc_report, detect_gaps, split_at_gaps

MIN10 = 600


def times(n, start=0):
    return start + np.arange(n, dtype=np.int64) * MIN10


# 1. a record with a missing sample and a 24 h outage
t = np.concatenate([times(144), times(144, start=145 * MIN10), times(144, start=289 * MIN10 + 24 * 3600)])
gaps = detect_gaps(t)
print("gappy record:")
for g in gaps:
    print(f"  gap after sample at t={g.start:>8d}s lasting {g.duration_hours:.2f} h")
print(f"  analysis segments after splitting at >= 3 h: {split_at_gaps(t)}")

# 2. a drifting sensor: dry baseline creeps up by 4 cm
level = np.concatenate([np.zeros(90), np.full(30, 0.5), np.full(90, 0.04)])
report = build_qc_report(TimeSeries("DRIFTY", times(level.size), level))
print(f"\ndrifting record: drift = {report.drift_m:.3f} m, flagged = {report.drift_flag}")

# 3. a dead sensor: flat zero through a 3 cm rain event
flat = np.zeros(288)
rain = [(int(times(288)[100]), 3.0)]
report = build_qc_report(TimeSeries("DEAD", times(flat.size), flat), rain_events=rain)
print(f"dead-sensor record: flagged = {report.dead_sensor_flag}")

# and without rainfall the check reports not-evaluated rather than guessing
report = build_qc_report(TimeSeries("DEAD", times(flat.size), flat))
print(f"same record, no rain data: dead_sensor_flag = {report.dead_sensor_flag} (not evaluated)")
