"""
A BER curve written to CSV
==========================

The same records the command line tool writes, built in-process. The file
can be loaded with any CSV reader; averaging ``ber_measured`` per
``snr_db`` gives the curve.
"""

import sys

from sphereclip.cli import emit_csv
from sphereclip.harness import SimConfig, run_experiment, steady_state

cfg = SimConfig(snr_db=(12.0, 14.0, 16.0), ter=1e-2, chain_length=10, chains=2, seed=5)
records = run_experiment(cfg)

out = sys.argv[1] if len(sys.argv) > 1 else "ber_curve.csv"
emit_csv(records, out)
print("wrote", len(records), "rows to", out)

for s in steady_state(records):
    print(f"{s.snr_db:5.1f} dB  BER {s.ber_measured:.2e}  nodes/use {s.avg_visited_nodes:.0f}  l_cl {s.mean_l_cl:.2f}")
