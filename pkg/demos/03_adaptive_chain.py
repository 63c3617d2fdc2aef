"""
Tracking a target error rate
============================

The clipping level starts at the LLR matching the target rate and is nudged
after every block by comparing a blind BER estimate with the target.
Here the target is loose (1e-2) and the SNR comfortable, so the level
should drift down and the node count follow it.
"""

from sphereclip.harness import SimConfig, run_chain

cfg = SimConfig(snr_db=16.0, ter=1e-2, mu=0.1, n_est=50, chain_length=60, seed=11)
records = run_chain(cfg, snr_index=0, chain=0)

print("block   l_cl   est. BER   nodes/use  errors")
for r in records[::5]:
    print(f"{r.block_index:5d} {r.l_cl:6.3f} {r.ber_estimated:10.2e} {r.avg_visited_nodes:10.0f} {r.bit_errors:7d}")
