"""
Soft-output sphere search against brute force
==============================================

A small 2x2 QPSK problem is small enough to list every transmit vector.
We compare the tree search LLRs with the exhaustive max-log values and then
watch what a clipping level does to both the output and the work done.
"""

import numpy as np

from sphereclip import DetectionProblem, detect, qam
from sphereclip.oracles import exhaustive_maxlog_llrs
from sphereclip.verify import random_problem

# a random instance at 6 dB, already rotated by Q^H
p = random_problem(seed=7, order=4, m_t=2, snr_db=6.0)
print("R =\n", np.round(p.r, 3))

full = detect(p)
print("tree search LLRs:", np.round(full.llrs, 4))
print("brute force LLRs:", np.round(exhaustive_maxlog_llrs(p), 4))
print("nodes:", full.visited_nodes)

# Clipping bounds every LLR and lets the search drop subtrees early.
for c in (8.0, 2.0, 0.5):
    res = detect(DetectionProblem(p.r, p.y_rot, qam(4), p.sigma2, c))
    print(f"clip {c:>4}: nodes {res.visited_nodes:3d}  LLRs {np.round(res.llrs, 3)}")
