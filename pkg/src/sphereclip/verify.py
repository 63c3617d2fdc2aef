"""Cross-checks of the detector, decoder and controller against brute force."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import adapt, fec, oracles, sphere_decoder
from .linalg import qr_decompose, rotate_received
from .modem import qam

TOL = 1e-9
CLIP_LEVELS = (0.5, 2.0, 8.0)
# (order, m_t) shapes cycled through by random_problem; all within 2**16 hypotheses.
PROBLEM_SHAPES = ((2, 1), (2, 3), (4, 1), (4, 2), (4, 3), (16, 1), (16, 2), (64, 1), (64, 2), (4, 4), (16, 3))


@dataclass
class CheckResult:
    name: str
    instances: int = 0
    failures: int = 0
    first_failing_seed: int | None = None
    worst_error: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.instances > 0

    def record(self, seed: int, err: float, ok: bool) -> None:
        self.instances += 1
        self.worst_error = max(self.worst_error, err)
        if not ok:
            self.failures += 1
            if self.first_failing_seed is None:
                self.first_failing_seed = seed

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = "" if self.first_failing_seed is None else f" first failing seed={self.first_failing_seed}"
        return f"[{status}] {self.name}: {self.instances} instances, {self.failures} failures, worst error {self.worst_error:.3e}{extra}"


def random_problem(seed: int, order: int, m_t: int, m_r: int | None = None, snr_db: float | None = None):
    """Reproducible detection problem from a seed (random channel, symbols and noise)."""
    rng = np.random.default_rng(seed)
    m_r = m_t if m_r is None else m_r
    c = qam(order)
    h = (rng.standard_normal((m_r, m_t)) + 1j * rng.standard_normal((m_r, m_t))) / math.sqrt(2)
    f = qr_decompose(h)
    snr = rng.uniform(0.0, 25.0) if snr_db is None else snr_db
    sigma2 = m_t / 10 ** (snr / 10) / 2
    s = c.points[rng.integers(0, order, m_t)]
    n = math.sqrt(sigma2) * (rng.standard_normal(m_r) + 1j * rng.standard_normal(m_r))
    y_rot = rotate_received(f.q, h @ s + n)
    return sphere_decoder.DetectionProblem(r=f.r, y_rot=y_rot, constellation=c, sigma2=sigma2)


def problem_for_index(i: int, base_seed: int = 0):
    order, m_t = PROBLEM_SHAPES[i % len(PROBLEM_SHAPES)]
    return random_problem(base_seed + i, order, m_t)


def check_detector(n_instances: int = 200, base_seed: int = 0) -> tuple[CheckResult, CheckResult]:
    """Unclipped LLRs vs enumeration; clipped LLRs vs clamped unclipped LLRs."""
    exact = CheckResult("sphere decoder vs exhaustive max-log")
    clamp = CheckResult("clip-clamp equivalence and node monotonicity")
    for i in range(n_instances):
        p = problem_for_index(i, base_seed)
        res = sphere_decoder.detect(p)
        ref = oracles.exhaustive_maxlog_llrs(p)
        err = float(np.max(np.abs(res.llrs - ref)))
        exact.record(base_seed + i, err, err <= TOL)

        worst = 0.0
        ok = True
        prev_nodes = None
        for C in sorted(CLIP_LEVELS, reverse=True):
            clipped = sphere_decoder.detect(sphere_decoder.DetectionProblem(p.r, p.y_rot, p.constellation, p.sigma2, C))
            target = np.clip(res.llrs, -C, C)
            e = float(np.max(np.abs(clipped.llrs - target)))
            sign_ok = np.all(np.sign(clipped.llrs) == np.sign(target))
            worst = max(worst, e)
            nodes_ok = prev_nodes is None or clipped.visited_nodes <= prev_nodes
            ok &= e <= TOL and bool(sign_ok) and nodes_ok and clipped.visited_nodes <= res.visited_nodes
            prev_nodes = clipped.visited_nodes
        clamp.record(base_seed + i, worst, ok)
    return exact, clamp


def check_bcjr(n_instances: int = 60, base_seed: int = 0, lengths=(4, 8, 12)) -> CheckResult:
    res = CheckResult("BCJR vs exhaustive MAP")
    for i in range(n_instances):
        seed = base_seed + i
        rng = np.random.default_rng(seed)
        k = lengths[i % len(lengths)]
        llr = rng.normal(0.0, 4.0, 2 * k)
        app, _ = fec.bcjr_decode(llr)
        err = float(np.max(np.abs(app - oracles.exhaustive_map_decode(llr, k))))
        res.record(seed, err, err <= TOL)
    return res


def check_controller() -> CheckResult:
    """Fixed point at the target, both clamps, and the worked update values."""
    res = CheckResult("clipping controller algebra")
    cases = []
    for i, ter in enumerate((1e-2, 1e-3, 1e-4)):
        s = adapt.init_clipping(ter, 0.1)
        cases.append((i, abs(adapt.update_clipping(s, ter).l_cl - s.l_cl)))
        cases.append((10 + i, abs(adapt.update_clipping(s, 0.4).l_cl - s.l_ter)))
        low = adapt.update_clipping(adapt.ClippingState(0.06, s.l_ter, ter, 5.0, 0.05), ter * 1e-6)
        cases.append((20 + i, abs(low.l_cl - 0.05)))
    s = adapt.init_clipping(1e-4, 0.1)
    cases.append((30, abs(adapt.update_clipping(s, 1e-5).l_cl - (math.log(9999) - 0.1 * math.log(10)))))
    for seed, err in cases:
        res.record(seed, err, err <= 1e-12)
    return res


def verify_mode(n_detector: int = 200, n_bcjr: int = 60, base_seed: int = 0) -> list[CheckResult]:
    """Run every cross-check and return one result per check."""
    exact, clamp = check_detector(n_detector, base_seed)
    return [exact, clamp, check_bcjr(n_bcjr, base_seed), check_controller()]
