#!/usr/bin/env python3
"""
Standalone script running the reference constructions end to end:
the divergent telescoping path, the l_k square ratios, the l_k irreducible
length and the sampled cube / prism checks
"""
import logging
import os
import sys
import time

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from ridgeprox import config
from ridgeprox.logging_config import setup_logging
from ridgeprox.paths import shortest_alternating_path
from ridgeprox.repro import build_unit_square_instance, verify_examples, verify_g2_divergence, verify_square_ratio

setup_logging(level=config.LOG_LEVEL, use_utc=config.USE_UTC)

logger = logging.getLogger(__name__)


def run_section1() -> bool:
    rows = verify_g2_divergence(21)
    worst = max(r.minimax_error for r in rows)
    harmonic_10 = sum(1.0 / n for n in range(1, 11))
    ok = worst <= 1e-9 and abs(float(rows[9].g2_span) - harmonic_10) <= 1e-9
    logger.info(f"Telescoping path: g2 span at k=9 is {float(rows[9].g2_span):.12f} (H_10 = {harmonic_10:.12f})")
    logger.info(f"  worst minimax error over truncations: {float(worst):.3e}")
    return ok


def run_square() -> bool:
    ok = True
    for k in range(1, 11):
        check = verify_square_ratio(k)
        logger.info(f"Square k={k:2d}: lhs={check.report.lhs} rhs={check.report.rhs} ratio={check.report.ratio}")
        ok = ok and check.passed
    return ok


def run_irreducible_length() -> bool:
    ok = True
    for k in range(1, 11):
        ps, _ = build_unit_square_instance(k)
        path = shortest_alternating_path(ps, 0, 2 * k + 1)
        length = len(path) if path is not None else 0
        logger.info(f"l_{k}: shortest alternating path has {length} points (expected {2 * k + 2})")
        ok = ok and length == 2 * k + 2
    return ok


def run_examples() -> bool:
    cube, _ = verify_examples("b", 9)
    cube_ok = cube.passes and all(o.delta0_found == o.delta for o in cube.per_probe)
    logger.info(f"Cube (b): {len(cube.per_probe)} probes, delta0 = delta everywhere: {cube_ok}")

    prism, rows = verify_examples("c", 9)
    outcome = prism.per_probe[0]
    for row in rows:
        logger.info(f"  prism probe delta0={row.delta0:<10g} {'pass' if row.passed else 'fail'}")
    prism_ok = (
        not outcome.attempts[0].passed
        and outcome.delta0_found is not None
        and outcome.delta0_found <= 0.25
    )
    return cube_ok and prism_ok


if __name__ == "__main__":
    logger.info("=" * 60)
    logger.info("🚀 Running reproductions")
    logger.info(f"🧵 Threads: {config.THREADS}")
    logger.info("=" * 60)

    outcomes = {}
    for name, step in (
        ("telescoping path", run_section1),
        ("square ratio", run_square),
        ("irreducible length", run_irreducible_length),
        ("sampled solids", run_examples),
    ):
        started = time.perf_counter()
        try:
            outcomes[name] = step()
        except Exception as e:
            logger.error(f"{name} failed: {str(e)}", exc_info=True)
            outcomes[name] = False
        logger.info(f"{'✅' if outcomes[name] else '❌'} {name} ({time.perf_counter() - started:.2f}s)")

    logger.info("=" * 60)
    sys.exit(0 if all(outcomes.values()) else 1)
