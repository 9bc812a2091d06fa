#!/usr/bin/env python3
"""Smoke test for the circover Python extension.

Builds nothing itself: run `cargo build -p circover-py --release` first,
then `python3 python/smoke_test.py`. The script locates the compiled
extension in target/, links it under a temporary directory as
`circover.so`, imports it, and exercises the main entry points.
"""

import math
import os
import shutil
import sys
import tempfile


def locate_extension():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    candidates = [
        os.path.join(root, "target", profile, "libcircover.so")
        for profile in ("release", "debug")
    ]
    for cand in candidates:
        if os.path.exists(cand):
            return cand
    sys.exit(
        "libcircover.so not found; build it with `cargo build -p circover-py --release`"
    )


def main():
    ext = locate_extension()
    staging = tempfile.mkdtemp(prefix="circover-py-")
    shutil.copy(ext, os.path.join(staging, "circover.so"))
    sys.path.insert(0, staging)

    import circover

    # Interval arithmetic basics.
    a = circover.Interval(1.0, 2.0)
    b = circover.Interval(3.0, 4.0)
    s = a + b
    assert s.lo == 4.0 and s.hi == 6.0, s
    third = circover.Interval(1.0) / circover.Interval(3.0)
    assert third.contains(1.0 / 3.0)
    mu = circover.ratio(1, 10)
    assert mu.contains(0.1) and mu.width() < 1e-15
    sn = circover.Interval(0.0, circover.two_pi().hi).sin()
    assert sn.lo >= -1.0 and sn.hi <= 1.0 and sn.contains(1.0)
    p0 = circover.Interval(1.0, 2.0).part(4, 0)
    assert p0.lo == 1.0 and p0.hi == 1.25

    # Degree and rate helpers.
    assert circover.compute_degree("3*theta") == 3
    assert circover.compute_degree("2*theta") == 2
    assert circover.nhim_min_k(100.0, 0.5) == 7
    assert circover.nhim_min_k(2.0, 0.25) == 1

    # A fast covering verification: the toy homotopy at beta = 1.
    report = circover.verify(
        "toy", mode="full", scheme=(4, 8, 4, 4), r_u=1.0, r_s=1.0, beta="1"
    )
    assert report["verdict"] == "VERIFIED", report
    assert report["degree"] == 3 and report["deg2"] == 1

    # The even-winding variant is blocked by the degree gate but passes fiberwise.
    report = circover.verify(
        "toy", mode="full", scheme=(4, 8, 4, 4), r_u=1.0, r_s=1.0, beta="1", winding=2
    )
    assert report["verdict"] == "NOT_VERIFIED", report
    report = circover.verify(
        "toy", mode="fiber", scheme=(4, 8, 4, 4), r_u=1.0, r_s=1.0, beta="1", winding=2
    )
    assert report["verdict"] == "VERIFIED", report

    # Expression-language route.
    report = circover.verify_expr(
        h_theta="wrap(3*theta)",
        h_x="(1-alpha)*4*x + alpha*2*x",
        h_y="(1-alpha)*y/10",
        eta_lift="3*theta",
        a_coeff="2",
        scheme=(4, 4, 2, 2),
        r_u=1.0,
        r_s=1.0,
    )
    assert report["verdict"] == "VERIFIED", report

    # A small enclosure run with a slice.
    counts, rects = circover.enclose(
        "cap",
        box_r=2.0,
        disc_r=2.0,
        grid=(12, 12, 12),
        steps=1,
        iterates=2,
        slice_theta=math.pi / 3,
    )
    assert len(counts) == 2 and counts[-1] > 0
    assert rects, "expected a nonempty slice at theta = pi/3"

    print("smoke test passed")


if __name__ == "__main__":
    main()
