"""Line-to-point profiles and maximizer-displacement event classification."""

import math
from fractions import Fraction

import numpy as np
import pytest

from polymerlab.disorder import ConstantField, FuncField, GammaField
from polymerlab.dp import (Profile, classify_event, event_window_halfwidth,
                           line_profile)
from polymerlab.errors import InfeasibleQuery
from polymerlab.geometry import Line, Point
from polymerlab.oracle import enumerate_log_partitions


def _flat_profile(r, halfwidth, peak_offset, peak_value):
    offs = np.arange(-halfwidth, halfwidth + 1)
    logz = np.zeros(len(offs))
    logz[peak_offset + halfwidth] = peak_value
    return Profile(anchor_level=2 * r, offsets=offs, logz=logz,
                   argmax_offset=peak_offset)


class TestLineProfile:
    def test_matches_per_point_enumeration(self):
        field = GammaField(1.0, 314)
        prof = line_profile(field, 2, Point(5, 5))
        for j, lz in zip(prof.offsets, prof.logz):
            u = Point(2 + int(j), 2 - int(j))
            walked = enumerate_log_partitions(field, u, Point(5, 5))["total"]
            assert lz == pytest.approx(walked, abs=1e-12)

    def test_argmax_is_the_max(self):
        field = GammaField(1.0, 315)
        prof = line_profile(field, 3, Point(8, 8))
        k = int(prof.argmax_offset) - int(prof.offsets[0])
        assert prof.logz[k] == prof.max_logz
        assert prof.max_logz == np.max(prof.logz)

    def test_all_ties_pick_center(self):
        # against a wide segment every anchor point sees the same mass
        # (weights are all ones, the window never clips), so the argmax
        # rule must settle on offset zero
        target = Line.segment(Point(6, 6), 20)
        prof = line_profile(ConstantField(), 2, target)
        assert int(prof.argmax_offset) == 0

    def test_symmetric_tie_breaks_to_negative_offset(self):
        # poison the center anchor so the two bit-identical values at
        # offsets -1 and +1 share the max; smaller offset must win
        def lw(p):
            return -50.0 if p == Point(2, 2) else 0.0

        prof = line_profile(FuncField(lw), 2, Point(6, 6))
        c = 0 - int(prof.offsets[0])
        assert prof.logz[c - 1] == prof.logz[c + 1]
        assert int(prof.argmax_offset) == -1

    def test_unbounded_target_rejected(self):
        with pytest.raises(InfeasibleQuery):
            line_profile(ConstantField(), 2, Line.full(Point(6, 6)))

    def test_profile_above_target_rejected(self):
        with pytest.raises(InfeasibleQuery):
            line_profile(ConstantField(), 5, Point(3, 3))


class TestWindowArithmetic:
    def test_frozen_halfwidths_at_cube_r(self):
        # r = 8 has r^(2/3) = 4 exactly; jhat is 1, 1, 2, 26 for j = 1..4
        assert event_window_halfwidth(1, 8) == 20
        assert event_window_halfwidth(2, 8) == 20
        assert event_window_halfwidth(3, 8) == 40
        assert event_window_halfwidth(4, 8) == 520

    def test_floor_beats_float_rounding(self):
        # 27^(2/3) = 9 exactly as an integer statement, though pow() gives
        # 8.999999999999998; the exact version must not round down
        assert event_window_halfwidth(1, 27) == 45

    def test_bad_bin_rejected(self):
        with pytest.raises(ValueError):
            event_window_halfwidth(0, 8)


class TestClassification:
    def test_bin_edges_are_exact(self):
        # ka = 1/3, r = 27: bin j covers displacements [3(j-1), 3j);
        # offsets 1, 2, 3 give displacements 2, 4, 6 in bins 1, 2, 3
        ka = Fraction(1, 3)
        for off, want in ((0, 1), (1, 1), (2, 2), (3, 3)):
            prof = _flat_profile(27, 60, off, 1.0)
            j, _ = classify_event(prof, 27, ka)
            assert j == want

    def test_boundary_displacement_moves_up(self):
        # displacement exactly ka * j * r^(2/3) belongs to bin j + 1
        prof = _flat_profile(8, 30, 4, 1.0)  # disp 8 = 1 * 1 * 8^(2/3) * 2
        j, _ = classify_event(prof, 8, Fraction(2))
        assert j == 2

    def test_far_maximizer_with_large_gap_is_B(self):
        # huge bin constant keeps j = 1, window halfwidth 20; a lone peak
        # at offset 25 with gap 100 >= sqrt(1) * 2 is a B event
        prof = _flat_profile(8, 30, 25, 100.0)
        j, kind = classify_event(prof, 8, Fraction(1000))
        assert (j, kind) == (1, "B")

    def test_maximizer_inside_window_is_C(self):
        prof = _flat_profile(8, 30, 10, 100.0)
        j, kind = classify_event(prof, 8, Fraction(1000))
        assert (j, kind) == (1, "C")

    def test_small_gap_is_C(self):
        # gap 1.0 below the threshold sqrt(1) * 8^(1/3) = 2
        prof = _flat_profile(8, 30, 25, 1.0)
        j, kind = classify_event(prof, 8, Fraction(1000))
        assert (j, kind) == (1, "C")

    def test_gap_exactly_at_threshold_is_B(self):
        prof = _flat_profile(8, 30, 25, 2.0)
        _, kind = classify_event(prof, 8, Fraction(1000))
        assert kind == "B"

    def test_nonpositive_bin_constant_rejected(self):
        prof = _flat_profile(8, 30, 0, 1.0)
        with pytest.raises(ValueError):
            classify_event(prof, 8, Fraction(0))

    def test_float_bin_constant_accepted(self):
        prof = _flat_profile(8, 30, 2, 1.0)
        j_float, _ = classify_event(prof, 8, 0.5)
        j_frac, _ = classify_event(prof, 8, Fraction(1, 2))
        assert j_float == j_frac


class TestEndToEndEvents:
    def test_random_field_classification_is_deterministic(self):
        field = GammaField(1.0, 999)
        prof = line_profile(field, 4, Point(16, 16))
        a = classify_event(prof, 4, Fraction(2))
        b = classify_event(prof, 4, Fraction(2))
        assert a == b
        assert a[0] >= 1 and a[1] in ("B", "C")
