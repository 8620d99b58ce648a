"""Tests for latency arithmetic, the MIPS cost model, and the benchmark harness."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import make_weights
from deepfir.engine import StreamConfig, StreamEngine
from deepfir.errors import InvalidArgument
from deepfir.latency import (
    CostModel,
    algorithmic_latency,
    end_to_end_latency,
    estimate_mips,
    measure_realtime,
    reference_latency_rows,
    reference_mips_rows,
)


class TestLatencyArithmetic:
    def test_deepfir_one_ms_row(self) -> None:
        assert_allclose(algorithmic_latency("deepfir", 1.0, 0.25), 1.25)
        rep = end_to_end_latency("deepfir", 1.0, 1.0, 0.25, 1.1)
        assert_allclose(rep.end_to_end_ms, 3.35)

    def test_deepfir_sixteenth_ms_row(self) -> None:
        assert_allclose(algorithmic_latency("deepfir", 0.0625, 0.25), 0.3125)
        rep = end_to_end_latency("deepfir", 0.0625, 0.0625, 0.25, 1.1)
        assert abs(rep.end_to_end_ms - 1.48) <= 0.01

    def test_deepfir_eighth_ms_row(self) -> None:
        rep = end_to_end_latency("deepfir", 0.125, 0.125, 0.25, 1.1)
        assert abs(rep.end_to_end_ms - 1.6) <= 0.01

    def test_lstw_group_delay_inside_window(self) -> None:
        assert algorithmic_latency("lstw", 4.0) == 4.0
        assert algorithmic_latency("ola", 16.0) == 16.0

    def test_linear_phase_end_to_end(self) -> None:
        # without conversion a 128-tap filter carries ~4 ms of group delay
        rep = end_to_end_latency("deepfir", 1.0, 1.0, 4.0, 1.1)
        assert_allclose(rep.end_to_end_ms, 7.1)

    def test_report_invariants(self) -> None:
        rep = end_to_end_latency("deepfir", 0.5, 0.5, 0.25, 1.1)
        assert_allclose(rep.algorithmic_ms,
                        rep.synthesis_window_ms + rep.mean_group_delay_ms)
        assert_allclose(rep.end_to_end_ms,
                        rep.algorithmic_ms + rep.hop_ms + rep.hardware_ms)

    def test_negative_inputs_rejected(self) -> None:
        with pytest.raises(InvalidArgument):
            algorithmic_latency("deepfir", -1.0, 0.25)
        with pytest.raises(InvalidArgument):
            end_to_end_latency("deepfir", 1.0, -1.0, 0.25)
        with pytest.raises(InvalidArgument):
            algorithmic_latency("unknown", 1.0)


class TestReferenceTable:
    def test_fir_rows_match_published_values(self) -> None:
        rows = {(r["mode"], r["synthesis_ms"]): r for r in reference_latency_rows()}
        for syn, e2e in ((0.0625, 1.48), (0.125, 1.6), (0.25, 1.85), (0.5, 2.35), (1.0, 3.35)):
            row = rows[("deepfir", syn)]
            assert abs(row["computed_end_to_end_ms"] - e2e) <= 0.01
            assert not row["discrepant"]

    def test_exactly_three_rows_flagged(self) -> None:
        flagged = {(r["mode"], r["synthesis_ms"])
                   for r in reference_latency_rows() if r["discrepant"]}
        assert flagged == {("lstw", 1.0), ("lstw", 4.0), ("ola", 16.0)}

    def test_consistent_lstw_row_not_flagged(self) -> None:
        rows = {(r["mode"], r["synthesis_ms"]): r for r in reference_latency_rows()}
        assert not rows[("lstw", 2.0)]["discrepant"]
        assert_allclose(rows[("lstw", 2.0)]["computed_end_to_end_ms"], 4.1)


class TestCostModel:
    def test_calibrated_on_one_ms_predicts_smaller_hops(self) -> None:
        cost = CostModel.calibrated(388.0, 16, per_output_sample=2 * 128 + 4)
        assert_allclose(estimate_mips(cost, 16), 388.0, rtol=1e-12)
        for hop, published in ((8, 728.0), (4, 1407.0), (2, 2742.0), (1, 5485.0)):
            assert abs(estimate_mips(cost, hop) - published) / published < 0.15

    def test_pure_fixed_cost_doubles_when_hop_halves(self) -> None:
        cost = CostModel.calibrated(100.0, 64, per_output_sample=0.0)
        assert_allclose(estimate_mips(cost, 32), 2.0 * estimate_mips(cost, 64), rtol=1e-12)

    def test_mask_rows_scale_exactly(self) -> None:
        cost = CostModel.calibrated(444.0, 16, per_output_sample=0.0)
        assert_allclose(estimate_mips(cost, 8), 888.0, rtol=1e-12)
        assert_allclose(estimate_mips(cost, 16), 444.0, rtol=1e-12)
        assert_allclose(estimate_mips(cost, 32), 222.0, rtol=1e-12)

    def test_homogeneous_in_instruction_counts(self) -> None:
        base = CostModel(fixed_per_hop=1000.0, per_output_sample=10.0, source="test")
        scaled = CostModel(fixed_per_hop=3000.0, per_output_sample=30.0, source="test")
        assert_allclose(estimate_mips(scaled, 16), 3.0 * estimate_mips(base, 16), rtol=1e-12)

    def test_first_principles_counts_are_positive(self) -> None:
        cost = CostModel.first_principles()
        assert cost.fixed_per_hop > 500_000  # the matvecs dominate
        assert cost.per_output_sample == 2 * 128 + 4
        assert cost.source == "first-principles"

    def test_reference_mips_rows(self) -> None:
        rows = {(r["mode"], r["synthesis_ms"]): r for r in reference_mips_rows()}
        for syn in (0.0625, 0.125, 0.25, 0.5, 1.0):
            assert not rows[("deepfir", syn)]["discrepant"]
        for syn in (1.0, 2.0, 4.0):
            assert_allclose(rows[("lstw", syn)]["estimated_mips"],
                            rows[("lstw", syn)]["published_mips"], rtol=1e-12)
        assert rows[("ola", 16.0)]["discrepant"]  # published value defies the scaling

    def test_zero_hop_rejected(self) -> None:
        with pytest.raises(InvalidArgument):
            estimate_mips(CostModel(1000.0, 1.0, "test"), 0)
        with pytest.raises(InvalidArgument):
            CostModel.calibrated(388.0, 0)

    def test_nonpositive_counts_rejected(self) -> None:
        with pytest.raises(InvalidArgument):
            CostModel(0.0, 1.0, "test")


class TestMeasureRealtime:
    def test_timing_statistics_shape(self, rng) -> None:
        engine = StreamEngine(StreamConfig.deepfir(1.0, min_phase=False),
                              make_weights(rng), track_group_delay=False)
        report = measure_realtime(engine, 0.25)
        assert report.hops == 250
        assert report.mean_us > 0.0
        assert report.mean_us <= report.p95_us <= report.max_us
        assert 0.0 < report.inference_fraction < 1.0
        assert_allclose(report.realtime_factor, report.mean_us / report.hop_duration_us)

    def test_hop_count_for_duration(self, rng) -> None:
        engine = StreamEngine(StreamConfig.deepfir(1.0, min_phase=False),
                              make_weights(rng), track_group_delay=False)
        assert measure_realtime(engine, 0.5).hops == 500

    def test_nonpositive_duration_rejected(self, rng) -> None:
        engine = StreamEngine(StreamConfig.deepfir(1.0), make_weights(rng))
        with pytest.raises(InvalidArgument):
            measure_realtime(engine, 0.0)
