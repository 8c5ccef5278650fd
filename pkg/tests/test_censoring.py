"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import math

import numpy as np
import pytest

from gumbel_phcs import (
    AdaptiveCensoredSample,
    CensoringPlan,
    DomainError,
    InvalidPlan,
    Params,
    censor_real_data,
    format_removals,
    generate,
    generate_progressive,
    parse_removals,
    sample_iid,
    scheme,
)

TRUTH = Params(1.5, 0.75)


class TestSchemes:
    def test_terminal(self) -> None:
        assert scheme(1, 30, 10) == (0,) * 9 + (20,)

    def test_front_load(self) -> None:
        assert scheme(2, 30, 10) == (11,) + (1,) * 9

    def test_front_tail(self) -> None:
        assert scheme(3, 30, 10) == (15, 0, 0, 0, 0, 1, 1, 1, 1, 1)

    @pytest.mark.parametrize("kind, n, m", [(1, 30, 10), (2, 40, 15), (3, 40, 15), (2, 29, 15)])
    def test_sum(self, kind: int, n: int, m: int) -> None:
        removals = scheme(kind, n, m)
        assert len(removals) == m
        assert sum(removals) == n - m

    @pytest.mark.parametrize("kind, n, m", [(2, 20, 15), (3, 20, 5), (3, 14, 10), (4, 30, 10), (1, 10, 11)])
    def test_invalid(self, kind: int, n: int, m: int) -> None:
        with pytest.raises(InvalidPlan):
            scheme(kind, n, m)


class TestPlan:
    def test_removals_must_sum(self) -> None:
        with pytest.raises(InvalidPlan, match="sum"):
            CensoringPlan(10, 3, 1.0, (1, 1, 1))

    def test_removals_length(self) -> None:
        with pytest.raises(InvalidPlan):
            CensoringPlan(10, 3, 1.0, (7,))

    def test_threshold(self) -> None:
        with pytest.raises(InvalidPlan):
            CensoringPlan(10, 3, 0.0, (7, 0, 0))

    def test_label(self) -> None:
        assert CensoringPlan.from_scheme(1, 30, 10, 1.5).label == "(30,10) T=1.5 R=(0*9,20)"


class TestRemovalText:
    def test_parse(self) -> None:
        assert parse_removals("0*39,50") == (0,) * 39 + (50,)
        assert parse_removals("(0*35,10*5)") == (0,) * 35 + (10,) * 5
        assert parse_removals("3, 1,1") == (3, 1, 1)

    def test_format(self) -> None:
        assert format_removals((0,) * 39 + (50,)) == "0*39,50"
        assert format_removals((11, 1, 1)) == "11,1*2"

    @pytest.mark.parametrize("text", ["", "a", "1*", "-1", "()"])
    def test_invalid(self, text: str) -> None:
        with pytest.raises(InvalidPlan):
            parse_removals(text)


class TestAdaptation:
    plan = CensoringPlan(10, 4, 1.0, (2, 1, 1, 2))

    def test_adapted(self) -> None:
        sample = AdaptiveCensoredSample.from_times([0.5, 1.2, 1.5, 2.0], self.plan)
        assert sample.j == 1
        assert sample.is_adapted
        assert sample.effective_removals == (2, 0, 0, 4)

    def test_threshold_late(self) -> None:
        sample = AdaptiveCensoredSample.from_times([0.5, 0.7, 0.9, 2.0], self.plan)
        assert sample.j == 3
        assert not sample.is_adapted
        assert sample.effective_removals == self.plan.removals

    def test_threshold_at_failure_counts(self) -> None:
        sample = AdaptiveCensoredSample.from_times([0.5, 1.0, 1.5, 2.0], self.plan)
        assert sample.j == 2
        assert sample.effective_removals == (2, 1, 0, 3)

    def test_unordered(self) -> None:
        with pytest.raises(InvalidPlan, match="ordered"):
            AdaptiveCensoredSample.from_times([0.5, 0.4, 1.5, 2.0], self.plan)

    def test_caller_array_untouched(self) -> None:
        times = np.array([0.5, 1.2, 1.5, 2.0])
        AdaptiveCensoredSample.from_times(times, self.plan)
        times[0] = 0.1

    def test_complete(self) -> None:
        sample = AdaptiveCensoredSample.complete([3.0, 1.0, 2.0])
        np.testing.assert_array_equal(sample.times, [1.0, 2.0, 3.0])
        assert sample.effective_removals == (0, 0, 0)
        assert sample.j == 3


class TestGenerate:
    @pytest.mark.parametrize("kind", [1, 2, 3])
    def test_invariants(self, kind: int) -> None:
        plan = CensoringPlan.from_scheme(kind, 30, 15, 0.75)
        for seed in range(25):
            sample = generate(TRUTH, plan, seed)
            assert len(sample.times) == 15
            assert np.all(np.diff(sample.times) > 0)
            assert sample.j == np.count_nonzero(sample.times <= 0.75)
            assert sum(sample.effective_removals) == 15

    def test_reproducible(self) -> None:
        plan = CensoringPlan.from_scheme(2, 30, 10, 1.5)
        np.testing.assert_array_equal(generate(TRUTH, plan, 4).times, generate(TRUTH, plan, 4).times)

    def test_infinite_threshold_keeps_plan(self) -> None:
        plan = CensoringPlan.from_scheme(2, 30, 10)
        assert generate(TRUTH, plan, 9).effective_removals == plan.removals

    def test_matches_progressive_generator(self) -> None:
        # both generators give the same law once T is infinite, compared on the uniform scale
        plan = CensoringPlan(20, 5, math.inf, (6, 3, 0, 2, 4))
        rng_direct, rng_progressive = np.random.default_rng(1), np.random.default_rng(2)
        reps = 4000
        direct = np.array([TRUTH.cdf(generate(TRUTH, plan, rng_direct).times) for _ in range(reps)])
        progressive = np.array(
            [TRUTH.cdf(generate_progressive(TRUTH, plan.removals, rng_progressive)) for _ in range(reps)]
        )
        se = np.sqrt((direct.var(axis=0) + progressive.var(axis=0)) / reps)
        assert np.all(np.abs(direct.mean(axis=0) - progressive.mean(axis=0)) < 4 * se)

    def test_first_failure_is_sample_minimum(self) -> None:
        plan = CensoringPlan.from_scheme(1, 30, 15, 1.5)
        reps = 2000
        first = np.array([generate(TRUTH, plan, seed).times[0] for seed in range(reps)])
        minima = np.array([sample_iid(TRUTH, 30, seed).min() for seed in range(reps, 2 * reps)])
        se = math.sqrt((first.var() + minima.var()) / reps)
        assert abs(first.mean() - minima.mean()) < 4 * se

    def test_progressive_ordered(self) -> None:
        times = generate_progressive(TRUTH, (0,) * 9 + (20,), 3)
        assert len(times) == 10
        assert np.all(np.diff(times) > 0)


class TestRealData:
    def test_covid_plan(self, covid: np.ndarray) -> None:
        plan = CensoringPlan(90, 40, 10.0, parse_removals("0*39,50"))
        sample = censor_real_data(covid, plan, 0)
        assert len(sample.times) == 40
        assert np.all(np.diff(sample.times) >= 0)
        assert sample.j == np.count_nonzero(sample.times <= 10.0)
        # with no removals before the last failure the first 40 order statistics are observed
        np.testing.assert_array_equal(sample.times, np.sort(covid)[:40])

    def test_length_mismatch(self, covid: np.ndarray) -> None:
        with pytest.raises(InvalidPlan, match="90"):
            censor_real_data(covid[:50], CensoringPlan(90, 40, 10.0, parse_removals("0*39,50")), 0)

    def test_nonpositive(self) -> None:
        with pytest.raises(DomainError):
            censor_real_data([1.0, 0.0, 2.0], CensoringPlan(3, 2, 1.0, (0, 1)), 0)
