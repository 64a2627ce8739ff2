from __future__ import annotations

import math

import pytest

from habitlearn.simlab import (
    SEQUENTIAL,
    STATIONARY,
    RunConfig,
    Scenario,
    SplitMix64,
    oracle_conditionals,
    oracle_evidence,
    run_sequential,
    run_stationary,
)
from habitlearn.probcore import display_db

from oracles import MENU_MULTISET


class TestSplitMix64:
    def test_reference_vectors(self):
        rng = SplitMix64(1234567)
        assert [rng.next_u64() for _ in range(5)] == [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ]
        assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF

    def test_below_is_in_range_and_covers(self):
        rng = SplitMix64(5)
        draws = [rng.below(7) for _ in range(2000)]
        assert set(draws) == set(range(7))
        with pytest.raises(ValueError):
            rng.below(0)

    def test_shuffle_is_a_permutation(self):
        items = list(range(20))
        SplitMix64(3).shuffle(items)
        assert sorted(items) == list(range(20)) and items != list(range(20))

    def test_same_seed_same_stream(self):
        a, b = SplitMix64(99), SplitMix64(99)
        assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]


class TestScenarios:
    def test_stationary_matches_hand_written_multiset(self):
        assert {p: c for p, c in STATIONARY.phases[0]} == {tuple(s.split()): c for s, c in MENU_MULTISET}
        assert len(STATIONARY.draws(0)) == 13

    def test_sequential_groups(self):
        assert len(SEQUENTIAL.phases) == 4
        paths = [p for phase in SEQUENTIAL.phases for p, _ in phase]
        assert len(paths) == len(set(paths)) == 20

    def test_validation(self):
        with pytest.raises(ValueError):
            Scenario("x", ())
        with pytest.raises(ValueError):
            Scenario("x", (((("a",), 0),),))
        with pytest.raises(ValueError):
            Scenario("x", ((((), 1),),))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RunConfig(passes=0)
        with pytest.raises(ValueError):
            RunConfig(p_min=1.0)


class TestOracle:
    def test_evidence_column(self):
        got = []
        for path, _ in STATIONARY.phases[0]:
            ev = oracle_evidence(STATIONARY.phases[0], path)
            got.append("NaN" if math.isnan(ev) else display_db(ev))
        assert got == [-11, -5, -11, -7, -11, -11, "NaN", "NaN", -5, -11]

    def test_sequence_2_conditionals(self):
        steps = oracle_conditionals(STATIONARY.phases[0], ("1a", "2a", "3b", "4c"))
        assert steps == pytest.approx([8 / 13, 7 / 8, 4 / 7, 3 / 4])

    def test_unknown_path(self):
        with pytest.raises(KeyError):
            oracle_evidence(STATIONARY.phases[0], ("1z",))


class TestRuns:
    def test_reports_are_deterministic(self):
        cfg = RunConfig.sequential(seed=7)
        a, b = run_sequential(cfg), run_sequential(cfg)
        assert a.to_text() == b.to_text() and a.to_tsv() == b.to_tsv()
        assert [p.dot for p in a.phases] == [p.dot for p in b.phases]

    def test_seeds_differ(self):
        assert run_sequential(RunConfig.sequential(seed=1)).to_tsv() != run_sequential(
            RunConfig.sequential(seed=2)
        ).to_tsv()

    def test_sequential_needs_phases(self):
        with pytest.raises(ValueError):
            run_sequential(RunConfig.sequential(), STATIONARY)
        with pytest.raises(ValueError):
            run_stationary(RunConfig.stationary(), SEQUENTIAL)

    def test_clock_counts_draws(self, sequential_report, stationary_report):
        assert sequential_report.model.clock == 200
        assert stationary_report.model.clock == 300 * 13

    def test_text_report(self, stationary_report):
        text = stationary_report.to_text()
        assert "scenario: stationary" in text
        assert "window=200 order=auto reserve=0.5" in text
        row = next(line for line in text.splitlines() if line.startswith("1\t"))
        assert row.startswith("1\t1a(") and row.endswith("oracle: (-5 dB)\t[1]")

    def test_tsv_report(self, sequential_report):
        lines = sequential_report.to_tsv().splitlines()
        assert lines[0] == "phase\trank\tpath\tjoint_probability\tevidence_db"
        sizes = [line for line in lines if line.startswith("model_size\t")]
        assert [s.split("\t")[1] for s in sizes] == ["1", "2", "3", "4"]
        values = [int(s.split("\t")[2]) for s in sizes]
        assert values == sorted(values)
        first = lines[1].split("\t")
        assert float(first[3]) == sequential_report.phases[0].predictions[0].joint

    def test_sequential_oracle_is_phase_local(self, sequential_report):
        phase1 = sequential_report.phases[0]
        for pred, oracle in zip(phase1.predictions, phase1.oracle_db):
            in_group = any(pred.tokens == p for p, _ in SEQUENTIAL.phases[0])
            assert (oracle is not None) == in_group
