"""Tests for the Monte-Carlo sweep harness, CSV formats, and summaries."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hetnet_ee import EfficiencyModel, ScenarioConfig, optimal_sinr, sample_instance
from hetnet_ee.harness import (
    CSV_HEADER,
    SweepRecord,
    carrier_trend,
    config_from_values,
    load_config_file,
    paired_gap,
    read_records,
    run_sweep,
    summarize,
    write_records,
)


def tiny_config(**overrides):
    kw = dict(carriers=(3,), followers=1, snr_db=(0.0, 10.0), trials=3,
              seed=7, schemes=("stackelberg", "nash"), regime="dense",
              verify_fraction=0.0, output_path="sweep.csv")
    kw.update(overrides)
    return ScenarioConfig(**kw)


class TestScenarioConfig:
    def test_defaults_are_valid(self):
        cfg = ScenarioConfig()
        assert cfg.carriers == (5,) and cfg.trials == 500

    @pytest.mark.parametrize("bad", [
        dict(trials=0),
        dict(schemes=()),
        dict(schemes=("waterfilling",)),
        dict(regime="duplex"),
        dict(carriers=(2,), followers=4),
        dict(verify_fraction=1.5),
    ])
    def test_rejects_bad_values(self, bad):
        with pytest.raises(ValueError):
            tiny_config(**bad)


class TestRunSweep:
    def test_record_count_and_shape(self):
        cfg = tiny_config()
        records = list(run_sweep(cfg))
        # points(2) * trials(3) * schemes(2) * players(2)
        assert len(records) == 2 * 3 * 2 * 2
        assert all(r.carriers == 3 and r.followers == 1 for r in records)

    def test_paired_schemes_share_the_instance(self):
        records = list(run_sweep(tiny_config()))
        by_trial = {}
        for r in records:
            by_trial.setdefault((r.snr_db, r.trial), set()).add(r.instance_digest)
        assert all(len(digests) == 1 for digests in by_trial.values())

    def test_single_point_leader_utility(self):
        """F=0, one trial: the lone record carries the closed-form value."""
        cfg = tiny_config(carriers=(4,), followers=0, snr_db=(10.0,), trials=1,
                          schemes=("stackelberg",))
        records = list(run_sweep(cfg))
        assert len(records) == 1
        r = records[0]
        inst = sample_instance(4, 0, mean_signal=cfg.mean_signal,
                               mean_cross=cfg.mean_cross, snr_db=10.0, seed=r.seed)
        model = EfficiencyModel(m=2)
        gamma = optimal_sinr(model)
        b0 = int(np.argmax(inst.g0))
        expected = model.value(gamma) * inst.g0[b0] / (gamma * inst.sigma2)
        assert_allclose(r.utility, expected, rtol=1e-12)
        assert r.active_carrier == b0 and r.converged

    def test_trial_seeds_differ(self):
        records = list(run_sweep(tiny_config()))
        seeds = {(r.snr_db, r.trial): r.seed for r in records}
        assert len(set(seeds.values())) == len(seeds)

    def test_verification_marks_records(self):
        cfg = tiny_config(verify_fraction=1.0, trials=2)
        records = list(run_sweep(cfg))
        stackelberg = [r for r in records if r.scheme == "stackelberg"]
        assert all(r.verified == "pass" for r in stackelberg)
        best = [r for r in records if r.scheme == "best_channel"]
        assert all(r.verified == "" for r in best)


class TestCsvRoundTrip:
    def test_header_is_pinned(self):
        assert CSV_HEADER == ("scheme,regime,snr_db,carriers,followers,trial,"
                              "seed,player,utility,active_carrier,converged,verified")

    def test_byte_identical_reruns(self, tmp_path):
        cfg = tiny_config()
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_records(run_sweep(cfg), p1)
        write_records(run_sweep(cfg), p2)
        b1, b2 = p1.read_bytes(), p2.read_bytes()
        assert b1 == b2
        assert b1.endswith(b"\n")

    def test_round_trip(self, tmp_path):
        cfg = tiny_config()
        path = tmp_path / "s.csv"
        records = list(run_sweep(cfg))
        write_records(records, path)
        back = read_records(path)
        assert len(back) == len(records)
        for a, b in zip(records, back):
            assert (a.scheme, a.trial, a.player, a.active_carrier) == \
                   (b.scheme, b.trial, b.player, b.active_carrier)
            assert_allclose(a.utility, b.utility, rtol=1e-11)

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("one,two\n1,2\n")
        with pytest.raises(ValueError):
            read_records(path)


def synth_record(scheme="stackelberg", snr_db=0.0, carriers=3, trial=0,
                 player=0, utility=1.0, converged=True):
    return SweepRecord(scheme=scheme, regime="dense", snr_db=snr_db,
                       carriers=carriers, followers=1, trial=trial, seed=trial,
                       player=player, utility=utility, active_carrier=0,
                       converged=converged, verified="")


class TestSummarize:
    def test_single_record(self):
        rows = summarize([synth_record(utility=2.5)])
        assert len(rows) == 1
        assert rows[0].leader_mean == 2.5
        assert rows[0].leader_std == 0.0
        assert rows[0].leader_ci95 == 0.0

    def test_identical_trials_have_zero_spread(self):
        rows = summarize([synth_record(trial=t, utility=2.5) for t in range(4)])
        assert rows[0].leader_mean == 2.5 and rows[0].leader_std == 0.0

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_confidence_shrinks_like_root_n(self):
        rng = np.random.default_rng(123)
        small = [synth_record(trial=t, utility=float(rng.normal(5, 1)))
                 for t in range(2500)]
        big = [synth_record(trial=t, utility=float(rng.normal(5, 1)))
               for t in range(10000)]
        ci_small = summarize(small)[0].leader_ci95
        ci_big = summarize(big)[0].leader_ci95
        assert abs(ci_small / ci_big - 2.0) < 0.3  # within 15% of the 1/sqrt(n) ratio

    def test_convergence_rate(self):
        records = [synth_record(trial=t, converged=(t % 2 == 0)) for t in range(4)]
        assert summarize(records)[0].convergence_rate == 0.5

    def test_follower_side_statistics(self):
        records = []
        for t in range(3):
            records.append(synth_record(trial=t, player=0, utility=1.0))
            records.append(synth_record(trial=t, player=1, utility=2.0 + t))
        row = summarize(records)[0]
        assert_allclose(row.follower_mean, 3.0, rtol=1e-12)


class TestTrendAndGap:
    def test_carrier_trend_flags_real_drops(self):
        records = []
        means = {2: 1.0, 3: 2.0, 5: 1.99, 8: 0.5}
        rng = np.random.default_rng(5)
        for k, mean in means.items():
            for t in range(200):
                records.append(synth_record(carriers=k, trial=t,
                                            utility=float(rng.normal(mean, 0.1))))
        steps = carrier_trend(summarize(records), scheme="stackelberg")
        assert steps[0].ok            # 1.0 -> 2.0 rises
        assert steps[1].ok            # 1.99 is a within-noise dip
        assert not steps[2].ok        # 0.5 is a real violation

    def test_paired_gap_matches_hand_computation(self):
        records = []
        for t, (a, b) in enumerate([(2.0, 1.0), (3.0, 1.5), (4.0, 2.0)]):
            records.append(synth_record(scheme="stackelberg", trial=t, utility=a))
            records.append(synth_record(scheme="nash", trial=t, utility=b))
        gaps = paired_gap(records, "stackelberg", "nash")
        assert len(gaps) == 1
        assert_allclose(gaps[0].mean_gap, np.mean([1.0, 1.5, 2.0]), rtol=1e-12)
        assert gaps[0].trials == 3

    def test_paired_gap_drops_unconverged_trials(self):
        records = [
            synth_record(scheme="stackelberg", trial=0, utility=2.0),
            synth_record(scheme="nash", trial=0, utility=1.0, converged=False),
            synth_record(scheme="stackelberg", trial=1, utility=5.0),
            synth_record(scheme="nash", trial=1, utility=1.0),
        ]
        gaps = paired_gap(records, "stackelberg", "nash")
        assert gaps[0].trials == 1
        assert gaps[0].mean_gap == 4.0


class TestConfigFile:
    def test_parse_and_override(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# sweep setup\n"
            "carriers=2,3\n"
            "followers=1\n"
            "snr_db=-5:5:5\n"
            "schemes=stackelberg\n"
            "trials=4\n"
            "rates=2.0\n"
        )
        cfg = config_from_values(load_config_file(path), {"trials": 9})
        assert cfg.carriers == (2, 3)
        assert cfg.snr_db == (-5.0, 0.0, 5.0)
        assert cfg.trials == 9  # flag wins over file
        assert cfg.rates == 2.0

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("powerlevel=9001\n")
        with pytest.raises(ValueError):
            config_from_values(load_config_file(path), {})

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("carriers\n")
        with pytest.raises(ValueError):
            load_config_file(path)
