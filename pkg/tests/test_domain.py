import math
import time

import numpy as np
import pytest

from qubesim.core import PendulumState, PhysicalParams
from qubesim.domain import (
    DomainConfig,
    IndicatorColor,
    ResetTarget,
    SimulatedQube,
    decode_encoder,
    estimate_velocity,
    quantize_encoder,
)
from qubesim.errors import ConfigError, NotReady, SafetyViolation

PI = math.pi
TWO_PI = 2 * PI


class TestQuantizeEncoder:
    def test_zero(self):
        assert quantize_encoder(0.0, 2048) == 0

    def test_full_revolution(self):
        assert quantize_encoder(TWO_PI, 2048) == 2048

    def test_truncates_toward_zero(self):
        just_under_two_counts = 2 * (TWO_PI / 2048) * (1 - 1e-12)
        assert quantize_encoder(just_under_two_counts, 2048) == 1
        assert quantize_encoder(-just_under_two_counts, 2048) == -1

    def test_decode_within_one_count(self):
        rng = np.random.default_rng(2)
        cpr = 2048
        for angle in rng.uniform(-PI, PI, size=100_000):
            err = abs(decode_encoder(quantize_encoder(angle, cpr), cpr) - angle)
            assert err < TWO_PI / cpr


class TestEstimateVelocity:
    def test_no_motion_is_exactly_zero(self):
        est, state = estimate_velocity(0.5, 0.5, 0.004, None, 50.0)
        assert est == 0.0 and state == 0.0

    def test_tracks_constant_rate_within_one_percent(self):
        omega, dt = 3.0, 0.004
        state = None
        angle = 0.0
        # 100 steps = 0.4 s >> 10 time constants of a 50 Hz one-pole
        for _ in range(100):
            prev, angle = angle, math.radians(0) + angle + omega * dt
            est, state = estimate_velocity(angle, prev, dt, state, 50.0)
        assert est == pytest.approx(omega, rel=0.01)

    def test_wrap_crossing_gives_small_delta(self):
        est, _ = estimate_velocity(-PI + 0.01, PI - 0.01, 0.004, None, 0.0)
        assert est == pytest.approx(0.02 / 0.004, rel=1e-9)
        assert est > 0.0  # not ~ -2*pi/dt

    def test_unfiltered_when_cutoff_zero(self):
        est, _ = estimate_velocity(0.1, 0.0, 0.004, None, 0.0)
        assert est == pytest.approx(0.1 / 0.004, rel=1e-12)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            estimate_velocity(0.0, 0.0, 0.0, None, 50.0)


class TestDomainConfig:
    def test_defaults(self):
        c = DomainConfig()
        assert c.frequency == 250.0 and c.encoder_counts_per_rev == 2048
        assert c.max_voltage == 3.0 and c.safety_voltage == 18.0
        assert not c.realtime and not c.oracle_state

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"frequency": 0.0},
            {"encoder_counts_per_rev": 2},
            {"max_voltage": 0.0},
            {"max_voltage": 20.0},  # above safety_voltage
            {"integrator_substeps": 0},
            {"velocity_filter_cutoff": -1.0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ConfigError):
            DomainConfig(**kwargs)

    def test_from_file(self, tmp_path):
        path = tmp_path / "domain.cfg"
        path.write_text(
            "frequency = 500\n"
            "encoder_counts_per_rev = 4096\n"
            "realtime = false\n"
            "oracle_state = true\n"
        )
        c = DomainConfig.from_file(path)
        assert c.frequency == 500.0
        assert c.encoder_counts_per_rev == 4096
        assert c.oracle_state is True

    def test_from_file_unknown_key(self, tmp_path):
        path = tmp_path / "domain.cfg"
        path.write_text("framerate = 60\n")
        with pytest.raises(ConfigError, match="unknown keys"):
            DomainConfig.from_file(path)


class TestSimulatedQubeStepping:
    def test_step_before_reset_rejected(self):
        with pytest.raises(NotReady):
            SimulatedQube().step(0.0)

    def test_read_before_reset_rejected(self):
        with pytest.raises(NotReady):
            SimulatedQube().read_full_state()

    def test_zero_voltage_at_rest_keeps_state(self):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        d.step(0.0)
        assert abs(d.state.alpha) == pytest.approx(PI, abs=1e-9)
        assert abs(d.state.alpha_dot) < 1e-9

    def test_clamps_to_max_voltage(self):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        d.step(10.0)
        assert d.actuated_voltage == 3.0
        assert d.commanded_voltage == 10.0
        d.step(-7.5)
        assert d.actuated_voltage == -3.0

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf, 100.0, -25.0])
    def test_safety_violations_do_not_actuate(self, bad):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0.5, 1.0, 0.0, 0.0)))
        before = d.state
        with pytest.raises(SafetyViolation):
            d.step(bad)
        assert d.state == before

    def test_virtual_clock_exact(self):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        for n in range(1, 50):
            frame = d.step(0.0)
            assert frame.timestamp == n / d.config.frequency

    def test_timestamps_non_decreasing_across_reset(self):
        d = SimulatedQube()
        f1 = d.reset(ResetTarget.down())
        f2 = d.step(0.0)
        f3 = d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        assert f1.timestamp <= f2.timestamp <= f3.timestamp


class TestSensors:
    def test_encoder_error_bound(self):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0.3, 1.1, 0.0, 0.0)))
        bound = TWO_PI / d.config.encoder_counts_per_rev
        for _ in range(200):
            d.step(1.0)
            est = d.read_full_state()
            truth = d.state
            assert abs(est.theta - truth.theta) <= bound
            assert abs(est.alpha - truth.alpha) <= bound

    def test_stationary_velocities_exactly_zero(self):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        d.step(0.0)
        est = d.read_full_state()
        assert est.theta_dot == 0.0 and est.alpha_dot == 0.0

    def test_oracle_state_is_ground_truth(self):
        d = SimulatedQube(DomainConfig(oracle_state=True))
        d.reset(ResetTarget.arbitrary(PendulumState(0.2, 0.9, 1.0, -2.0)))
        d.step(2.0)
        assert d.read_full_state() == d.state

    def test_arbitrary_reset_primes_velocities(self):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0.0, 0.5, 1.5, -2.5)))
        est = d.read_full_state()
        assert est.theta_dot == 1.5 and est.alpha_dot == -2.5


class TestIndicator:
    def test_set_and_get(self):
        d = SimulatedQube()
        d.set_indicator(IndicatorColor.GREEN)
        assert d.indicator == "green"
        with pytest.raises(ValueError):
            d.set_indicator("blue")

    def test_yellow_during_reset(self):
        d = SimulatedQube()
        seen = []
        d.reset(ResetTarget.down(), on_step=lambda: seen.append(d.indicator))
        assert seen and all(color == "yellow" for color in seen)
        assert d.indicator == "yellow"  # env flips to green/red afterwards


class TestRealtimePacing:
    def test_mean_period_within_five_percent(self):
        d = SimulatedQube(DomainConfig(frequency=250.0, realtime=True, integrator_substeps=1))
        d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        start = time.monotonic()
        steps = 1000
        for _ in range(steps):
            d.step(0.0)
        elapsed = time.monotonic() - start
        mean_period = elapsed / steps
        assert mean_period == pytest.approx(1.0 / 250.0, rel=0.05)

    def test_overruns_counted_when_impossible_rate(self):
        # 100 kHz cannot be met by a Python loop; every deadline is missed
        d = SimulatedQube(DomainConfig(frequency=100_000.0, realtime=True, integrator_substeps=1))
        d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        for _ in range(50):
            d.step(0.0)
        assert d.overruns > 0

    def test_virtual_mode_never_overruns(self):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        for _ in range(100):
            d.step(0.0)
        assert d.overruns == 0


class TestRenderLine:
    def test_format(self):
        d = SimulatedQube()
        d.reset(ResetTarget.arbitrary(PendulumState(0, PI, 0, 0)))
        d.step(0.5)
        d.set_indicator(IndicatorColor.GREEN)
        line = d.render_line(reward=0.25)
        for token in ("t=", "theta=", "alpha=", "V=", "r=0.250000", "led=green"):
            assert token in line
