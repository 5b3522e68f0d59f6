from __future__ import annotations

import math

import numpy as np
import pytest

from qhecss.noise import (NoiseConfig, NoiseReport, end_to_end_noise_experiment, logical_error_probability,
                          mc_uncorrectable_rate)
from qhecss.protocol import InProcessLink, QheClient, QheServer, SessionConfig, decrypt, random_pure_state
from qhecss.state_sim import KET0, KET_PLUS, ContractViolation, GateOp, apply_depolarizing, fidelity, pure_density


def closed_form_by_hand(p: float) -> float:
    return 1 - (1 - p) ** 7 - 7 * p * (1 - p) ** 6


class TestClosedForm:
    @pytest.mark.parametrize("p, expected", [(0.0, 0.0), (1.0, 1.0), (0.01, 0.0020311)])
    def test_examples(self, p, expected):
        assert logical_error_probability(7, 3, p) == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize("p", [0.001, 0.05, 0.3, 0.9])
    def test_matches_hand_expansion(self, p):
        assert logical_error_probability(7, 3, p) == pytest.approx(closed_form_by_hand(p), abs=1e-12)

    def test_distance_one_is_any_error(self):
        assert logical_error_probability(1, 1, 0.2) == pytest.approx(0.2)

    @pytest.mark.parametrize("args", [(7, 3, -0.1), (7, 3, 1.5), (3, 7, 0.1)])
    def test_rejects(self, args):
        with pytest.raises(ContractViolation):
            logical_error_probability(*args)


class TestMonteCarlo:
    def test_p_zero(self, steane):
        rep = mc_uncorrectable_rate(steane, 0.0, 1000, 0)
        assert rep.uncorrectable_rate == 0 and rep.decoder_failure_rate == 0

    def test_p_005_within_three_sigma(self, steane):
        rep = mc_uncorrectable_rate(steane, 0.05, 100_000, 1)
        assert rep.closed_form_pl == pytest.approx(0.0444, abs=1e-4)
        assert abs(rep.uncorrectable_rate - rep.closed_form_pl) < 3 * rep.null_sigma

    def test_decoder_fails_less_than_weight_count(self, steane):
        # X and Z parts decode separately, so an X on one qubit and a Z on another is still fixed
        rep = mc_uncorrectable_rate(steane, 0.05, 100_000, 2)
        assert rep.decoder_failure_rate < rep.uncorrectable_rate

    def test_reproducible(self, steane):
        assert mc_uncorrectable_rate(steane, 0.1, 5000, 7) == mc_uncorrectable_rate(steane, 0.1, 5000, 7)

    def test_stderr(self):
        rep = NoiseReport(0.1, 400, 0.2, 0.1, 0.15)
        assert rep.stderr == pytest.approx(math.sqrt(0.2 * 0.8 / 400))

    @pytest.mark.parametrize("kwargs", [{"p": -0.1}, {"p": 0.1, "trials": 0}, {"p": 0.1, "locations": ("air",)}])
    def test_config_contract(self, kwargs):
        with pytest.raises(ContractViolation):
            NoiseConfig(**kwargs)


class TestEndToEnd:
    def test_p_zero(self):
        rep = end_to_end_noise_experiment(SessionConfig(seed=0), NoiseConfig(0.0, 20, 0))
        assert rep.decoder_failure_rate == 0 and rep.uncorrectable_rate == 0

    def test_deterministic_x_at_code_position_4(self, steane):
        for seed in range(20):
            client = QheClient(steane, 1, np.random.default_rng(seed))
            server = QheServer(steane, 1, np.random.default_rng(seed + 1))
            psi = random_pure_state(client.rng)
            data = client.encrypt(psi)
            zero, plus = client.encrypt(KET0), client.encrypt(KET_PLUS)
            data.register.apply(GateOp("X", (data.label(client.key.code_positions[4]),)))
            server.syndrome_extraction_round(data, zero, plus, InProcessLink(client))
            rho, _ = decrypt(client.key, steane, data)
            assert fidelity(rho, pure_density(psi)) >= 1 - 1e-9

    @pytest.mark.parametrize("m", [1, 2])
    def test_mms_errors_are_inert(self, steane, m):
        client = QheClient(steane, m, np.random.default_rng(m))
        psi = random_pure_state(client.rng)
        code_pos = set(client.key.code_positions)
        for pos in range(client.key.block_size):
            if pos in code_pos:
                continue
            for op in "XYZ":
                block = client.encrypt(psi)
                before = block.register.amplitudes.copy()
                block.register.apply(GateOp(op, (block.label(pos),)))
                assert np.array_equal(block.register.amplitudes, before)
                rho, _ = decrypt(client.key, steane, block)
                assert fidelity(rho, pure_density(psi)) >= 1 - 1e-9

    def test_mms_noise_is_logged(self, steane):
        client = QheClient(steane, 1, np.random.default_rng(0))
        block = client.encrypt(KET0)
        mms = sorted(block.register.mms_slots)[0]
        op = apply_depolarizing(block.register, mms, 1.0, np.random.default_rng(1))
        assert block.register.noise_log == [(mms, op.ops)]

    def test_p_001_matches_closed_form(self):
        rep = end_to_end_noise_experiment(SessionConfig(seed=3), NoiseConfig(0.01, 10_000, 3))
        assert rep.closed_form_pl == pytest.approx(0.0020311, abs=1e-6)
        assert abs(rep.uncorrectable_rate - rep.closed_form_pl) < 3 * rep.null_sigma
        assert abs(rep.decoder_failure_rate - rep.closed_form_pl) < 3 * rep.null_sigma

    def test_reproducible_across_jobs(self):
        config, noise = SessionConfig(seed=5), NoiseConfig(0.1, 40, 5)
        assert end_to_end_noise_experiment(config, noise) == end_to_end_noise_experiment(config, noise, jobs=2)
