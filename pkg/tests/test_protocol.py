from __future__ import annotations

import json
import math
import threading

import numpy as np
import pytest
from oracle import GATES

from qhecss.protocol import (SWAP_CONSTANT, CorrectionInstruction, InProcessLink, KeyMismatch, LogicalCircuit,
                             MeasurementReport, PermutationKey, ProtocolError, QheClient, QheServer, SessionConfig,
                             SyndromeReport, TGateCount, apply_transversal, client_interpret_and_correct, decrypt,
                             decrypt_many, encrypt, keygen, magic_state, random_pure_state, run_session)
from qhecss.protocol import messages as wire
from qhecss.protocol.transport import connect, dump_blocks, load_blocks, serve
from qhecss.state_sim import KET0, KET1, KET_MINUS, KET_PLUS, ContractViolation, GateOp, fidelity, pure_density

S2 = 1 / math.sqrt(2)
KET_PLUS_I = np.array([S2, 1j * S2])


def fid(rho, ket) -> float:
    return fidelity(rho, pure_density(ket))


def new_client(code, m, seed):
    return QheClient(code, m, np.random.default_rng(seed))


class TestKeygen:
    def test_small_key_space(self, rng):
        key = keygen(1, 2, rng)
        assert set(key.slots) <= {0, 1} and key.key_space_size == 4

    def test_steane_key_space(self, rng):
        assert keygen(1, 7, rng).key_space_size == 128

    def test_slot_frequencies(self, rng):
        draws = np.array([keygen(3, 7, rng).slots for _ in range(100_000)]).ravel()
        counts = np.bincount(draws, minlength=6) / draws.size
        sigma = math.sqrt((1 / 6) * (5 / 6) / draws.size)
        assert np.all(np.abs(counts - 1 / 6) < 3 * sigma)

    def test_bitstring_is_one_hot(self):
        key = PermutationKey(2, 3, (0, 3, 1))
        assert key.bitstring() == "1000" "0001" "0100"
        assert key.code_positions == [0, 7, 9]

    @pytest.mark.parametrize("m, n, slots", [(1, 2, (0,)), (1, 2, (0, 2)), (0, 1, (0,))])
    def test_invalid(self, m, n, slots):
        with pytest.raises(ContractViolation):
            PermutationKey(m, n, slots)


class TestEncrypt:
    def test_identity_code_block(self, identity, rng):
        key = keygen(1, 1, rng)
        block = encrypt(key, identity, KET0, rng)
        reg = block.register
        assert block.size == 2
        assert [reg.is_dense(lab) for lab in block.positions] == [s == key.slots[0] for s in range(2)]

    def test_steane_block_is_code_state(self, steane, rng):
        key = keygen(1, 7, rng)
        block = encrypt(key, steane, KET0, rng)
        reg = block.register
        labels = [block.label(p) for p in key.code_positions]
        assert block.size == 14 and reg.num_dense == 7 and len(reg.mms_slots) == 7
        for s in steane.stabilizers:
            assert reg.expectation(s, labels) == pytest.approx(1)
        assert reg.expectation(steane.logical_z[0], labels) == pytest.approx(1)

    @pytest.mark.parametrize("m, code_name", [(1, "steane"), (2, "steane"), (1, "identity"), (3, "identity")])
    def test_round_trip(self, m, code_name, rng, request):
        code = request.getfixturevalue(code_name)
        for _ in range(100):
            key = keygen(m, code.n, rng)
            psi = random_pure_state(rng)
            rho, swaps = decrypt(key, code, encrypt(key, code, psi, rng))
            assert fid(rho, psi) >= 1 - 1e-9
            assert swaps <= SWAP_CONSTANT * code.n * m

    def test_identity_code_is_permutation_only(self, identity, rng):
        key = keygen(2, 1, rng)
        block = encrypt(key, identity, KET_PLUS, rng)
        reg = block.register
        assert np.allclose(reg.amplitudes, KET_PLUS)
        assert reg.dense == [block.label(key.slots[0])]

    def test_wrong_key(self, steane, rng):
        key = PermutationKey(1, 7, (0,) * 7)
        other = PermutationKey(1, 7, (1,) + (0,) * 6)
        with pytest.raises(KeyMismatch):
            decrypt(other, steane, encrypt(key, steane, KET0, rng))

    def test_key_code_length_mismatch(self, steane, rng):
        with pytest.raises(ContractViolation):
            encrypt(keygen(1, 3, rng), steane, KET0, rng)

    def test_inner_permutation_unsupported(self, steane, rng):
        with pytest.raises(NotImplementedError):
            encrypt(keygen(1, 7, rng), steane, KET0, rng, inner_permutation=(1, 0))


class TestTransversal:
    @pytest.mark.parametrize("code_name", ["steane", "identity"])
    @pytest.mark.parametrize("gate, start, expected", [
        ("X", KET0, KET1), ("Z", KET_PLUS, KET_MINUS), ("H", KET0, KET_PLUS), ("S", KET_PLUS, KET_PLUS_I),
    ])
    def test_single_block(self, code_name, gate, start, expected, rng, request):
        code = request.getfixturevalue(code_name)
        key = keygen(2, code.n, rng)
        block = encrypt(key, code, start, rng)
        apply_transversal(block, gate, code)
        assert fid(decrypt(key, code, block)[0], expected) >= 1 - 1e-9

    def test_cnot(self, steane, rng):
        client = new_client(steane, 1, 5)
        a, b = client.encrypt(KET1), client.encrypt(KET0)
        apply_transversal([a, b], "CNOT", steane)
        rho = client.decrypt([a, b])
        assert fid(rho, np.kron(KET1, KET1)) >= 1 - 1e-9

    def test_cnot_entangles(self, steane):
        client = new_client(steane, 1, 6)
        a, b = client.encrypt(KET_PLUS), client.encrypt(KET0)
        apply_transversal([a, b], "CNOT", steane)
        bell = np.array([S2, 0, 0, S2])
        assert fid(client.decrypt([a, b]), bell) >= 1 - 1e-9

    def test_cnot_across_keys(self, steane, rng):
        a = encrypt(keygen(1, 7, rng), steane, KET0, rng, block_id=0)
        b = encrypt(keygen(1, 7, rng), steane, KET0, rng, block_id=1)
        with pytest.raises(ProtocolError):
            apply_transversal([a, b], "CNOT", steane)

    def test_t_is_not_transversal(self, steane, rng):
        block = encrypt(keygen(1, 7, rng), steane, KET0, rng)
        with pytest.raises(ContractViolation):
            apply_transversal(block, "T", steane)

    def test_mms_positions_untouched(self, steane, rng):
        key = keygen(1, 7, rng)
        block = encrypt(key, steane, KET_PLUS, rng)
        mms = set(block.register.mms_slots)
        for g in "XZHS":
            apply_transversal(block, g, steane)
        assert block.register.mms_slots == mms


def t_round(code, m, seed, message):
    client = new_client(code, m, seed)
    server = QheServer(code, m, np.random.default_rng(seed + 10**6))
    data, magic = client.encrypt(message), client.encrypt(magic_state())
    server.t_gate_round(data, magic, InProcessLink(client))
    entry = next(e for e in client.log if e["kind"] == "t_gate")
    return client.decrypt([data]), entry, client.key


class TestTGateRound:
    def test_both_branches_give_t(self, steane):
        expected = GATES["T"] @ KET_PLUS
        seen = set()
        for seed in range(40):
            rho, entry, _ = t_round(steane, 1, seed, KET_PLUS)
            assert fid(rho, expected) >= 1 - 1e-9
            seen.add(entry["outcome"])
        assert seen == {0, 1}

    @pytest.mark.parametrize("m", [1, 2])
    def test_random_message(self, steane, m, rng):
        for seed in range(10):
            psi = random_pure_state(rng)
            rho, _, _ = t_round(steane, m, seed, psi)
            assert fid(rho, GATES["T"] @ psi) >= 1 - 1e-9

    def test_outcome_balanced(self, identity):
        runs = 4000
        ones = sum(t_round(identity, 1, seed, random_pure_state(np.random.default_rng(seed)))[1]["outcome"]
                   for seed in range(runs))
        assert abs(ones / runs - 0.5) < 3 * math.sqrt(0.25 / runs)

    def test_instruction_shape(self, steane):
        _, entry, key = t_round(steane, 2, 3, KET_PLUS)
        ops = entry["ops"]
        assert len(ops) == key.block_size and set(ops) <= {"I", "S"}
        letter = "S" if entry["outcome"] else "I"
        assert all(ops[p] == letter for p in key.code_positions)


class TestClientInterpret:
    key = PermutationKey(1, 7, (1, 0, 1, 1, 0, 0, 1))

    def bits_for(self, code_bits):
        bits = [0] * self.key.block_size
        for p, b in zip(self.key.code_positions, code_bits):
            bits[p] = b
        return bits

    def test_even_codeword_gives_identity(self, steane, rng):
        codeword = [1, 1, 1, 0, 1, 0, 0]  # first check row, logical 0
        instr = client_interpret_and_correct(self.key, steane, self.bits_for(codeword), "t_gate", rng)
        assert all(instr.ops[p] == "I" for p in self.key.code_positions)

    def test_odd_codeword_gives_s(self, steane, rng):
        instr = client_interpret_and_correct(self.key, steane, self.bits_for([1] * 7), "t_gate", rng)
        assert all(instr.ops[p] == "S" for p in self.key.code_positions)

    @pytest.mark.parametrize("purpose", ["syndrome_x", "syndrome_z"])
    def test_zero_syndrome(self, steane, rng, purpose):
        instr = client_interpret_and_correct(self.key, steane, "0" * 14, purpose, rng)
        assert instr.ops == "I" * 14

    def test_syndrome_broadcast_per_group(self, steane, rng):
        bits = self.bits_for([0, 0, 0, 1, 0, 0, 0])
        instr = client_interpret_and_correct(self.key, steane, bits, "syndrome_x", rng)
        assert instr.ops == "II" * 3 + "XX" + "II" * 3

    def test_length_and_purpose(self, steane, rng):
        with pytest.raises(ProtocolError):
            client_interpret_and_correct(self.key, steane, "0" * 13, "t_gate", rng)
        with pytest.raises(ProtocolError):
            client_interpret_and_correct(self.key, steane, "0" * 14, "magic", rng)


def syndrome_run(code, m, seed, message, error=None):
    """Encrypt, optionally inject (op, block position), run one extraction round, decrypt."""
    client = new_client(code, m, seed)
    server = QheServer(code, m, np.random.default_rng(seed + 1))
    link = InProcessLink(client)
    data = client.encrypt(message)
    zero, plus = client.encrypt(KET0), client.encrypt(KET_PLUS)
    if error is not None:
        op, pos = error
        data.register.apply(GateOp(op, (data.label(pos),)))
    server.syndrome_extraction_round(data, zero, plus, link)
    return client.decrypt([data]), client, link


class TestSyndromeRound:
    def test_no_error(self, steane, rng):
        psi = random_pure_state(rng)
        rho, client, link = syndrome_run(steane, 1, 4, psi)
        assert fid(rho, psi) >= 1 - 1e-9
        entry = next(e for e in client.log if e["kind"] == "syndrome")
        assert entry["x_syndrome"] == entry["z_syndrome"] == "000"
        replies = [wire.decode(line) for who, line in link.transcript if who == "client"]
        assert [r.ops for r in replies] == ["I" * 14] * 2

    @pytest.mark.parametrize("op", ["X", "Z"])
    @pytest.mark.parametrize("g", range(7))
    def test_single_error_corrected(self, steane, rng, op, g):
        psi = random_pure_state(rng)
        client = new_client(steane, 1, 100 + g)
        pos = client.key.code_positions[g]
        rho, _, _ = syndrome_run(steane, 1, 100 + g, psi, (op, pos))
        assert fid(rho, psi) >= 1 - 1e-9

    def test_report_length(self, steane):
        client = new_client(steane, 1, 0)
        with pytest.raises(ProtocolError):
            client.handle(SyndromeReport(0, "0" * 13, "0" * 14))


class TestEvaluate:
    @pytest.mark.parametrize("text, inputs, expected", [
        ("H 0", [KET0], KET_PLUS),
        ("H 0\nT 0\nT 0\nH 0", [KET0], GATES["H"] @ GATES["S"] @ GATES["H"] @ KET0),
        ("H 0\nCNOT 0 1", [KET0, KET0], np.array([S2, 0, 0, S2])),
    ])
    def test_examples(self, text, inputs, expected):
        for seed in range(3):
            result = run_session(SessionConfig(seed=seed), LogicalCircuit.parse(text, len(inputs)), inputs)
            assert fid(result.state, expected) >= 1 - 1e-9
            assert result.fidelity >= 1 - 1e-9

    def test_periodic_syndrome_rounds(self):
        config = SessionConfig(seed=2, syndrome_every=2)
        result = run_session(config, LogicalCircuit.parse("H 0\nT 0\nS 0\nX 0"), [KET0])
        assert result.fidelity >= 1 - 1e-9
        assert sum(e["kind"] == "syndrome" for e in result.server_log) == 3

    def test_transmission_noise_corrected_at_low_p(self):
        # one heavy error in a handful of runs is allowed; most must come back intact
        good = sum(run_session(SessionConfig(seed=s, noise_p=0.02), LogicalCircuit.parse("H 0"), [KET0]).fidelity
                   >= 1 - 1e-6 for s in range(20))
        assert good >= 17

    def test_wire_count_mismatch(self, steane):
        server = QheServer(steane, 1, np.random.default_rng(0))
        client = new_client(steane, 1, 0)
        with pytest.raises(ProtocolError):
            server.evaluate(LogicalCircuit.parse("CNOT 0 1"), [client.encrypt(KET0)], InProcessLink(client))

    def test_plan(self, steane):
        server = QheServer(steane, 1, np.random.default_rng(0), syndrome_every=2)
        assert server.plan(LogicalCircuit.parse("T 0\nT 1\nH 0\nT 0")) == TGateCount(3, 6, 6)


class TestKeyPrivacyInterface:
    def test_message_shapes_do_not_depend_on_key(self):
        circuit = LogicalCircuit.parse("H 0\nT 0\nCNOT 0 1\nT 1")
        shapes = set()
        for seed in range(6):
            result = run_session(SessionConfig(seed=seed), circuit, [KET0, KET0])
            shape = []
            for _, line in result.transcript:
                d = json.loads(line)
                shape.append((d["type"], tuple(sorted((k, len(v)) for k, v in d.items() if isinstance(v, str)))))
            shapes.add(tuple(shape))
        assert len(shapes) == 1


class TestWire:
    def test_field_names(self):
        assert json.loads(wire.encode(TGateCount(2, 1, 1))) == {"type": "t_gate_count", "r": 2, "zero_count": 1,
                                                               "plus_count": 1}
        assert json.loads(wire.encode(MeasurementReport(3, "0101")))["type"] == "measurement_report"
        assert json.loads(wire.encode(CorrectionInstruction(0, "ISXZ")))["ops"] == "ISXZ"

    @pytest.mark.parametrize("msg", [TGateCount(1, 0, 0), MeasurementReport(0, "01"), CorrectionInstruction(1, "IS"),
                                     SyndromeReport(2, "00", "11"), wire.Ack()])
    def test_round_trip(self, msg):
        line = wire.encode(msg)
        assert line.endswith("\n") and "\n" not in line[:-1]
        assert wire.decode(line) == msg

    @pytest.mark.parametrize("line", ['{"type": "hello"}', '{"type": "ack", "x": 1}', '{"bits": "01"}'])
    def test_bad_messages(self, line):
        with pytest.raises(ProtocolError):
            wire.decode(line)

    def test_check_lengths(self):
        wire.check_lengths(CorrectionInstruction(0, "ISXZ"), 4)
        with pytest.raises(ProtocolError):
            wire.check_lengths(CorrectionInstruction(0, "ISXY"), 4)
        with pytest.raises(ProtocolError):
            wire.check_lengths(MeasurementReport(0, "012"), 3)

    def test_block_bundle_roundtrip(self, steane):
        client = new_client(steane, 1, 9)
        a, b = client.encrypt(KET1), client.encrypt(KET_PLUS)
        apply_transversal([a, b], "CNOT", steane)
        blocks = load_blocks(json.loads(json.dumps(dump_blocks([a, b]))))
        assert blocks[0].register is blocks[1].register
        rho_before, _ = decrypt_many(client.key, steane, [a, b])
        rho_after, _ = decrypt_many(client.key, steane, blocks)
        assert np.allclose(rho_before, rho_after)


class TestCircuit:
    def test_parse(self):
        c = LogicalCircuit.parse("# comment\nH 0\n\nCNOT 0 1\nT 1\n")
        assert c.wires == 2 and c.t_count == 1
        assert LogicalCircuit.parse(c.to_text(), 2) == c

    @pytest.mark.parametrize("text", ["Y 0", "H a", "CNOT 0", "CNOT 1 1"])
    def test_rejects(self, text):
        with pytest.raises(ContractViolation):
            LogicalCircuit.parse(text)

    def test_wire_out_of_range(self):
        with pytest.raises(ContractViolation):
            LogicalCircuit.parse("H 3", 2)


class TestSessionConfig:
    def test_json_roundtrip(self):
        c = SessionConfig(m=2, n_code="identity", seed=4, noise_p=0.1)
        assert SessionConfig.from_json(json.loads(json.dumps(c.to_json()))) == c

    @pytest.mark.parametrize("d", [{"m": 0}, {"noise_p": 2.0}, {"transport": "udp"}, {"colour": "red"}])
    def test_rejects(self, d):
        with pytest.raises(ContractViolation):
            SessionConfig.from_json(d)

    def test_seed_streams_are_independent(self):
        c, s = SessionConfig(seed=1).rngs()
        assert c.integers(2**62) != s.integers(2**62)


class TestTcp:
    def test_serve_and_connect_match_in_process(self):
        config = SessionConfig(m=1, seed=11)
        circuit = LogicalCircuit.parse("H 0\nT 0\nCNOT 0 1\nT 1")
        inputs = [KET0, KET_PLUS]
        port = []
        ready = threading.Event()

        def on_ready(p):
            port.append(p)
            ready.set()

        t = threading.Thread(target=serve, args=(0, config.seed), kwargs={"max_sessions": 1, "ready": on_ready},
                             daemon=True)
        t.start()
        assert ready.wait(10)
        remote = connect(f"127.0.0.1:{port[0]}", config, circuit, inputs)
        t.join(10)
        local = run_session(config, circuit, inputs)
        assert remote.fidelity >= 1 - 1e-9
        assert np.allclose(remote.state, local.state)
        assert [line for _, line in remote.transcript] == [line for _, line in local.transcript]
