"""``qhe`` command-line front end."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import IO

import numpy as np

from .css_code import CODES
from .noise import NoiseConfig, end_to_end_noise_experiment, mc_uncorrectable_rate
from .protocol import (LogicalCircuit, ProtocolError, SessionConfig, decrypt, encrypt, keygen, random_pure_state,
                       run_session)
from .protocol.transport import connect, serve
from .reports import emit_report
from .security import delta_report, region_fraction
from .state_sim import KET0, KET1, KET_MINUS, KET_PLUS, ContractViolation, fidelity, pure_density

NAMED_STATES = {
    "0": KET0,
    "1": KET1,
    "+": KET_PLUS,
    "-": KET_MINUS,
    "+i": np.array([1, 1j]) / math.sqrt(2),
    "-i": np.array([1, -1j]) / math.sqrt(2),
    "T": np.array([1, np.exp(1j * math.pi / 4)]) / math.sqrt(2),
}


def parse_inputs(text: str, rng: np.random.Generator) -> list[np.ndarray]:
    """Comma-separated single-qubit states; ``random`` draws a Haar state."""
    out = []
    for name in (s.strip() for s in text.split(",")):
        if name == "random":
            out.append(random_pure_state(rng))
        elif name in NAMED_STATES:
            out.append(np.asarray(NAMED_STATES[name], dtype=complex))
        else:
            raise argparse.ArgumentTypeError(f"unknown input state {name!r}")
    return out


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _round(x: float) -> float:
    return float(f"{x:.7g}")


def _matrix_json(rho: np.ndarray) -> dict:
    return {"real": [[_round(v) for v in row] for row in rho.real],
            "imag": [[_round(v) for v in row] for row in rho.imag]}


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _round(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _input_rng(seed: int) -> np.random.Generator:
    # third child: independent of the (client, server) pair SessionConfig derives
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(3)[2])


# ---- subcommands -----------------------------------------------------------

def cmd_roundtrip(args, out: IO[str]) -> int:
    code = CODES[args.code]()
    client_rng, _ = SessionConfig(m=args.m, n_code=args.code, seed=args.seed).rngs()
    key = keygen(args.m, code.n, client_rng)
    message = random_pure_state(_input_rng(args.seed))
    block = encrypt(key, code, message, client_rng)
    rho, _ = decrypt(key, code, block)
    out.write(f"fidelity {fidelity(rho, pure_density(message)):.6f}\n")
    return 0


def _session_config(args) -> SessionConfig:
    if args.config:
        config = SessionConfig.load(args.config)
        overrides = {k: v for k, v in (("seed", args.seed), ("m", args.m), ("n_code", args.code),
                                       ("noise_p", args.noise_p)) if v is not None}
        return SessionConfig.from_json({**config.to_json(), **overrides})
    return SessionConfig(m=args.m or 1, n_code=args.code or "steane", seed=args.seed,
                         noise_p=args.noise_p or 0.0)


def _session_payload(result) -> dict:
    return {
        "fidelity": _round(result.fidelity),
        "state": _matrix_json(result.state),
        "branches": [e for e in result.client_log if e["kind"] in ("t_gate", "syndrome")],
    }


def _load_job(args):
    if args.seed is None and not args.config:
        args.parser.error("--seed is required unless --config supplies one")
    config = _session_config(args)
    circuit = LogicalCircuit.load(args.circuit)
    try:
        inputs = parse_inputs(args.inputs, _input_rng(config.seed))
    except argparse.ArgumentTypeError as exc:
        args.parser.error(str(exc))
    if len(inputs) != circuit.wires:
        circuit = LogicalCircuit(len(inputs), circuit.gates)
    return config, circuit, inputs


def cmd_evaluate(args, out: IO[str]) -> int:
    config, circuit, inputs = _load_job(args)
    result = run_session(config, circuit, inputs)
    json.dump(_session_payload(result), out, default=_jsonable)
    out.write("\n")
    return 0


def cmd_connect(args, out: IO[str]) -> int:
    config, circuit, inputs = _load_job(args)
    result = connect(args.address, config, circuit, inputs)
    json.dump(_session_payload(result), out, default=_jsonable)
    out.write("\n")
    return 0


def cmd_serve(args, out: IO[str]) -> int:
    def ready(port):
        out.write(f"listening {args.host}:{port}\n")
        out.flush()

    serve(args.port, args.seed, host=args.host, max_sessions=args.max_sessions, ready=ready)
    return 0


def cmd_security(args, out: IO[str]) -> int:
    rows = [delta_report(r, m, n) for r in args.r for m in args.m for n in args.n]
    emit_report(rows, args.format, out)
    return 0


def cmd_region(args, out: IO[str]) -> int:
    emit_report(region_fraction(args.N, args.resolution, args.mode), args.format, out)
    return 0


def cmd_noise_sweep(args, out: IO[str]) -> int:
    if args.mode == "weight":
        code = CODES[args.code]()
        rows = [mc_uncorrectable_rate(code, p, args.trials, args.seed + i) for i, p in enumerate(args.p_list)]
    else:
        config = SessionConfig(m=args.m, n_code=args.code, seed=args.seed)
        rows = [end_to_end_noise_experiment(config, NoiseConfig(p, args.trials, args.seed + i), jobs=args.jobs)
                for i, p in enumerate(args.p_list)]
    emit_report(rows, args.format, out)
    return 0


# ---- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhe", description="Quantum homomorphic encryption over CSS codes.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    codes = sorted(CODES)

    p = sub.add_parser("roundtrip", help="encrypt and decrypt a random qubit, print the fidelity")
    p.set_defaults(handler=cmd_roundtrip, parser=p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--m", type=int, default=1, help="half the group size (default 1)")
    p.add_argument("--code", choices=codes, default="steane")

    def job_flags(p):
        p.add_argument("--circuit", required=True, help="circuit file, one gate per line")
        p.add_argument("--inputs", required=True,
                       help="comma-separated input states: 0, 1, +, -, +i, -i, T or random")
        p.add_argument("--seed", type=int, help="required unless --config gives one")
        p.add_argument("--config", help="session config JSON file")
        p.add_argument("--m", type=int)
        p.add_argument("--code", choices=codes)
        p.add_argument("--noise-p", type=float, help="transmission depolarizing probability")

    p = sub.add_parser("evaluate", help="run the full protocol in process, print the decrypted state")
    p.set_defaults(handler=cmd_evaluate, parser=p)
    job_flags(p)

    p = sub.add_parser("connect", help="run the client side against a `serve` process")
    p.set_defaults(handler=cmd_connect, parser=p)
    p.add_argument("--address", required=True, help="HOST:PORT")
    job_flags(p)

    p = sub.add_parser("serve", help="run the server side over TCP")
    p.set_defaults(handler=cmd_serve, parser=p)
    p.add_argument("--port", type=int, required=True, help="0 picks a free port")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-sessions", type=int, help="exit after this many sessions")

    fmt = {"choices": ("csv", "json"), "default": "csv"}

    p = sub.add_parser("security", help="trace-distance bounds as CSV")
    p.set_defaults(handler=cmd_security, parser=p)
    p.add_argument("--r", type=_int_list, required=True, help="T-gate count(s), comma-separated")
    p.add_argument("--m", type=_int_list, required=True)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--format", **fmt)

    p = sub.add_parser("region", help="share of [1, N]^2 where per-group keys win")
    p.set_defaults(handler=cmd_region, parser=p)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--resolution", type=float, default=0.01)
    p.add_argument("--mode", choices=("area", "lattice"), default="area")
    p.add_argument("--format", **fmt)

    p = sub.add_parser("noise-sweep", help="Monte Carlo logical error rates against the closed form")
    p.set_defaults(handler=cmd_noise_sweep, parser=p)
    p.add_argument("--p-list", type=_float_list, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--code", choices=codes, default="steane")
    p.add_argument("--mode", choices=("weight", "end-to-end"), default="weight")
    p.add_argument("--m", type=int, default=1, help="group half-size for end-to-end mode")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for end-to-end mode")
    p.add_argument("--format", **fmt)
    return parser


def run(argv: list[str] | None = None, out: IO[str] | None = None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args, out)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ContractViolation, ProtocolError, ValueError, OSError, KeyError) as exc:
        print(f"qhe: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())
