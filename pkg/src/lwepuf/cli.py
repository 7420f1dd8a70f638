"""Command-line interface.

    lwepuf enroll    --db record.db --state device.json --device-id dev0
    lwepuf serve     --db record.db --endpoint 127.0.0.1:9300
    lwepuf device    --state device.json --endpoint 127.0.0.1:9300
    lwepuf auth-once --db record.db --state device.json
    lwepuf attack active --mode unprotected|protected

All subcommands take --seed for reproducible runs.
"""

import argparse
import json
import sys

import numpy as np

from .device import DatapathConfig
from .fe import PokArray, pok_new
from .sampler import make_rng
from .server import AuthPolicy, enroll_record, load_record
from .wire import ProtocolDevice, connect_device, loopback_authenticate, serve


def _device_from_state(path: str, rng) -> ProtocolDevice:
    with open(path) as fh:
        state = json.load(fh)
    truth = np.unpackbits(np.frombuffer(bytes.fromhex(state["pok_truth"]), dtype=np.uint8),
                          bitorder="little")
    pok = PokArray(truth=truth, ber=state["ber"])
    config = DatapathConfig(p1=state["p1"], p2=state["p2"])
    return ProtocolDevice(config=config, pok=pok, rng=rng, counter=state["counter"])


def _save_device_state(path: str, device_id: str, pok: PokArray,
                       config: DatapathConfig, counter: int) -> None:
    state = {
        "device_id": device_id,
        "ber": pok.ber,
        "p1": config.p1,
        "p2": config.p2,
        "counter": counter,
        "pok_truth": np.packbits(pok.truth, bitorder="little").tobytes().hex(),
    }
    with open(path, "w") as fh:
        json.dump(state, fh)


def cmd_enroll(args) -> int:
    rng = make_rng(args.seed)
    config = DatapathConfig(p1=args.p1, p2=args.p2)
    pok = pok_new(rng, ber=args.ber)
    policy = AuthPolicy(length=args.length)
    record = enroll_record(args.device_id, pok, config, rng, policy,
                           batch=args.batch, path=args.db)
    _save_device_state(args.state, args.device_id, pok, config, counter=0)
    print(f"enrolled {args.device_id}: {record.remaining} CRPs, "
          f"L={args.length}, db={args.db}, device state={args.state}")
    return 0


def cmd_serve(args) -> int:
    record = load_record(args.db)
    length = record.crps[0].length
    policy = AuthPolicy(length=length, threshold=args.threshold)
    results = serve(record, policy, args.endpoint, max_transactions=args.max_auth)
    for i, accept in enumerate(results):
        print(f"transaction {i}: {'accept' if accept else 'reject'}")
    return 0


def cmd_device(args) -> int:
    from .wire import WireError

    rng = make_rng(args.seed)
    dev = _device_from_state(args.state, rng)
    try:
        accept = connect_device(dev, args.endpoint)
    except (WireError, OSError) as exc:
        print(f"transaction aborted: {exc}")
        return 2
    with open(args.state) as fh:
        state = json.load(fh)
    state["counter"] = dev.counter
    with open(args.state, "w") as fh:
        json.dump(state, fh)
    print("accept" if accept else "reject")
    return 0 if accept else 1


def cmd_auth_once(args) -> int:
    rng = make_rng(args.seed)
    record = load_record(args.db)
    length = record.crps[0].length
    policy = AuthPolicy(length=length, threshold=args.threshold)
    dev = _device_from_state(args.state, rng)
    accept, _, _ = loopback_authenticate(record, policy, dev)
    with open(args.state) as fh:
        state = json.load(fh)
    state["counter"] = dev.counter
    with open(args.state, "w") as fh:
        json.dump(state, fh)
    print("accept" if accept else "reject")
    return 0 if accept else 1


def cmd_attack(args) -> int:
    from .attacks import (UnprotectedOracle, ProtectedOracle,
                          attack_unprotected, attack_protected,
                          stream_divergence)
    from .core import key_from_s
    from .device import DeviceState

    rng = make_rng(args.seed)
    key = key_from_s(rng.integers(0, 256, 160, dtype=np.int64).astype(np.uint8))
    if args.mode == "unprotected":
        oracle = UnprotectedOracle(key=key)
        report = attack_unprotected(oracle, rng, method=args.method,
                                    clone_trials=args.clone_trials)
    else:
        state = DeviceState(key=key, config=DatapathConfig())
        oracle = ProtectedOracle(state=state)
        div = stream_divergence(oracle, rng, trials=10)
        print(f"a' divergence across same-seed probes: {div:.3f}")
        report = attack_protected(oracle, rng, clone_trials=args.clone_trials)
    print(f"mode={args.mode} queries={report.queries} "
          f"key_recovered={report.success} clone_agreement={report.clone_agreement:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lwepuf")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enroll", help="enroll a simulated device")
    p.add_argument("--db", required=True, help="server record file to create")
    p.add_argument("--state", required=True, help="device state file to create")
    p.add_argument("--device-id", default="dev0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ber", type=float, default=0.05)
    p.add_argument("--p1", type=int, default=1)
    p.add_argument("--p2", type=int, default=1)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--length", type=int, default=100)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("serve", help="serve authentications for one device record")
    p.add_argument("--db", required=True)
    p.add_argument("--endpoint", required=True, help="host:port")
    p.add_argument("--max-auth", type=int, default=1)
    p.add_argument("--threshold", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("device", help="run one transaction as the device")
    p.add_argument("--state", required=True)
    p.add_argument("--endpoint", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_device)

    p = sub.add_parser("auth-once", help="one in-process loopback transaction")
    p.add_argument("--db", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=int, default=None)
    p.set_defaults(func=cmd_auth_once)

    p = sub.add_parser("attack", help="run the chosen-ciphertext attack demo")
    p.add_argument("kind", choices=["active"])
    p.add_argument("--mode", choices=["unprotected", "protected"], required=True)
    p.add_argument("--method", choices=["scan", "bisect"], default="scan")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clone-trials", type=int, default=100_000)
    p.set_defaults(func=cmd_attack)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
