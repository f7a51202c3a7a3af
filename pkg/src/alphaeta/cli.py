"""Batch command-line front-end.

Subcommands: ber-table, eve-nokey, simulate, keyrate, encrypt, decrypt.
Outputs are CSV or JSON (deterministic byte-for-byte for fixed flags);
exit codes: 0 success, 2 usage/config error, 1 computation failure.

Ciphertext format: 16-byte header (magic "Y00STRM1", u16 version, u16 M,
u8 mapping code, 3 reserved bytes) followed by one little-endian u16
point index per plaintext bit.  There is no integrity check: decrypting
with the wrong seed key silently yields garbage bits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import struct
import sys

import numpy as np

from .cipher import Constellation, KeystreamGen, MAPPINGS, decode_lenient
from .keyrate import KEYRATE_EVE_STRATEGIES, eve_exact_ber, key_rate
from .montecarlo import EVE_STRATEGIES, SimConfig, run_simulation
from .receivers import (
    RECEIVER_KINDS,
    ReceiverModel,
    canonical_phase_antipodal,
    eve_nokey_helstrom,
    helstrom_pure_antipodal,
    heterodyne_antipodal,
    homodyne_antipodal,
)

MAGIC = b"Y00STRM1"
FORMAT_VERSION = 1
MAPPING_CODES = {"alternating": 0, "plain": 1}
MAPPING_NAMES = {v: k for k, v in MAPPING_CODES.items()}

REFERENCE_RATE_ORDERS = {"phase-deferred": 1e3, "heterodyne-deferred": 1e6}
RATE_FORMULA_NOTE = (
    "rate = line_rate * max(0, h(p_eve) - h(p_bob)); published order-of-magnitude "
    "figures for this regime assume an unspecified privacy-amplification "
    "accounting and need not match this formula exactly.")


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _to_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit_table(args, header: list[str], rows: list[list]) -> None:
    if args.format == "csv":
        _write_output(_to_csv(header, rows), args.output)
    else:
        records = [dict(zip(header, row)) for row in rows]
        _write_output(_to_json(records), args.output)


_BER_LAWS = {
    "optimal": lambda s, res: helstrom_pure_antipodal(s),
    "phase": lambda s, res: canonical_phase_antipodal(s, res),
    "homodyne": lambda s, res: homodyne_antipodal(s),
    "heterodyne": lambda s, res: heterodyne_antipodal(s),
}


def cmd_ber_table(args) -> int:
    receivers = [r.strip() for r in args.receivers.split(",") if r.strip()]
    if not receivers or any(r not in RECEIVER_KINDS for r in receivers):
        raise UsageError(f"receivers must be a comma list from {RECEIVER_KINDS}")
    if args.s_min < 0 or args.s_max < args.s_min or args.steps < 2:
        if not (args.steps == 2 and args.s_min == args.s_max >= 0):
            raise UsageError("need 0 <= s-min <= s-max and steps >= 2")
    grid = np.linspace(args.s_min, args.s_max, args.steps)
    if args.s_min == args.s_max:
        grid = grid[:1]
    header = ["S"]
    for r in receivers:
        header += [f"{r}_exact", f"{r}_asymptotic"]
    rows = []
    for s in grid:
        row = [float(s)]
        for r in receivers:
            law = _BER_LAWS[r](float(s), args.resolution)
            row += [law.exact, law.asymptotic]
        rows.append(row)
    _emit_table(args, header, rows)
    return 0


def cmd_eve_nokey(args) -> int:
    m_list = [int(m) for m in args.m_list.split(",")]
    rows = []
    for m in m_list:
        const = Constellation(m, args.mapping)  # rejects bad M
        rows.append([m, eve_nokey_helstrom(args.s, const)])
    _emit_table(args, ["M", "p_e"], rows)
    return 0


def cmd_simulate(args) -> int:
    if args.workers < 1:
        raise UsageError("workers must be >= 1")
    try:
        cfg = SimConfig(
            s=args.s, m_bases=args.m, mapping=args.mapping, seed_key=args.seed_key,
            bob_receiver=ReceiverModel(args.bob, args.resolution),
            eve_strategy=args.eve, trials=args.trials,
            master_seed=args.master_seed, dsr_d=args.dsr_d)
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_simulation(cfg, workers=args.workers)
    _write_output(_to_json(report.to_dict()), args.output)
    return 0


def cmd_keyrate(args) -> int:
    explicit = args.p_bob is not None or args.p_eve is not None
    if args.s is not None and explicit:
        raise UsageError("give either --s or both --p-bob and --p-eve, not both")
    if args.s is None and not (args.p_bob is not None and args.p_eve is not None):
        raise UsageError("give either --s or both --p-bob and --p-eve")
    try:
        if args.s is not None:
            p_bob = helstrom_pure_antipodal(args.s).exact
            p_eve = eve_exact_ber(args.s, args.eve)
        else:
            p_bob, p_eve = args.p_bob, args.p_eve
        report = key_rate(p_bob, p_eve, args.line_rate)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = report.to_dict()
    doc["eve_strategy"] = args.eve
    doc["s"] = args.s
    doc["reference_rate_order"] = REFERENCE_RATE_ORDERS[args.eve]
    doc["note"] = RATE_FORMULA_NOTE
    _write_output(_to_json(doc), args.output)
    return 0


def _pack_header(m_bases: int, mapping: str) -> bytes:
    return MAGIC + struct.pack("<HHB3x", FORMAT_VERSION, m_bases, MAPPING_CODES[mapping])


def _parse_header(blob: bytes) -> tuple[int, str]:
    if len(blob) < 16 or blob[:8] != MAGIC:
        raise ValueError("not a ciphertext stream (bad magic)")
    version, m_bases, code = struct.unpack("<HHB3x", blob[8:16])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported ciphertext version {version}")
    if code not in MAPPING_NAMES:
        raise ValueError(f"unknown mapping code {code}")
    return m_bases, MAPPING_NAMES[code]


def cmd_encrypt(args) -> int:
    try:
        const = Constellation(args.m, args.mapping)
        gen = KeystreamGen.from_hex(args.seed_key)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with open(args.input, "rb") as fh:
        data = fh.read()
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8)).astype(np.int64)
    bases = gen.bases(args.m, bits.size)
    pol = (bases & 1) if const.alternating else 0
    points = bases + ((bits ^ pol) * args.m)
    payload = _pack_header(args.m, args.mapping) + points.astype("<u2").tobytes()
    with open(args.output, "wb") as fh:
        fh.write(payload)
    return 0


def cmd_decrypt(args) -> int:
    with open(args.input, "rb") as fh:
        blob = fh.read()
    m_bases, mapping = _parse_header(blob)
    if args.m is not None and args.m != m_bases:
        raise UsageError(f"--m {args.m} conflicts with ciphertext header M={m_bases}")
    if args.mapping is not None and args.mapping != mapping:
        raise UsageError(f"--mapping {args.mapping} conflicts with header {mapping}")
    try:
        const = Constellation(m_bases, mapping)
        gen = KeystreamGen.from_hex(args.seed_key)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    points = np.frombuffer(blob[16:], dtype="<u2").astype(np.int64)
    if np.any(points >= const.num_points):
        raise ValueError("ciphertext contains out-of-range point indices")
    if points.size % 8 != 0:
        raise ValueError("ciphertext bit count is not a whole number of bytes")
    bases = gen.bases(m_bases, points.size)
    bits = decode_lenient(points, bases, const)
    with open(args.output, "wb") as fh:
        fh.write(np.packbits(bits.astype(np.uint8)).tobytes())
    return 0


def _add_output_flags(p, formats=("csv", "json"), default="csv"):
    p.add_argument("--output", default=None, help="output path (default: stdout)")
    if formats:
        p.add_argument("--format", choices=formats, default=default)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="alphaeta",
        description="Numerical toolkit for the alpha-eta (Y-00) quantum-noise stream cipher")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", default=None,
                       help="flat key=value file providing flag defaults")
        p.set_defaults(func=func)
        subparsers[name] = p
        return p

    p = add("ber-table", cmd_ber_table, help="receiver BER hierarchy over an S sweep")
    p.add_argument("--s-min", type=float, default=0.0)
    p.add_argument("--s-max", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=21)
    p.add_argument("--receivers", default="optimal,phase,homodyne,heterodyne")
    p.add_argument("--resolution", type=int, default=4096)
    _add_output_flags(p)

    p = add("eve-nokey", cmd_eve_nokey, help="no-key Helstrom bound over basis counts")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--m-list", default="1,2,4,8,16,32,64")
    p.add_argument("--mapping", choices=MAPPINGS, default="alternating")
    _add_output_flags(p)

    p = add("simulate", cmd_simulate, help="Monte Carlo link simulation (JSON report)")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--m", type=int, default=32)
    p.add_argument("--mapping", choices=MAPPINGS, default="alternating")
    p.add_argument("--seed-key", default="deadbeef", help="hex seed of the keystream LFSR")
    p.add_argument("--bob", choices=RECEIVER_KINDS, default="heterodyne")
    p.add_argument("--resolution", type=int, default=4096)
    p.add_argument("--eve", choices=EVE_STRATEGIES, default="none")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--dsr-d", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_output_flags(p, formats=None)

    p = add("keyrate", cmd_keyrate, help="key generation rate (JSON report)")
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--p-bob", type=float, default=None)
    p.add_argument("--p-eve", type=float, default=None)
    p.add_argument("--eve", choices=KEYRATE_EVE_STRATEGIES, default="phase-deferred")
    p.add_argument("--line-rate", type=float, default=1e9)
    _add_output_flags(p, formats=None)

    p = add("encrypt", cmd_encrypt, help="plaintext bytes -> point-index stream")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed-key", required=True)
    p.add_argument("--m", type=int, default=32)
    p.add_argument("--mapping", choices=MAPPINGS, default="alternating")

    p = add("decrypt", cmd_decrypt, help="point-index stream -> plaintext bytes")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed-key", required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--mapping", choices=MAPPINGS, default=None)

    return parser, subparsers


def _apply_config_file(argv: list[str], subparsers) -> None:
    if not argv or argv[0] not in subparsers or "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return  # argparse will report the missing value
    sp = subparsers[argv[0]]
    known = {a.dest: a for a in sp._actions}
    defaults = {}
    with open(argv[idx + 1], encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"config line {lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            dest = key.strip().replace("-", "_")
            if dest not in known or dest in ("func", "config", "help"):
                raise UsageError(f"config line {lineno}: unknown key {key.strip()!r}")
            action = known[dest]
            defaults[dest] = action.type(value.strip()) if action.type else value.strip()
            action.required = False  # a config value satisfies a required flag
    sp.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser, subparsers = build_parser()
    try:
        _apply_config_file(argv, subparsers)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
