"""Command-line entry point: ``mcsecrecy <subcommand> [options]``.

Exit status is 0 on success, 2 on usage, parse, or validation errors, and 3
when a requested bound check fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import bounds
from .adversary import (GENERAL, ONE_BIT, PreconditionError, ResourceError, SideInfoScenario,
                        check_theorem1, entropic_security_check, optimal_advantage,
                        read_side_info, side_info_advantage)
from .ciphermodel import CipherError, MessageDistributionScenario, induced_joint, load, serialize
from .constructions import (REFERENCE_NAMES, KeystreamSpec, ResourceLimitError,
                            build_expander_cipher, build_stream_cipher, cascade,
                            random_cipher, random_expander_spec, random_stream_cipher,
                            ramanujan_report, reference_cipher, walsh_rho)
from .probcore import Pmf, PmfError, read_pmf
from .spectral import DENSE_LIMIT, cipher_maximal_correlation, correlation_report
from .verification import montecarlo_stream, run_battery

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK_FAILED = 3


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, int):
        return str(x)
    return f"{x:.10g}"


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit_json(doc, out):
    out.write(json.dumps(_clean(doc), indent=2, sort_keys=False, allow_nan=False) + "\n")


def _emit_pairs(pairs, out):
    width = max((len(k) for k, _ in pairs), default=0)
    for key, value in pairs:
        out.write(f"{key.ljust(width)}  {value}\n")


def _load_cipher(args):
    if getattr(args, "cipher", None) and getattr(args, "ref", None):
        raise UsageError("give either --cipher or --ref, not both")
    if getattr(args, "cipher", None):
        return load(args.cipher)
    if getattr(args, "ref", None):
        return reference_cipher(args.ref)
    raise UsageError("a cipher is required: --cipher FILE or --ref NAME")


def _resolve_cipher(token: str):
    path = Path(token)
    if path.exists():
        return load(path)
    return reference_cipher(token)


def _scenario(args, cipher):
    pmf = read_pmf(args.pmf) if getattr(args, "pmf", None) else None
    return MessageDistributionScenario(cipher, pmf)


def _cipher_info(c) -> dict:
    return {
        "label": c.label,
        "n_messages": c.n_messages,
        "n_keys": c.n_keys,
        "n_ciphertexts": c.n_ciphertexts,
        "message_bits": c.message_bits,
        "key_bits": c.key_bits,
    }


def _write_text_or_stdout(text: str, path, out):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        out.write(text)


# -- subcommands ------------------------------------------------------------


def cmd_analyze(args, out):
    cipher = _load_cipher(args)
    sc = _scenario(args, cipher)
    info = _cipher_info(cipher)
    if max(cipher.n_messages, cipher.n_ciphertexts) <= DENSE_LIMIT:
        report = correlation_report(induced_joint(sc)).to_dict()
    else:
        report = {"rho_m": cipher_maximal_correlation(cipher, sc.message_pmf)}
    uniform = args.pmf is None
    rho_uniform = report["rho_m"] if uniform else cipher_maximal_correlation(cipher)
    converse = bounds.converse_min_key(
        cipher.message_bits, math.log2(rho_uniform) if rho_uniform > 0 else -math.inf)
    extra = {"converse_min_key_bits": converse.value_log2,
             "converse_satisfied": cipher.key_bits >= converse.value_log2 - 1e-6}
    if cipher.is_stream and uniform and cipher.key_bits.is_integer():
        spec = KeystreamSpec(n=int(cipher.message_bits), s=int(cipher.key_bits),
                             streams=cipher.keystream)
        extra["walsh_rho"] = walsh_rho(spec)
    if args.json:
        _emit_json({"command": "analyze", "cipher": info, "report": report, "checks": extra}, out)
    else:
        pairs = [(k, _num(v) if not isinstance(v, str) else v) for k, v in info.items()]
        pairs += [(k, _num(v)) for k, v in report.items()]
        pairs += [(k, _num(v)) for k, v in extra.items()]
        _emit_pairs(pairs, out)
    return EXIT_OK


def cmd_construct(args, out):
    kind = args.kind
    if kind == "stream":
        if args.n is None:
            raise UsageError("construct stream needs --n")
        if args.streams:
            words = [int(w, 16) for w in args.streams.split(",")]
            s = math.log2(len(words))
            if not s.is_integer():
                raise UsageError("the number of keystream words must be a power of two")
            spec = KeystreamSpec(n=args.n, s=int(s), streams=words)
        else:
            if args.s is None:
                raise UsageError("construct stream needs --s or --streams")
            spec = random_stream_cipher(args.n, args.s, args.seed)
        cipher = build_stream_cipher(spec)
    elif kind == "expander":
        if args.n is None or args.d is None:
            raise UsageError("construct expander needs --n and --d")
        spec = random_expander_spec(args.n, args.d, args.seed)
        cipher = build_expander_cipher(spec)
    elif kind == "ref":
        if not args.ref:
            raise UsageError("construct ref needs --ref NAME")
        cipher = reference_cipher(args.ref)
    else:
        if args.messages is None or args.keys is None:
            raise UsageError("construct random needs --messages and --keys")
        cipher = random_cipher(args.messages, args.keys, args.ciphertexts, seed=args.seed)

    data = serialize(cipher).decode("utf-8")
    if args.out:
        Path(args.out).write_text(data, encoding="utf-8")
        summary = {"command": "construct", "kind": kind, "cipher": _cipher_info(cipher),
                   "out": str(args.out)}
        if kind == "expander":
            summary["ramanujan"] = ramanujan_report(spec).to_dict()
        if args.json:
            _emit_json(summary, out)
        else:
            _emit_pairs([("wrote", str(args.out))] +
                        [(k, _num(v) if not isinstance(v, str) else v)
                         for k, v in _cipher_info(cipher).items()], out)
    else:
        out.write(data)
    return EXIT_OK


def cmd_cascade(args, out):
    if len(args.ciphers) < 2:
        raise UsageError("cascade needs at least two ciphers")
    stages = [_resolve_cipher(tok) for tok in args.ciphers]
    rhos = [cipher_maximal_correlation(c) for c in stages]
    combined = stages[0]
    for c in stages[1:]:
        combined = cascade(combined, c)
    rho = cipher_maximal_correlation(combined)
    product = math.prod(rhos)
    doc = {
        "command": "cascade",
        "cipher": _cipher_info(combined),
        "stage_rho": rhos,
        "rho_m": rho,
        "rho_product": product,
        "submultiplicative": rho <= product + 1e-9,
    }
    if args.out:
        Path(args.out).write_bytes(serialize(combined))
        doc["out"] = str(args.out)
    if args.json:
        _emit_json(doc, out)
    else:
        pairs = [("label", combined.label), ("n_keys", str(combined.n_keys))]
        pairs += [(f"stage_{i}_rho", _num(r)) for i, r in enumerate(rhos)]
        pairs += [("rho_m", _num(rho)), ("rho_product", _num(product)),
                  ("submultiplicative", str(doc["submultiplicative"]))]
        _emit_pairs(pairs, out)
    return EXIT_OK if doc["submultiplicative"] else EXIT_CHECK_FAILED


def cmd_advantage(args, out):
    cipher = _load_cipher(args)
    sc = _scenario(args, cipher)
    mode = ONE_BIT if args.one_bit else GENERAL
    doc = {"command": "advantage", "cipher": _cipher_info(cipher), "mode": mode}
    failed = False
    if args.side_info:
        h = read_side_info(args.side_info, cipher.n_messages)
        check = side_info_advantage(SideInfoScenario(sc, h), mode)
        doc["side_info"] = check.to_dict()
        doc["advantage"] = check.value
        checks = [check] if args.check_bounds else []
    else:
        result = optimal_advantage(sc, mode)
        doc["result"] = result.to_dict()
        doc["advantage"] = result.advantage
        checks = []
        if args.check_bounds:
            checks.append(check_theorem1(sc, mode))
            if mode == GENERAL:
                checks.append(entropic_security_check(sc))
    if checks:
        doc["checks"] = [c.to_dict() for c in checks]
        failed = not all(c.passed for c in checks)

    if args.json:
        _emit_json(doc, out)
    else:
        pairs = [("cipher", cipher.label), ("mode", mode)]
        if "result" in doc:
            r = doc["result"]
            pairs += [("best_f", " ".join(map(str, r["best_f"]))),
                      ("best_guess_probability", _num(r["best_guess_probability"])),
                      ("baseline_probability", _num(r["baseline_probability"])),
                      ("advantage", _num(r["advantage"]))]
        else:
            d = doc["side_info"]
            pairs += [("best_f", " ".join(map(str, d["details"]["best_f"]))),
                      ("best_guess_probability", _num(d["details"]["best_guess_probability"])),
                      ("baseline_probability", _num(d["details"]["baseline_probability"])),
                      ("advantage", _num(d["value"])),
                      ("tau_bits", _num(d["details"]["tau_bits"]))]
        for c in checks:
            pairs += [(f"{c.name}.bound", _num(c.bound)), (f"{c.name}.slack", _num(c.slack)),
                      (f"{c.name}.passed", str(c.passed))]
        _emit_pairs(pairs, out)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _log2_arg(text, name):
    if text is None:
        return None
    try:
        return bounds.decimal_to_log2(text)
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def cmd_bounds(args, out):
    if args.fig2:
        n = 1e4 if args.n is None else args.n
        rows = bounds.fig2_curves(n, bounds.parse_grid(args.grid))
        text = bounds.curves_csv(rows)
        if args.json:
            _emit_json({"command": "bounds", "curves": {"n_bits": n, "rows": [r.__dict__ for r in rows]},
                        "out": args.out}, out)
            if args.out:
                Path(args.out).write_text(text, encoding="utf-8")
        else:
            _write_text_or_stdout(text, args.out, out)
        return EXIT_OK

    if args.n is None:
        raise UsageError("bounds needs --n (or --fig2)")
    q = bounds.BoundQuery(
        n_bits=args.n, s_bits=args.s, rho_log2=_log2_arg(args.rho, "rho"),
        t_bits=args.t, tau_bits=args.tau, epsilon_log2=_log2_arg(args.epsilon, "epsilon"),
        leaked_bits=args.leaked, alpha=args.alpha, criterion=args.criterion,
        leakage_rate=args.leakage_rate,
    )
    results = bounds.evaluate(q)
    if not results:
        raise UsageError("nothing to compute: give --rho or --s (and optionally --t/--tau/--leaked)")
    if args.json:
        _emit_json({"command": "bounds", "query": q.__dict__,
                    "results": [r.to_dict() for r in results]}, out)
    else:
        pairs = []
        for r in results:
            if r.kind == bounds.KEY_BITS:
                value = f"{_num(r.value_log2)} bits"
            elif r.kind == bounds.EXPONENT:
                value = f"2^({_num(r.value_log2)})"
            else:
                value = f"{r.value_decimal}  (log2 = {_num(r.value_log2)})"
            if r.satisfied is not None:
                value += f"  satisfied={r.satisfied}"
            if r.note:
                value += f"  [{r.note}]"
            pairs.append((r.name, value))
        _emit_pairs(pairs, out)
    return EXIT_OK


def cmd_montecarlo(args, out):
    rho_log2 = math.log2(args.rho)
    s = args.s
    if s is None:
        eps = _log2_arg(args.epsilon, "epsilon") if args.epsilon else math.log2(0.1)
        s = math.ceil(bounds.stream_key_for_rho(args.n, rho_log2, eps).value_log2 - 1e-12)
    summary = montecarlo_stream(args.n, s, args.rho, args.trials, args.seed)
    if args.out:
        Path(args.out).write_text(summary.csv(), encoding="utf-8")
    doc = {"command": "montecarlo", "seed": args.seed, **summary.to_dict()}
    if args.json:
        _emit_json(doc, out)
    else:
        _emit_pairs([(k, _num(v)) for k, v in doc.items() if k != "command"], out)
    return EXIT_OK


def cmd_verify(args, out):
    outcomes = run_battery(args.battery, seed=args.seed)
    ok = all(o.passed for o in outcomes)
    if args.json:
        _emit_json({"command": "verify", "battery": args.battery, "passed": ok,
                    "checks": [{"name": o.name, "passed": o.passed, "detail": o.detail}
                               for o in outcomes]}, out)
    else:
        for o in outcomes:
            out.write(f"[{'PASS' if o.passed else 'FAIL'}] {o.name}: {o.detail}\n")
        out.write(f"{sum(o.passed for o in outcomes)}/{len(outcomes)} checks passed\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON record")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    common.add_argument("--out", help="output file")

    parser = argparse.ArgumentParser(
        prog="mcsecrecy",
        description="Maximal correlation secrecy for finite symmetric-key ciphers.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    refs = ", ".join(REFERENCE_NAMES)

    p = sub.add_parser("analyze", parents=[common], help="maximal correlation report for a cipher")
    p.add_argument("--cipher", help="cipher file (JSON)")
    p.add_argument("--ref", help=f"reference cipher: {refs}")
    p.add_argument("--pmf", help="message pmf file (default uniform)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("construct", parents=[common], help="build a cipher file")
    p.add_argument("kind", choices=("stream", "expander", "ref", "random"))
    p.add_argument("--n", type=int, help="message bits (stream/expander)")
    p.add_argument("--s", type=int, help="key bits (random stream)")
    p.add_argument("--d", type=int, help="number of permutations (expander)")
    p.add_argument("--streams", help="comma-separated hex keystream words")
    p.add_argument("--ref", help=f"reference cipher: {refs}")
    p.add_argument("--messages", type=int, help="message count (random)")
    p.add_argument("--keys", type=int, help="key count (random)")
    p.add_argument("--ciphertexts", type=int, help="ciphertext count (random)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("cascade", parents=[common], help="compose ciphers with independent keys")
    p.add_argument("ciphers", nargs="+", help="cipher files or reference names, first stage first")
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("advantage", parents=[common], help="exhaustive eavesdropper advantage")
    p.add_argument("--cipher", help="cipher file (JSON)")
    p.add_argument("--ref", help=f"reference cipher: {refs}")
    p.add_argument("--pmf", help="message pmf file (default uniform)")
    p.add_argument("--one-bit", action="store_true", help="restrict to one-bit target functions")
    p.add_argument("--side-info", help="file of 'message_index label' lines")
    p.add_argument("--check-bounds", action="store_true", help="compare with the theoretical caps")
    p.set_defaults(func=cmd_advantage)

    p = sub.add_parser("bounds", parents=[common], help="key-length and advantage formulas")
    p.add_argument("--n", type=float, help="message length in bits")
    p.add_argument("--s", type=float, help="key length in bits")
    p.add_argument("--rho", help="maximal correlation (decimal or 2^x)")
    p.add_argument("--epsilon", help="failure probability / advantage (decimal or 2^x)")
    p.add_argument("--t", type=float, help="Renyi entropy of the message, bits")
    p.add_argument("--tau", type=float, help="side-information entropy parameter, bits")
    p.add_argument("--leaked", type=float, help="message bits revealed to the eavesdropper")
    p.add_argument("--alpha", type=float, help="constant for the parametric existence bounds")
    p.add_argument("--criterion", choices=bounds.CRITERIA, help="mutual-information criterion")
    p.add_argument("--leakage-rate", type=float, help="leakage rate for --criterion leakage")
    p.add_argument("--fig2", action="store_true", help="emit key-length curves as CSV")
    p.add_argument("--grid", default=bounds.DEFAULT_GRID, help="log2(rho) grid lo:hi:steps; write negative bounds as --grid=-40:0:81")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("montecarlo", parents=[common], help="random stream cipher sweep")
    p.add_argument("--n", type=int, required=True, help="message bits")
    p.add_argument("--s", type=int, help="key bits (default: smallest guaranteed by the formula)")
    p.add_argument("--rho", type=float, required=True, help="target maximal correlation")
    p.add_argument("--epsilon", help="failure probability used to pick s (default 0.1)")
    p.add_argument("--trials", type=int, default=500)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("verify", parents=[common], help="run the invariant battery")
    p.add_argument("--battery", choices=("small", "full"), default="small")
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"mcsecrecy {args.command}: {exc}\n")
        err.write(parser.format_usage())
        return EXIT_USAGE
    except (PmfError, CipherError, PreconditionError, ValueError, KeyError,
            ResourceError, ResourceLimitError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        err.write(f"mcsecrecy {args.command}: error: {msg}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
