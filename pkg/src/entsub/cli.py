"""Command line front end: ``entsub <command> ...``.

Exit codes: 0 success, 2 usage or validation error, 3 a numeric verdict was
inconclusive (the full report is still written).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import certify, channels, constructions, jsonio, measures
from .config import Tolerances, using_tolerances
from .polysys import GroebnerLimitError
from .tensor import Bipartition, PureState, bipartitions

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 2, 3

FAMILIES = ("ces3x3", "antisym", "ges3qubit", "ges3qubit-orth", "ces4x4", "ges4qubit",
            "ges3qutrit", "hw-ges", "lift")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- argument helpers

def _floats(text: str) -> list[float]:
    try:
        return [float(Fraction(x.strip())) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as err:
        raise UsageError(f"bad number list {text!r}") from err


def _ratios(text: str) -> list[tuple[int, int]]:
    try:
        return [tuple(int(y) for y in x.split(":")) for x in text.split(",")]
    except ValueError as err:
        raise UsageError(f"bad ratio list {text!r}; expected r:s,r:s,...") from err


def _cut(text: str, n: int) -> Bipartition:
    try:
        return Bipartition.of([int(x) for x in text.split(",")], n)
    except ValueError as err:
        raise UsageError(f"bad cut {text!r}: {err}") from err


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise UsageError(f"malformed JSON in {path}: {err}") from err
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from err


def _payload(path: str, key: str):
    """Read JSON and unwrap ``{"<key>": ...}`` envelopes written by other commands."""
    obj = _read_json(path)
    if isinstance(obj, dict) and key in obj and isinstance(obj[key], dict):
        return obj[key]
    if not isinstance(obj, dict):
        raise UsageError(f"{path}: expected a JSON object")
    return obj


def _tolerance_overrides(items) -> dict:
    names = {f for f in Tolerances.__dataclass_fields__}
    out = {}
    for item in items or ():
        key, _, value = item.partition("=")
        if key not in names or not value:
            raise UsageError(f"bad tolerance override {item!r}; known: {sorted(names)}")
        out[key] = int(float(value)) if key in ("min_restarts", "spair_cap") else float(value)
    return out


# ---------------------------------------------------------------- commands

def _family_args(args) -> tuple:
    lam = _floats(args.lam) if args.lam else None
    ratios = _ratios(args.ratio) if args.ratio else None
    return lam, ratios


def _need(value, flag):
    if value is None:
        raise UsageError(f"this family needs {flag}")
    return value


def cmd_construct(args) -> tuple[dict, int]:
    fam = args.family
    lam, ratios = _family_args(args)
    exact = args.exact
    if fam in ("ces3x3", "ges3qubit", "ges3qubit-orth", "ces4x4", "ges4qubit") and exact:
        ratios = _need(ratios, "--ratio")
    elif fam in ("ces3x3", "ges3qubit", "ges3qubit-orth", "ces4x4", "ges4qubit"):
        lam = _need(lam, "--lambda")
    if fam == "ces3x3":
        sub = constructions.ces_3x3_exact(ratios) if exact else constructions.ces_3x3(lam)
    elif fam == "antisym":
        d = _need(args.d, "--d")
        sub = constructions.antisymmetric_exact(d) if exact else constructions.antisymmetric_subspace(d)
    elif fam == "ges3qubit":
        sub = constructions.ges_3qubit_exact(ratios) if exact else constructions.ges_3qubit(lam)
    elif fam == "ges3qubit-orth":
        sub = (constructions.ges_3qubit_orthogonal_exact(ratios) if exact
               else constructions.ges_3qubit_orthogonal(lam))
    elif fam == "ces4x4":
        sub = constructions.ces_4x4_exact(ratios) if exact else constructions.ces_4x4(lam)
    elif fam == "ges4qubit":
        sub = constructions.ges_4qubit_exact(ratios) if exact else constructions.ges_4qubit(lam)
    elif fam == "ges3qutrit":
        if exact:
            pqr = tuple(int(x) for x in args.pqr.split(",")) if args.pqr else (2, 1, 2)
            sub = constructions.ges_3qutrit_exact(pqr)
        elif args.alpha is not None:
            sub = constructions.ges_3qutrit(alphas=(args.alpha,) * 5)
        else:
            sub = constructions.ges_3qutrit()
    elif fam == "hw-ges":
        sub = constructions.hw_ges_exact() if exact else constructions.hw_ges()
    else:  # lift
        base = jsonio.decode_subspace(_payload(_need(args.base, "--base"), "subspace"))
        if isinstance(base, constructions.ExactSubspace):
            base = base.to_subspace()
        if args.channel:
            ch = jsonio.decode_channel(_payload(args.channel, "channel"))
        elif args.holevo_werner:
            ch = channels.holevo_werner(args.holevo_werner)
        else:
            raise UsageError("lift needs --channel FILE or --holevo-werner D")
        sub = constructions.lift_ges(base, channels.isometry_from_kraus(ch), args.party,
                                     certify_channel=True, restarts=args.restarts,
                                     seed=args.seed)
    return {"seed": args.seed, "family": fam, "subspace": jsonio.encode(sub)}, EXIT_OK


def cmd_certify(args) -> tuple[dict, int]:
    sub = jsonio.decode_subspace(_payload(args.file, "subspace"))
    mode = "exact" if args.exact else args.mode
    try:
        certs = certify.certify_ges(sub, mode, args.restarts, args.seed)
    except GroebnerLimitError as err:  # pragma: no cover - certify_cut handles this
        raise UsageError(str(err)) from err
    payload = {"seed": args.seed, "restarts": args.restarts, "mode": mode,
               "dims": list(sub.dims), "dim": sub.dim,
               "certificates": [jsonio.encode(c) for c in certs],
               "is_ges": certify.is_ges(certs)}
    code = EXIT_INCONCLUSIVE if any(c.verdict == "inconclusive" for c in certs) else EXIT_OK
    return payload, code


def cmd_measure(args) -> tuple[dict, int]:
    state = jsonio.decode_state(_payload(args.file, "state"))
    n = state.n
    cuts = [_cut(c, n) for c in args.cut] if args.cut else bipartitions(n)
    if isinstance(state, PureState):
        values = [measures.bipartite_measure(state, c, args.measure) for c in cuts]
    elif args.measure == "negativity":
        values = [measures.negativity(state, c) for c in cuts]
    else:
        raise UsageError(f"{args.measure} is defined here for pure states only")
    payload = {"seed": args.seed, "measure": args.measure,
               "per_cut": [{"cut": list(c.side_a), "value": v} for c, v in zip(cuts, values)]}
    if not args.cut:
        payload["gme"] = min(values)
    return payload, EXIT_OK


def _g_value(text):
    if text is None:
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as err:
        raise UsageError(f"bad --g value {text!r}") from err


def _spectrum(text):
    if text is None:
        return None
    if text.startswith("@"):
        data = _read_json(text[1:])
        return [float(x) for x in data]
    return _floats(text)


def cmd_bound(args) -> tuple[dict, int]:
    rho = jsonio.decode_density(_payload(args.rho, "state"))
    sub = jsonio.decode_subspace(_payload(args.subspace, "subspace"))
    g = _g_value(args.g)
    report = measures.gme_bounds(rho, sub, None if g is None else float(g),
                                 _spectrum(args.spectrum), args.d, args.restarts, args.seed)
    return {"seed": args.seed, "g_source": "given" if g is not None else "estimated",
            "report": jsonio.encode(report)}, EXIT_OK


def cmd_robustness(args) -> tuple[dict, int]:
    sub = jsonio.decode_subspace(_payload(args.subspace, "subspace"))
    g = _g_value(args.g)
    source = "given"
    if g is None:
        g = certify.subspace_entanglement(sub, args.restarts, args.seed).g_gme
        source = "estimated"
    if not 0 < g < 1:
        raise UsageError("g must lie in (0, 1)")
    white = measures.white_noise_robustness(sub, g)
    payload = {"seed": args.seed, "g": float(g), "g_source": source,
               "dim_w": sub.dim, "dim_h": math.prod(sub.dims), "white": float(white)}
    if isinstance(white, Fraction):
        payload["white_exact"] = str(white)
    spec = _spectrum(args.spectrum)
    if spec is not None:
        payload["spectrum"] = measures.spectrum_robustness(sub, float(g), spec)
    return payload, EXIT_OK


def cmd_channel(args) -> tuple[dict, int]:
    if args.action == "holevo-werner":
        return {"seed": args.seed,
                "channel": jsonio.encode(channels.holevo_werner(_need(args.d, "--d")))}, EXIT_OK
    ch = jsonio.decode_channel(_payload(args.file, "channel"))
    if args.action == "validate":
        return {"seed": args.seed, "valid": True, "in_dim": ch.in_dim, "out_dim": ch.out_dim,
                "n_kraus": len(ch), "kraus_norm_below_one":
                list(channels.kraus_norm_condition(ch))}, EXIT_OK
    if args.action == "isometry":
        return {"seed": args.seed,
                "isometry": jsonio.encode(channels.isometry_from_kraus(ch))}, EXIT_OK
    p = math.inf if args.p in ("inf", "infinity") else float(args.p)
    value = channels.max_output_norm(ch, p, args.restarts, args.seed)
    return {"seed": args.seed, "p": "inf" if math.isinf(p) else p, "restarts": args.restarts,
            "value": value}, EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    common.add_argument("--restarts", type=int, default=200)
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    common.add_argument("--format", choices=("json",), default="json")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="tolerance override, e.g. numeric_gap=1e-7 (repeatable)")

    parser = _Parser(prog="entsub", description="Entangled subspaces from quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("construct", parents=[common], help="build a subspace family")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--lambda", dest="lam", help="comma-separated parameters in (0, 1)")
    p.add_argument("--ratio", help="exact sibling amplitude ratios r:s,r:s,...")
    p.add_argument("--d", type=int)
    p.add_argument("--alpha", type=float, help="POVM angle for ges3qutrit")
    p.add_argument("--pqr", help="integer block amplitudes p,q,r for exact ges3qutrit")
    p.add_argument("--exact", action="store_true", help="emit the rational sibling")
    p.add_argument("--base", help="lift: two-party subspace JSON")
    p.add_argument("--channel", help="lift: channel JSON")
    p.add_argument("--holevo-werner", type=int, metavar="D", help="lift: use this channel")
    p.add_argument("--party", type=int, default=1, help="lift: subsystem to expand")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("certify", parents=[common], help="per-cut entanglement certificates")
    p.add_argument("file", help="subspace JSON, or - for stdin")
    p.add_argument("--mode", choices=certify.MODES, default="both")
    p.add_argument("--exact", action="store_true", help="exact mode only")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("measure", parents=[common], help="entanglement of a state")
    p.add_argument("file")
    p.add_argument("--measure", choices=measures.MEASURES, default="geometric")
    p.add_argument("--cut", action="append", help="side A indices, e.g. 0,2 (repeatable)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("bound", parents=[common], help="GME lower bounds for a mixed state")
    p.add_argument("rho")
    p.add_argument("subspace")
    p.add_argument("--g", help="geometric measure of the subspace (e.g. 1/2)")
    p.add_argument("--d", type=int, help="override the concurrence prefactor dimension")
    p.add_argument("--spectrum", help="noise spectrum: comma list or @file.json")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("robustness", parents=[common], help="noise robustness thresholds")
    p.add_argument("subspace")
    p.add_argument("--g")
    p.add_argument("--spectrum", help="noise spectrum: comma list or @file.json")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("channel", parents=[common], help="channel utilities")
    p.add_argument("action", choices=("validate", "isometry", "max-norm", "holevo-werner"))
    p.add_argument("file", nargs="?", default="-")
    p.add_argument("--p", default="2")
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_channel)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        with using_tolerances(**_tolerance_overrides(args.tol)):
            payload, code = args.func(args)
    except UsageError as err:
        print(f"entsub: error: {err}", file=stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, TypeError, IndexError) as err:
        print(f"entsub: error: {type(err).__name__}: {err}", file=stderr)
        return EXIT_USAGE
    text = jsonio.dumps(payload)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
