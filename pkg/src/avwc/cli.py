"""Command-line front end.

Subcommands map one-to-one onto the library operations: ``structure`` runs
the symmetrisability and best-eavesdropper tests, ``bounds`` evaluates the
secrecy-capacity bounds, and ``code`` drives the construction pipeline
(build, evaluate, robustify, reduce, eliminate, verify-lemmas).  Reports are
emitted as JSON or aligned text; the results block is a pure function of
(spec file, flags, seed), so repeated runs are byte-identical there.

Exit codes: 0 success, 2 parse error, 3 resource limit, 4 numeric or
reduction failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .bounds import (
    BoundOptions,
    avc_capacity,
    multiletter_bound,
    secrecy_lower_bound,
    secrecy_upper_bound_single_letter,
)
from .channels import Distribution, enumeration_cap
from .codefile import parse_code, parse_random_code, serialize_code, serialize_random_code
from .coding import TypicalityParams, build_random_codebook, check_secrecy_events, evaluate_code
from .errors import (
    AvwcError,
    DegenerateRateError,
    NumericFailureError,
    PrefixSearchFailureError,
    ReductionFailureError,
    ResourceLimitError,
    SpecFormatError,
)
from .pipeline import (
    eliminate_randomness,
    reduce_random_code,
    robustify,
    verify_robustification,
)
from .specfile import load_spec
from .structure import find_best_eaves_channel, test_symmetrisable
from .typicality import verify_typicality_bounds


def _matrix(rows: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in rows]


def _vector(values) -> list[float]:
    return [float(v) for v in values]


def _digest(path: str) -> str:
    with open(path, "rb") as handle:
        return hashlib.sha256(handle.read()).hexdigest()


def _bound_block(tag: str, result) -> dict:
    block = {
        "tag": tag,
        "value_bits_per_use": result.value,
        "certified_gap": result.certified_gap,
    }
    if result.argmax_p is not None:
        block["argmax_p"] = _vector(result.argmax_p.probs)
    if result.inner_argmin_q is not None:
        block["inner_argmin_q"] = _vector(result.inner_argmin_q.probs)
    if result.inner_argmax_state is not None:
        block["inner_argmax_state"] = result.inner_argmax_state
    if result.symmetrisable is not None:
        block["symmetrisable"] = result.symmetrisable
        block["deterministic_value_bits_per_use"] = result.deterministic_value
    return block


def cmd_structure(args) -> dict:
    spec = load_spec(args.spec)
    sym = test_symmetrisable(list(spec.avwc.main), args.tol)
    best = find_best_eaves_channel(list(spec.avwc.eaves), args.tol)
    results: dict = {"tag": "structure"}
    sym_block: dict = {
        "tag": "symmetrisability",
        "symmetrisable": sym.symmetrisable,
        "tol": sym.tol,
        "marginal": sym.marginal,
    }
    if sym.symmetrisable:
        sym_block["u_witness"] = _matrix(sym.u_witness.rows)
        sym_block["residual"] = sym.residual
    else:
        sym_block["margin"] = sym.margin
    results["symmetrisability"] = sym_block
    best_block: dict = {"tag": "best-eavesdropper-channel", "exists": best.exists}
    if best.exists:
        best_block["q_star"] = _vector(best.q_star.probs)
        best_block["state"] = (
            spec.state_names[int(np.argmax(best.q_star.probs))]
            if max(best.q_star.probs) > 0.999999
            else None
        )
        best_block["per_state_residuals"] = [r.residual for r in best.per_state_reports]
    else:
        best_block["candidates_tried"] = best.candidates_tried
    results["best_eavesdropper_channel"] = best_block
    return results


def _bound_options(args) -> BoundOptions:
    kwargs = {}
    if getattr(args, "grid", None):
        kwargs["p_grid_denominator"] = args.grid
    if getattr(args, "starts", None):
        kwargs["starts"] = args.starts
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    threads = getattr(args, "threads", None)
    kwargs["threads"] = threads if threads else (os.cpu_count() or 1)
    return BoundOptions(**kwargs)


def cmd_bounds(args) -> dict:
    spec = load_spec(args.spec)
    opts = _bound_options(args)
    results: dict = {"tag": "bounds"}
    lower = secrecy_lower_bound(spec.avwc, opts)
    results["secrecy_lower_bound"] = _bound_block("secrecy-lower-bound", lower)
    cap = avc_capacity(list(spec.avwc.main), opts)
    results["main_avc_capacity"] = _bound_block("main-avc-capacity", cap)
    upper = secrecy_upper_bound_single_letter(spec.avwc, args.u_size, opts)
    results["secrecy_upper_bound_single_letter"] = _bound_block(
        "secrecy-upper-bound-single-letter", upper
    )
    if args.n:
        multi = multiletter_bound(spec.avwc, args.n, args.multi_u_size, opts)
        block = _bound_block("multi-letter-bound", multi)
        block["n"] = args.n
        results["multi_letter_bound"] = block
    results["gap_upper_minus_lower"] = upper.value - lower.value
    return results


def _estimate_sizes(spec, n: int) -> dict:
    a, b, c, s = (
        spec.avwc.input_size,
        spec.avwc.main_output_size,
        spec.avwc.eaves_output_size,
        spec.avwc.state_count,
    )
    return {
        "block_length": n,
        "input_words": a**n,
        "main_output_words": b**n,
        "eaves_output_words": c**n,
        "state_sequences": s**n,
        "enumeration_cap": enumeration_cap(),
    }


def _input_distribution(spec, name: str | None) -> Distribution:
    if name is None or name == "uniform":
        return Distribution.uniform(spec.avwc.input_size)
    if name not in spec.distributions:
        raise SpecFormatError(f"spec file defines no distribution named {name!r}")
    kind, dist = spec.distributions[name]
    if kind != "inputs":
        raise SpecFormatError(f"distribution {name!r} is over {kind}, not inputs")
    return dist


def cmd_code(args) -> dict:
    spec = load_spec(args.spec)
    avwc = spec.avwc
    results: dict = {"tag": f"code-{args.subaction}"}

    # announce the enumeration sizes before any heavy work starts
    if args.subaction in ("build", "verify-lemmas"):
        block_length = args.n
    elif args.subaction == "eliminate":
        block_length = args.prefix_len + _peek_block_length(args)
    else:
        block_length = _peek_block_length(args)
    sizes = _estimate_sizes(spec, block_length)
    print(
        "size estimate: " + ", ".join(f"{key}={value}" for key, value in sizes.items()),
        file=sys.stderr,
    )
    results["size_estimate"] = sizes

    if args.subaction == "build":
        p = _input_distribution(spec, args.p)
        code = build_random_codebook(p, avwc, args.n, args.tau, args.seed, args.delta)
        results["message_count"] = code.j_count
        results["randomizer_count"] = code.l_count
        results["block_length"] = code.n
        if args.out:
            with open(args.out, "w", encoding="utf-8") as handle:
                handle.write(serialize_code(code))
            results["code_file"] = os.path.basename(args.out)
        return results

    if args.subaction == "evaluate":
        code = _load_code(args)
        report = evaluate_code(
            code, avwc, mode=args.mode, seed=args.seed or 0, keep_table=bool(args.table)
        )
        results["worst_state_error"] = report.worst_state_error
        results["worst_error_sequence"] = list(report.worst_state_sequence.symbols)
        results["worst_leakage_bits"] = report.worst_leakage_bits
        results["worst_leakage_sequence"] = list(report.worst_leakage_sequence.symbols)
        if args.table:
            with open(args.table, "w", encoding="utf-8") as handle:
                handle.write("state_sequence,error,leakage_bits\n")
                for seq, err, leak in report.per_sequence:
                    symbols = "".join(str(s) for s in seq.symbols)
                    handle.write(f"{symbols},{err!r},{leak!r}\n")
            results["table_file"] = os.path.basename(args.table)
        return results

    if args.subaction == "robustify":
        code = _load_code(args)
        family = robustify(code, avwc)
        report = verify_robustification(code, avwc)
        results["family_size"] = family.member_count()
        results["gamma"] = report.gamma
        results["min_slack"] = report.min_slack
        results["bound_coefficient"] = report.bound_coefficient
        results["robustification_holds"] = report.passed
        return results

    if args.subaction == "reduce":
        code = _load_code(args)
        family = robustify(code, avwc)
        reduced = reduce_random_code(
            family, avwc, k_count=args.k, epsilon=args.epsilon, seed=args.seed or 0
        )
        ver = reduced.verification
        results["k_count"] = ver.k_count
        results["epsilon"] = ver.epsilon
        results["attempts"] = ver.attempts
        results["worst_mean_error"] = ver.worst_mean_error
        results["worst_mean_leakage"] = ver.worst_mean_leakage
        if args.out:
            with open(args.out, "w", encoding="utf-8") as handle:
                handle.write(serialize_random_code(reduced))
            results["code_file"] = os.path.basename(args.out)
        return results

    if args.subaction == "eliminate":
        if not args.reduced:
            raise SpecFormatError("'eliminate' needs --reduced with a random-code file")
        with open(args.reduced, "r", encoding="utf-8") as handle:
            reduced = parse_random_code(handle.read())
        outcome = eliminate_randomness(reduced, avwc, args.prefix_len)
        rep = outcome.report
        results["prefix_len"] = rep.prefix_len
        results["k_count"] = rep.k_count
        results["worst_total_error"] = rep.worst_total_error
        results["worst_prefix_error"] = rep.worst_prefix_error
        results["worst_mean_member_error"] = rep.worst_mean_member_error
        results["error_decomposition_margin"] = rep.error_decomposition_margin
        results["worst_payload_leakage_bits"] = rep.worst_payload_leakage
        results["worst_mean_member_leakage_bits"] = rep.worst_mean_member_leakage
        results["leakage_margin"] = rep.leakage_margin
        results["checks_pass"] = rep.passed
        if args.out:
            with open(args.out, "w", encoding="utf-8") as handle:
                handle.write(serialize_code(outcome.code))
            results["code_file"] = os.path.basename(args.out)
        return results

    if args.subaction == "verify-lemmas":
        p = _input_distribution(spec, args.p)
        tp = TypicalityParams(args.n, args.delta)
        channel_reports = []
        all_pass = True
        for label, family in (("main", avwc.main), ("eaves", avwc.eaves)):
            for state, channel in enumerate(family):
                rep = verify_typicality_bounds(p, channel, tp)
                channel_reports.append(
                    {
                        "family": label,
                        "state": spec.state_names[state],
                        "passed": rep.passed,
                        "input_margin": rep.input_margin,
                        "conditional_margin": rep.cond_margin,
                        "cardinality_margin": rep.alpha_margin,
                        "pointwise_margin": rep.beta_margin,
                    }
                )
                all_pass &= rep.passed
        results["typicality_checks"] = channel_reports
        code = _load_code(args, optional=True)
        if code is None:
            code = _default_probe_code(avwc, args.n, tp)
        rob = verify_robustification(code, avwc)
        results["robustification"] = {
            "gamma": rob.gamma,
            "min_slack": rob.min_slack,
            "holds": rob.passed,
        }
        if args.secrecy_events:
            events = check_secrecy_events(code, avwc, tp, p=p)
            results["secrecy_events"] = {
                "epsilon": events.epsilon,
                "all_hold": events.all_hold,
            }
        results["all_checks_pass"] = bool(all_pass and rob.passed)
        return results

    raise SpecFormatError(f"unknown code subaction {args.subaction!r}")


def _load_code(args, optional: bool = False):
    path = getattr(args, "code", None)
    if path is None:
        if optional:
            return None
        raise SpecFormatError("this subaction needs --code with a code file")
    with open(path, "r", encoding="utf-8") as handle:
        return parse_code(handle.read())


def _peek_block_length(args) -> int:
    """Block length of the staged input file, or the --n default when absent."""
    if getattr(args, "reduced", None):
        with open(args.reduced, "r", encoding="utf-8") as handle:
            return parse_random_code(handle.read()).members[0].n
    if getattr(args, "code", None):
        with open(args.code, "r", encoding="utf-8") as handle:
            return parse_code(handle.read()).n
    return args.n


def _default_probe_code(avwc, n: int, tp: TypicalityParams):
    """Tiny two-message probe code used when verify-lemmas gets no --code."""
    from dataclasses import replace

    from .coding import WiretapCode, decode_rule

    codewords = np.zeros((2, 1, n), dtype=int)
    codewords[1, 0, :] = min(1, avwc.input_size - 1)
    code = WiretapCode(
        n=n,
        input_size=avwc.input_size,
        output_size=avwc.main_output_size,
        codewords=codewords,
        decoder=np.full(avwc.main_output_size**n, -1),
    )
    return replace(code, decoder=decode_rule(code, avwc, tp))


def _render_text(report: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_render_text(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(_render_text(item, indent + 1))
                lines.append(pad + "  -")
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(line for line in lines if line)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avwc",
        description="Structure tests, secrecy bounds and coding pipeline for "
        "arbitrarily varying wiretap channels",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_structure = sub.add_parser("structure", help="symmetrisability and best-channel tests")
    p_structure.add_argument("spec")
    p_structure.add_argument("--tol", type=float, default=1e-8)
    p_structure.add_argument("--format", choices=("json", "text"), default="text")
    p_structure.set_defaults(handler=cmd_structure, seed=None)

    p_bounds = sub.add_parser("bounds", help="secrecy-capacity bounds")
    p_bounds.add_argument("spec")
    p_bounds.add_argument("--grid", type=int, default=None, help="simplex grid denominator")
    p_bounds.add_argument("--starts", type=int, default=None, help="ascent multi-start count")
    p_bounds.add_argument("--u-size", dest="u_size", type=int, default=None)
    p_bounds.add_argument("--n", type=int, default=0, help="also evaluate the n-letter bound")
    p_bounds.add_argument("--multi-u-size", dest="multi_u_size", type=int, default=None)
    p_bounds.add_argument("--seed", type=int, default=None)
    p_bounds.add_argument("--threads", type=int, default=None)
    p_bounds.add_argument("--format", choices=("json", "text"), default="text")
    p_bounds.set_defaults(handler=cmd_bounds)

    p_code = sub.add_parser("code", help="code construction pipeline")
    p_code.add_argument("spec")
    p_code.add_argument(
        "subaction",
        choices=("build", "evaluate", "robustify", "reduce", "eliminate", "verify-lemmas"),
    )
    p_code.add_argument("--n", type=int, default=4)
    p_code.add_argument("--tau", type=float, default=0.1)
    p_code.add_argument("--delta", type=float, default=0.2)
    p_code.add_argument("--seed", type=int, default=0)
    p_code.add_argument("--p", default=None, help="named input distribution from the spec file")
    p_code.add_argument("--code", default=None, help="code file produced by 'build'")
    p_code.add_argument("--reduced", default=None, help="random-code file produced by 'reduce'")
    p_code.add_argument("--out", default=None, help="write the resulting code here")
    p_code.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p_code.add_argument("--table", default=None, help="write per-sequence metrics as CSV")
    p_code.add_argument("--k", type=int, default=None, help="reduced family size")
    p_code.add_argument("--epsilon", type=float, default=0.25)
    p_code.add_argument("--prefix-len", dest="prefix_len", type=int, default=4)
    p_code.add_argument("--secrecy-events", dest="secrecy_events", action="store_true")
    p_code.add_argument("--format", choices=("json", "text"), default="text")
    p_code.set_defaults(handler=cmd_code)
    return parser


_EXIT_BY_ERROR = (
    (SpecFormatError, 2),
    (ResourceLimitError, 3),
    (NumericFailureError, 4),
    (ReductionFailureError, 4),
    (PrefixSearchFailureError, 4),
    (DegenerateRateError, 4),
)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        results = args.handler(args)
    except Exception as exc:  # noqa: BLE001 - exit-code mapping below
        for err_type, code in _EXIT_BY_ERROR:
            if isinstance(exc, err_type):
                print(f"error: {exc}", file=sys.stderr)
                return code
        if isinstance(exc, (ValueError, AvwcError, OSError)):
            print(f"error: {exc}", file=sys.stderr)
            return 4
        raise
    report = {
        "command": "avwc " + " ".join(argv),
        "input_sha256": _digest(args.spec),
        "seed": getattr(args, "seed", None),
        "results": results,
        "timing_seconds": round(time.perf_counter() - started, 6),
        "version": __version__,
    }
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(_render_text(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
