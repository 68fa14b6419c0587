"""Command-line front end.

Subcommands:

* ``validate``  - structural check of a proof document, one line per violation
* ``run``       - replay a move log against a cascade file, settle, print JSON
* ``simulate``  - run a preset or scenario file, print the payoff summary
* ``solve``     - perfect Bayesian equilibrium at one parameter point (JSON)
* ``sweep``     - CSV of solutions along one parameter axis
* ``verify-mc`` - closed forms against a Monte Carlo run, pass/fail at 3 SE

Exit status: 0 on success, 1 on domain errors (malformed documents, illegal
moves, degenerate parameters, a failed verification verdict), 2 on usage
errors including missing input files. Output goes to stdout and is meant for
machines first; identical invocations produce byte-identical bytes. The
``SPRIG_SEED`` environment variable supplies the default seed wherever a
``--seed`` flag is accepted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from .equilibrium import (
    SWEEP_COLUMNS,
    DegenerateParametersError,
    GameParameters,
    closed_form_row,
    monte_carlo_estimate,
    outcome_probabilities,
    solve_pbe,
    sweep,
)
from .formulas import ParseError, canonical_json
from .proofs import MachineProof, ProofChain, parse_proof_document, validate_chain
from .protocol import (
    EARLY_STOP,
    QUIESCENCE,
    ParameterCascade,
    ProtocolError,
    ProtocolInstance,
    replay,
)
from .scenarios import PRESET_NAMES, preset_scenario, scenario_from_json
from .simulator import run_scenario
from .verifier import UnscriptedVerdictError

USAGE_ERROR = 2
DOMAIN_ERROR = 1


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _read_text(path: str) -> str:
    """Read a UTF-8 input file; a missing path is a usage error."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(path)
    return p.read_text(encoding="utf-8")


def _env_seed() -> int | None:
    raw = os.environ.get("SPRIG_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"SPRIG_SEED must be an integer, got {raw!r}") from None


def _pick_seed(flag_value: int | None, fallback: int = 0) -> int:
    if flag_value is not None:
        return flag_value
    env = _env_seed()
    return fallback if env is None else env


# -- validate ----------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        text = _read_text(args.path)
    except FileNotFoundError:
        return _fail(f"no such file: {args.path}", USAGE_ERROR)
    try:
        doc = parse_proof_document(text)
    except ParseError as exc:
        return _fail(f"unparsable document: {exc}", DOMAIN_ERROR)
    if isinstance(doc, ProofChain):
        limit = args.level_limit if args.level_limit is not None else doc.height()
        try:
            report = validate_chain(doc.target, doc, level_limit=limit)
        except ValueError as exc:
            return _fail(str(exc), USAGE_ERROR)
        for violation in report.violations:
            print(violation)
        if report.ok:
            print("ok: chain has no violations")
            return 0
        n = len(report.violations)
        print(f"invalid: {n} violation{'s' if n != 1 else ''}")
        return DOMAIN_ERROR
    # Statements and machine proofs carry no import structure to cross-check;
    # parsing is the whole structural story. Whether a machine proof actually
    # derives its conclusion is the verifier's business, not this command's.
    label = "machine proof" if isinstance(doc, MachineProof) else "statement"
    print(f"ok: well-formed {label}")
    return 0


# -- run -----------------------------------------------------------------


class _LineCursor:
    """Iterator wrapper that remembers the number of the last line served."""

    def __init__(self, lines: Sequence[str]) -> None:
        self.lines = lines
        self.current = 0

    def __iter__(self) -> Iterator[str]:
        for number, line in enumerate(self.lines, start=1):
            self.current = number
            yield line


def _generous_funding(lines: Iterable[str], cascade: ParameterCascade) -> dict[str, int]:
    """Opening balances that cannot run dry during replay.

    Move logs record actions, not accounts, so the replayer grants each actor
    the worst-case deposit per move they attempt. Published deltas are
    unaffected: settlement moves tokens between accounts and the burn pile,
    never against the float.
    """
    per_move = max(
        max(lv.stake_up + lv.stake_down for lv in cascade.levels.values()),
        max(lv.bounty for lv in cascade.levels.values()),
        cascade.machine.bounty,
        cascade.machine.stake_up + cascade.machine.burn_cost,
    )
    funding: dict[str, int] = {}
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        record = json.loads(raw)
        actor = record["actor"]
        funding[actor] = funding.get(actor, 0) + per_move
    return funding


def _run_outcome(instance: ProtocolInstance, initial: dict[str, int]) -> dict[str, Any]:
    transfers = instance.settle()
    nodes = {}
    for node in instance.nodes.values():
        nodes[node.id] = {
            "determined_at": node.determination.to_json() if node.determination else None,
            "kind": node.kind,
            "level": node.level,
            "owner": node.owner,
            "status": node.status,
        }
    final = instance.ledger.balances
    accounts = sorted(set(initial) | set(final))
    return {
        "burned": instance.ledger.burned,
        "clock": instance.clock,
        "deltas": {a: final.get(a, 0) - initial.get(a, 0) for a in accounts},
        "nodes": nodes,
        "settlement": [
            {"account": t.account, "amount": t.amount, "node": t.node_id, "reason": t.reason}
            for t in transfers
        ],
    }


def cmd_run(args: argparse.Namespace) -> int:
    try:
        log_text = _read_text(args.movelog)
        cascade_text = _read_text(args.cascade)
    except FileNotFoundError as exc:
        return _fail(f"no such file: {exc.args[0]}", USAGE_ERROR)
    try:
        cascade = ParameterCascade.from_json(json.loads(cascade_text))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        return _fail(f"bad cascade file: {exc}", DOMAIN_ERROR)
    lines = log_text.splitlines()
    mode = EARLY_STOP if args.mode == "early-stop" else QUIESCENCE
    try:
        balances = _generous_funding(lines, cascade)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        return _fail(f"bad move log: {exc}", DOMAIN_ERROR)
    cursor = _LineCursor(lines)
    try:
        instance = replay(cursor, cascade, balances=balances, mode=mode)
    except (ProtocolError, ParseError, UnscriptedVerdictError) as exc:
        return _fail(f"illegal move at line {cursor.current}: {exc}", DOMAIN_ERROR)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        return _fail(f"unreadable move at line {cursor.current}: {exc}", DOMAIN_ERROR)
    instance.advance_clock(instance.max_deadline())
    print(canonical_json(_run_outcome(instance, balances)))
    return 0


# -- simulate ----------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.scenario in PRESET_NAMES:
        doc = preset_scenario(args.scenario)
    else:
        try:
            text = _read_text(args.scenario)
        except FileNotFoundError:
            known = ", ".join(PRESET_NAMES)
            return _fail(
                f"{args.scenario!r} is neither a preset ({known}) nor a file", USAGE_ERROR
            )
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            return _fail(f"scenario is not JSON: {exc}", DOMAIN_ERROR)
    seed = args.seed if args.seed is not None else _env_seed()
    if seed is not None:
        doc = {**doc, "seed": seed}
    try:
        config = scenario_from_json(doc)
    except (ParseError, KeyError, TypeError, ValueError) as exc:
        return _fail(f"bad scenario: {exc}", DOMAIN_ERROR)
    trace = run_scenario(config)
    if args.trace is not None:
        Path(args.trace).write_text("\n".join(trace.to_json_lines()) + "\n", encoding="utf-8")
    if args.csv is not None:
        Path(args.csv).write_text("\n".join(trace.metrics_csv()) + "\n", encoding="utf-8")
    print(canonical_json(trace.summary()))
    return 0


# -- equilibrium commands --------------------------------------------------


def _theta_from_flags(args: argparse.Namespace) -> GameParameters:
    return GameParameters(
        b0=args.b0,
        b1=args.b1,
        b2=args.b2,
        sigma1=args.sigma1,
        sigma2=args.sigma2,
        beta0=args.beta0,
        beta1=args.beta1,
    )


def cmd_solve(args: argparse.Namespace) -> int:
    theta = _theta_from_flags(args)
    try:
        sol = solve_pbe(theta)
    except DegenerateParametersError as exc:
        return _fail(f"degenerate parameters: {exc}", DOMAIN_ERROR)
    probs = outcome_probabilities(sol, theta)
    print(
        canonical_json(
            {
                "equilibrium": asdict(sol),
                "outcome_probabilities": asdict(probs),
                "parameters": asdict(theta),
            }
        )
    )
    return 0


def _grid(start: float, stop: float, steps: int) -> list[float]:
    if steps < 1:
        raise ValueError("--steps must be at least 1")
    if steps == 1:
        return [start]
    return [start + (stop - start) * i / (steps - 1) for i in range(steps)]


def cmd_sweep(args: argparse.Namespace) -> int:
    theta = _theta_from_flags(args)
    try:
        values = _grid(args.start, args.stop, args.steps)
        rows = sweep(theta, args.param, values)
    except ValueError as exc:
        return _fail(str(exc), USAGE_ERROR)
    out = [",".join(SWEEP_COLUMNS)]
    out.extend(",".join(row.to_csv()) for row in rows)
    print("\n".join(out))
    return 0


def cmd_verify_mc(args: argparse.Namespace) -> int:
    theta = _theta_from_flags(args)
    try:
        sol = solve_pbe(theta)
    except DegenerateParametersError as exc:
        return _fail(f"degenerate parameters: {exc}", DOMAIN_ERROR)
    probs = outcome_probabilities(sol, theta)
    seed = _pick_seed(args.seed)
    estimates = monte_carlo_estimate(theta, sol, n=args.n, seed=seed)
    rows: dict[str, Any] = {}
    all_ok = True
    for name in sorted(estimates):
        est = estimates[name]
        closed = closed_form_row(probs, name, sol)
        if closed is None and est.estimate is None:
            rows[name] = {"closed": None, "estimate": None, "ok": True, "se": None}
            continue
        if closed is None or est.estimate is None:
            rows[name] = {
                "closed": closed,
                "estimate": est.estimate,
                "ok": False,
                "se": est.se,
            }
            all_ok = False
            continue
        gap = abs(est.estimate - closed)
        ok = gap <= 3 * est.se if est.se > 0 else gap == 0.0
        rows[name] = {"closed": closed, "estimate": est.estimate, "ok": ok, "se": est.se}
        all_ok = all_ok and ok
    print(
        canonical_json(
            {
                "n": args.n,
                "parameters": asdict(theta),
                "rows": rows,
                "seed": seed,
                "verdict": "pass" if all_ok else "fail",
            }
        )
    )
    return 0 if all_ok else DOMAIN_ERROR


# -- parser wiring -----------------------------------------------------------


def _add_theta_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--b0", type=float, default=40.0, help="machine-level reward")
    parser.add_argument("--b1", type=float, default=40.0, help="mid-level reward")
    parser.add_argument("--b2", type=float, default=10.0, help="top-level reward")
    parser.add_argument("--sigma1", type=float, default=5.0, help="reply stake")
    parser.add_argument("--sigma2", type=float, default=5.0, help="entry stake")
    parser.add_argument("--beta0", type=float, default=5.0, help="second-challenge bounty")
    parser.add_argument("--beta1", type=float, default=5.0, help="first-challenge bounty")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sprig",
        description="Staked proof debates: validate, replay, simulate, solve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structurally check a proof document")
    p.add_argument("path", help="JSON proof document")
    p.add_argument(
        "--level-limit",
        type=int,
        default=None,
        help="maximum chain-subproof nesting (default: the document's own height)",
    )
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="replay a move log and settle the debate")
    p.add_argument("movelog", help="JSON-lines move log")
    p.add_argument("cascade", help="JSON parameter cascade")
    p.add_argument(
        "--mode",
        choices=["quiescence", "early-stop"],
        default="quiescence",
        help="when resolution may end the debate",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="run a preset or scenario file")
    p.add_argument("scenario", help=f"preset name ({', '.join(PRESET_NAMES)}) or JSON file")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--trace", default=None, metavar="PATH", help="write the JSON-lines trace here")
    p.add_argument("--csv", default=None, metavar="PATH", help="write the payoff CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("solve", help="equilibrium and outcome rates at one point")
    _add_theta_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="re-solve along one parameter axis, emit CSV")
    _add_theta_flags(p)
    p.add_argument("--param", required=True, help="parameter to vary (e.g. sigma2)")
    p.add_argument("--from", dest="start", type=float, required=True, help="first value")
    p.add_argument("--to", dest="stop", type=float, required=True, help="last value")
    p.add_argument("--steps", type=int, required=True, help="number of grid points")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-mc", help="check closed forms against simulation")
    _add_theta_flags(p)
    p.add_argument("--n", type=int, default=1_000_000, help="number of simulated games")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: SPRIG_SEED or 0)")
    p.set_defaults(func=cmd_verify_mc)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        return _fail(str(exc), USAGE_ERROR)


if __name__ == "__main__":
    sys.exit(main())
