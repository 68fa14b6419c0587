"""Independent re-derivations used to cross-check the package.

Everything here works from raw JSON or first principles and avoids the
library code paths under test: the tokenizer walks plain dicts, the status
evaluator is a direct recursive reading of the resolution rules rather than
an incremental fixpoint, and the equilibrium oracle runs on `Fraction` so
the frozen spot values in the tests carry no float noise.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from typing import Any, Iterator, Mapping

from sprig.formulas import Statement, atom, conj, disj, impl, neg
from sprig.proofs import ChainStep, InferenceStep, MachineProof, ProofChain
from sprig.protocol import ProtocolError, ProtocolInstance

# -- raw-JSON tokenizer (length measure oracle) ------------------------------

_CONNECTIVES = ("not", "and", "or", "imp")


def _canon(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def formula_tokens(doc: Mapping[str, Any]) -> Iterator[str]:
    (op, body), = doc.items()
    if op in ("atom", "sym"):
        yield body
    elif op == "not":
        yield op
        yield from formula_tokens(body)
    else:
        assert op in _CONNECTIVES, op
        yield op
        yield from formula_tokens(body[0])
        yield from formula_tokens(body[1])


def statement_tokens(doc: Mapping[str, Any]) -> Iterator[str]:
    for assumption in sorted(doc.get("assumptions", []), key=_canon):
        yield from formula_tokens(assumption)
    yield from formula_tokens(doc["conclusion"])


def chain_tokens(doc: Mapping[str, Any]) -> Iterator[str]:
    """Tokens the protocol charges for: definitions, step statements and
    import indices. The target and any nested subproofs stay off the bill."""
    definitions = doc.get("definitions", {})
    yield from definitions.get("imports", [])
    for name, formula in definitions.get("symbols", []):
        yield name
        yield from formula_tokens(formula)
    for step in doc["steps"]:
        yield from statement_tokens(step["statement"])
        for i in step.get("imports", []):
            yield str(i)


def machine_tokens(doc: Mapping[str, Any]) -> Iterator[str]:
    for step in doc["steps"]:
        yield from formula_tokens(step["formula"])
        yield step["rule"]
        for p in step.get("premises", []):
            yield str(p)


def token_count(doc: Mapping[str, Any]) -> int:
    kind = doc.get("kind", "statement")
    if kind == "chain":
        return sum(1 for _ in chain_tokens(doc))
    if kind == "machine_proof":
        return sum(1 for _ in machine_tokens(doc))
    return sum(1 for _ in statement_tokens(doc))


# -- truth tables and single-step proof search (kernel oracle) ---------------


def eval_formula(doc: Mapping[str, Any], valuation: Mapping[str, bool]) -> bool:
    """Classical truth value with `sym` leaves valued like atoms."""
    (op, body), = doc.items()
    if op in ("atom", "sym"):
        return valuation[body]
    if op == "not":
        return not eval_formula(body, valuation)
    if op == "and":
        return eval_formula(body[0], valuation) and eval_formula(body[1], valuation)
    if op == "or":
        return eval_formula(body[0], valuation) or eval_formula(body[1], valuation)
    if op == "imp":
        return (not eval_formula(body[0], valuation)) or eval_formula(body[1], valuation)
    raise AssertionError(op)


def single_step_proofs(statement: Statement) -> list[tuple[str, tuple[int, ...]]]:
    """Every one-step machine proof of the statement, by exhaustion.

    Premises can only be assumptions (there are no earlier steps), addressed
    by negative index into the canonical assumption order. Returns (rule,
    premises) pairs whose single step would verify.
    """
    assumptions = statement.sorted_assumptions()
    refs = {formula: -(i + 1) for i, formula in enumerate(assumptions)}
    goal = statement.conclusion
    found: list[tuple[str, tuple[int, ...]]] = []

    for formula, idx in refs.items():
        if formula == goal:
            found.append(("assumption", ()))
            break
    for a, ia in refs.items():
        if a.op == "and" and a.args[0] == goal:
            found.append(("and_elim_left", (ia,)))
        if a.op == "and" and a.args[1] == goal:
            found.append(("and_elim_right", (ia,)))
        if goal.op == "or" and a == goal.args[0]:
            found.append(("or_intro_left", (ia,)))
        if goal.op == "or" and a == goal.args[1]:
            found.append(("or_intro_right", (ia,)))
        if a.op == "not" and a.args[0].op == "not" and a.args[0].args[0] == goal:
            found.append(("double_neg_elim", (ia,)))
        for b, ib in refs.items():
            if goal.op == "and" and goal.args == (a, b):
                found.append(("and_intro", (ia, ib)))
            if a.op == "imp" and a.args[0] == b and a.args[1] == goal:
                found.append(("impl_elim", (ia, ib)))
            if b.op == "not" and b.args[0] == a:
                found.append(("neg_elim", (ia, ib)))
    return found


# -- declarative status evaluator (resolution oracle) -----------------------


def brute_force_statuses(
    instance: ProtocolInstance, now: int
) -> dict[str, tuple[str, tuple[int, int] | None]]:
    """Re-derive every node's status and determination time from scratch.

    Walks the debate tree top down, applying the resolution rules as written:
    no incremental bookkeeping, no event ordering, just the recursive
    definition evaluated at one instant. Determinations are (time, seq)
    pairs; pending nodes map to None.
    """
    cascade = instance.cascade
    out: dict[str, tuple[str, tuple[int, int] | None]] = {}

    def ts(node) -> tuple[int, int]:
        return (node.posted_at.time, node.posted_at.seq)

    def eval_claim(c) -> tuple[str, tuple[int, int] | None]:
        if c.level == 0:
            if c.posted_at.time > now:
                return ("pending", None)
            ok = c.verdict is not None and c.verdict.validated
            return ("validated" if ok else "invalidated", ts(c))
        deadline = c.posted_at.time + cascade.verification_time(c.level)
        results = [eval_question(q) for q in instance.questions_on(c.id)]
        unanswered = [det for status, det in results if status == "unanswered"]
        if unanswered:
            return ("invalidated", min(unanswered))
        if deadline <= now and all(status == "answered" for status, _ in results):
            dets = [det for _, det in results if det is not None]
            return ("validated", max(dets + [(deadline, 0)]))
        return ("pending", None)

    def eval_question(q) -> tuple[str, tuple[int, int] | None]:
        deadline = q.posted_at.time + cascade.response_time(q.level)
        answers = instance.answers_to(q.id)
        results = {a.id: eval_claim(a) for a in answers}
        validated = [
            (det, ts(a))
            for a in answers
            for status, det in [results[a.id]]
            if status == "validated"
        ]
        if validated:
            return ("answered", min(validated)[0])
        if deadline <= now and all(status == "invalidated" for status, _ in results.values()):
            dets = [det for _, det in results.values() if det is not None]
            return ("unanswered", max(dets + [(deadline, 0)]))
        return ("pending", None)

    for node in instance.nodes.values():
        if node.kind == "claim":
            result = eval_claim(node)
        else:
            result = eval_question(node)
        out[node.id] = result
    return out


def observed_statuses(
    instance: ProtocolInstance,
) -> dict[str, tuple[str, tuple[int, int] | None]]:
    """The package's own view, shaped like `brute_force_statuses` output."""
    out = {}
    for node in instance.nodes.values():
        det = None
        if node.determination is not None:
            det = (node.determination.time, node.determination.seq)
        out[node.id] = (node.status, det)
    return out


# -- random debate generator (fuzzing) ---------------------------------------


_FORMULA_POOL = [
    atom("x"), atom("y"), atom("z"),
    conj(atom("x"), atom("y")), disj(atom("y"), atom("z")),
    impl(atom("x"), atom("z")), neg(atom("z")),
]


def _tiny_statement(rng: random.Random, context: str = "fuzz") -> Statement:
    assumptions = frozenset(rng.sample(_FORMULA_POOL, rng.randint(1, 3)))
    if rng.random() < 0.7:
        conclusion = rng.choice(sorted(assumptions, key=lambda f: f.canonical()))
    else:
        conclusion = rng.choice(_FORMULA_POOL)
    return Statement(context=context, assumptions=assumptions, conclusion=conclusion)


def _random_chain(rng: random.Random, target: Statement) -> ProofChain:
    """A structurally valid chain for the target: every step keeps the
    target's assumption set (the occasional import adds the imported
    conclusion), and the last step restates the conclusion."""
    steps: list[ChainStep] = []
    for j in range(rng.randint(0, 2)):
        imports: tuple[int, ...] = ()
        assumptions = set(target.assumptions)
        if steps and rng.random() < 0.5:
            i = rng.randint(1, len(steps))
            imports = (i,)
            assumptions.add(steps[i - 1].statement.conclusion)
        steps.append(
            ChainStep(
                statement=Statement(
                    conclusion=rng.choice(_FORMULA_POOL),
                    assumptions=frozenset(assumptions),
                    context=target.context,
                ),
                imports=imports,
            )
        )
    steps.append(ChainStep(statement=target))
    return ProofChain(target=target, steps=tuple(steps))


def _identity_chain(statement: Statement) -> ProofChain:
    return ProofChain(target=statement, steps=(ChainStep(statement=statement),))


def _machine_answer(rng: random.Random, statement: Statement) -> MachineProof:
    """Sometimes a sound single step, sometimes junk the kernel will refuse."""
    sorted_assumptions = statement.sorted_assumptions()
    if statement.conclusion in sorted_assumptions and rng.random() < 0.8:
        index = sorted_assumptions.index(statement.conclusion) + 1
        step = InferenceStep(statement.conclusion, "assumption", (-index,))
    else:
        step = InferenceStep(statement.conclusion, "double_neg_elim", (-1,))
    return MachineProof(target=statement, steps=(step,))


def random_debate(
    seed: int,
    *,
    max_moves: int = 50,
    max_nodes: int = 8,
) -> tuple[ProtocolInstance, int]:
    """Drive a random legal-ish move sequence; returns (instance, horizon).

    Moves that the protocol rejects still advance the clock, mirroring a
    hostile environment. The returned horizon covers every window.
    """
    from sprig.protocol import (
        LevelParameters,
        MachineParameters,
        ParameterCascade,
        create_root_claim,
        create_root_question,
    )

    rng = random.Random(seed)
    root_level = rng.randint(1, 3)
    levels = {
        level: LevelParameters(
            max_length=400,
            stake_up=0 if level == root_level else rng.randint(1, 4),
            stake_down=rng.randint(1, 5),
            verification_time=rng.randint(2, 5),
            bounty=rng.randint(1, 4),
            response_time=rng.randint(2, 5),
        )
        for level in range(1, root_level + 1)
    }
    cascade = ParameterCascade(
        root_level=root_level,
        levels=levels,
        machine=MachineParameters(
            max_length=200,
            stake_up=rng.randint(1, 3),
            burn_cost=1,
            bounty=rng.randint(1, 3),
            response_time=rng.randint(2, 4),
        ),
    )
    actors = ["ava", "bo", "cy", "dot"]
    balances = {name: 150 for name in actors}
    target = _tiny_statement(rng)
    t = 0
    if rng.random() < 0.5:
        chain = _random_chain(rng, target)
        instance = create_root_claim("ava", target, chain, cascade, t, balances=balances)
    else:
        instance = create_root_question("ava", target, cascade, t, balances=balances)

    for _ in range(rng.randint(0, max_moves)):
        if len(instance.nodes) >= max_nodes:
            break
        t += rng.randint(0, 2)
        actor = rng.choice(actors)
        try:
            if rng.random() < 0.5:
                claims = [c for c in instance.claims() if c.proof.kind == "chain"]
                if not claims:
                    continue
                c = rng.choice(claims)
                step = rng.randint(1, max(1, len(c.proof.steps)))
                instance.post_question(actor, c.id, step, t)
            else:
                questions = instance.questions()
                if not questions:
                    continue
                q = rng.choice(questions)
                if q.level >= 1 and rng.random() < 0.6:
                    proof: ProofChain | MachineProof = (
                        _identity_chain(q.statement)
                        if rng.random() < 0.5
                        else _random_chain(rng, q.statement)
                    )
                else:
                    proof = _machine_answer(rng, q.statement)
                instance.post_answer_claim(actor, q.id, proof, t)
        except ProtocolError:
            pass
    horizon = instance.max_deadline()
    return instance, horizon


# -- structural mutations (validator fuzzing) ---------------------------------


def mutate_chain(doc: Mapping[str, Any], rng: random.Random) -> tuple[str, dict[str, Any]]:
    """One random structural mutation that provably breaks the chain.

    Every entry in the menu is chosen so that validation must report at
    least one violation afterwards: import indices get shifted out of range,
    conclusions are swapped or replaced with formulas that nothing imports,
    assumption sets are grown or shrunk away from the bookkeeping identity,
    and contexts are retargeted. Returns (mutation name, mutated copy).
    """
    out = json.loads(json.dumps(doc))
    steps = out["steps"]
    last = len(steps) - 1

    def conclusion_of(step: Mapping[str, Any]) -> str:
        return _canon(step["statement"]["conclusion"])

    menu: list[tuple[str, Any]] = []

    def self_import() -> None:
        j = rng.randrange(len(steps))
        steps[j].setdefault("imports", []).append(j + 1)

    menu.append(("self_import", self_import))

    imported = sorted({i for s in steps for i in s.get("imports", [])})
    fresh = {"atom": "mutant_conclusion"}

    def fresh_conclusion() -> None:
        victims = [i - 1 for i in imported] + [last]
        steps[rng.choice(victims)]["statement"]["conclusion"] = fresh

    if _canon(out["target"]["conclusion"]) != _canon(fresh):
        menu.append(("fresh_conclusion", fresh_conclusion))

    swappable = [j for j in range(last) if conclusion_of(steps[j]) != conclusion_of(steps[last])]

    def swap_final_conclusion() -> None:
        j = rng.choice(swappable)
        a, b = steps[j]["statement"], steps[last]["statement"]
        a["conclusion"], b["conclusion"] = b["conclusion"], a["conclusion"]

    if swappable:
        menu.append(("swap_final_conclusion", swap_final_conclusion))

    def foreign_context() -> None:
        steps[rng.randrange(len(steps))]["statement"]["context"] = "mutant_context"

    if out["target"].get("context", "") != "mutant_context":
        menu.append(("foreign_context", foreign_context))

    droppable = [j for j, s in enumerate(steps) if s["statement"].get("assumptions")]

    def drop_assumption() -> None:
        assumptions = steps[rng.choice(droppable)]["statement"]["assumptions"]
        assumptions.pop(rng.randrange(len(assumptions)))

    if droppable:
        menu.append(("drop_assumption", drop_assumption))

    extra = {"atom": "mutant_assumption"}

    def add_assumption() -> None:
        stmt = steps[rng.randrange(len(steps))]["statement"]
        stmt.setdefault("assumptions", []).append(extra)

    if all(
        _canon(extra) not in {_canon(f) for f in s["statement"].get("assumptions", [])}
        for s in steps
    ):
        menu.append(("add_assumption", add_assumption))

    name, apply = rng.choice(menu)
    apply()
    return name, out


# -- exact-rational equilibrium oracle ---------------------------------------


def exact_solution(
    b0: Fraction, b1: Fraction, b2: Fraction,
    sigma1: Fraction, sigma2: Fraction, beta0: Fraction, beta1: Fraction,
) -> dict[str, Fraction | int]:
    """Closed-form equilibrium in exact arithmetic.

    Derived from the two-challenge entry game by backward induction; the
    residual checks in `indifference_residuals` pin these formulas to the
    players' actual indifference conditions, so this function and the float
    solver cannot drift apart unnoticed.
    """
    pi1 = (sigma2 + sigma1 + beta1) / (sigma2 + sigma1 + beta1 + beta0)
    q1 = (b1 + sigma2 + beta1) / (b1 + sigma2 + beta1 + sigma1)
    gain = q1 * (b0 + beta1 + beta0) + (1 - q1) * (b1 + beta1)
    slope = (
        -q1 * (beta1 + beta0)
        - (1 - q1) * beta1
        - sigma2
        - (1 - pi1) * (sigma2 + beta1) / pi1
    )

    def reply_prob(pi_e: Fraction) -> Fraction:
        return pi_e * (1 - pi1) / (pi1 * (1 - pi_e))

    # Type 1: challenging is worthwhile even at the always-challenge threshold.
    pi_star = sigma2 / (gain + sigma2)
    pi_e = (1 + pi_star) / 2
    if sigma2 + pi_e * slope >= 0 and reply_prob(pi_e) <= 1:
        return {
            "eq_type": 1, "pi_star": pi_star, "pi_e": pi_e, "pi1_star": pi1,
            "p": reply_prob(pi_e), "q1": q1, "q2": Fraction(1),
        }

    # Type 2: the challenge value has an interior root.
    if slope == 0:
        pi_e = Fraction(1, 2)
    else:
        pi_e = sigma2 / (-slope)
    pi_star = 2 * pi_e - 1
    if pi_star > 0 and reply_prob(pi_e) <= 1:
        q2 = b2 / (b2 - pi_star * gain + (1 - pi_star) * sigma2)
        if 0 < q2 <= 1:
            return {
                "eq_type": 2, "pi_star": pi_star, "pi_e": pi_e, "pi1_star": pi1,
                "p": reply_prob(pi_e), "q1": q1, "q2": q2,
            }

    # Type 3: never challenge, everyone enters. When the indifference
    # posterior sits at or below the uninformed prior 1/2, no bluff rate can
    # drag the reply posterior down to it; the subgame lands on the corner
    # where replies are free (never re-challenged) and therefore certain.
    pi_e = Fraction(1, 2)
    if pi1 <= Fraction(1, 2):
        return {
            "eq_type": 3, "pi_star": Fraction(0), "pi_e": pi_e, "pi1_star": pi1,
            "p": Fraction(1), "q1": Fraction(0), "q2": Fraction(0),
        }
    return {
        "eq_type": 3, "pi_star": Fraction(0), "pi_e": pi_e, "pi1_star": pi1,
        "p": reply_prob(pi_e), "q1": q1, "q2": Fraction(0),
    }


def indifference_residuals(
    b0: Fraction, b1: Fraction, b2: Fraction,
    sigma1: Fraction, sigma2: Fraction, beta0: Fraction, beta1: Fraction,
    sol: Mapping[str, Fraction | int],
) -> dict[str, Fraction]:
    """Exact residuals of the equilibrium's defining equations.

    All should be zero (where the regime makes them binding):

    * reply: a bluffing claimer is indifferent between folding (-sigma2) and
      replying, which wins (b1 + beta1) when the skeptic concedes and loses
      the reply stake on top otherwise.
    * posterior: the skeptic's second-challenge indifference holds at belief
      pi1_star, weighing the bounty spent against the stakes collected.
    * bayes: the entry signal plus bluffing rate reproduce that posterior.
    * entry (type 2): a marginal claimer at the entry threshold is
      indifferent between staying out and posting.
    """
    pi1 = Fraction(sol["pi1_star"])
    q1 = Fraction(sol["q1"])
    q2 = Fraction(sol["q2"])
    p = Fraction(sol["p"])
    pi_star = Fraction(sol["pi_star"])
    pi_e = Fraction(sol["pi_e"])

    residuals: dict[str, Fraction] = {}
    reply_value = (1 - q1) * (b1 + beta1) - q1 * (sigma2 + sigma1)
    residuals["reply"] = reply_value - (-sigma2)
    challenge_win = (1 - pi1) * (sigma2 + sigma1 + beta1)
    challenge_loss = pi1 * beta0
    residuals["posterior"] = challenge_win - challenge_loss
    if pi_e < 1:
        residuals["bayes"] = pi_e - pi1 * (pi_e + (1 - pi_e) * p)
    else:
        residuals["bayes"] = Fraction(0)
    if sol["eq_type"] == 2 and 0 < q2 < 1:
        gain = q1 * (b0 + beta1 + beta0) + (1 - q1) * (b1 + beta1)
        entry_value = q2 * (pi_star * gain - (1 - pi_star) * sigma2) + (1 - q2) * b2
        residuals["entry"] = entry_value
    else:
        residuals["entry"] = Fraction(0)
    return residuals
