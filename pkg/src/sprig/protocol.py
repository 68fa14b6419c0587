"""The debate protocol: staked claims, bounty-carrying questions, resolution.

A claim at level ``l >= 1`` posts a proof chain and locks an upward and a
downward stake. Anyone may dispute one of its steps with a question, locking a
bounty; a question is met by answer claims one level down (or directly at the
machine level). Machine claims burn a fixed execution cost and are judged
instantly by the verifier backend. Statuses propagate: a question is answered
as soon as one of its claims validates, a claim dies as soon as one of its
questions times out unanswered, and surviving nodes are confirmed when their
windows close. Settlement then routes every escrowed token: stakes of dead
claims pay the defeating side, bounties of answered questions pay the earliest
validated answer, and anything still held by pending nodes (possible only when
the game stops early at the root's determination) is refunded.

Time is integer ticks; within a tick, moves are ordered by a per-instance
sequence number, so the full order of play is the pair (time, seq). Windows
are strict: a node posted at time T with window W accepts challenges or
answers at times t with t < T + W. An attempted move at time t advances the
clock to t even when the move itself is rejected.

All money is integer tokens; balances plus escrow plus burned is constant
after every operation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Union

from .formulas import Statement, canonical_json, content_hash
from .proofs import (
    UNIT_MEASURE,
    LengthMeasure,
    MachineProof,
    ProofChain,
    measure_length,
    validate_chain,
)
from .verifier import ToyVerifier, Verdict, VerifierBackend

__all__ = [
    "PENDING",
    "VALIDATED",
    "INVALIDATED",
    "ANSWERED",
    "UNANSWERED",
    "QUIESCENCE",
    "EARLY_STOP",
    "ProtocolError",
    "Timestamp",
    "LevelParameters",
    "MachineParameters",
    "ParameterCascade",
    "ClaimNode",
    "QuestionNode",
    "Ledger",
    "MoveRecord",
    "SettlementTransfer",
    "ProtocolInstance",
    "create_root_claim",
    "create_root_question",
    "post_question",
    "post_answer_claim",
    "advance_clock",
    "resolve",
    "settle",
    "replay",
]

PENDING = "pending"
VALIDATED = "validated"
INVALIDATED = "invalidated"
ANSWERED = "answered"
UNANSWERED = "unanswered"

QUIESCENCE = "quiescence"
EARLY_STOP = "early-stop"


class ProtocolError(Exception):
    """An operation violated the protocol rules."""


@dataclass(frozen=True, order=True)
class Timestamp:
    time: int
    seq: int = 0

    def __str__(self) -> str:
        return f"{self.time}.{self.seq}"

    def to_json(self) -> list[int]:
        return [self.time, self.seq]


def _as_time(t: Union[int, "Timestamp"]) -> int:
    return t.time if isinstance(t, Timestamp) else int(t)


def _length_json(v: int | Fraction) -> Any:
    if isinstance(v, Fraction) and v.denominator != 1:
        return [v.numerator, v.denominator]
    return int(v)


def _length_from_json(v: Any) -> int | Fraction:
    if isinstance(v, list):
        return Fraction(v[0], v[1])
    return int(v)


@dataclass(frozen=True)
class LevelParameters:
    """Knobs for one debate level: proof budget, stakes, windows, bounty."""

    max_length: int | Fraction
    stake_up: int
    stake_down: int
    verification_time: int
    bounty: int
    response_time: int

    def __post_init__(self) -> None:
        if self.max_length <= 0:
            raise ValueError("max_length must be positive")
        for name in ("stake_up", "stake_down", "bounty"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer")
        for name in ("verification_time", "response_time"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise ValueError(f"{name} must be a positive integer")

    def to_json(self) -> Any:
        return {
            "bounty": self.bounty,
            "max_length": _length_json(self.max_length),
            "response_time": self.response_time,
            "stake_down": self.stake_down,
            "stake_up": self.stake_up,
            "verification_time": self.verification_time,
        }


@dataclass(frozen=True)
class MachineParameters:
    """Bottom-level knobs: posting a machine proof burns `burn_cost`."""

    max_length: int | Fraction
    stake_up: int
    burn_cost: int
    bounty: int
    response_time: int

    def __post_init__(self) -> None:
        if self.max_length <= 0:
            raise ValueError("max_length must be positive")
        for name in ("stake_up", "burn_cost", "bounty"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer")
        if not isinstance(self.response_time, int) or self.response_time <= 0:
            raise ValueError("response_time must be a positive integer")

    def to_json(self) -> Any:
        return {
            "bounty": self.bounty,
            "burn_cost": self.burn_cost,
            "max_length": _length_json(self.max_length),
            "response_time": self.response_time,
            "stake_up": self.stake_up,
        }


@dataclass(frozen=True)
class ParameterCascade:
    """Per-level parameters for levels root_level..1 plus the machine level."""

    root_level: int
    levels: Mapping[int, LevelParameters]
    machine: MachineParameters

    def __post_init__(self) -> None:
        if self.root_level < 1:
            raise ValueError("root_level must be at least 1")
        expected = set(range(1, self.root_level + 1))
        if set(self.levels) != expected:
            raise ValueError(f"levels must cover exactly {sorted(expected)}")
        object.__setattr__(self, "levels", dict(self.levels))

    def max_length(self, level: int) -> int | Fraction:
        return self.levels[level].max_length if level >= 1 else self.machine.max_length

    def bounty(self, level: int) -> int:
        return self.levels[level].bounty if level >= 1 else self.machine.bounty

    def response_time(self, level: int) -> int:
        return self.levels[level].response_time if level >= 1 else self.machine.response_time

    def verification_time(self, level: int) -> int:
        return self.levels[level].verification_time

    def to_json(self) -> Any:
        return {
            "levels": {str(k): v.to_json() for k, v in sorted(self.levels.items())},
            "machine": self.machine.to_json(),
            "root_level": self.root_level,
        }

    @staticmethod
    def from_json(doc: Any) -> "ParameterCascade":
        levels = {
            int(k): LevelParameters(
                max_length=_length_from_json(v["max_length"]),
                stake_up=v["stake_up"],
                stake_down=v["stake_down"],
                verification_time=v["verification_time"],
                bounty=v["bounty"],
                response_time=v["response_time"],
            )
            for k, v in doc["levels"].items()
        }
        m = doc["machine"]
        machine = MachineParameters(
            max_length=_length_from_json(m["max_length"]),
            stake_up=m["stake_up"],
            burn_cost=m["burn_cost"],
            bounty=m["bounty"],
            response_time=m["response_time"],
        )
        return ParameterCascade(root_level=doc["root_level"], levels=levels, machine=machine)


@dataclass
class ClaimNode:
    id: str
    owner: str
    level: int
    statement: Statement
    proof: ProofChain | MachineProof
    posted_at: Timestamp
    escrow: int
    origin: str | None = None
    status: str = PENDING
    determination: Timestamp | None = None
    verdict: Verdict | None = None

    kind = "claim"

    @property
    def step_count(self) -> int:
        return len(self.proof.steps) if isinstance(self.proof, ProofChain) else 0


@dataclass
class QuestionNode:
    id: str
    owner: str
    level: int
    statement: Statement
    posted_at: Timestamp
    escrow: int
    origin: str | None = None
    step_index: int | None = None
    status: str = PENDING
    determination: Timestamp | None = None

    kind = "question"


Node = Union[ClaimNode, QuestionNode]


class Ledger:
    """Integer token accounts plus per-node escrow and a burn counter."""

    def __init__(self, balances: Mapping[str, int] | None = None) -> None:
        self.balances: dict[str, int] = dict(balances or {})
        for account, amount in self.balances.items():
            if amount < 0:
                raise ValueError(f"negative opening balance for {account!r}")
        self.escrowed: dict[str, int] = {}
        self.burned: int = 0

    def balance(self, account: str) -> int:
        return self.balances.get(account, 0)

    def lock(self, account: str, node_id: str, amount: int) -> None:
        if amount < 0:
            raise ValueError("cannot lock a negative amount")
        if self.balance(account) < amount:
            raise ProtocolError(
                f"insufficient funds: {account!r} has {self.balance(account)}, needs {amount}"
            )
        self.balances[account] = self.balance(account) - amount
        self.escrowed[node_id] = self.escrowed.get(node_id, 0) + amount

    def burn_from_escrow(self, node_id: str, amount: int) -> None:
        if amount > self.escrowed.get(node_id, 0):
            raise ValueError("burn exceeds escrow")
        self._draw(node_id, amount)
        self.burned += amount

    def pay_from_escrow(self, node_id: str, account: str, amount: int) -> None:
        if amount > self.escrowed.get(node_id, 0):
            raise ValueError("payout exceeds escrow")
        self._draw(node_id, amount)
        self.balances[account] = self.balance(account) + amount

    def release(self, node_id: str, account: str) -> int:
        amount = self.escrowed.get(node_id, 0)
        if amount:
            self.pay_from_escrow(node_id, account, amount)
        return amount

    def _draw(self, node_id: str, amount: int) -> None:
        held = self.escrowed.get(node_id, 0) - amount
        if held:
            self.escrowed[node_id] = held
        else:
            self.escrowed.pop(node_id, None)

    def total(self) -> int:
        return sum(self.balances.values()) + sum(self.escrowed.values()) + self.burned

    def to_json(self) -> Any:
        return {
            "balances": dict(sorted(self.balances.items())),
            "burned": self.burned,
            "escrowed": dict(sorted(self.escrowed.items())),
        }


@dataclass(frozen=True)
class MoveRecord:
    seq: int
    time: int
    actor: str
    kind: str
    payload_hash: str
    payload: Any

    def to_json(self) -> Any:
        return {
            "actor": self.actor,
            "kind": self.kind,
            "payload": self.payload,
            "payload_hash": self.payload_hash,
            "seq": self.seq,
            "time": self.time,
        }


@dataclass(frozen=True)
class SettlementTransfer:
    node_id: str
    account: str
    amount: int
    reason: str


class ProtocolInstance:
    """One debate: a root node, the tree beneath it, a ledger and a clock.

    Build instances through `create_root_claim` / `create_root_question`.
    """

    def __init__(
        self,
        cascade: ParameterCascade,
        *,
        balances: Mapping[str, int] | None = None,
        mode: str = QUIESCENCE,
        verifier: VerifierBackend | None = None,
        measure: LengthMeasure = UNIT_MEASURE,
    ) -> None:
        if mode not in (QUIESCENCE, EARLY_STOP):
            raise ValueError(f"unknown mode {mode!r}")
        self.cascade = cascade
        self.mode = mode
        self.verifier: VerifierBackend = verifier if verifier is not None else ToyVerifier()
        self.measure = measure
        self.ledger = Ledger(balances)
        self.nodes: dict[str, Node] = {}
        self.root_id: str | None = None
        self.clock: int = 0
        self.moves: list[MoveRecord] = []
        self.settled = False
        self.stopped_at: Timestamp | None = None
        self._questions_on: dict[str, list[str]] = {}
        self._answers_to: dict[str, list[str]] = {}
        self._next_seq = 1

    # -- reading ----------------------------------------------------------

    def claim(self, node_id: str) -> ClaimNode:
        node = self.nodes.get(node_id)
        if not isinstance(node, ClaimNode):
            raise ProtocolError(f"no such claim {node_id!r}")
        return node

    def question(self, node_id: str) -> QuestionNode:
        node = self.nodes.get(node_id)
        if not isinstance(node, QuestionNode):
            raise ProtocolError(f"no such question {node_id!r}")
        return node

    def questions_on(self, claim_id: str) -> list[QuestionNode]:
        return [self.question(q) for q in self._questions_on.get(claim_id, [])]

    def answers_to(self, question_id: str) -> list[ClaimNode]:
        return [self.claim(c) for c in self._answers_to.get(question_id, [])]

    def claims(self) -> list[ClaimNode]:
        return [n for n in self.nodes.values() if isinstance(n, ClaimNode)]

    def questions(self) -> list[QuestionNode]:
        return [n for n in self.nodes.values() if isinstance(n, QuestionNode)]

    def question_deadline(self, q: QuestionNode) -> int:
        return q.posted_at.time + self.cascade.response_time(q.level)

    def claim_deadline(self, c: ClaimNode) -> int:
        if c.level == 0:
            return c.posted_at.time
        return c.posted_at.time + self.cascade.verification_time(c.level)

    def max_deadline(self) -> int:
        horizon = self.clock
        for node in self.nodes.values():
            if isinstance(node, ClaimNode):
                horizon = max(horizon, self.claim_deadline(node))
            else:
                horizon = max(horizon, self.question_deadline(node))
        return horizon

    # -- move plumbing ----------------------------------------------------

    def _begin_move(self, t: Union[int, Timestamp]) -> int:
        time = _as_time(t)
        if self.settled:
            raise ProtocolError("instance already settled")
        if time < self.clock:
            raise ProtocolError(f"time moving backwards: move at {time}, clock at {self.clock}")
        self.clock = time
        self.resolve()
        if self.stopped_at is not None and Timestamp(time, self._next_seq) > self.stopped_at:
            raise ProtocolError(f"interaction ended at {self.stopped_at}")
        return time

    def _commit_move(self, time: int, actor: str, kind: str, payload: Any) -> Timestamp:
        stamp = Timestamp(time, self._next_seq)
        self._next_seq += 1
        self.moves.append(
            MoveRecord(
                seq=stamp.seq,
                time=time,
                actor=actor,
                kind=kind,
                payload_hash=content_hash(payload),
                payload=payload,
            )
        )
        return stamp

    # -- posting ----------------------------------------------------------

    def _post_root_claim(self, owner: str, statement: Statement, chain: ProofChain, t) -> str:
        time = self._begin_move(t)
        top = self.cascade.root_level
        params = self.cascade.levels[top]
        if params.stake_up != 0:
            raise ProtocolError("root claim requires a zero upward stake at the top level")
        posted = chain.stripped()
        self._check_chain_answer(statement, posted, top, ambient=frozenset())
        node_id = f"c{self._next_seq}"
        self.ledger.lock(owner, node_id, params.stake_down)
        stamp = self._commit_move(time, owner, "root_claim", {"chain": posted.to_json()})
        node = ClaimNode(
            id=node_id,
            owner=owner,
            level=top,
            statement=statement,
            proof=posted,
            posted_at=stamp,
            escrow=params.stake_down,
        )
        self.nodes[node_id] = node
        self.root_id = node_id
        self._questions_on[node_id] = []
        self.resolve()
        return node_id

    def _post_root_question(self, owner: str, statement: Statement, t) -> str:
        time = self._begin_move(t)
        top = self.cascade.root_level
        bounty = self.cascade.bounty(top)
        node_id = f"q{self._next_seq}"
        self.ledger.lock(owner, node_id, bounty)
        stamp = self._commit_move(time, owner, "root_question", {"statement": statement.to_json()})
        node = QuestionNode(
            id=node_id,
            owner=owner,
            level=top,
            statement=statement,
            posted_at=stamp,
            escrow=bounty,
        )
        self.nodes[node_id] = node
        self.root_id = node_id
        self._answers_to[node_id] = []
        self.resolve()
        return node_id

    def post_question(self, owner: str, origin: str, step_index: int, t) -> str:
        """Dispute step `step_index` (1-based) of the claim `origin`."""
        time = self._begin_move(t)
        claim = self.claim(origin)
        if claim.level < 1 or not isinstance(claim.proof, ProofChain):
            raise ProtocolError("machine claims cannot be questioned")
        if not 1 <= step_index <= len(claim.proof.steps):
            raise ProtocolError(
                f"no such step {step_index} in claim {origin!r} "
                f"(has {len(claim.proof.steps)})"
            )
        if time >= self.claim_deadline(claim):
            raise ProtocolError(
                f"window closed: claim {origin!r} accepted questions before "
                f"{self.claim_deadline(claim)}"
            )
        level = claim.level - 1
        node_id = f"q{self._next_seq}"
        self.ledger.lock(owner, node_id, self.cascade.bounty(level))
        stamp = self._commit_move(time, owner, "question", {"origin": origin, "step": step_index})
        node = QuestionNode(
            id=node_id,
            owner=owner,
            level=level,
            statement=claim.proof.steps[step_index - 1].statement,
            posted_at=stamp,
            escrow=self.cascade.bounty(level),
            origin=origin,
            step_index=step_index,
        )
        self.nodes[node_id] = node
        self._questions_on[origin].append(node_id)
        self._answers_to[node_id] = []
        self.resolve()
        return node_id

    def post_answer_claim(
        self, owner: str, origin: str, proof: ProofChain | MachineProof, t
    ) -> str:
        """Answer the question `origin` with a chain at its level or a machine proof."""
        time = self._begin_move(t)
        q = self.question(origin)
        if time >= self.question_deadline(q):
            raise ProtocolError(
                f"window closed: question {origin!r} accepted answers before "
                f"{self.question_deadline(q)}"
            )
        node_id = f"c{self._next_seq}"
        verdict: Verdict | None = None
        if isinstance(proof, ProofChain):
            if q.level < 1:
                raise ProtocolError("level-0 questions take machine proofs only")
            level = q.level
            posted: ProofChain | MachineProof = proof.stripped()
            self._check_chain_answer(q.statement, posted, level, ambient=self._ambient(q))
            params = self.cascade.levels[level]
            deposit = params.stake_up + params.stake_down
        else:
            level = 0
            posted = proof
            if proof.target != q.statement:
                raise ProtocolError("structural violation: proof targets a different statement")
            used = measure_length(posted, self.measure)
            if used > self.cascade.machine.max_length:
                raise ProtocolError(
                    f"length over budget: {used} > {self.cascade.machine.max_length}"
                )
            deposit = self.cascade.machine.stake_up + self.cascade.machine.burn_cost
            verdict = self.verifier.verdict(q.statement, posted, node_id)
        self.ledger.lock(owner, node_id, deposit)
        stamp = self._commit_move(
            time, owner, "answer_claim", {"origin": origin, "proof": posted.to_json()}
        )
        node = ClaimNode(
            id=node_id,
            owner=owner,
            level=level,
            statement=q.statement,
            proof=posted,
            posted_at=stamp,
            escrow=deposit,
            origin=origin,
            verdict=verdict,
        )
        if level == 0:
            self.ledger.burn_from_escrow(node_id, self.cascade.machine.burn_cost)
        self.nodes[node_id] = node
        self._answers_to[origin].append(node_id)
        if level >= 1:
            self._questions_on[node_id] = []
        self.resolve()
        return node_id

    def _ambient(self, q: QuestionNode) -> frozenset[str]:
        """Symbols already declared by the chains enclosing this question."""
        names: set[str] = set()
        node: Node | None = q
        while node is not None and node.origin is not None:
            parent = self.nodes[node.origin]
            if isinstance(parent, ClaimNode) and isinstance(parent.proof, ProofChain):
                names |= parent.proof.definitions.names()
            node = parent
        return frozenset(names)

    def _check_chain_answer(
        self, statement: Statement, chain: ProofChain, level: int, ambient: frozenset[str]
    ) -> None:
        if chain.target != statement:
            raise ProtocolError("structural violation: chain targets a different statement")
        report = validate_chain(statement, chain, level_limit=level, ambient=ambient)
        if not report.ok:
            raise ProtocolError(f"structural violation: {report}")
        used = measure_length(chain, self.measure)
        if used > self.cascade.max_length(level):
            raise ProtocolError(
                f"length over budget: {used} > {self.cascade.max_length(level)}"
            )

    # -- clock and resolution ---------------------------------------------

    def advance_clock(self, to: Union[int, Timestamp]) -> list[tuple[str, str, Timestamp]]:
        time = _as_time(to)
        if time < self.clock:
            raise ProtocolError(f"time moving backwards: clock at {self.clock}, asked for {time}")
        self.clock = time
        return self.resolve()

    def resolve(self, now: Union[int, Timestamp, None] = None) -> list[tuple[str, str, Timestamp]]:
        """Propagate statuses as of `now` (defaults to the clock). Idempotent:
        a node determined once never changes, later calls only add."""
        now_time = self.clock if now is None else _as_time(now)
        if self.stopped_at is not None:
            now_time = min(now_time, self.stopped_at.time)
        assignments = self._fixpoint(now_time)
        if self.mode == EARLY_STOP and self.stopped_at is None and self.root_id is not None:
            root_det = next((det for nid, _, det in assignments if nid == self.root_id), None)
            if root_det is not None:
                if root_det.time < now_time:
                    assignments = self._fixpoint(root_det.time)
                self.stopped_at = root_det
        changed = []
        for node_id, status, det in assignments:
            node = self.nodes[node_id]
            node.status = status
            node.determination = det
            changed.append((node_id, status, det))
        return changed

    def _fixpoint(self, now_time: int) -> list[tuple[str, str, Timestamp]]:
        """New determinations visible at `now_time`, without committing them.

        Candidates are locked in by determination order, earliest batch
        first, so the "first" in "first unanswered question defeats the
        claim" and "first validated answer wins" means first in debate time.
        A plain scan can get this wrong: it may see a sibling's later
        determination before a chain of pending nodes collapses to an
        earlier one, and statuses never change once set.
        """
        status: dict[str, tuple[str, Timestamp | None]] = {
            n.id: (n.status, n.determination) for n in self.nodes.values() if n.status != PENDING
        }
        fresh: dict[str, tuple[str, Timestamp]] = {}

        def current(node_id: str) -> tuple[str, Timestamp | None]:
            return status.get(node_id, (PENDING, None))

        nodes = sorted(self.nodes.values(), key=lambda n: n.posted_at)
        while True:
            candidates: list[tuple[Timestamp, Timestamp, str, str]] = []
            for node in nodes:
                if current(node.id)[0] != PENDING:
                    continue
                decided = self._decide(node, now_time, current)
                if decided is not None:
                    candidates.append((decided[1], node.posted_at, node.id, decided[0]))
            if not candidates:
                break
            earliest = min(det for det, _, _, _ in candidates)
            for det, _, node_id, st in candidates:
                if det == earliest:
                    status[node_id] = (st, det)
                    fresh[node_id] = (st, det)

        ordered = sorted(fresh.items(), key=lambda kv: (kv[1][1], self.nodes[kv[0]].posted_at))
        return [(nid, st, det) for nid, (st, det) in ordered]

    def _decide(self, node: Node, now_time: int, current) -> tuple[str, Timestamp] | None:
        if isinstance(node, ClaimNode):
            if node.level == 0:
                if node.posted_at.time <= now_time:
                    ok = node.verdict is not None and node.verdict.validated
                    return (VALIDATED if ok else INVALIDATED, node.posted_at)
                return None
            states = [current(q) for q in self._questions_on.get(node.id, [])]
            dead = [det for st, det in states if st == UNANSWERED]
            if dead:
                return (INVALIDATED, min(dead))  # type: ignore[type-var]
            deadline = Timestamp(self.claim_deadline(node), 0)
            if deadline.time <= now_time and all(st == ANSWERED for st, _ in states):
                dets = [det for _, det in states if det is not None] + [deadline]
                return (VALIDATED, max(dets))
            return None
        answers = self._answers_to.get(node.id, [])
        winners = [
            (det, self.nodes[c].posted_at)
            for c in answers
            for st, det in [current(c)]
            if st == VALIDATED
        ]
        if winners:
            return (ANSWERED, min(winners)[0])  # type: ignore[index]
        deadline = Timestamp(self.question_deadline(node), 0)
        states = [current(c) for c in answers]
        if deadline.time <= now_time and all(st == INVALIDATED for st, _ in states):
            dets = [det for _, det in states if det is not None] + [deadline]
            return (UNANSWERED, max(dets))
        return None

    # -- settlement ---------------------------------------------------------

    def settle(self) -> list[SettlementTransfer]:
        """Route every escrowed token. Requires final statuses: in quiescence
        mode all windows closed and all nodes determined, in early-stop mode a
        determined root."""
        if self.settled:
            raise ProtocolError("instance already settled")
        self.resolve()
        if self.mode == EARLY_STOP:
            if self.stopped_at is None:
                raise ProtocolError("unresolved nodes: root not yet determined")
        else:
            still_open = [
                n.id
                for n in self.nodes.values()
                if (
                    self.claim_deadline(n)
                    if isinstance(n, ClaimNode)
                    else self.question_deadline(n)
                )
                > self.clock
            ]
            if still_open:
                raise ProtocolError(f"windows still open for {sorted(still_open)}")
            unresolved = [n.id for n in self.nodes.values() if n.status == PENDING]
            if unresolved:
                raise ProtocolError(f"unresolved nodes: {sorted(unresolved)}")

        transfers: list[SettlementTransfer] = []

        def pay(node_id: str, account: str, amount: int, reason: str) -> None:
            if amount > 0:
                self.ledger.pay_from_escrow(node_id, account, amount)
                transfers.append(SettlementTransfer(node_id, account, amount, reason))

        for node in sorted(self.nodes.values(), key=lambda n: n.posted_at):
            held = self.ledger.escrowed.get(node.id, 0)
            if node.status == PENDING:
                pay(node.id, node.owner, held, "escrow refunded")
            elif isinstance(node, ClaimNode):
                if node.status == VALIDATED:
                    pay(node.id, node.owner, held, "stake returned")
                elif node.level == 0:
                    assert node.origin is not None
                    pay(node.id, self.question(node.origin).owner, held,
                        "stake forfeited to questioner")
                else:
                    stake_up = self.cascade.levels[node.level].stake_up
                    if node.origin is not None:
                        pay(node.id, self.question(node.origin).owner, stake_up,
                            "stake forfeited to questioner")
                    else:
                        pay(node.id, node.owner, stake_up, "stake returned")
                    defeater = self._earliest_unanswered(node)
                    pay(node.id, defeater.owner, held - stake_up,
                        "stake paid to defeating question")
            else:
                if node.status == ANSWERED:
                    winner = self._earliest_validated(node)
                    pay(node.id, winner.owner, held, "bounty paid to answer")
                else:
                    pay(node.id, node.owner, held, "bounty reimbursed")

        self.settled = True
        if self.ledger.escrowed:
            raise AssertionError(f"escrow left after settlement: {self.ledger.escrowed}")
        return transfers

    def _earliest_unanswered(self, claim: ClaimNode) -> QuestionNode:
        candidates = [q for q in self.questions_on(claim.id) if q.status == UNANSWERED]
        return min(candidates, key=lambda q: (q.determination, q.posted_at))

    def _earliest_validated(self, q: QuestionNode) -> ClaimNode:
        candidates = [c for c in self.answers_to(q.id) if c.status == VALIDATED]
        return min(candidates, key=lambda c: (c.determination, c.posted_at))

    # -- serialization ------------------------------------------------------

    def snapshot(self) -> str:
        """Canonical JSON of the full observable state (proofs by hash)."""
        nodes = {}
        for node in self.nodes.values():
            doc: dict[str, Any] = {
                "determination": node.determination.to_json() if node.determination else None,
                "escrow": node.escrow,
                "kind": node.kind,
                "level": node.level,
                "origin": node.origin,
                "owner": node.owner,
                "posted_at": node.posted_at.to_json(),
                "statement": node.statement.hash(),
                "status": node.status,
            }
            if isinstance(node, ClaimNode):
                doc["proof"] = content_hash(node.proof.to_json())
                if node.verdict is not None:
                    doc["verdict"] = {
                        "diagnostic": node.verdict.diagnostic,
                        "validated": node.verdict.validated,
                    }
            else:
                doc["step"] = node.step_index
            nodes[node.id] = doc
        return canonical_json(
            {
                "clock": self.clock,
                "ledger": self.ledger.to_json(),
                "mode": self.mode,
                "nodes": nodes,
                "root": self.root_id,
                "settled": self.settled,
                "stopped_at": self.stopped_at.to_json() if self.stopped_at else None,
            }
        )

    def move_log_lines(self) -> list[str]:
        return [canonical_json(m.to_json()) for m in self.moves]

    def conservation_total(self) -> int:
        return self.ledger.total()


# -- module-level operations (the documented functional API) ---------------


def create_root_claim(
    owner: str,
    statement: Statement,
    chain: ProofChain,
    cascade: ParameterCascade,
    t: Union[int, Timestamp],
    *,
    balances: Mapping[str, int] | None = None,
    mode: str = QUIESCENCE,
    verifier: VerifierBackend | None = None,
    measure: LengthMeasure = UNIT_MEASURE,
) -> ProtocolInstance:
    """New debate rooted in a staked claim. With `balances=None` the owner
    starts with exactly the required deposit."""
    if balances is None:
        balances = {owner: cascade.levels[cascade.root_level].stake_down}
    instance = ProtocolInstance(
        cascade, balances=balances, mode=mode, verifier=verifier, measure=measure
    )
    instance._post_root_claim(owner, statement, chain, t)
    return instance


def create_root_question(
    owner: str,
    statement: Statement,
    cascade: ParameterCascade,
    t: Union[int, Timestamp],
    *,
    balances: Mapping[str, int] | None = None,
    mode: str = QUIESCENCE,
    verifier: VerifierBackend | None = None,
    measure: LengthMeasure = UNIT_MEASURE,
) -> ProtocolInstance:
    """New debate rooted in a bounty-carrying question."""
    if balances is None:
        balances = {owner: cascade.bounty(cascade.root_level)}
    instance = ProtocolInstance(
        cascade, balances=balances, mode=mode, verifier=verifier, measure=measure
    )
    instance._post_root_question(owner, statement, t)
    return instance


def post_question(instance: ProtocolInstance, owner: str, origin: str, step_index: int, t) -> str:
    return instance.post_question(owner, origin, step_index, t)


def post_answer_claim(
    instance: ProtocolInstance, owner: str, origin: str, proof: ProofChain | MachineProof, t
) -> str:
    return instance.post_answer_claim(owner, origin, proof, t)


def advance_clock(instance: ProtocolInstance, to) -> list[tuple[str, str, Timestamp]]:
    return instance.advance_clock(to)


def resolve(instance: ProtocolInstance, now=None) -> list[tuple[str, str, Timestamp]]:
    return instance.resolve(now)


def settle(instance: ProtocolInstance) -> list[SettlementTransfer]:
    return instance.settle()


def replay(
    lines: Iterable[str],
    cascade: ParameterCascade,
    *,
    balances: Mapping[str, int] | None = None,
    mode: str = QUIESCENCE,
    verifier: VerifierBackend | None = None,
    measure: LengthMeasure = UNIT_MEASURE,
) -> ProtocolInstance:
    """Rebuild an instance from its move log. Verifies payload hashes."""
    instance: ProtocolInstance | None = None
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        record = json.loads(raw)
        payload = record["payload"]
        if content_hash(payload) != record["payload_hash"]:
            raise ProtocolError(f"payload hash mismatch at seq {record.get('seq')}")
        kind, actor, time = record["kind"], record["actor"], record["time"]
        if instance is None:
            if kind == "root_claim":
                chain = ProofChain.from_json(payload["chain"])
                instance = create_root_claim(
                    actor, chain.target, chain, cascade, time,
                    balances=balances, mode=mode, verifier=verifier, measure=measure,
                )
            elif kind == "root_question":
                instance = create_root_question(
                    actor, Statement.from_json(payload["statement"]), cascade, time,
                    balances=balances, mode=mode, verifier=verifier, measure=measure,
                )
            else:
                raise ProtocolError(f"log must start with a root move, got {kind!r}")
            continue
        if kind == "question":
            instance.post_question(actor, payload["origin"], payload["step"], time)
        elif kind == "answer_claim":
            doc = payload["proof"]
            proof: ProofChain | MachineProof
            if isinstance(doc, dict) and doc.get("kind") == "machine_proof":
                proof = MachineProof.from_json(doc)
            else:
                proof = ProofChain.from_json(doc)
            instance.post_answer_claim(actor, payload["origin"], proof, time)
        else:
            raise ProtocolError(f"unknown move kind {kind!r}")
    if instance is None:
        raise ProtocolError("empty move log")
    return instance
