"""Agent simulation tests, mostly pinned against the nine shipped presets."""

import json

import pytest

from sprig.formulas import Statement, atom
from sprig.proofs import MachineProof, ProofChain
from sprig.protocol import (
    LevelParameters,
    MachineParameters,
    ParameterCascade,
)
from sprig.scenarios import (
    PRESET_NAMES,
    flat_tree,
    infinite_primes,
    preset_scenario,
    rotten_tree,
    scenario_from_json,
    solid_tree,
)
from sprig.simulator import (
    AgentSpec,
    AnswerIntent,
    CarpetBomber,
    IdleStrategy,
    Misleader,
    Plagiarist,
    QuestionIntent,
    Sandbagger,
    ScenarioConfig,
    ScriptedStrategy,
    attack_strategy,
    build_knowledge,
    pad_chain,
    payoff_report,
    run_scenario,
)
from sprig.verifier import ScriptedVerifier, check


def run_preset(name):
    return run_scenario(scenario_from_json(preset_scenario(name)))


# (root status, determination, burned, final clock, payoffs per agent)
PRESET_OUTCOMES = {
    "happy_path": ("validated", "4.0", 0, 8, {"alice": 0}),
    "invalid_leaf": ("invalidated", "5.0", 0, 20, {"alice": -20, "kate": 20}),
    "carpet_bomber": ("validated", "4.0", 4, 25, {"alice": 0, "bomber": -22, "carol": 18}),
    "nitpicker": ("validated", "5.0", 1, 25, {"alice": 7, "nick": -8}),
    "evasive_prover": ("validated", "5.0", 1, 25, {"alice": 7, "nick": -8}),
    "sandbagger": ("unanswered", "6.0", 0, 30, {"kate": 36, "org": 12, "sandy": -48}),
    "misleader_immediate": ("invalidated", "5.0", 0, 25, {"mia": 0}),
    "misleader_deadline": ("invalidated", "8.0", 0, 25, {"mia": 0}),
    "plagiarist_defense": ("validated", "4.0", 2, 25, {"alice": 3, "bob": -5, "charlie": 0}),
}


def test_preset_catalogue_is_exactly_the_frozen_table():
    assert sorted(PRESET_OUTCOMES) == sorted(PRESET_NAMES)


@pytest.mark.parametrize("name", sorted(PRESET_OUTCOMES))
def test_preset_outcomes(name):
    status, det, burned, clock, payoffs = PRESET_OUTCOMES[name]
    trace = run_preset(name)
    root = trace.instance.nodes[trace.instance.root_id]
    assert (root.status, str(root.determination)) == (status, det)
    assert trace.burned == burned
    assert trace.final_clock == clock
    assert trace.payoffs == payoffs
    assert sum(trace.payoffs.values()) == -trace.burned


@pytest.mark.parametrize("name", sorted(PRESET_OUTCOMES))
def test_preset_runs_replay_cleanly(name):
    run_preset(name).verify_replay()


@pytest.mark.parametrize("name", ["carpet_bomber", "sandbagger", "plagiarist_defense"])
def test_preset_runs_are_deterministic(name):
    assert run_preset(name).to_json_lines() == run_preset(name).to_json_lines()


def test_payoff_report_matches_trace():
    trace = run_preset("nitpicker")
    report = payoff_report(trace)
    assert dict(report) == trace.payoffs
    assert sum(report.values()) == -trace.burned


def test_attacks_lose_money_and_defenders_profit():
    assert run_preset("carpet_bomber").payoffs["bomber"] < 0
    assert run_preset("sandbagger").payoffs["sandy"] < 0
    evasive = run_preset("evasive_prover").payoffs
    assert evasive["nick"] < 0 < evasive["alice"]


def test_plagiarist_is_beaten_to_the_bounty():
    trace = run_preset("plagiarist_defense")
    inst = trace.instance
    question = next(q for q in inst.questions() if q.owner == "bob")
    answers = sorted(inst.answers_to(question.id), key=lambda c: c.posted_at)
    copied, original = answers[0], answers[1]
    assert copied.owner == "charlie" and original.owner == "alice"
    assert copied.status == original.status == "validated"
    # the defender's answer lands first, so the stolen proof earns nothing
    assert original.determination < copied.determination
    bounty = [t for t in trace.transfers if t.node_id == question.id]
    assert [(t.account, t.reason) for t in bounty] == [("alice", "bounty paid to answer")]


def test_misleader_variants_differ_only_in_timing():
    immediate = run_preset("misleader_immediate")
    deadline = run_preset("misleader_deadline")
    shape = lambda tr: [
        (json.loads(m)["kind"], json.loads(m)["seq"]) for m in tr.move_lines
    ]
    assert shape(immediate) == shape(deadline)
    times = lambda tr: [json.loads(m)["time"] for m in tr.move_lines]
    assert times(immediate) == [0, 0, 0, 1]
    # the deadline variant answers its own question one tick before it expires
    assert times(deadline) == [0, 0, 3, 4]
    assert immediate.payoffs == deadline.payoffs == {"mia": 0}


# -- knowledge and padding -------------------------------------------------------


def test_knowledge_marks_undefendable_branches_dubious():
    solid = build_knowledge(solid_tree())
    assert not solid.dubious
    assert all(solid.truth.values())

    tree = rotten_tree()
    rotten = build_knowledge(tree)
    weak_step = tree.steps[1].statement
    inner_gap = tree.steps[1].subproof.steps[1].statement
    assert inner_gap.hash() in rotten.dubious
    assert weak_step.hash() in rotten.dubious
    assert tree.target.hash() in rotten.dubious
    sound_step = tree.steps[0].statement
    assert rotten.truth[sound_step.hash()]
    # the weak statement still has a chain to post (it restates itself one
    # level down), but no bottom-level proof: it can stall, not win
    assert rotten.can_answer(weak_step, 1)
    assert not rotten.can_answer(weak_step, 0)
    assert rotten.can_answer(tree.target, 1)


def test_build_knowledge_of_nothing_is_empty():
    know = build_knowledge(None)
    assert not know.answers and not know.machine_proofs
    assert not know.can_answer(Statement(conclusion=atom("p")), 1)


def test_pad_chain_prepends_defendable_decoys():
    tree = flat_tree()
    padded, proofs = pad_chain(tree, 2)
    assert len(padded.steps) == len(tree.steps) + 2
    for decoy in padded.steps[:2]:
        assert decoy.statement.conclusion in decoy.statement.assumptions
        verdict = check(decoy.statement, proofs[decoy.statement.hash()])
        assert verdict.validated
    # imports into the original steps shift past the decoys
    originals = padded.steps[2:]
    for before, after in zip(tree.steps, originals):
        assert after.imports == tuple(i + 2 for i in before.imports)
    assert padded.target == tree.target


def test_pad_chain_skips_assumption_free_targets():
    tree = infinite_primes()
    padded, proofs = pad_chain(tree, 3)
    assert padded is tree and proofs == {}


# -- strategy construction ---------------------------------------------------------


def test_attack_factory_builds_each_kind():
    assert isinstance(attack_strategy("carpet_bomber"), CarpetBomber)
    assert isinstance(attack_strategy("sandbagger", copies=3), Sandbagger)
    assert isinstance(attack_strategy("misleader", variant="deadline"), Misleader)
    assert isinstance(attack_strategy("plagiarist"), Plagiarist)
    with pytest.raises(ValueError, match="impatient_prover"):
        attack_strategy("impatient_prover")


def _tiny_cascade():
    return ParameterCascade(
        root_level=1,
        levels={1: LevelParameters(120, 0, 6, 4, 5, 4)},
        machine=MachineParameters(80, 2, 1, 3, 4),
    )


def test_scripted_strategy_fires_at_its_cue():
    tree = flat_tree()
    config = ScenarioConfig(
        cascade=_tiny_cascade(),
        agents=[
            AgentSpec("amy", 100, IdleStrategy(), tree=tree),
            AgentSpec("quin", 100, ScriptedStrategy([(2, QuestionIntent("c1", 1))])),
        ],
        root_owner="amy",
        horizon=12,
        root_tree=tree,
    )
    trace = run_scenario(config)
    moves = [json.loads(m) for m in trace.move_lines]
    assert [(m["kind"], m["time"], m["actor"]) for m in moves] == [
        ("root_claim", 0, "amy"),
        ("question", 2, "quin"),
    ]
    # nobody answers, the decoy question defeats the idle owner's root
    root = trace.instance.nodes["c1"]
    assert root.status == "invalidated"


def test_rejected_intents_are_logged_and_harmless():
    tree = flat_tree()
    config = ScenarioConfig(
        cascade=_tiny_cascade(),
        agents=[
            AgentSpec("amy", 100, IdleStrategy(), tree=tree),
            AgentSpec("quin", 100, ScriptedStrategy([(1, QuestionIntent("c1", 99))])),
        ],
        root_owner="amy",
        horizon=10,
        root_tree=tree,
    )
    trace = run_scenario(config)
    assert trace.metrics["rejections"] == 1
    rejection = trace.rejections[0]
    assert rejection.actor == "quin"
    assert "no such step" in rejection.reason
    assert trace.instance.nodes["c1"].status == "validated"


def test_scenario_config_validation():
    tree = flat_tree()
    agents = [AgentSpec("amy", 100, IdleStrategy())]
    with pytest.raises(ValueError, match="duplicate agent names"):
        ScenarioConfig(
            cascade=_tiny_cascade(),
            agents=agents + [AgentSpec("amy", 1, IdleStrategy())],
            root_owner="amy",
            horizon=5,
            root_tree=tree,
        )
    with pytest.raises(ValueError, match="root owner"):
        ScenarioConfig(
            cascade=_tiny_cascade(), agents=agents, root_owner="ghost",
            horizon=5, root_tree=tree,
        )
    with pytest.raises(ValueError, match="exactly one"):
        ScenarioConfig(
            cascade=_tiny_cascade(), agents=agents, root_owner="amy",
            horizon=5, root_tree=tree, root_statement=tree.target,
        )
    with pytest.raises(ValueError, match="exactly one"):
        ScenarioConfig(cascade=_tiny_cascade(), agents=agents, root_owner="amy", horizon=5)


def test_scenario_json_builds_a_scripted_verifier():
    doc = preset_scenario("happy_path")
    doc["verifier"] = {"kind": "scripted", "tree": "solid", "overrides": {"1": False}}
    config = scenario_from_json(doc)
    assert isinstance(config.verifier, ScriptedVerifier)
    tree = solid_tree()
    honest = build_knowledge(tree)
    flagged = tree.steps[0].statement
    dummy = MachineProof(target=flagged)
    assert honest.truth[flagged.hash()]  # ground truth says sound
    assert not config.verifier.verdict(flagged, dummy).validated  # override wins
    assert config.verifier.verdict(tree.target, dummy).validated


def test_evasive_prover_posts_padded_answers():
    trace = run_preset("evasive_prover")
    inst = trace.instance
    answers = [
        c for c in inst.claims()
        if c.owner == "alice" and c.id != inst.root_id and isinstance(c.proof, ProofChain)
    ]
    assert answers, "the evasive preset should force a defended answer"
    for claim in answers:
        decoys = [
            s for s in claim.proof.steps
            if s.statement.conclusion in s.statement.assumptions and not s.imports
        ]
        assert len(decoys) >= 2


def test_trace_exports():
    trace = run_preset("invalid_leaf")
    csv = trace.metrics_csv()
    assert csv[0] == "agent,initial,final,net"
    assert csv[-1] == f"__burned__,0,{trace.burned},{-trace.burned}"
    assert {r.split(",")[0] for r in csv[1:-1]} == set(trace.payoffs)
    lines = trace.to_json_lines()
    first, last = json.loads(lines[0]), json.loads(lines[-1])
    assert first["record"] == "run" and first["seed"] == trace.seed
    assert last["record"] == "summary" and last["burned"] == trace.burned
    kinds = {json.loads(l)["record"] for l in lines}
    assert {"run", "move", "event", "transfer", "summary"} <= kinds
