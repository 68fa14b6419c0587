"""Strategic analysis of the one-challenge-deep debate game.

The model: a claimer draws a private signal P ~ U[0,1], the probability that
her statement can actually be carried to the machine level. She decides
whether to post a top-level claim (benefit b2 if it is accepted unchallenged,
b1 if accepted after surviving one challenge, b0 if accepted at the machine
level; stakes sigma2, then sigma1, are lost on the way down if she folds or
fails). A skeptic, seeing only that the claim was posted, challenges with
probability q2 at the entry node (bounty beta1) and, if the claimer replies,
challenges again with probability q1 (bounty beta0). A claimer whose statement
is provable (X = 1) always replies and always wins the machine check; one
whose statement is not (X = 0) can only bluff a reply, with probability p.

Equilibria come in three shapes, found in this order:

* type 1 - the skeptic always challenges (q2 = 1); the posting threshold
  pi_star makes the marginal claimer indifferent.
* type 2 - the skeptic mixes at entry (q2 in [0,1]) so the marginal claimer
  is held exactly indifferent at the threshold that zeroes the skeptic's
  entry payoff phi.
* type 3 - challenging never pays (phi < 0 even for a coin-flip posterior):
  everybody posts, nothing is challenged.

All money parameters are non-negative reals. Probability identities are
checked against a vectorized Monte Carlo of the actual game tree, and
best_response_check re-audits any solution in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "DegenerateParametersError",
    "GameParameters",
    "EquilibriumSolution",
    "OutcomeProbabilities",
    "McEstimate",
    "Deviation",
    "SweepRow",
    "pi1_star",
    "q1",
    "reply_prob_p",
    "phi",
    "solve_pbe",
    "outcome_probabilities",
    "monte_carlo_estimate",
    "best_response_check",
    "sweep",
    "SWEEP_COLUMNS",
]


class DegenerateParametersError(ValueError):
    """Parameters give the game no monetary content to price."""


@dataclass(frozen=True)
class GameParameters:
    """Benefits b0/b1/b2, stakes sigma1/sigma2, bounties beta0/beta1."""

    b0: float
    b1: float
    b2: float
    sigma1: float
    sigma2: float
    beta0: float
    beta1: float

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{f.name} must be a non-negative finite number")


@dataclass(frozen=True)
class EquilibriumSolution:
    eq_type: int
    pi_star: float
    pi_e: float
    pi1_star: float
    p: float
    q1: float
    q2: float


def pi1_star(theta: GameParameters) -> float:
    """Posterior above which a second challenge stops paying for the skeptic."""
    denom = theta.sigma2 + theta.sigma1 + theta.beta1 + theta.beta0
    if denom == 0:
        raise DegenerateParametersError("all stakes and bounties are zero")
    return (theta.sigma2 + theta.sigma1 + theta.beta1) / denom


def q1(theta: GameParameters) -> float:
    """Second-challenge rate that makes an unprovable reply worthless."""
    denom = theta.b1 + theta.sigma2 + theta.beta1 + theta.sigma1
    if denom == 0:
        raise DegenerateParametersError("level-1 game has no monetary content")
    return (theta.b1 + theta.sigma2 + theta.beta1) / denom


def reply_prob_p(pi_e: float, theta: GameParameters) -> float:
    """Bluff rate pinning the post-reply posterior at pi1_star.

    Only defined while the skeptic's entry belief sits at or below the
    indifference posterior; beyond it the required p leaves [0, 1].
    """
    p1 = pi1_star(theta)
    if not 0 <= pi_e < 1:
        raise ValueError(f"pi_e must be in [0, 1), got {pi_e}")
    if p1 == 0:
        raise ValueError("no interior mixing: second challenge always pays")
    p = pi_e * (1 - p1) / (p1 * (1 - pi_e))
    if p > 1:
        raise ValueError(f"no interior mixing: required reply rate {p} exceeds 1")
    return p


def _phi_slope(theta: GameParameters) -> float:
    p1 = pi1_star(theta)
    w1 = q1(theta)
    return (
        -w1 * (theta.beta1 + theta.beta0)
        - (1 - w1) * theta.beta1
        - theta.sigma2
        - (1 - p1) * (theta.sigma2 + theta.beta1) / p1
    )


def phi(pi_star_candidate: float, theta: GameParameters) -> float:
    """Skeptic's expected entry-challenge payoff at a candidate threshold.

    Evaluated at the entry belief (1 + pi_star) / 2 with the claimer bluffing
    at the rate that pins the post-reply posterior, and the second challenge
    mixed at q1. Linear and decreasing in the belief.
    """
    if not 0 <= pi_star_candidate <= 1:
        raise ValueError("candidate threshold must be in [0, 1]")
    pi_e = (1 + pi_star_candidate) / 2
    p1 = pi1_star(theta)
    if pi_e >= p1:
        raise ValueError(
            f"beliefs outside the mixing region: entry belief {pi_e} >= {p1}"
        )
    return theta.sigma2 + pi_e * _phi_slope(theta)


def _challenged_value(theta: GameParameters, w1: float) -> float:
    """Claimer's value of being challenged on a provable statement."""
    return w1 * (theta.b0 + theta.beta0 + theta.beta1) + (1 - w1) * (theta.b1 + theta.beta1)


def solve_pbe(theta: GameParameters) -> EquilibriumSolution:
    """Classify and solve, trying type 1, then 2, then 3; boundaries take the
    lower-numbered type."""
    p1 = pi1_star(theta)
    w1 = q1(theta)
    g = _challenged_value(theta, w1)

    if p1 > 0:
        if g + theta.sigma2 == 0:
            raise DegenerateParametersError("claimer has nothing to gain or lose")
        cand = theta.sigma2 / (g + theta.sigma2)
        pi_e = (1 + cand) / 2
        if pi_e < p1 and phi(cand, theta) >= 0:
            return EquilibriumSolution(
                eq_type=1,
                pi_star=cand,
                pi_e=pi_e,
                pi1_star=p1,
                p=reply_prob_p(pi_e, theta),
                q1=w1,
                q2=1.0,
            )

        if 0.5 < p1 and phi(0.0, theta) >= 0:
            slope = _phi_slope(theta)
            pi_e = 0.5 if slope == 0 else theta.sigma2 / -slope
            star = 2 * pi_e - 1
            denom = theta.b2 - star * g + (1 - star) * theta.sigma2
            if denom > 0:
                w2 = theta.b2 / denom
                if 0 <= w2 <= 1:
                    return EquilibriumSolution(
                        eq_type=2,
                        pi_star=star,
                        pi_e=pi_e,
                        pi1_star=p1,
                        p=reply_prob_p(pi_e, theta),
                        q1=w1,
                        q2=w2,
                    )

    if 0.5 >= p1:
        p, w1_used = 1.0, 0.0
    else:
        p, w1_used = reply_prob_p(0.5, theta), w1
    return EquilibriumSolution(
        eq_type=3, pi_star=0.0, pi_e=0.5, pi1_star=p1, p=p, q1=w1_used, q2=0.0
    )


@dataclass(frozen=True)
class OutcomeProbabilities:
    """Long-run outcome rates implied by a solution.

    `accept_rate` is the chance a posted claim ends accepted;
    `valid_accept_rate` the chance it is accepted and provable.
    `unchallenged_share` and `replied_share` split the provable accepted mass
    by how far the debate went (no challenge / one survived challenge); the
    remainder reached the machine. `valid_given_reject` is None when nothing
    is ever rejected. `reliability` is the ratio of provable accepted claims
    to accepted claims.
    """

    accept_rate: float
    valid_accept_rate: float
    accept_given_valid: float
    accept_given_invalid: float
    valid_given_accept: float
    valid_given_reject: float | None
    unchallenged_share: float
    replied_share: float
    reliability: float


def outcome_probabilities(sol: EquilibriumSolution, theta: GameParameters) -> OutcomeProbabilities:
    s = sol.pi_star
    if sol.eq_type == 1:
        f0 = sol.p * (1 - sol.q1)
    elif sol.eq_type == 2:
        f0 = (1 - sol.q2) + sol.q2 * sol.p * (1 - sol.q1)
    else:
        f0 = 1.0

    accept_valid = 0.5 * (1 + s) * (1 - s)
    accept_invalid = 0.5 * (1 - s) ** 2 * f0
    accept = accept_valid + accept_invalid
    reject = 1 - accept
    reject_valid = 0.5 - accept_valid

    share_unchallenged = 1 - sol.q2
    share_replied = sol.q2 * (1 - sol.q1)

    return OutcomeProbabilities(
        accept_rate=accept,
        valid_accept_rate=accept_valid,
        accept_given_valid=2 * accept_valid,
        accept_given_invalid=2 * accept_invalid,
        valid_given_accept=accept_valid / accept,
        valid_given_reject=(reject_valid / reject) if reject > 0 else None,
        unchallenged_share=share_unchallenged,
        replied_share=share_replied,
        reliability=accept_valid / accept,
    )


@dataclass(frozen=True)
class McEstimate:
    estimate: float | None
    se: float | None
    hits: int
    draws: int


def monte_carlo_estimate(
    theta: GameParameters, sol: EquilibriumSolution, n: int = 10**6, seed: int = 0
) -> Mapping[str, McEstimate]:
    """Simulate the game tree and estimate every outcome probability.

    Draw order is fixed (signal, provability, entry challenge, bluff, second
    challenge: one uniform array each), so results are reproducible for a
    given seed regardless of the solution values.
    """
    rng = np.random.default_rng(seed)
    signal = rng.random(n)
    u_valid = rng.random(n)
    u_entry = rng.random(n)
    u_bluff = rng.random(n)
    u_second = rng.random(n)

    posted = signal >= sol.pi_star
    valid = u_valid < signal
    challenged = u_entry < sol.q2
    replied = valid | (u_bluff < sol.p)
    rechallenged = u_second < sol.q1

    unchallenged_accept = posted & ~challenged
    replied_accept = posted & challenged & replied & ~rechallenged
    machine_accept = posted & challenged & replied & rechallenged & valid
    accepted = unchallenged_accept | replied_accept | machine_accept

    def est(num: np.ndarray, den: np.ndarray) -> McEstimate:
        draws = int(den.sum())
        hits = int((num & den).sum())
        if draws == 0:
            return McEstimate(None, None, 0, 0)
        v = hits / draws
        return McEstimate(v, math.sqrt(v * (1 - v) / draws), hits, draws)

    everyone = np.ones(n, dtype=bool)
    accepted_valid = accepted & valid
    return {
        "accept_rate": est(accepted, everyone),
        "valid_accept_rate": est(accepted_valid, everyone),
        "accept_given_valid": est(accepted, valid),
        "accept_given_invalid": est(accepted, ~valid),
        "valid_given_accept": est(valid, accepted),
        "valid_given_reject": est(valid, ~accepted),
        "unchallenged_share": est(unchallenged_accept, accepted_valid),
        "replied_share": est(replied_accept, accepted_valid),
        "reliability": est(valid, accepted),
        "enter_given_valid": est(posted, valid),
    }


def closed_form_row(probs: OutcomeProbabilities, name: str, sol: EquilibriumSolution) -> float | None:
    if name == "enter_given_valid":
        return 1 - sol.pi_star**2
    return getattr(probs, name)


@dataclass(frozen=True)
class Deviation:
    node: str
    action: str
    gain: float
    detail: str


def best_response_check(
    theta: GameParameters, sol: EquilibriumSolution, eps: float = 1e-9
) -> list[Deviation]:
    """Audit a solution in exact rational arithmetic.

    Walks every decision node of the game tree under the solution's beliefs
    and mixes and reports any action whose payoff beats the prescribed
    behaviour by more than `eps`. An empty list certifies the equilibrium.
    """
    b0, b1, b2 = Fraction(theta.b0), Fraction(theta.b1), Fraction(theta.b2)
    s1, s2 = Fraction(theta.sigma1), Fraction(theta.sigma2)
    a0, a1 = Fraction(theta.beta0), Fraction(theta.beta1)
    star, pi_e = Fraction(sol.pi_star), Fraction(sol.pi_e)
    p, w1, w2 = Fraction(sol.p), Fraction(sol.q1), Fraction(sol.q2)
    tol = Fraction(eps)
    out: list[Deviation] = []

    def report(node: str, action: str, gain: Fraction, detail: str) -> None:
        if gain > tol:
            out.append(Deviation(node, action, float(gain), detail))

    if abs(pi_e - (1 + star) / 2) > tol:
        out.append(
            Deviation(
                "entry belief",
                "update",
                float(abs(pi_e - (1 + star) / 2)),
                "posterior after posting must average the surviving signals",
            )
        )

    # claimer reply nodes
    reply_valid = w1 * (b0 + a0 + a1) + (1 - w1) * (b1 + a1)
    report(
        "claimer reply (provable)",
        "fold",
        -s2 - reply_valid,
        "folding must not beat defending a provable statement",
    )
    reply_bluff = (1 - w1) * (b1 + a1) - w1 * (s2 + s1)
    bluff_value = p * reply_bluff + (1 - p) * -s2
    gain_bluff = max(reply_bluff, -s2) - bluff_value
    report(
        "claimer reply (unprovable)",
        "bluff" if reply_bluff > -s2 else "fold",
        gain_bluff,
        "mixed bluffing must match the better pure reply choice",
    )

    # machine node
    report(
        "claimer machine (provable)",
        "fold",
        (-s2 - s1) - (b0 + a0 + a1),
        "abandoning a provable machine check must not pay",
    )

    # skeptic second challenge
    post_reply = pi_e / (pi_e + (1 - pi_e) * p) if pi_e + (1 - pi_e) * p > 0 else Fraction(1)
    second_go = post_reply * (-a1 - a0) + (1 - post_reply) * (s2 + s1)
    second_stop = -a1
    second_value = w1 * second_go + (1 - w1) * second_stop
    report(
        "skeptic second challenge",
        "challenge" if second_go > second_stop else "stop",
        max(second_go, second_stop) - second_value,
        "mixing q1 must match the better pure action at the post-reply belief",
    )

    # skeptic entry
    entry_go = pi_e * (-w1 * (a1 + a0) - (1 - w1) * a1) + (1 - pi_e) * ((1 - p) * s2 - p * a1)
    entry_value = w2 * entry_go
    report(
        "skeptic entry",
        "challenge" if entry_go > 0 else "pass",
        max(entry_go, Fraction(0)) - entry_value,
        "mixing q2 must match the better of challenging and passing",
    )

    # claimer entry threshold
    def posting_value(signal: Fraction) -> Fraction:
        challenged = signal * reply_valid + (1 - signal) * bluff_value
        return (1 - w2) * b2 + w2 * challenged

    if star > 0:
        report(
            "claimer entry",
            "flip at threshold",
            abs(posting_value(star)),
            "the marginal signal must be indifferent about posting",
        )
    else:
        report(
            "claimer entry",
            "stay out",
            -posting_value(Fraction(0)),
            "posting must be worthwhile even for the worst signal",
        )

    return out


SWEEP_COLUMNS = [
    "param",
    "value",
    "eq_type",
    "pi_star",
    "pi_e",
    "p",
    "q1",
    "q2",
    "accept_rate",
    "valid_accept_rate",
    "accept_given_valid",
    "accept_given_invalid",
    "valid_given_accept",
    "valid_given_reject",
    "unchallenged_share",
    "replied_share",
    "reliability",
]


@dataclass(frozen=True)
class SweepRow:
    param: str
    value: float
    degenerate: bool
    solution: EquilibriumSolution | None
    probabilities: OutcomeProbabilities | None

    def to_csv(self) -> list[str]:
        def fmt(x: float | None) -> str:
            return "" if x is None else repr(float(x))

        if self.degenerate or self.solution is None or self.probabilities is None:
            return [self.param, fmt(self.value), "degenerate"] + [""] * (len(SWEEP_COLUMNS) - 3)
        sol, pr = self.solution, self.probabilities
        return [
            self.param,
            fmt(self.value),
            str(sol.eq_type),
            fmt(sol.pi_star),
            fmt(sol.pi_e),
            fmt(sol.p),
            fmt(sol.q1),
            fmt(sol.q2),
            fmt(pr.accept_rate),
            fmt(pr.valid_accept_rate),
            fmt(pr.accept_given_valid),
            fmt(pr.accept_given_invalid),
            fmt(pr.valid_given_accept),
            fmt(pr.valid_given_reject),
            fmt(pr.unchallenged_share),
            fmt(pr.replied_share),
            fmt(pr.reliability),
        ]


def sweep(theta: GameParameters, param: str, values: Iterable[float]) -> list[SweepRow]:
    """Re-solve along one parameter axis; degenerate points are marked, not fatal."""
    if param not in {f.name for f in fields(GameParameters)}:
        raise ValueError(f"unknown parameter {param!r}")
    rows = []
    for value in values:
        point = GameParameters(**{**_as_dict(theta), param: float(value)})
        try:
            sol = solve_pbe(point)
        except DegenerateParametersError:
            rows.append(SweepRow(param, float(value), True, None, None))
            continue
        rows.append(SweepRow(param, float(value), False, sol, outcome_probabilities(sol, point)))
    return rows


def _as_dict(theta: GameParameters) -> dict[str, float]:
    return {f.name: getattr(theta, f.name) for f in fields(theta)}
