"""Clean simulation of blackboard protocols and the ignoring-set search.

A player is simulated "cleanly" when it only looks at its input bit with a
transcript-dependent probability: before observing, its behavior is
bit-independent; after observing, its message supports for bit 0 and bit 1
are disjoint at every prefix.  The simulation preserves the transcript
distribution exactly for every input vector.

The per-slot rule comes from the overlap decomposition applied to the two
message distributions with alpha set to the probability that the player has
already observed (conditioned on the prefix and on the bit value that can
have positive observation probability; the other bit's probability is zero
by induction).  An unobserved player observes with probability delta and
then plays the remainder part for its bit; otherwise it plays the common
part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .blackboard import Prefix, TableProtocol, Transcript, _sample
from .distributions import FiniteDistribution, decompose
from .errors import TranscriptSpaceError
from . import rng as rngmod

TRANSCRIPT_CAP = 1 << 20


@dataclass(frozen=True)
class CleanSlotRule:
    """Behavior of a cleaned player at one (slot, prefix).

    alpha0/alpha1: probability the player observed in an earlier round given
    its bit and this prefix (at most one is nonzero).  delta: probability an
    unobserved player observes now.  common: message law before observation;
    part0/part1: message laws after observing bit 0 / bit 1 (disjoint).
    """

    delta: float
    common: FiniteDistribution
    part0: FiniteDistribution
    part1: FiniteDistribution
    alpha0: float
    alpha1: float

    def message_dist(self, bit: int, observed: bool) -> FiniteDistribution:
        if not observed:
            return self.common
        return self.part1 if bit else self.part0


class CleanProtocol:
    """A protocol equivalent to `base` but clean w.r.t. `cleaned_players`."""

    def __init__(self, base: TableProtocol, cleaned_players: Sequence[int]):
        self.base = base
        self.cleaned_players = tuple(dict.fromkeys(cleaned_players))
        self.players = base.players
        self.schedule = base.schedule
        self.rules: dict[int, dict[tuple[int, Prefix], CleanSlotRule]] = {
            p: _build_rules(base, p) for p in self.cleaned_players
        }

    # -- sampling ---------------------------------------------------------
    def run(self, inputs: Sequence[int], seed: int = 0):
        if len(inputs) != self.players:
            raise ValueError(f"expected {self.players} input bits")
        observed = {p: False for p in self.cleaned_players}
        prefix: Prefix = ()
        messages = []
        cost = 0
        spoken: dict[int, int] = {}
        for slot, player in enumerate(self.schedule):
            round_index = spoken.get(player, 0)
            spoken[player] = round_index + 1
            gen = rngmod.stream(seed, player, round_index)
            if player in observed:
                rule = self.rules[player][(slot, prefix)]
                if not observed[player] and gen.random() < rule.delta:
                    observed[player] = True
                dist = rule.message_dist(inputs[player], observed[player])
            else:
                dist = self.base.message_dist(prefix, inputs[player])
            msg = _sample(dist, gen)
            cost += self.base.slot_cost(prefix)
            messages.append((player, msg))
            prefix = prefix + (msg,)
        transcript = Transcript(messages=tuple(messages), bit_cost=cost)
        return _CleanRun(transcript=transcript, observed=dict(observed))

    # -- exact enumeration -------------------------------------------------
    def transcript_distribution(self, inputs: Sequence[int]) -> FiniteDistribution:
        joint = self._joint(inputs)
        out: dict[Prefix, float] = {}
        for (prefix, _flags), mass in joint.items():
            out[prefix] = out.get(prefix, 0.0) + mass
        return FiniteDistribution(out, validate=False)

    def observation_events(self, inputs: Sequence[int]) -> dict[Prefix, dict[frozenset, float]]:
        """Final transcript -> {observed-player subset: probability mass}."""
        joint = self._joint(inputs)
        out: dict[Prefix, dict[frozenset, float]] = {}
        for (prefix, flags), mass in joint.items():
            sub = frozenset(p for p, f in zip(self.cleaned_players, flags) if f)
            bucket = out.setdefault(prefix, {})
            bucket[sub] = bucket.get(sub, 0.0) + mass
        return out

    def _joint(self, inputs: Sequence[int]) -> dict[tuple[Prefix, tuple[bool, ...]], float]:
        if len(inputs) != self.players:
            raise ValueError(f"expected {self.players} input bits")
        start = ((), tuple(False for _ in self.cleaned_players))
        frontier: dict[tuple[Prefix, tuple[bool, ...]], float] = {start: 1.0}
        pos = {p: i for i, p in enumerate(self.cleaned_players)}
        for slot, player in enumerate(self.schedule):
            nxt: dict[tuple[Prefix, tuple[bool, ...]], float] = {}
            for (prefix, flags), mass in frontier.items():
                if player in pos:
                    rule = self.rules[player][(slot, prefix)]
                    i = pos[player]
                    branches = []
                    if flags[i]:
                        branches.append((flags, True, 1.0))
                    else:
                        if rule.delta < 1.0:
                            branches.append((flags, False, 1.0 - rule.delta))
                        if rule.delta > 0.0:
                            upd = flags[:i] + (True,) + flags[i + 1:]
                            branches.append((upd, True, rule.delta))
                    for new_flags, obs, w in branches:
                        dist = rule.message_dist(inputs[player], obs)
                        for msg in dist.support():
                            key = (prefix + (msg,), new_flags)
                            nxt[key] = nxt.get(key, 0.0) + mass * w * float(dist.prob(msg))
                else:
                    dist = self.base.message_dist(prefix, inputs[player])
                    for msg in dist.support():
                        key = (prefix + (msg,), flags)
                        nxt[key] = nxt.get(key, 0.0) + mass * float(dist.prob(msg))
            if len(nxt) > TRANSCRIPT_CAP:
                raise TranscriptSpaceError(f"joint state space exceeds {TRANSCRIPT_CAP}")
            frontier = nxt
        return frontier


@dataclass(frozen=True)
class _CleanRun:
    transcript: Transcript
    observed: dict


def clean_simulate(spec: TableProtocol, player: int) -> CleanProtocol:
    """Equivalent protocol that is clean with respect to `player`."""
    if not 0 <= player < spec.players:
        raise ValueError("player index out of range")
    return CleanProtocol(spec, [player])


def clean_all(spec: TableProtocol, players: Sequence[int]) -> CleanProtocol:
    """Clean simulation of several players at once.

    Each player's rules depend only on its own message tables, so cleaning
    is computed independently per player.
    """
    return CleanProtocol(spec, players)


def _build_rules(spec: TableProtocol, player: int) -> dict[tuple[int, Prefix], CleanSlotRule]:
    """Forward pass computing per-(slot, prefix) rules and observation priors.

    q0/q1 track P[observed before this slot | bit, prefix]; None marks a
    prefix the player cannot produce under that bit.  At most one of the two
    is positive at any prefix because post-observation supports are
    disjoint.
    """
    rules: dict[tuple[int, Prefix], CleanSlotRule] = {}
    frontier: dict[Prefix, tuple[Optional[float], Optional[float]]] = {(): (0.0, 0.0)}
    for slot, speaker in enumerate(spec.schedule):
        nxt: dict[Prefix, tuple[Optional[float], Optional[float]]] = {}
        if speaker != player:
            for prefix, q in frontier.items():
                for msg in spec.alphabet(prefix):
                    nxt[prefix + (msg,)] = q
            frontier = nxt
            continue
        for prefix, (q0, q1) in frontier.items():
            d0 = spec.message_dist(prefix, 0)
            d1 = spec.message_dist(prefix, 1)
            a0 = q0 if q0 is not None else 0.0
            a1 = q1 if q1 is not None else 0.0
            if min(a0, a1) > 1e-12:
                raise AssertionError("both observation priors positive; invariant broken")
            if a1 <= a0:
                dec = decompose(d0, d1, a0)
                rule = CleanSlotRule(
                    delta=_snap(float(dec.delta)), common=dec.common,
                    part0=dec.zero_part, part1=dec.one_part,
                    alpha0=a0, alpha1=a1,
                )
            else:
                dec = decompose(d1, d0, a1)
                rule = CleanSlotRule(
                    delta=_snap(float(dec.delta)), common=dec.common,
                    part0=dec.one_part, part1=dec.zero_part,
                    alpha0=a0, alpha1=a1,
                )
            rules[(slot, prefix)] = rule
            for msg in spec.alphabet(prefix):
                nxt[prefix + (msg,)] = (
                    _posterior(rule, 0, q0, msg),
                    _posterior(rule, 1, q1, msg),
                )
        frontier = nxt
    return rules


def _snap(delta: float) -> float:
    """Clamp float-noise deltas so reserved remainder atoms stay unreachable."""
    if delta < 1e-15:
        return 0.0
    if delta > 1.0 - 1e-15:
        return 1.0
    return delta


def _posterior(rule: CleanSlotRule, bit: int, prior: Optional[float], msg: int) -> Optional[float]:
    if prior is None:
        return None
    part = rule.part1 if bit else rule.part0
    obs = (prior + (1.0 - prior) * rule.delta) * float(part.prob(msg))
    unobs = (1.0 - prior) * (1.0 - rule.delta) * float(rule.common.prob(msg))
    total = obs + unobs
    if total <= 0.0:
        return None
    return obs / total


def observation_probability(clean: CleanProtocol, player: int,
                            inputs: Optional[Sequence[int]] = None,
                            bit: int = 0) -> float:
    """P[the cleaned player ever observes its bit] by exact enumeration.

    Defaults to the all-zero input for the other players with the target
    holding `bit`; this is the quantity that equals tv(pi_0, pi_{e_player}).
    """
    if player not in clean.cleaned_players:
        raise ValueError("protocol is not clean w.r.t. this player")
    if inputs is None:
        vec = [0] * clean.players
        vec[player] = bit
    else:
        vec = list(inputs)
    events = clean.observation_events(vec)
    total = 0.0
    for masses in events.values():
        for subset, mass in masses.items():
            if player in subset:
                total += mass
    return total


def gamma_constant(c: float) -> float:
    """gamma_c = 1 / (c * ln(e/c)) for c in (0, 1)."""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    return 1.0 / (c * math.log(math.e / c))


def ignoring_set_bound(k: int, c: float) -> float:
    """Guaranteed probability floor exp(-k/gamma_c - 1)."""
    return math.exp(-k / gamma_constant(c) - 1.0)


def find_ignoring_set(joint: np.ndarray, c: float) -> tuple[tuple[int, ...], float]:
    """Best size-ceil(ck) subset S maximizing P[Y_j = 0 for all j in S].

    `joint` is the joint law of k indicator bits as a length-2^k probability
    vector indexed by bitmask (bit j set means Y_j = 1).  Exhaustive over
    all subsets; k above 20 is rejected rather than approximated.  When
    E[sum Y] = pk with p < (1-c)/2 the returned probability exceeds
    exp(-k/gamma_c - 1).
    """
    probs = np.asarray(joint, dtype=np.float64)
    size = probs.shape[0]
    k = size.bit_length() - 1
    if size != 1 << k or k < 1:
        raise ValueError("joint must have length 2^k")
    if k > 20:
        raise ValueError("exhaustive search supports k <= 20 only")
    if abs(probs.sum() - 1.0) > 1e-9 or probs.min() < 0:
        raise ValueError("joint must be a probability vector")
    m = math.ceil(c * k)
    if not 0 < m <= k:
        raise ValueError("ceil(c*k) must land in [1, k]")
    # Subset-sum (zeta) transform: f[u] = P[mask subset of u] = P[Y zero
    # outside u]; then P[Y_S = 0] = f[complement(S)].
    f = probs.copy()
    for b in range(k):
        step = 1 << b
        f = f.reshape(-1, 2, step)
        f[:, 1, :] += f[:, 0, :]
        f = f.reshape(-1)
    masks = np.arange(size, dtype=np.int64)
    popcount = np.zeros(size, dtype=np.int64)
    for b in range(k):
        popcount += (masks >> b) & 1
    candidates = masks[popcount == m]
    vals = f[(size - 1) ^ candidates]
    best = int(np.argmax(vals))
    best_mask = int(candidates[best])
    subset = tuple(j for j in range(k) if best_mask >> j & 1)
    return subset, float(vals[best])
