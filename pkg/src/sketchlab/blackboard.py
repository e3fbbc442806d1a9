"""Finite blackboard protocols with exact bit accounting.

A TableProtocol lists, for every (transcript prefix, speaker's input bit),
a finite message distribution.  Each player holds one input bit; messages
are broadcast, so a transcript is just the message sequence.  Costs charge
ceil(log2 |alphabet|) bits per message, where the alphabet at a prefix is
everything the speaker could say there under either input bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .distributions import FiniteDistribution
from .errors import ProtocolTableError, TranscriptSpaceError
from . import rng as rngmod

Prefix = tuple[int, ...]

TRANSCRIPT_CAP = 1 << 20


@dataclass(frozen=True)
class Transcript:
    """Realized message sequence with its total bit cost."""

    messages: tuple[tuple[int, int], ...]  # (player, message) per slot
    bit_cost: int

    def message_ids(self) -> Prefix:
        return tuple(m for _, m in self.messages)


def _bits_for(alphabet_size: int) -> int:
    if alphabet_size <= 1:
        return 0
    return (alphabet_size - 1).bit_length()


@dataclass
class TableProtocol:
    """Blackboard protocol given by per-prefix message tables.

    schedule[s] is the player speaking in slot s; tables maps
    (prefix, bit) to the message distribution of that slot's speaker.
    """

    players: int
    schedule: tuple[int, ...]
    tables: Mapping[tuple[Prefix, int], FiniteDistribution]
    output_rule: Optional[Mapping[Prefix, int]] = None

    def message_dist(self, prefix: Prefix, bit: int) -> FiniteDistribution:
        try:
            return self.tables[(prefix, bit)]
        except KeyError:
            raise ProtocolTableError(
                f"no message distribution for prefix {prefix} with bit {bit}"
            ) from None

    def alphabet(self, prefix: Prefix) -> list[int]:
        atoms = set()
        for bit in (0, 1):
            dist = self.tables.get((prefix, bit))
            if dist is not None:
                atoms |= dist.support()
        if not atoms:
            raise ProtocolTableError(f"no message distribution at prefix {prefix}")
        return sorted(atoms)

    def slot_cost(self, prefix: Prefix) -> int:
        return _bits_for(len(self.alphabet(prefix)))

    def output(self, transcript: Transcript) -> int:
        if self.output_rule is None:
            raise ProtocolTableError("protocol has no output rule")
        return self.output_rule[transcript.message_ids()]


def _sample(dist: FiniteDistribution, generator) -> int:
    atoms = sorted(dist.support())
    u = generator.random()
    acc = 0.0
    for atom in atoms:
        acc += float(dist.prob(atom))
        if u < acc:
            return atom
    return atoms[-1]


def run_protocol(spec, inputs: Sequence[int], seed: int = 0) -> Transcript:
    """Sample one transcript; delegates to structured protocols if needed."""
    if not isinstance(spec, TableProtocol):
        return spec.run(inputs, seed).transcript
    if len(inputs) != spec.players:
        raise ValueError(f"expected {spec.players} input bits")
    prefix: Prefix = ()
    messages = []
    cost = 0
    spoken: dict[int, int] = {}
    for slot, player in enumerate(spec.schedule):
        dist = spec.message_dist(prefix, inputs[player])
        round_index = spoken.get(player, 0)
        spoken[player] = round_index + 1
        msg = _sample(dist, rngmod.stream(seed, player, round_index))
        cost += spec.slot_cost(prefix)
        messages.append((player, msg))
        prefix = prefix + (msg,)
    return Transcript(messages=tuple(messages), bit_cost=cost)


def transcript_distribution(spec, inputs: Sequence[int]) -> FiniteDistribution:
    """Exact transcript distribution by forward enumeration.

    Atoms are message-id tuples.  Raises TranscriptSpaceError past 2^20
    live prefixes.
    """
    if not isinstance(spec, TableProtocol):
        return spec.transcript_distribution(inputs)
    if len(inputs) != spec.players:
        raise ValueError(f"expected {spec.players} input bits")
    frontier: dict[Prefix, float] = {(): 1.0}
    for player in spec.schedule:
        nxt: dict[Prefix, float] = {}
        for prefix, mass in frontier.items():
            dist = spec.message_dist(prefix, inputs[player])
            for msg in dist.support():
                nxt[prefix + (msg,)] = nxt.get(prefix + (msg,), 0.0) + mass * float(dist.prob(msg))
        if len(nxt) > TRANSCRIPT_CAP:
            raise TranscriptSpaceError(f"transcript space exceeds {TRANSCRIPT_CAP} atoms")
        frontier = nxt
    return FiniteDistribution(frontier, validate=False)


def transcript_cost(spec: TableProtocol, transcript_ids: Prefix) -> int:
    """Bit cost of a realized transcript under the protocol's alphabets."""
    cost = 0
    for i in range(len(transcript_ids)):
        cost += spec.slot_cost(transcript_ids[:i])
    return cost


def random_table_protocol(players: int, rounds: int, seed: int,
                          max_alphabet: int = 2,
                          transcript_cap: int = 64) -> TableProtocol:
    """Random protocol where each player speaks `rounds` times in order.

    Message alphabets are chosen per slot so the full transcript space stays
    within `transcript_cap` atoms; some slots are deliberately drawn
    bit-oblivious or deterministic so degenerate behaviors stay covered.
    """
    gen = rngmod.stream(seed, 0, 7)
    schedule = tuple(p for _ in range(rounds) for p in range(players))
    tables: dict[tuple[Prefix, int], FiniteDistribution] = {}
    frontier: list[Prefix] = [()]
    space = 1
    for _slot, _player in enumerate(schedule):
        remaining = len(schedule) - _slot
        width = int(gen.integers(1, max_alphabet + 1))
        while space * width ** remaining > transcript_cap and width > 1:
            width -= 1
        kind = gen.random()
        nxt: list[Prefix] = []
        for prefix in frontier:
            if kind < 0.25:
                # bit-oblivious slot
                weights = gen.random(width) + 0.05
                dist = FiniteDistribution(
                    {m: w / weights.sum() for m, w in enumerate(weights)}, validate=False
                )
                pair = {0: dist, 1: dist}
            elif kind < 0.45:
                # deterministic slot (possibly bit-revealing)
                m0 = int(gen.integers(0, width))
                m1 = int(gen.integers(0, width))
                pair = {
                    0: FiniteDistribution.point_mass(m0),
                    1: FiniteDistribution.point_mass(m1),
                }
            else:
                pair = {}
                for bit in (0, 1):
                    weights = gen.random(width) + 0.05
                    pair[bit] = FiniteDistribution(
                        {m: w / weights.sum() for m, w in enumerate(weights)},
                        validate=False,
                    )
            for bit in (0, 1):
                tables[(prefix, bit)] = pair[bit]
            for m in range(width):
                nxt.append(prefix + (m,))
        frontier = nxt
        space *= width
    output_rule = {prefix: int(sum(prefix)) % 2 for prefix in frontier}
    return TableProtocol(players=players, schedule=schedule, tables=tables,
                         output_rule=output_rule)
