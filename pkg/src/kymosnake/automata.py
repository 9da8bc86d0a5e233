"""Finite automata: substring DFAs, a canonical text encoding, dovetailing.

The DFA model is deliberately total (the transition map covers every
(state, symbol) pair), which keeps language complement a pure flip of the
accepting set.  The StepMachine interface abstracts "one configuration change
per call" so recognizers of different kinds can be interleaved fairly.
"""

from __future__ import annotations

from dataclasses import dataclass

RUNNING = "running"
ACCEPT = "accept"
REJECT = "reject"
FUEL_EXHAUSTED = "fuel-exhausted"

_HEADER = "DFA v1"


class DfaDecodeError(ValueError):
    """Malformed encoded DFA; the message names the offending field."""


class InputSymbolError(ValueError):
    """Input symbol outside the automaton's alphabet (not a reject verdict)."""


@dataclass(frozen=True)
class Dfa:
    """Deterministic finite automaton with a total transition map.

    `alphabet` is an ordered tuple of single-character symbols; the order is
    part of the value (it fixes the canonical encoding).
    """

    states: int
    alphabet: tuple[str, ...]
    transitions: dict[tuple[int, str], int]
    start: int
    accepting: frozenset[int]

    def __post_init__(self):
        if self.states < 1:
            raise ValueError("a DFA needs at least one state")
        if not self.alphabet:
            raise ValueError("alphabet must not be empty")
        for sym in self.alphabet:
            _check_symbol(sym)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet symbols must be distinct")
        if not 0 <= self.start < self.states:
            raise ValueError(f"start state {self.start} out of range")
        for q in self.accepting:
            if not 0 <= q < self.states:
                raise ValueError(f"accepting state {q} out of range")
        expected = self.states * len(self.alphabet)
        if len(self.transitions) != expected:
            raise ValueError(
                f"transition map must be total: expected {expected} entries, "
                f"got {len(self.transitions)}"
            )
        for q in range(self.states):
            for sym in self.alphabet:
                target = self.transitions.get((q, sym))
                if target is None:
                    raise ValueError(f"missing transition ({q}, {sym!r})")
                if not 0 <= target < self.states:
                    raise ValueError(
                        f"transition ({q}, {sym!r}) -> {target} out of range"
                    )


def _check_symbol(sym: str) -> None:
    if not isinstance(sym, str) or len(sym) != 1:
        raise ValueError(f"symbol must be a single character, got {sym!r}")


def _prefix_suffix_table(pattern: str) -> list[int]:
    """For each prefix length q, the longest proper prefix that is also a suffix."""
    table = [0] * len(pattern)
    k = 0
    for q in range(1, len(pattern)):
        while k and pattern[q] != pattern[k]:
            k = table[k - 1]
        if pattern[q] == pattern[k]:
            k += 1
        table[q] = k
    return table


def build_substring_dfa(pattern: str, alphabet: str | tuple[str, ...]) -> Dfa:
    """DFA over `alphabet` accepting exactly the strings containing `pattern`.

    States 0..len(pattern) count how much of the pattern the recent input
    matches; the failure-function table routes mismatches to the longest
    still-viable prefix, so restarts like the prefix of an overlapping second
    occurrence are never lost.  State len(pattern) is absorbing.
    """
    if not pattern:
        raise ValueError("pattern must be non-empty")
    symbols = tuple(alphabet)
    symbol_set = set(symbols)
    for ch in pattern:
        if ch not in symbol_set:
            raise ValueError(f"pattern symbol {ch!r} not in alphabet")
    table = _prefix_suffix_table(pattern)
    m = len(pattern)
    transitions: dict[tuple[int, str], int] = {}
    # ascending q: the fallback row transitions[(table[q-1], sym)] already exist
    for q in range(m):
        for sym in symbols:
            if sym == pattern[q]:
                transitions[(q, sym)] = q + 1
            elif q == 0:
                transitions[(q, sym)] = 0
            else:
                transitions[(q, sym)] = transitions[(table[q - 1], sym)]
    for sym in symbols:
        transitions[(m, sym)] = m
    return Dfa(
        states=m + 1,
        alphabet=symbols,
        transitions=transitions,
        start=0,
        accepting=frozenset({m}),
    )


def dfa_final_state(d: Dfa, text: str) -> int:
    """State reached from the start state after consuming all of `text`."""
    symbol_set = set(d.alphabet)
    state = d.start
    for ch in text:
        if ch not in symbol_set:
            raise InputSymbolError(f"input symbol {ch!r} not in alphabet")
        state = d.transitions[(state, ch)]
    return state


def dfa_run(d: Dfa, text: str) -> bool:
    """True iff the unique run of `d` on `text` ends in an accepting state."""
    return dfa_final_state(d, text) in d.accepting


def encode_dfa(d: Dfa) -> str:
    """Canonical line-based text encoding (ends with a newline).

    Transition lines are emitted sorted by (state, alphabet position), so
    encode(decode(encode(d))) is byte-identical to encode(d).

    The line format is space-delimited, so machines whose alphabet contains
    whitespace run fine in memory but cannot be encoded.
    """
    for sym in d.alphabet:
        if sym.isspace():
            raise ValueError(
                f"alphabet symbol {sym!r} cannot be encoded: the format is space-delimited"
            )
    accept_ids = sorted(d.accepting)
    lines = [
        _HEADER,
        f"states {d.states}",
        "alphabet " + "".join(d.alphabet),
        f"start {d.start}",
        "accept" + "".join(f" {q}" for q in accept_ids),
    ]
    for q in range(d.states):
        for sym in d.alphabet:
            lines.append(f"trans {q} {sym} {d.transitions[(q, sym)]}")
    return "\n".join(lines) + "\n"


def _decode_int(token: str, field: str) -> int:
    # canonical digits only: no sign, no leading zeros (except "0" itself)
    if not token.isdigit() or (len(token) > 1 and token[0] == "0"):
        raise DfaDecodeError(f"{field}: expected a canonical non-negative integer, got {token!r}")
    return int(token)


def decode_dfa(text: str) -> Dfa:
    """Parse the canonical encoding; strict, so re-encoding is byte-identical."""
    if not text.endswith("\n"):
        raise DfaDecodeError("trailer: encoding must end with a newline")
    lines = text[:-1].split("\n")
    if len(lines) < 5:
        raise DfaDecodeError("header: truncated encoding")
    if lines[0] != _HEADER:
        raise DfaDecodeError(f"header: expected {_HEADER!r}, got {lines[0]!r}")

    def expect(line: str, key: str) -> str:
        if line != key and not line.startswith(key + " "):
            raise DfaDecodeError(f"{key}: expected a {key!r} line, got {line!r}")
        return line[len(key):].lstrip(" ") if line != key else ""

    states = _decode_int(expect(lines[1], "states"), "states")
    if states < 1:
        raise DfaDecodeError("states: must be at least 1")
    alphabet_body = expect(lines[2], "alphabet")
    if not alphabet_body:
        raise DfaDecodeError("alphabet: must not be empty")
    alphabet = tuple(alphabet_body)
    if len(set(alphabet)) != len(alphabet):
        raise DfaDecodeError("alphabet: symbols must be distinct")
    start = _decode_int(expect(lines[3], "start"), "start")
    if start >= states:
        raise DfaDecodeError(f"start: state {start} out of range")
    accept_body = expect(lines[4], "accept")
    accepting: list[int] = []
    if accept_body:
        for token in accept_body.split(" "):
            accepting.append(_decode_int(token, "accept"))
    if accepting != sorted(set(accepting)):
        raise DfaDecodeError("accept: ids must be strictly ascending")
    for q in accepting:
        if q >= states:
            raise DfaDecodeError(f"accept: state {q} out of range")

    expected_trans = states * len(alphabet)
    trans_lines = lines[5:]
    if len(trans_lines) != expected_trans:
        raise DfaDecodeError(
            f"trans: expected {expected_trans} transition lines, got {len(trans_lines)}"
        )
    transitions: dict[tuple[int, str], int] = {}
    index = 0
    for q in range(states):
        for sym in alphabet:
            line = trans_lines[index]
            index += 1
            parts = line.split(" ")
            if len(parts) != 4 or parts[0] != "trans":
                raise DfaDecodeError(f"trans: malformed line {line!r}")
            if parts[1] != str(q) or parts[2] != sym:
                raise DfaDecodeError(
                    f"trans: expected entry for state {q} symbol {sym!r}, got {line!r}"
                )
            target = _decode_int(parts[3], "trans")
            if target >= states:
                raise DfaDecodeError(f"trans: target {target} out of range")
            transitions[(q, sym)] = target
    return Dfa(
        states=states,
        alphabet=alphabet,
        transitions=transitions,
        start=start,
        accepting=frozenset(accepting),
    )


def simulate_encoded_dfa(encoded: str, text: str) -> bool:
    """Decode and run: same verdict as dfa_run(decode_dfa(encoded), text)."""
    return dfa_run(decode_dfa(encoded), text)


class StepMachine:
    """A machine advanced one configuration per step() call.

    `status` is "running" until the machine halts with "accept" or "reject";
    once halted, further steps are no-ops.  Instances are single-owner: they
    hold mutable run state and must not be shared across threads.
    """

    status: str = RUNNING

    def step(self) -> None:
        raise NotImplementedError


class DfaStepMachine(StepMachine):
    """A DFA run exposed as a StepMachine: one input symbol per step.

    The verdict lands on the step that consumes the final symbol; on empty
    input the first step halts immediately.
    """

    def __init__(self, dfa: Dfa, text: str):
        symbol_set = set(dfa.alphabet)
        for ch in text:
            if ch not in symbol_set:
                raise InputSymbolError(f"input symbol {ch!r} not in alphabet")
        self._dfa = dfa
        self._text = text
        self._pos = 0
        self._state = dfa.start
        self.status = RUNNING

    def step(self) -> None:
        if self.status != RUNNING:
            return
        if self._pos < len(self._text):
            self._state = self._dfa.transitions[(self._state, self._text[self._pos])]
            self._pos += 1
        if self._pos == len(self._text):
            self.status = ACCEPT if self._state in self._dfa.accepting else REJECT


def dovetail_decide(m1: StepMachine, m2: StepMachine, fuel: int = 1_000_000) -> str:
    """Alternate single steps of m1 and m2 until one of them accepts.

    Returns "accept" the moment m1 accepts and "reject" the moment m2 accepts.
    A machine that halts rejecting simply stops contributing; if neither
    machine ever accepts, the guard returns "fuel-exhausted" after `fuel`
    total steps (halted machines still burn their turns, mirroring a harness
    that runs forever on a non-complementary pair).
    """
    if fuel < 1:
        raise ValueError("fuel must be positive")
    machines = (m1, m2)
    for total in range(fuel):
        machine = machines[total % 2]
        machine.step()
        if machine.status == ACCEPT:
            return ACCEPT if machine is m1 else REJECT
    return FUEL_EXHAUSTED
