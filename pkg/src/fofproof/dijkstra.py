"""Dijkstra's mutual-exclusion protocol as a first-order specification.

Process ``i`` of ``n`` runs the loop below; each numbered location is one
atomic step, and only ``active_agent(T)`` moves at moment ``T``::

    set_unstealable  Stealable[i] := false
    check_turn       if turn != i goto mark_outside else goto mark_inside
    mark_outside     Outside[i] := true
    try_steal        if Stealable[turn] then turn := i ; goto check_turn
    mark_inside      Outside[i] := false ; counter[i] := 1
    scan             if counter[i] != i and not Outside[counter[i]] goto check_turn
                     elif counter[i] = n goto criticalSection
                     else counter[i] += 1
    criticalSection
    release_outside  Outside[i] := true
    release_stealable Stealable[i] := true
    remainder        goto set_unstealable

Booleans are the constants ``btrue``/``bfalse`` and counter values are the
constants ``c0..cn``, so everything stays inside untyped FOF.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import WorkbenchError
from .formula_ops import formula_symbols, recognize_definition
from .logic import ProofScript
from .model_eval import PartialModel, TruthValue, evaluate
from .tptp.parser import parse_script

SET_UNSTEALABLE = "loc_set_unstealable"
CHECK_TURN = "loc_check_turn"
MARK_OUTSIDE = "loc_mark_outside"
TRY_STEAL = "loc_try_steal"
MARK_INSIDE = "loc_mark_inside"
SCAN = "loc_scan"
CRITICAL = "criticalSection"
RELEASE_OUTSIDE = "loc_release_outside"
RELEASE_STEALABLE = "loc_release_stealable"
REMAINDER = "loc_remainder"
LOCATIONS = (SET_UNSTEALABLE, CHECK_TURN, MARK_OUTSIDE, TRY_STEAL, MARK_INSIDE, SCAN, CRITICAL,
             RELEASE_OUTSIDE, RELEASE_STEALABLE, REMAINDER)
START = SET_UNSTEALABLE
INITIAL = "initial"
BTRUE, BFALSE = "btrue", "bfalse"
FUNCTIONS = (("active_state", 2), ("counter", 2), ("turn", 1), ("active_agent", 1),
             ("next_moment", 1), ("outside", 2), ("stealable", 2))
DEFINED = (("passed", 3), ("passed_in_critical_for", 2), ("passed_exclusive_for", 3), ("safe_for", 3))
MAX_AGENTS = 9

SAFETY_DEFINITION = """fof(define_safety_for, checked_definition,
      ![T,A1,A2]: (safe_for(T,A1,A2)<=>(
         (active_state(T,A1)=criticalSection
           & active_state(T,A2)=criticalSection)
         => A1=A2)))."""


def agents(n: int) -> list[str]:
    return [f"a{i}" for i in range(1, n + 1)]


def counters(n: int) -> list[str]:
    return [f"c{j}" for j in range(n + 1)]


def signature(n: int) -> frozenset:
    """Every (symbol, arity) a generated spec may use, defined names excluded."""
    consts = [INITIAL, *LOCATIONS, *agents(n), BTRUE, BFALSE, *counters(n)]
    return frozenset(FUNCTIONS) | {(c, 0) for c in consts}


def _check_n(n: int) -> None:
    if not isinstance(n, int) or not 2 <= n <= MAX_AGENTS:
        raise WorkbenchError(f"agent count must be between 2 and {MAX_AGENTS}, got {n!r}")


# Specification text ----------------------------------------------------------------


def _distinct(names) -> str:
    return " & ".join(f"{a} != {b}" for a, b in itertools.combinations(names, 2))


def _one_of(term: str, names) -> str:
    return " | ".join(f"{term} = {v}" for v in names)


def _next(value: str, fn: str) -> str:
    """``fn`` at the next moment equals ``value`` (``=`` keeps it unchanged)."""
    args = "(next_moment(T),A)" if fn != "turn" else "(next_moment(T))"
    if value == "=":
        value = f"{fn}(T,A)" if fn != "turn" else "turn(T)"
    return f"{fn}{args} = {value}"


def _step(loc: str, effect: str) -> str:
    return (f"![T,A]: ((active_agent(T) = A & active_state(T,A) = {loc}) =>\n"
            f"    ({effect}))")


def _keep(*fns) -> list[str]:
    return [_next("=", fn) for fn in fns]


def _transitions(n: int) -> list[tuple[str, str]]:
    state = lambda loc: f"active_state(next_moment(T),A) = {loc}"
    out = [
        (SET_UNSTEALABLE, " & ".join([state(CHECK_TURN), _next(BFALSE, "stealable"),
                                      *_keep("counter", "outside", "turn")])),
        (CHECK_TURN, " & ".join([f"(turn(T) != A => {state(MARK_OUTSIDE)})",
                                 f"(turn(T) = A => {state(MARK_INSIDE)})",
                                 *_keep("counter", "outside", "stealable", "turn")])),
        (MARK_OUTSIDE, " & ".join([state(TRY_STEAL), _next(BTRUE, "outside"),
                                   *_keep("counter", "stealable", "turn")])),
        (TRY_STEAL, " & ".join([state(CHECK_TURN),
                                "(stealable(T,turn(T)) = btrue => turn(next_moment(T)) = A)",
                                "(stealable(T,turn(T)) != btrue => turn(next_moment(T)) = turn(T))",
                                *_keep("counter", "outside", "stealable")])),
        (MARK_INSIDE, " & ".join([state(SCAN), _next(BFALSE, "outside"), _next("c1", "counter"),
                                  *_keep("stealable", "turn")])),
    ]
    scan = []
    for j in range(1, n + 1):
        a, c = f"a{j}", f"c{j}"
        go_on = (f"{state(CRITICAL)} & counter(next_moment(T),A) = {c}" if j == n else
                 f"{state(SCAN)} & counter(next_moment(T),A) = c{j + 1}")
        scan.append(f"(counter(T,A) = {c} =>\n"
                    f"      (((A = {a} | outside(T,{a}) != bfalse) => ({go_on}))\n"
                    f"       & ((A != {a} & outside(T,{a}) = bfalse) =>\n"
                    f"          ({state(CHECK_TURN)} & counter(next_moment(T),A) = {c}))))")
    out.append((SCAN, "\n     & ".join(scan + _keep("outside", "stealable", "turn"))))
    out += [
        (CRITICAL, " & ".join([state(RELEASE_OUTSIDE), *_keep("counter", "outside", "stealable", "turn")])),
        (RELEASE_OUTSIDE, " & ".join([state(RELEASE_STEALABLE), _next(BTRUE, "outside"),
                                      *_keep("counter", "stealable", "turn")])),
        (RELEASE_STEALABLE, " & ".join([state(REMAINDER), _next(BTRUE, "stealable"),
                                        *_keep("counter", "outside", "turn")])),
        (REMAINDER, " & ".join([state(SET_UNSTEALABLE), *_keep("counter", "outside", "stealable", "turn")])),
    ]
    return out


def _passed_body(n: int) -> str:
    checked = []
    for j in range(1, n):
        later = " | ".join(f"counter(T,A) = c{k}" for k in range(j + 1, n + 1))
        checked.append(f"(B = a{j} & ({later}))")
    return (f"active_state(T,A) = criticalSection\n"
            f"        | (active_state(T,A) = {SCAN} & ({' | '.join(checked)}))")


def spec_text(n: int) -> str:
    """TPTP text of the generated specification for ``n`` agents."""
    _check_n(n)
    ags, cs = agents(n), counters(n)
    out = [f"% Dijkstra mutual exclusion, {n} agents, one atomic step per location.", ""]
    out.append("% Distinct constants and ranges of the state functions.")
    out.append(f"fof(distinct_agents, axiom, {_distinct(ags)}).")
    out.append(f"fof(distinct_locations, axiom, {_distinct(LOCATIONS)}).")
    out.append(f"fof(distinct_booleans, axiom, {BTRUE} != {BFALSE}).")
    out.append(f"fof(distinct_counters, axiom, {_distinct(cs)}).")
    out.append(f"fof(range_active_agent, axiom, ![T]: ({_one_of('active_agent(T)', ags)})).")
    out.append(f"fof(range_turn, axiom, ![T]: ({_one_of('turn(T)', ags)})).")
    out.append(f"fof(range_active_state, axiom, ![T,A]: ({_one_of('active_state(T,A)', LOCATIONS)})).")
    out.append(f"fof(range_counter, axiom, ![T,A]: ({_one_of('counter(T,A)', cs)})).")
    out.append(f"fof(range_outside, axiom, ![T,A]: ({_one_of('outside(T,A)', (BTRUE, BFALSE))})).")
    out.append(f"fof(range_stealable, axiom, ![T,A]: ({_one_of('stealable(T,A)', (BTRUE, BFALSE))})).")
    out += ["", "% Transitions of the active agent, one axiom per location."]
    for loc, effect in _transitions(n):
        out.append(f"fof(step_{loc.removeprefix('loc_')}, axiom,\n  {_step(loc, effect)}).")
    out += ["", "% Agents that are not active keep all their variables."]
    out.append("fof(frame_inactive, axiom,\n  ![T,A]: (active_agent(T) != A =>\n"
               "    (active_state(next_moment(T),A) = active_state(T,A)\n"
               "     & counter(next_moment(T),A) = counter(T,A)\n"
               "     & outside(next_moment(T),A) = outside(T,A)\n"
               "     & stealable(next_moment(T),A) = stealable(T,A)))).")
    out += ["", "% Initial moment."]
    out.append(f"fof(initial_state, axiom, ![A]: active_state(initial,A) = {START}).")
    out.append("fof(initial_counter, axiom, ![A]: counter(initial,A) = c0).")
    out.append("fof(initial_outside, axiom, ![A]: outside(initial,A) = btrue).")
    out.append("fof(initial_stealable, axiom, ![A]: stealable(initial,A) = btrue).")
    out.append("fof(initial_turn, axiom, turn(initial) = a1).")
    out += ["", "% Safety of a moment for a pair of agents.", SAFETY_DEFINITION, ""]
    out.append("% The three definitions below are a reconstruction: A has passed B once A has")
    out.append("% declared its intent and its scan has moved beyond B (or A is critical).")
    out.append(f"fof(define_passed, checked_definition,\n  ![T,A,B]: (passed(T,A,B) <=>\n"
               f"        ({_passed_body(n)}))).")
    out.append("fof(define_passed_in_critical_for, checked_definition,\n"
               "  ![T,A]: (passed_in_critical_for(T,A) <=>\n"
               "        (active_state(T,A) = criticalSection => ![B]: passed(T,A,B)))).")
    out.append("fof(define_passed_exclusive_for, checked_definition,\n"
               "  ![T,A,B]: (passed_exclusive_for(T,A,B) <=>\n"
               "        ((passed(T,A,B) & passed(T,B,A)) => A = B))).")
    out += ["", "% Inductive-step scaffold.  The invariant itself is research material; see the",
            "% shipped invariant fixture for one that works with two agents."]
    inv = ("(passed_exclusive_for({t},A,B) & passed_in_critical_for({t},A)"
           " & passed_in_critical_for({t},B))")
    out.append(f"fof(invariant_step, checked_lemma,\n  ![T,A,B]: ({inv.format(t='T')}\n"
               f"    => {inv.format(t='next_moment(T)')})).")
    out.append(f"fof(invariant_initial, checked_lemma,\n  ![A,B]: {inv.format(t='initial')}).")
    out.append("tpi(assume_research_lemmas, assume_previous_valid, $true).")
    out.append(f"fof(invariant_implies_safety, checked_lemma,\n  ![T,A,B]: ({inv.format(t='T')}\n"
               f"    => safe_for(T,A,B))).")
    out.append("tpi(focus_invariant_implies_safety, restrict_premises,\n"
               "  invariant_implies_safety:[define_safety_for, define_passed_in_critical_for,\n"
               "                            define_passed_exclusive_for]).")
    return "\n".join(out) + "\n"


def generate_spec(n: int) -> ProofScript:
    """Parsed specification for ``n`` agents; its definitions are validated."""
    script = parse_script(spec_text(n), path=f"<dijkstra n={n}>")
    known: set = set()
    for stmt in script.statements:
        if stmt.role == "checked_definition":
            known.add(recognize_definition(stmt, known).symbol)
        known |= formula_symbols(stmt.formula)
    return script


# Simulation ------------------------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    state: tuple[str, ...]
    counter: tuple[int, ...]
    outside: tuple[bool, ...]
    stealable: tuple[bool, ...]
    turn: int

    def agent_view(self, i: int) -> tuple:
        return (self.state[i], self.counter[i], self.outside[i], self.stealable[i])


@dataclass
class RunTrace:
    n: int
    schedule: tuple[int, ...]
    snapshots: list[Snapshot] = field(default_factory=list)

    @property
    def moments(self) -> range:
        return range(len(self.snapshots))


def initial_snapshot(n: int) -> Snapshot:
    return Snapshot((START,) * n, (0,) * n, (True,) * n, (True,) * n, 1)


def step(s: Snapshot, i: int, n: int) -> Snapshot:
    """Agent ``i`` (1-based) executes the step at its current location."""
    k = i - 1
    state, counter, outside, stealable = list(s.state), list(s.counter), list(s.outside), list(s.stealable)
    turn = s.turn
    loc = state[k]
    if loc == SET_UNSTEALABLE:
        stealable[k], state[k] = False, CHECK_TURN
    elif loc == CHECK_TURN:
        state[k] = MARK_OUTSIDE if turn != i else MARK_INSIDE
    elif loc == MARK_OUTSIDE:
        outside[k], state[k] = True, TRY_STEAL
    elif loc == TRY_STEAL:
        if stealable[turn - 1]:
            turn = i
        state[k] = CHECK_TURN
    elif loc == MARK_INSIDE:
        outside[k], counter[k], state[k] = False, 1, SCAN
    elif loc == SCAN:
        j = counter[k]
        if j != i and not outside[j - 1]:
            state[k] = CHECK_TURN
        elif j == n:
            state[k] = CRITICAL
        else:
            counter[k] = j + 1
    elif loc == CRITICAL:
        state[k] = RELEASE_OUTSIDE
    elif loc == RELEASE_OUTSIDE:
        outside[k], state[k] = True, RELEASE_STEALABLE
    elif loc == RELEASE_STEALABLE:
        stealable[k], state[k] = True, REMAINDER
    elif loc == REMAINDER:
        state[k] = SET_UNSTEALABLE
    return Snapshot(tuple(state), tuple(counter), tuple(outside), tuple(stealable), turn)


def simulate(n: int, k: int, schedule) -> RunTrace:
    _check_n(n)
    schedule = tuple(schedule)
    if len(schedule) != k:
        raise WorkbenchError(f"schedule has {len(schedule)} entries but k = {k}")
    bad = [s for s in schedule if not isinstance(s, int) or not 1 <= s <= n]
    if bad:
        raise WorkbenchError(f"schedule entries must be agent indices 1..{n}, got {bad}")
    trace = RunTrace(n, schedule, [initial_snapshot(n)])
    for i in schedule:
        trace.snapshots.append(step(trace.snapshots[-1], i, n))
    return trace


def moment(m: int) -> str:
    return f"t{m}"


def trace_model(trace: RunTrace) -> PartialModel:
    """Total interpretation of the protocol symbols over moments 0..k.

    ``next_moment`` of the last moment and ``active_agent`` of the last
    moment stay undefined.
    """
    n = trace.n
    consts = [*LOCATIONS, *agents(n), BTRUE, BFALSE, *counters(n)]
    domain = [moment(m) for m in trace.moments] + consts
    funs = {(c, ()): c for c in consts}
    funs[(INITIAL, ())] = moment(0)
    b = lambda v: BTRUE if v else BFALSE
    last = len(trace.snapshots) - 1
    for m, s in enumerate(trace.snapshots):
        t = moment(m)
        funs[("turn", (t,))] = f"a{s.turn}"
        if m < last:
            funs[("next_moment", (t,))] = moment(m + 1)
            funs[("active_agent", (t,))] = f"a{trace.schedule[m]}"
        for i, a in enumerate(agents(n)):
            funs[("active_state", (t, a))] = s.state[i]
            funs[("counter", (t, a))] = f"c{s.counter[i]}"
            funs[("outside", (t, a))] = b(s.outside[i])
            funs[("stealable", (t, a))] = b(s.stealable[i])
    return PartialModel(tuple(domain), funs)


def interpret_definitions(model: PartialModel, script: ProofScript, elements=None) -> PartialModel:
    """Add tables for the predicates defined in ``script``.

    Each defined atom over ``elements`` (default: the whole domain) gets the
    Kleene value of its body; tuples where the body is unknown stay undefined.
    """
    elements = model.domain if elements is None else tuple(elements)
    known: set = set()
    preds = dict(model.predicates)
    for stmt in script.statements:
        if stmt.role != "checked_definition":
            known |= formula_symbols(stmt.formula)
            continue
        d = recognize_definition(stmt, known)
        known.add(d.symbol)
        if d.kind != "predicate_iff":
            continue
        current = PartialModel(model.domain, model.functions, preds)
        for args in itertools.product(elements, repeat=d.arity):
            v = evaluate(d.body, current, dict(zip(d.params, args)))
            if v is not TruthValue.UNKNOWN:
                preds[(d.head, args)] = v is TruthValue.TRUE
    return PartialModel(model.domain, model.functions, preds)


def generate_run(n: int, k: int, schedule, with_definitions: bool = True) -> PartialModel:
    """Simulate ``schedule`` and return the run as a partial model."""
    trace = simulate(n, k, schedule)
    model = trace_model(trace)
    if with_definitions:
        elements = [moment(m) for m in trace.moments] + agents(n)
        model = interpret_definitions(model, generate_spec(n), elements)
    return model


def parse_schedule(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise WorkbenchError(f"schedule must be comma-separated agent indices, got {text!r}") from None


def fixture_schedules(n: int = 2) -> list[list[int]]:
    """Deterministic schedules used by the tests: solo, alternating, bursty and seeded random."""
    out = [[1] * 12, [2] * 12, [(m % n) + 1 for m in range(12)], [1, 1, 1, 1, 2, 2, 2, 2, 2, 1, 1, 1]]
    out.append([1] * 6 + [2] * 24)
    out.append([((m // 3) % n) + 1 for m in range(30)])
    rng = random.Random(2 * n)
    for size in (12, 20, 30, 30):
        out.append([rng.randint(1, n) for _ in range(size)])
    return out
