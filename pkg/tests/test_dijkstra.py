import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fofproof import dijkstra as dj
from fofproof.errors import WorkbenchError
from fofproof.formula_ops import free_variables, formula_symbols
from fofproof.model_eval import TRUE, PartialModel, check_axioms, evaluate
from fofproof.script_engine import plan
from fofproof.tptp import parse_file, parse_script, print_script

from helpers import corpus


@pytest.fixture(scope="module")
def spec2():
    return dj.generate_spec(2)


def _safety_body(spec):
    return spec.get("define_safety_for").formula.body.rhs


def test_symbol_table_is_signature_plus_defined(spec2):
    table = plan(spec2).symbol_table
    assert table == dj.signature(2) | set(dj.DEFINED)


def test_safety_definition_is_the_shipped_block(spec2):
    shipped = parse_file(corpus("define_safety.p")).statements[0]
    assert spec2.get("define_safety_for") == shipped


@pytest.mark.parametrize("n", [2, 3, dj.MAX_AGENTS])
def test_spec_prints_stably(n):
    text = print_script(dj.generate_spec(n))
    assert print_script(parse_script(text)) == text


@pytest.mark.parametrize("n", [0, 1, dj.MAX_AGENTS + 1, "2"])
def test_agent_count_range(n):
    with pytest.raises(WorkbenchError):
        dj.generate_spec(n)


def test_schedule_validation():
    with pytest.raises(WorkbenchError, match="k = 3"):
        dj.simulate(2, 3, [1, 2])
    with pytest.raises(WorkbenchError, match="1..2"):
        dj.simulate(2, 2, [1, 3])
    with pytest.raises(WorkbenchError):
        dj.parse_schedule("1,x")
    assert dj.parse_schedule("1, 2,1") == [1, 2, 1]


def test_scaffold_lemmas_are_closed_and_in_signature(spec2):
    allowed = dj.signature(2) | set(dj.DEFINED)
    for name in ("invariant_step", "invariant_initial", "invariant_implies_safety"):
        f = spec2.get(name).formula
        assert not free_variables(f)
        assert formula_symbols(f) <= allowed


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, n), max_size=40))))
def test_frame_property(args):
    n, schedule = args
    trace = dj.simulate(n, len(schedule), schedule)
    for m, active in enumerate(schedule):
        before, after = trace.snapshots[m], trace.snapshots[m + 1]
        for i in range(n):
            if i + 1 != active:
                assert before.agent_view(i) == after.agent_view(i)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, n), max_size=60))))
def test_simulation_is_mutually_exclusive(args):
    n, schedule = args
    trace = dj.simulate(n, len(schedule), schedule)
    for s in trace.snapshots:
        assert sum(loc == dj.CRITICAL for loc in s.state) <= 1


def test_empty_run_is_initial_snapshot(spec2):
    trace = dj.simulate(2, 0, [])
    assert trace.snapshots == [dj.initial_snapshot(2)]
    report = check_axioms(spec2, dj.generate_run(2, 0, []))
    assert report.false == []
    assert "initial_turn" in report.true


def test_solo_agent_reaches_critical_section(spec2):
    trace = dj.simulate(2, 12, [1] * 12)
    assert any(s.state[0] == dj.CRITICAL for s in trace.snapshots)
    model = dj.generate_run(2, 12, [1] * 12)
    body = _safety_body(spec2)
    for m in trace.moments:
        for a in dj.agents(2):
            for b in dj.agents(2):
                assert evaluate(body, model, {"T": dj.moment(m), "A1": a, "A2": b}) is TRUE


def test_fixture_runs_satisfy_the_axioms(spec2):
    schedules = [s for s in dj.fixture_schedules(2) if len(s) == 12]
    assert len(schedules) == 5
    for schedule in schedules:
        report = check_axioms(spec2, dj.generate_run(2, 12, schedule))
        assert report.false == [], schedule
        assert "define_safety_for" in report.unknown


def test_long_run_satisfies_the_axioms(spec2):
    schedule = max(dj.fixture_schedules(2), key=len)
    model = dj.generate_run(2, len(schedule), schedule, with_definitions=False)
    assert check_axioms(spec2, model).false == []


def test_safety_holds_on_fixture_runs(spec2):
    critical = 0
    for schedule in dj.fixture_schedules(2):
        trace = dj.simulate(2, len(schedule), schedule)
        model = dj.trace_model(trace)
        body = _safety_body(spec2)
        for m in trace.moments:
            critical += trace.snapshots[m].state.count(dj.CRITICAL)
            for a in dj.agents(2):
                for b in dj.agents(2):
                    assert evaluate(body, model, {"T": dj.moment(m), "A1": a, "A2": b}) is TRUE
    assert critical > 0


def test_range_violation_is_caught(spec2):
    model = dj.generate_run(2, 4, [1, 2, 1, 2], with_definitions=False)
    broken = model.extended(functions={("turn", ("t1",)): dj.SCAN})
    assert "range_turn" in check_axioms(spec2, broken).false


def test_run_model_text_round_trip():
    model = dj.generate_run(2, 5, [1, 2, 2, 1, 1])
    assert PartialModel.loads(model.dumps()) == model


def test_shipped_run_model_matches_generator():
    with open(corpus("dijkstra_run_n2.model")) as fh:
        shipped = PartialModel.loads(fh.read())
    assert shipped == dj.generate_run(2, 12, [1, 2] * 6, with_definitions=False)


def test_safety_case_analysis_proves_against_generated_spec():
    from fofproof.provers import BuiltinBackend
    from fofproof.script_engine import run
    p = plan(parse_file(corpus("dijkstra_safety_cases.p")))
    report = run(p, BuiltinBackend(), timeout=20)
    assert report.success, report.table()
    assert len(p.tasks) == 6


def test_invariant_initial_lemma_proves():
    from fofproof.provers import BuiltinBackend
    from fofproof.script_engine import run
    p = plan(parse_file(corpus("dijkstra_invariant_n2.p")))
    report = run(p, BuiltinBackend(), timeout=30)
    assert report.verdicts["inv_initial"].status.value == "Proved", report.table()
