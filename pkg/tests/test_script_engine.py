import filecmp
import os

import pytest

from fofproof.errors import DefinitionError, PlanError, WorkbenchError
from fofproof.logic import AnnotatedStatement
from fofproof.provers import BackendConfig, BuiltinBackend, ExternalBackend, Status, Verdict
from fofproof.script_engine import (Plan, PlanState, apply_assume_valid, apply_expand_definitions_in,
                                    expand_cases, export_tasks, plan, read_manifest, run)
from fofproof.tptp import parse_file, parse_formula, parse_script, print_formula

from helpers import corpus, fake_template, fixture

BASE = """
fof(a, axiom, p(c)).
fof(b, axiom, ![X]: (p(X) => q(X))).
fof(l1, checked_lemma, q(c)).
fof(l2, checked_lemma, p(c) & q(c)).
"""


# Introduces the symbols the safety definition is written over.
SAFETY_SIGNATURE = "fof(sig, axiom, ![T,A]: active_state(T,A) != criticalSection).\n"


def safety_script(extra: str):
    return parse_script(SAFETY_SIGNATURE + open(corpus("define_safety.p")).read() + extra)


def names(stmts):
    return [s.name for s in stmts]


def premises(p: Plan, task_id: str):
    return names(p.task(task_id).premises)


# Premise pools ---------------------------------------------------------------------


def test_each_lemma_sees_the_pool_so_far():
    p = plan(parse_script(BASE))
    assert p.ids == ["l1", "l2"]
    assert premises(p, "l1") == ["a", "b"]
    assert premises(p, "l2") == ["a", "b", "l1"]
    assert all(s.role == "axiom" for s in p.task("l2").premises)
    assert p.task("l2").conjecture.role == "conjecture"
    assert p.task("l2").depends == ("l1",)


def test_definition_is_an_axiom_premise():
    p = plan(safety_script("fof(use, checked_lemma, ![T,A]: (safe_for(T,A,A) | ~ safe_for(T,A,A))).\n"))
    assert premises(p, "use") == ["sig", "define_safety_for"]
    assert "safe_for" in p.definitions["define_safety_for"].head


def test_invalid_definition_is_reported_with_position():
    with pytest.raises(DefinitionError, match="2:"):
        plan(parse_script("fof(a, axiom, p(c)).\nfof(d, checked_definition, ![X]: (p(X) <=> q(X))).\n"))


def test_pool_monotonicity():
    script = parse_file(corpus("dijkstra_safety_cases.p"))
    p = plan(script)
    pool_names = names(p.pool)
    for t in p.tasks:
        assert set(premises(p, t.id)) <= set(pool_names) | {n for n in names(t.premises) if "_case_" in n}


# assume_previous_valid ----------------------------------------------------------------


def test_assume_mid_script_skips_earlier_lemmas():
    text = BASE.replace("fof(l2", "tpi(skip, assume_previous_valid, $true).\nfof(l2")
    p = plan(parse_script(text))
    assert p.ids == ["l2"] and p.skipped == ["l1"]
    assert premises(p, "l2") == ["a", "b", "l1"]
    assert p.task("l2").depends == ()
    # identical to the unskipped plan apart from the skipped task
    assert p.task("l2") == plan(parse_script(BASE)).task("l2")


def test_assume_before_any_lemma_is_noop():
    text = "tpi(skip, assume_previous_valid, $true).\n" + BASE
    p = plan(parse_script(text))
    assert p.ids == ["l1", "l2"] and p.skipped == []


def test_assume_twice_is_idempotent():
    once = BASE.replace("fof(l2", "tpi(s1, assume_previous_valid, $true).\nfof(l2")
    twice = once.replace("fof(l2", "tpi(s2, assume_previous_valid, $true).\nfof(l2")
    p1, p2 = plan(parse_script(once)), plan(parse_script(twice))
    assert p1.tasks == p2.tasks and p1.skipped == p2.skipped


def test_apply_assume_valid_on_state():
    from fofproof.script_engine import _prepare
    state = PlanState(_prepare(parse_script(BASE)))
    for stmt in parse_script(BASE).statements:
        if stmt.role == "checked_lemma":
            state.plan_lemma(stmt)
        else:
            state.add_to_pool(stmt)
    apply_assume_valid(state)
    assert state.tasks == [] and state.skipped == ["l1", "l2"]


# restrict_premises ----------------------------------------------------------------


def test_restrict_premises():
    text = BASE + "tpi(r, restrict_premises, l2:[a]).\n"
    p = plan(parse_script(text))
    assert premises(p, "l2") == ["a"]
    assert premises(p, "l1") == ["a", "b"]
    assert p.task("l2").depends == ()


def test_restrict_to_full_pool_changes_nothing():
    text = BASE + "tpi(r, restrict_premises, l2:[a, b, l1]).\n"
    assert plan(parse_script(text)).tasks == plan(parse_script(BASE)).tasks


def test_restrict_to_later_lemma_fails():
    text = BASE + "tpi(r, restrict_premises, l1:[l2]).\n"
    with pytest.raises(PlanError, match="premise not yet available"):
        plan(parse_script(text))


@pytest.mark.parametrize("instr,message", [
    ("tpi(r, restrict_premises, nope:[a]).", "unknown lemma"),
    ("tpi(r, restrict_premises, l2:[ghost]).", "unknown statement"),
    ("tpi(r, add_cases, l1 => ghost).", "unknown statement"),
    ("tpi(r, add_cases, l1 => a).", "not a checked_lemma"),
    ("tpi(r, expand_definitions_in, l1:[a]).", "not a validated checked_definition"),
])
def test_instruction_errors(instr, message):
    with pytest.raises(PlanError, match=message):
        plan(parse_script(BASE + instr + "\n"))


# --from ------------------------------------------------------------------------------


def test_start_from_skips_earlier_lemmas():
    p = plan(parse_script(BASE), start_from="l2")
    assert p.ids == ["l2"] and p.skipped == ["l1"]
    with pytest.raises(PlanError, match="no checked_lemma"):
        plan(parse_script(BASE), start_from="a")


# Cases ---------------------------------------------------------------------------------


def _safety_cases():
    script = parse_file(corpus("safety_add_cases.p"))
    return script.get("safety_conditions_local_cases"), script.get("safety_conditions_local_simplified")


def test_expand_cases_on_safety_example():
    cases, target = _safety_cases()
    out = expand_cases(cases, target)
    assert names(out) == [f"safety_conditions_local_simplified_case_{i}" for i in (1, 2, 3)]
    shown = parse_file(corpus("safety_generated_case.p")).statements[0]
    assert out[0].formula == shown.formula
    assert "& ~ passed(T,A,B)) =>" in print_formula(out[0].formula)


def test_expand_cases_single_case():
    cases = AnnotatedStatement("c", "checked_lemma", parse_formula("![X]: p(X)"))
    target = AnnotatedStatement("t", "checked_lemma", parse_formula("![X]: q(X)"))
    (only,) = expand_cases(cases, target)
    assert print_formula(only.formula) == "![X]: (p(X) => q(X))"


def test_expand_cases_subsequence_prefix():
    cases = AnnotatedStatement("c", "checked_lemma", parse_formula("![T,A]: (p(T,A) | ~ p(T,A))"))
    target = AnnotatedStatement("t", "checked_lemma", parse_formula("![T,A,B]: (h(A,B) => g(T,B))"))
    out = expand_cases(cases, target)
    assert print_formula(out[1].formula) == "![T,A,B]: ((h(A,B) & ~ p(T,A)) => g(T,B))"


def test_expand_cases_prefix_mismatch():
    cases = AnnotatedStatement("c", "checked_lemma", parse_formula("![B,A]: (p(A) | p(B))"))
    target = AnnotatedStatement("t", "checked_lemma", parse_formula("![A,B]: q(A,B)"))
    with pytest.raises(PlanError, match="sub-sequence"):
        expand_cases(cases, target)


def test_add_cases_plan_shape():
    p = plan(parse_file(corpus("safety_add_cases.p")))
    target = "safety_conditions_local_simplified"
    assert p.ids == ["safety_conditions_local_cases"] + [f"{target}_case_{i}" for i in (1, 2, 3)] + [target]
    assert premises(p, target) == ["safety_conditions_local_cases"] + [f"{target}_case_{i}" for i in (1, 2, 3)]
    assert set(p.task(target).depends) == {"safety_conditions_local_cases"} | {
        f"{target}_case_{i}" for i in (1, 2, 3)}
    assert target in names(p.pool)


def test_split_marker():
    p = plan(parse_file(corpus("pipeline.p")))
    assert "l2_split_part_1" in p.ids and "l2_split_part_2" in p.ids


# Expansion -----------------------------------------------------------------------------


def test_expand_definitions_in_lemma():
    p = plan(safety_script("fof(l, checked_lemma, ![T]: safe_for(T, c1, c2)).\n"
                           "tpi(x, expand_definitions_in, l:[define_safety_for]).\n"))
    goal = print_formula(p.task("l").conjecture.formula)
    assert "safe_for" not in goal and "active_state(T,c1) = criticalSection" in goal


def test_expand_with_empty_list_is_noop():
    text = BASE + "tpi(x, expand_definitions_in, l1:[]).\n"
    assert plan(parse_script(text)).tasks == plan(parse_script(BASE)).tasks


def test_apply_expand_definitions_in_script():
    script = parse_file(corpus("pipeline.p"))
    out = apply_expand_definitions_in(script)
    assert print_formula(out.get("l3").formula) == "p(a) & q(a)"
    forced = apply_expand_definitions_in(script, ["def_r"])
    assert print_formula(forced.get("def_r").formula) == print_formula(script.get("def_r").formula)
    with pytest.raises(PlanError):
        apply_expand_definitions_in(script, ["l1"])


# Running ---------------------------------------------------------------------------------


class ScriptedBackend:
    """Returns fixed verdicts and records the order of calls."""

    name = "scripted"

    def __init__(self, verdicts):
        self.verdicts = verdicts
        self.calls = []

    def prove(self, task, timeout):
        self.calls.append(task.id)
        v = self.verdicts.get(task.id, Status.PROVED)
        if isinstance(v, Exception):
            raise v
        return Verdict(v, backend=self.name)


def test_run_two_tautologies():
    script = parse_script("fof(t1, checked_lemma, p | ~ p).\nfof(t2, checked_lemma, q => q).\n")
    report = run(plan(script), BuiltinBackend(), timeout=5)
    assert report.success
    assert [report.verdicts[i].status for i in report.order] == [Status.PROVED, Status.PROVED]


def test_run_empty_plan():
    report = run(Plan(), BuiltinBackend())
    assert report.success and report.order == []


def test_failed_dependency_not_attempted():
    backend = ScriptedBackend({"l1": Status.UNKNOWN})
    report = run(plan(parse_script(BASE)), backend)
    assert report.verdicts["l2"].status is Status.NOT_ATTEMPTED
    assert backend.calls == ["l1"] and not report.success


def test_stop_on_failure():
    text = BASE + "fof(l3, checked_lemma, p(c)).\ntpi(r, restrict_premises, l3:[a]).\n"
    backend = ScriptedBackend({"l1": Status.TIMEOUT})
    report = run(plan(parse_script(text)), backend, stop_on_failure=True)
    assert report.verdicts["l3"].status is Status.NOT_ATTEMPTED
    assert backend.calls == ["l1"]
    keep_going = run(plan(parse_script(text)), ScriptedBackend({"l1": Status.TIMEOUT}))
    assert keep_going.verdicts["l3"].status is Status.PROVED


def test_counter_satisfiable_fails_pipeline():
    backend = ExternalBackend(BackendConfig("fake", fake_template("--status", "CounterSatisfiable")))
    report = run(plan(parse_script(BASE)), backend, timeout=10)
    assert report.verdicts["l1"].status is Status.REFUTED
    assert not report.success


def test_backend_exception_becomes_backend_error():
    report = run(plan(parse_script(BASE)), ScriptedBackend({"l1": RuntimeError("boom")}))
    assert report.verdicts["l1"].status is Status.BACKEND_ERROR
    assert "boom" in report.verdicts["l1"].note


def test_parallel_respects_dependencies():
    p = plan(parse_file(corpus("safety_add_cases.p")))
    backend = ScriptedBackend({})
    report = run(p, backend, parallel=4)
    assert report.success
    target = "safety_conditions_local_simplified"
    assert report.completion_order.index(target) == len(report.completion_order) - 1


def test_report_rendering():
    report = run(plan(parse_script(BASE)), ScriptedBackend({}))
    assert report.lines()[0].startswith("l1\tProved\t")
    assert report.table().splitlines()[-1] == "proved 2/2; skipped 0"


# Export ----------------------------------------------------------------------------------


def test_export_matches_golden(tmp_path):
    p = plan(parse_file(fixture("five.p")))
    manifest = export_tasks(p, str(tmp_path))
    assert manifest == [("l1", "l1.p", ()), ("l2", "l2.p", ("l1",))]
    golden = fixture("golden", "five")
    for name in ("l1.p", "l2.p", "manifest.tsv"):
        assert filecmp.cmp(tmp_path / name, os.path.join(golden, name), shallow=False), name


def test_export_is_deterministic(tmp_path):
    script = parse_file(corpus("pipeline.p"))
    export_tasks(plan(script), str(tmp_path / "one"))
    export_tasks(plan(script), str(tmp_path / "two"))
    cmp = filecmp.dircmp(tmp_path / "one", tmp_path / "two")
    assert not cmp.diff_files and not cmp.left_only and not cmp.right_only


def test_exported_restricted_task(tmp_path):
    text = BASE + "tpi(r, restrict_premises, l2:[a]).\n"
    export_tasks(plan(parse_script(text)), str(tmp_path))
    exported = parse_file(str(tmp_path / "l2.p"))
    assert [(s.name, s.role) for s in exported.statements] == [("a", "axiom"), ("l2", "conjecture")]


def test_export_round_trip(tmp_path):
    p = plan(parse_file(corpus("pipeline.p")))
    rows = export_tasks(p, str(tmp_path))
    assert read_manifest(str(tmp_path / "manifest.tsv")) == rows
    for task_id, filename, _ in rows:
        again = plan(parse_file(str(tmp_path / filename)))
        assert again.tasks == [p.task(task_id)]


def test_export_to_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(WorkbenchError, match="file"):
        export_tasks(plan(parse_script(BASE)), str(blocker))
