"""Turn a proof script into prover tasks and run or export them.

Every checked lemma becomes a conjecture to be proved from the premise pool
accumulated so far (axioms, validated checked definitions and earlier
lemmas, all re-roled as axioms); once planned, the lemma joins the pool.
TPI instructions adjust this: ``add_cases`` replaces a lemma's task by case
tasks plus a recombination task, ``restrict_premises`` narrows one lemma's
premises, ``expand_definitions_in`` rewrites a statement before use, and
``assume_previous_valid`` drops the tasks of all earlier lemmas.
"""

from __future__ import annotations

import os
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field

from .errors import PlanError, WorkbenchError
from .formula_ops import (Definition, expand_definitions, formula_symbols, recognize_definition,
                          split_conjunction, strip_universal)
from .logic import (ADD_CASES, ASSUME_PREVIOUS_VALID, EXPAND_DEFINITIONS_IN, IMPLIES, OR,
                    RESTRICT_PREMISES, AnnotatedStatement, Binary, ProofScript, TpiInstruction,
                    conj, flatten, forall, implies)
from .provers.verdict import Status, Verdict
from .tptp.printer import print_statement

PREMISE_ROLES = frozenset({"axiom", "hypothesis", "definition", "plain", "lemma", "negated_conjecture"})
SPLIT_MARKER = "_split"


@dataclass
class ProverTask:
    id: str
    conjecture: AnnotatedStatement
    premises: list[AnnotatedStatement]
    origin: str = field(default="", compare=False)
    depends: tuple[str, ...] = field(default=(), compare=False)

    def to_tptp(self) -> str:
        lines = [f"% task {self.id}" + (f": {self.origin}" if self.origin else "")]
        lines += [print_statement(p) for p in self.premises]
        lines.append(print_statement(self.conjecture))
        return "\n".join(lines) + "\n"


@dataclass
class Plan:
    tasks: list[ProverTask] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    symbol_table: frozenset = frozenset()
    pool: list[AnnotatedStatement] = field(default_factory=list)
    definitions: dict[str, Definition] = field(default_factory=dict)

    def task(self, task_id: str) -> ProverTask:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.tasks]


def as_axiom(stmt: AnnotatedStatement) -> AnnotatedStatement:
    return stmt.with_(role="axiom", source=None, info=None, language="fof")


def as_conjecture(stmt: AnnotatedStatement) -> AnnotatedStatement:
    return stmt.with_(role="conjecture", source=None, info=None, language="fof")


def _where(item) -> str:
    return f"{item.span}: " if getattr(item, "span", None) else ""


# Case analysis ----------------------------------------------------------------


def expand_cases(cases_stmt: AnnotatedStatement, target_stmt: AnnotatedStatement) -> list[AnnotatedStatement]:
    """One lemma per disjunct of ``cases_stmt``, added as a hypothesis of the target."""
    vs, cases_body = strip_universal(cases_stmt.formula)
    ws, target_body = strip_universal(target_stmt.formula)
    disjuncts = flatten(cases_body, OR)
    it = iter(ws)
    if not all(v in it for v in vs):
        raise PlanError(f"{_where(cases_stmt)}add_cases: case variables {vs} are not a sub-sequence of "
                        f"target variables {ws} (missing: {[v for v in vs if v not in ws]}, "
                        f"target-only: {[w for w in ws if w not in vs]})")
    if isinstance(target_body, Binary) and target_body.op == IMPLIES:
        hyp, goal = target_body.lhs, target_body.rhs
    else:
        hyp, goal = None, target_body
    out = []
    for i, case in enumerate(disjuncts, 1):
        antecedent = case if hyp is None else conj(hyp, case)
        out.append(target_stmt.with_(name=f"{target_stmt.name}_case_{i}",
                                     formula=forall(ws, implies(antecedent, goal)), source=None,
                                     info=None, span=None))
    return out


# Planning -----------------------------------------------------------------------


@dataclass
class _Prepared:
    items: list
    definitions: dict[str, Definition]
    symbols: set
    restrictions: dict[str, tuple[str, tuple[str, ...]]]
    cases: dict[str, tuple[str, TpiInstruction]]


def _prepare(script: ProofScript) -> _Prepared:
    """Validate definitions, collect TPI directives and apply expansions."""
    symbols: set = set()
    definitions: dict[str, Definition] = {}
    lemmas = {s.name for s in script.statements if s.role == "checked_lemma"}
    names = {s.name: s for s in script.statements}
    restrictions: dict = {}
    cases: dict = {}
    expansions: dict[str, list[tuple[str, TpiInstruction]]] = {}
    for item in script.items:
        if isinstance(item, AnnotatedStatement):
            if item.role == "checked_definition":
                d = recognize_definition(item, symbols)
                definitions[item.name] = d
                symbols.add(d.symbol)
            symbols |= formula_symbols(item.formula)
            continue
        if item.verb == RESTRICT_PREMISES:
            lemma, premises = item.payload
            if lemma not in lemmas:
                raise PlanError(f"{_where(item)}{item.name}: restrict_premises names unknown lemma {lemma!r}")
            unknown = [n for n in premises if n not in names]
            if unknown:
                raise PlanError(f"{_where(item)}{item.name}: restrict_premises names unknown "
                                f"statement(s) {', '.join(unknown)}")
            restrictions[lemma] = (item.name, premises)
        elif item.verb == ADD_CASES:
            cases_name, target = item.payload
            for n in (cases_name, target):
                if n not in names:
                    raise PlanError(f"{_where(item)}{item.name}: add_cases names unknown statement {n!r}")
            if names[target].role != "checked_lemma":
                raise PlanError(f"{_where(item)}{item.name}: add_cases target {target!r} is not a checked_lemma")
            cases[target] = (cases_name, item)
        elif item.verb == EXPAND_DEFINITIONS_IN:
            stmt_name, _ = item.payload
            if stmt_name not in names:
                raise PlanError(f"{_where(item)}{item.name}: expand_definitions_in names unknown "
                                f"statement {stmt_name!r}")
            expansions.setdefault(stmt_name, []).append((item.name, item))
    items = list(script.items)
    for stmt_name, instrs in expansions.items():
        for _, instr in instrs:
            defs = []
            for d in instr.payload[1]:
                if d not in definitions:
                    raise PlanError(f"{_where(instr)}{instr.name}: {d!r} is not a validated checked_definition")
                defs.append(definitions[d])
            for k, it in enumerate(items):
                if isinstance(it, AnnotatedStatement) and it.name == stmt_name:
                    items[k] = it.with_(formula=expand_definitions(it.formula, defs))
    return _Prepared(items, definitions, symbols, restrictions, cases)


class PlanState:
    def __init__(self, prepared: _Prepared):
        self.prep = prepared
        self.pool: list[AnnotatedStatement] = []
        self.pool_names: dict[str, AnnotatedStatement] = {}
        self.tasks: list[ProverTask] = []
        self.skipped: list[str] = []
        self.planned_lemmas: list[str] = []
        # pooled statement name -> ids of the tasks that certify it
        self.certifiers: dict[str, list[str]] = {}
        # recombination task id -> its case task ids
        self.case_deps: dict[str, list[str]] = {}

    def add_to_pool(self, stmt: AnnotatedStatement) -> None:
        self.pool.append(stmt)
        self.pool_names[stmt.name] = stmt

    def premises_for(self, lemma: AnnotatedStatement) -> list[AnnotatedStatement]:
        restriction = self.prep.restrictions.get(lemma.name)
        if restriction is None:
            return [as_axiom(s) for s in self.pool]
        instr_name, names = restriction
        missing = [n for n in names if n not in self.pool_names]
        if missing:
            raise PlanError(f"{_where(lemma)}{instr_name}: premise not yet available for "
                            f"{lemma.name}: {', '.join(missing)}")
        # pool order, so a restriction to the whole pool is no restriction at all
        keep = set(names)
        return [as_axiom(s) for s in self.pool if s.name in keep]

    def emit(self, task_id, conjecture, premises, origin, owner) -> None:
        self.tasks.append(ProverTask(task_id, as_conjecture(conjecture), premises, origin))
        self.certifiers.setdefault(owner, []).append(task_id)

    def plan_lemma(self, lemma: AnnotatedStatement) -> None:
        premises = self.premises_for(lemma)
        if lemma.name in self.prep.cases:
            self._plan_cases(lemma, premises)
        elif lemma.name.endswith(SPLIT_MARKER):
            for part in split_conjunction(lemma):
                self.emit(part.name, part, premises, f"conjunct of {lemma.name}", lemma.name)
        else:
            self.emit(lemma.name, lemma, premises, f"checked_lemma {lemma.name}", lemma.name)
        self.planned_lemmas.append(lemma.name)
        self.add_to_pool(lemma)

    def _plan_cases(self, target, premises) -> None:
        cases_name, instr = self.prep.cases[target.name]
        if cases_name not in self.pool_names:
            raise PlanError(f"{_where(instr)}{instr.name}: cases statement {cases_name!r} must precede "
                            f"its target {target.name!r}")
        cases_stmt = self.pool_names[cases_name]
        case_lemmas = expand_cases(cases_stmt, target)
        for i, case in enumerate(case_lemmas, 1):
            self.emit(case.name, case, premises, f"{instr.name}: case {i} of {target.name}", target.name)
        recombine = [as_axiom(cases_stmt)] + [as_axiom(c) for c in case_lemmas]
        self.emit(target.name, target, recombine, f"{instr.name}: recombination of {target.name}",
                  target.name)
        self.case_deps[target.name] = [c.name for c in case_lemmas]

    def apply_assume_valid(self, instruction: TpiInstruction | None = None) -> None:
        owned = set()
        for lemma in self.planned_lemmas:
            owned.update(self.certifiers.pop(lemma, []))
            if lemma not in self.skipped:
                self.skipped.append(lemma)
        self.tasks = [t for t in self.tasks if t.id not in owned]

    def finish(self) -> Plan:
        live = {t.id for t in self.tasks}
        for t in self.tasks:
            deps: list[str] = []
            names = [p.name for p in t.premises]
            for n in names:
                for dep in self.certifiers.get(n, []):
                    if dep in live and dep != t.id and dep not in deps:
                        deps.append(dep)
            # case lemmas are not pooled; the recombination task waits on them
            if t.id in self.case_deps:
                deps += [c for c in self.case_deps[t.id] if c in live and c not in deps]
            t.depends = tuple(deps)
        return Plan(self.tasks, self.skipped, frozenset(self.prep.symbols), self.pool,
                    self.prep.definitions)


def plan(script: ProofScript, start_from: str | None = None) -> Plan:
    """Plan prover tasks for ``script``.

    ``start_from`` names a checked lemma before which an implicit
    ``assume_previous_valid`` is placed.
    """
    prepared = _prepare(script)
    if start_from is not None and not any(
            isinstance(i, AnnotatedStatement) and i.name == start_from and i.role == "checked_lemma"
            for i in prepared.items):
        raise PlanError(f"--from: no checked_lemma named {start_from!r}")
    state = PlanState(prepared)
    for item in prepared.items:
        if isinstance(item, TpiInstruction):
            if item.verb == ASSUME_PREVIOUS_VALID:
                state.apply_assume_valid(item)
            continue
        if item.name == start_from:
            state.apply_assume_valid()
        if item.role == "checked_definition" or item.role in PREMISE_ROLES:
            state.add_to_pool(item)
        elif item.role == "checked_lemma":
            state.plan_lemma(item)
        elif item.role == "conjecture":
            state.emit(item.name, item, state.premises_for(item), f"conjecture {item.name}", item.name)
    return state.finish()


# Running -------------------------------------------------------------------------


@dataclass
class Report:
    order: list[str]
    verdicts: dict[str, Verdict]
    skipped: list[str] = field(default_factory=list)
    completion_order: list[str] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return all(self.verdicts[i].status is Status.PROVED for i in self.order)

    def lines(self) -> list[str]:
        return [f"{i}\t{self.verdicts[i].status}\t{self.verdicts[i].wall_seconds:.3f}" for i in self.order]

    def table(self) -> str:
        width = max([len(i) for i in self.order] + [4])
        rows = [f"{'task'.ljust(width)}  {'verdict':<12}  seconds  backend"]
        for i in self.order:
            v = self.verdicts[i]
            rows.append(f"{i.ljust(width)}  {str(v.status):<12}  {v.wall_seconds:7.3f}  {v.backend}")
        proved = sum(v.status is Status.PROVED for v in self.verdicts.values())
        rows.append(f"proved {proved}/{len(self.order)}; skipped {len(self.skipped)}")
        return "\n".join(rows)


def run(plan: Plan, backend, timeout: float = 10.0, parallel: int = 1, stop_on_failure: bool = False,
        on_result=None) -> Report:
    """Run every task once its dependencies are proved.

    ``on_result(task_id, verdict)`` is called in completion order.
    """
    order = plan.ids
    tasks = {t.id: t for t in plan.tasks}
    verdicts: dict[str, Verdict] = {}
    completion: list[str] = []
    pending = list(order)
    stopped = False

    def record(task_id, verdict):
        verdicts[task_id] = verdict
        completion.append(task_id)
        if on_result is not None:
            on_result(task_id, verdict)

    def attempt(task):
        try:
            return backend.prove(task, timeout)
        except Exception as exc:  # backend bugs must not crash the pipeline
            return Verdict(Status.BACKEND_ERROR, backend=getattr(backend, "name", "?"), note=str(exc))

    with ThreadPoolExecutor(max_workers=max(1, parallel)) as pool:
        running: dict = {}
        while pending or running:
            progressed = False
            for task_id in list(pending):
                deps = tasks[task_id].depends
                failed = [d for d in deps if d in verdicts and verdicts[d].status is not Status.PROVED]
                if stopped or failed:
                    pending.remove(task_id)
                    note = "stopped after failure" if stopped else f"dependency not proved: {', '.join(failed)}"
                    record(task_id, Verdict(Status.NOT_ATTEMPTED, backend=getattr(backend, "name", ""),
                                            note=note))
                    progressed = True
                    continue
                if len(running) >= max(1, parallel):
                    break
                if all(d in verdicts for d in deps):
                    pending.remove(task_id)
                    running[pool.submit(attempt, tasks[task_id])] = task_id
                    progressed = True
            if not running:
                if pending and not progressed:
                    raise PlanError(f"unsatisfiable task dependencies among {pending}")
                continue
            done, _ = wait(list(running), return_when=FIRST_COMPLETED)
            for fut in done:
                task_id = running.pop(fut)
                verdict = fut.result()
                record(task_id, verdict)
                if verdict.status is not Status.PROVED and stop_on_failure:
                    stopped = True
    return Report(order, verdicts, list(plan.skipped), completion)


# Export ----------------------------------------------------------------------------


def export_tasks(plan: Plan, out_dir: str) -> list[tuple[str, str, tuple[str, ...]]]:
    """Write ``<id>.p`` per task and ``manifest.tsv``; return the manifest rows."""
    manifest = []
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise WorkbenchError(f"{out_dir}: {exc.strerror or exc}") from None
    for t in plan.tasks:
        filename = f"{t.id}.p"
        path = os.path.join(out_dir, filename)
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(t.to_tptp())
        except OSError as exc:
            raise WorkbenchError(f"{path}: {exc.strerror or exc}") from None
        manifest.append((t.id, filename, t.depends))
    path = os.path.join(out_dir, "manifest.tsv")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for task_id, filename, deps in manifest:
                fh.write(f"{task_id}\t{filename}\t{','.join(deps)}\n")
    except OSError as exc:
        raise WorkbenchError(f"{path}: {exc.strerror or exc}") from None
    return manifest


def read_manifest(path: str) -> list[tuple[str, str, tuple[str, ...]]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                task_id, filename, deps = line.rstrip("\n").split("\t")
                rows.append((task_id, filename, tuple(d for d in deps.split(",") if d)))
    return rows


# Operation-level entry points mirroring the instruction verbs.

def apply_assume_valid(state: PlanState, instruction: TpiInstruction | None = None) -> PlanState:
    state.apply_assume_valid(instruction)
    return state


def apply_expand_definitions_in(script: ProofScript, def_names=None) -> ProofScript:
    """Script with definitions expanded in place.

    Without ``def_names`` the script's own expand_definitions_in instructions
    are applied and dropped.  With ``def_names`` those definitions are
    expanded in every statement other than checked definitions.
    """
    prepared = _prepare(script)
    if def_names is None:
        items = [i for i in prepared.items
                 if not (isinstance(i, TpiInstruction) and i.verb == EXPAND_DEFINITIONS_IN)]
        return ProofScript(tuple(items))
    defs = []
    for d in def_names:
        if d not in prepared.definitions:
            raise PlanError(f"{d!r} is not a validated checked_definition")
        defs.append(prepared.definitions[d])
    items = []
    for item in script.items:
        if isinstance(item, AnnotatedStatement) and item.role != "checked_definition":
            item = item.with_(formula=expand_definitions(item.formula, defs))
        items.append(item)
    return ProofScript(tuple(items))
