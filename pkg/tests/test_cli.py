import os
import subprocess
import sys

import pytest

from fofproof.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, main
from fofproof.tptp import parse_script, print_formula

from helpers import corpus, fake_template, fixture

TAUTOLOGIES = ("fof(t1, checked_lemma, p | ~ p).\n"
               "fof(t2, checked_lemma, (p => q) | (q => p)).\n")

THREE_LEMMAS = ("fof(a, axiom, p).\n"
                "fof(l1, checked_lemma, p | q).\n"
                "fof(l2, checked_lemma, q).\n"
                "fof(l3, checked_lemma, p & (q | ~ q)).\n")


@pytest.fixture
def script(tmp_path):
    def write(text, name="s.p"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def verdict_lines(out):
    return [line.split("\t") for line in out.splitlines() if line.count("\t") == 2]


# check ---------------------------------------------------------------------------


def test_check_two_tautologies(capsys, script):
    code, out, err = run_cli(capsys, "check", script(TAUTOLOGIES))
    assert code == EXIT_OK
    lines = verdict_lines(out)
    assert sorted((t, v) for t, v, _ in lines) == [("t1", "Proved"), ("t2", "Proved")]
    assert all(float(s) >= 0 for _, _, s in lines)
    assert "proved 2/2" in out
    assert "Proved" not in err


def test_check_stop_on_failure(capsys, script):
    code, out, err = run_cli(capsys, "check", script(THREE_LEMMAS), "--stop-on-failure")
    assert code == EXIT_FAILED
    verdicts = {t: v for t, v, _ in verdict_lines(out)}
    assert verdicts["l1"] == "Proved"
    assert verdicts["l2"] != "Proved"
    assert verdicts["l3"] == "NotAttempted"
    table = out.split("\n\n", 1)[1]
    assert "NotAttempted" in table.splitlines()[3]
    # machine lines stay off the error stream
    assert "\tProved\t" not in err


def test_check_from_tasks_only_later_lemmas(capsys, script):
    code, out, _ = run_cli(capsys, "plan", script(THREE_LEMMAS), "--from", "l2")
    assert code == EXIT_OK
    rows = [line.split("\t") for line in out.splitlines()]
    assert [r[0] for r in rows] == ["l2", "l3"]
    assert rows[1][2].split(",") == ["a", "l1", "l2"]


def test_check_from_unknown_lemma(capsys, script):
    code, _, err = run_cli(capsys, "check", script(THREE_LEMMAS), "--from", "nope")
    assert code == EXIT_INPUT
    assert "nope" in err


def test_summary_in_script_order(capsys, script):
    text = "".join(f"fof(l{i}, checked_lemma, p{i} | ~ p{i}).\n" for i in range(6))
    code, out, _ = run_cli(capsys, "check", script(text), "--parallel", "4")
    assert code == EXIT_OK
    table = out.split("\n\n", 1)[1].splitlines()
    assert [row.split()[0] for row in table[1:7]] == [f"l{i}" for i in range(6)]


# input errors ---------------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["check"],
    ["check", "x.p", "--timeout", "soon"],
    ["viz", "x.tstp", "--mode", "sideways"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == EXIT_INPUT
    assert out == ""
    assert err


def test_help_exits_0(capsys):
    code, out, _ = run_cli(capsys, "--help")
    assert code == EXIT_OK and "gen-spec" in out


def test_missing_script(capsys, tmp_path):
    code, out, err = run_cli(capsys, "check", str(tmp_path / "absent.p"))
    assert code == EXIT_INPUT and out == "" and "absent.p" in err


def test_parse_error_exit_2(capsys, script):
    code, out, err = run_cli(capsys, "check", script("fof(a, axiom, p & ).\n"))
    assert code == EXIT_INPUT and out == "" and err.startswith("error:")


def test_unknown_backend(capsys, script):
    code, _, err = run_cli(capsys, "check", script(TAUTOLOGIES), "--backend", "eprover")
    assert code == EXIT_INPUT and "--backend-config" in err


# external backends ----------------------------------------------------------------


@pytest.fixture
def backend_config(tmp_path):
    path = tmp_path / "backends.tsv"
    path.write_text(f"fake\t{fake_template()}\n"
                    f"refuter\t{fake_template('--status', 'CounterSatisfiable')}\n")
    return str(path)


def test_external_backend_proves(capsys, script, backend_config):
    code, out, _ = run_cli(capsys, "check", script(TAUTOLOGIES),
                           "--backend", "fake", "--backend-config", backend_config)
    assert code == EXIT_OK
    assert "fake" in out.split("\n\n", 1)[1]


def test_external_counter_satisfiable_exits_1(capsys, script, backend_config):
    code, out, err = run_cli(capsys, "check", script(TAUTOLOGIES),
                             "--backend", "refuter", "--backend-config", backend_config)
    assert code == EXIT_FAILED
    # t2 has t1 in its pool, so it waits on a proof that never comes
    assert {t: v for t, v, _ in verdict_lines(out)} == {"t1": "Refuted", "t2": "NotAttempted"}
    assert "t1: SZS status CounterSatisfiable" in err.splitlines()


def test_config_without_named_backend(capsys, script, backend_config):
    code, _, err = run_cli(capsys, "check", script(TAUTOLOGIES),
                           "--backend", "vampire", "--backend-config", backend_config)
    assert code == EXIT_INPUT and "vampire" in err


# export ---------------------------------------------------------------------------


def test_export_then_recheck_each_file(capsys, tmp_path, script):
    out_dir = tmp_path / "tasks"
    code, out, _ = run_cli(capsys, "export", script(TAUTOLOGIES), str(out_dir))
    assert code == EXIT_OK
    files = [line.split("\t")[1] for line in out.splitlines()]
    assert len(files) == 2
    assert sorted(os.listdir(out_dir)) == ["manifest.tsv", "t1.p", "t2.p"]
    for path in files:
        code, out, _ = run_cli(capsys, "check", path)
        assert code == EXIT_OK
        assert len(verdict_lines(out)) == 1


def test_export_matches_goldens(capsys, tmp_path):
    out_dir = tmp_path / "five"
    assert run_cli(capsys, "export", fixture("five.p"), str(out_dir))[0] == EXIT_OK
    golden = fixture("golden", "five")
    for name in sorted(os.listdir(golden)):
        assert (out_dir / name).read_text() == open(os.path.join(golden, name)).read(), name


def test_export_unwritable_dir(capsys, tmp_path, script):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    code, out, err = run_cli(capsys, "export", script(TAUTOLOGIES), str(blocker / "sub"))
    assert code == EXIT_INPUT and out == "" and err


# viz, unused, expand ----------------------------------------------------------------


def analysis_files(*names):
    return [fixture("analysis", f"{n}.tstp") for n in names]


def test_viz_overview_on_stdout(capsys):
    from fofproof.analysis import dot_is_valid
    code, out, err = run_cli(capsys, "viz", "--mode", "overview", *analysis_files("l1", "l2", "l3"))
    assert code == EXIT_OK and err == ""
    assert dot_is_valid(out)
    assert '"l1" -> "l2"' in out


def test_viz_detail_to_file(capsys, tmp_path):
    target = tmp_path / "g.dot"
    code, out, _ = run_cli(capsys, "viz", *analysis_files("l1"), "-o", str(target))
    assert code == EXIT_OK and out == ""
    assert target.read_text().startswith("digraph")


def test_viz_detail_needs_one_file(capsys):
    code, _, err = run_cli(capsys, "viz", *analysis_files("l1", "l2"))
    assert code == EXIT_INPUT and "exactly one" in err


def test_viz_dangling_parent(capsys, tmp_path):
    bad = tmp_path / "bad.tstp"
    bad.write_text("cnf(c, plain, $false, inference(r,[],[ghost])).\n")
    code, _, err = run_cli(capsys, "viz", str(bad))
    assert code == EXIT_INPUT and "ghost" in err


def test_unused(capsys):
    code, out, err = run_cli(capsys, "unused", fixture("analysis", "script.p"),
                             *analysis_files("l1", "l2", "l3"))
    assert code == EXIT_OK and err == ""
    assert out == "lemma\tl2\n"


def test_unused_without_derivations(capsys):
    code, out, err = run_cli(capsys, "unused", fixture("analysis", "script.p"))
    assert code == EXIT_OK
    assert "no evidence" in err
    assert out.splitlines() == ["lemma\tl1", "lemma\tl2", "axiom\ta1", "axiom\ta2"]


def test_expand_with_def_flag(capsys):
    code, out, _ = run_cli(capsys, "expand", fixture("five.p"), "--def", "def_r")
    assert code == EXIT_OK
    l2 = print_formula(parse_script(out).get("l2").formula)
    assert "r(" not in l2 and "p(c)" in l2


def test_expand_unknown_definition(capsys):
    code, _, err = run_cli(capsys, "expand", fixture("five.p"), "--def", "def_zz")
    assert code == EXIT_INPUT and "def_zz" in err


# Dijkstra generators and eval ------------------------------------------------------


def test_gen_spec_then_check(capsys, tmp_path):
    spec = tmp_path / "spec.p"
    assert run_cli(capsys, "gen-spec", "-n", "2", "-o", str(spec))[0] == EXIT_OK
    code, out, err = run_cli(capsys, "check", str(spec))
    assert code == EXIT_OK
    assert verdict_lines(out)
    assert "skipped: invariant_step" in err


def test_eval_shipped_run(capsys, tmp_path):
    spec = tmp_path / "spec.p"
    run_cli(capsys, "gen-spec", "-o", str(spec))
    code, out, _ = run_cli(capsys, "eval", "--spec", str(spec), "--model", corpus("dijkstra_run_n2.model"))
    assert code == EXIT_OK
    assert "false: 0" in out.splitlines()


def test_gen_run_then_eval_broken_model(capsys, tmp_path):
    spec, model = tmp_path / "spec.p", tmp_path / "run.model"
    run_cli(capsys, "gen-spec", "-o", str(spec))
    code, _, _ = run_cli(capsys, "gen-run", "-k", "4", "--schedule", "1,2,1,2", "--no-definitions",
                         "-o", str(model))
    assert code == EXIT_OK
    text = model.read_text().replace("fun turn(t1) = a1", "fun turn(t1) = loc_scan")
    assert text != model.read_text()
    model.write_text(text)
    code, out, _ = run_cli(capsys, "eval", "--spec", str(spec), "--model", str(model))
    assert code == EXIT_FAILED
    assert "false: 0" not in out


def test_gen_run_bad_schedule(capsys):
    code, out, err = run_cli(capsys, "gen-run", "-k", "3", "--schedule", "1,2")
    assert code == EXIT_INPUT and out == "" and err


def test_eval_bad_model(capsys, tmp_path):
    model = tmp_path / "m.model"
    model.write_text("pred p(d0) = true\n")
    code, _, err = run_cli(capsys, "eval", "--spec", corpus("dijkstra_n2.p"), "--model", str(model))
    assert code == EXIT_INPUT and "domain" in err


# entry point -----------------------------------------------------------------------


def test_module_entry_point(tmp_path):
    path = tmp_path / "s.p"
    path.write_text(TAUTOLOGIES)
    proc = subprocess.run([sys.executable, "-m", "fofproof.cli", "check", str(path)],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert "t1\tProved\t" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "fofproof.cli", "check"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 2 and proc.stdout == ""
