import sys
import textwrap
import time
from pathlib import Path

import pytest

from tebench.extsolver import (
    ExternalSolverSpec,
    ExternalRunError,
    SolverSpecError,
    parse_solver_specs,
    run_external_solver,
)
from tebench.model import validate_setting
from tebench.routing import total_load
from tebench.solvers import SolverBudget

SPEC_TEXT = """\
// general information about the solver
name = randomTunnels
optimization objective = 'undefined'

// how to run the external solver
run command = python external_solvers/getRandomPaths.py
$TOPOFILE $DEMANDFILE $OUTFILE

// how to interpret the output of the last solver's run
optimization effect = setExplicitPaths
field separator = '; '
key field = 0
value field = 2

// how to get the time taken by the last solver's run
gettime command = cat $OUTFILE | grep 'execution time'
| awk -v FS=': ' '{print $2}'
"""


def test_parse_reference_spec_block():
    specs = parse_solver_specs(SPEC_TEXT)
    assert len(specs) == 1
    spec = specs[0]
    assert spec.name == "randomTunnels"
    assert spec.objective == "undefined"
    assert spec.effect == "setExplicitPaths"
    assert spec.field_separator == "; "
    assert spec.key_field == 0
    assert spec.value_field == 2
    assert spec.run_command == (
        "python external_solvers/getRandomPaths.py $TOPOFILE $DEMANDFILE $OUTFILE"
    )
    # the wrapped awk line (which itself contains '=') joins the gettime value
    assert spec.gettime_command == (
        "cat $OUTFILE | grep 'execution time' | awk -v FS=': ' '{print $2}'"
    )


def test_missing_mandatory_key_is_reported():
    text = SPEC_TEXT.replace("run command = python external_solvers/getRandomPaths.py\n$TOPOFILE $DEMANDFILE $OUTFILE\n", "")
    with pytest.raises(SolverSpecError, match="randomTunnels.*run command"):
        parse_solver_specs(text)


def test_unknown_effect_is_reported():
    with pytest.raises(SolverSpecError, match="unknown optimization effect"):
        parse_solver_specs(SPEC_TEXT.replace("setExplicitPaths", "setMagic"))


def test_missing_placeholder_is_reported():
    with pytest.raises(SolverSpecError, match="placeholder"):
        parse_solver_specs(SPEC_TEXT.replace("$DEMANDFILE ", ""))


def test_two_blocks_parse_in_order():
    text = SPEC_TEXT + "\n" + SPEC_TEXT.replace("randomTunnels", "secondSolver")
    specs = parse_solver_specs(text)
    assert [s.name for s in specs] == ["randomTunnels", "secondSolver"]


def _stub_solver(tmp_path: Path, body: str) -> Path:
    script = tmp_path / "stub_solver.py"
    script.write_text(textwrap.dedent(body))
    return script


def _spec_for_script(script: Path, effect="setExplicitPaths", gettime=None) -> ExternalSolverSpec:
    return ExternalSolverSpec(
        name="stub",
        run_command=f"{sys.executable} {script} $TOPOFILE $DEMANDFILE $OUTFILE",
        effect=effect,
        field_separator="; ",
        key_field=0,
        value_field=2,
        gettime_command=gettime,
    )


def test_explicit_paths_round_trip(tmp_path, triangle_single):
    script = _stub_solver(
        tmp_path,
        """
        import sys
        out = sys.argv[3]
        with open(out, "w") as fh:
            fh.write("d0; stub; 0,1,2\\n")
            fh.write("execution time: 0.25\\n")
        """,
    )
    spec = _spec_for_script(
        script,
        gettime="cat $OUTFILE | grep 'execution time' | awk -v FS=': ' '{print $2}'",
    )
    outcome = run_external_solver(spec, triangle_single, SolverBudget(10_000, 0))
    assert not outcome.failed
    assert outcome.reported_time_ms == 250
    applied = triangle_single.with_routing(outcome.config)
    assert validate_setting(applied) == []
    topo = triangle_single.topology
    expected = (topo.find_edges(0, 1)[0], topo.find_edges(1, 2)[0])
    assert outcome.config.explicit_paths[0] == (expected,)
    assert total_load(applied).max_utilization == pytest.approx(0.9)


def test_repeated_lines_accumulate_paths(tmp_path, diamond_setting):
    script = _stub_solver(
        tmp_path,
        """
        import sys
        with open(sys.argv[3], "w") as fh:
            fh.write("d0; a; 0,1,3\\n")
            fh.write("d0; b; 0,2,3\\n")
        """,
    )
    spec = _spec_for_script(script)
    outcome = run_external_solver(spec, diamond_setting, SolverBudget(10_000, 0))
    assert len(outcome.config.explicit_paths[0]) == 2
    lv = total_load(diamond_setting.with_routing(outcome.config))
    assert lv.max_utilization == pytest.approx(0.4)  # even split across both


def test_set_link_weights_effect(tmp_path, triangle_single):
    script = _stub_solver(
        tmp_path,
        """
        import sys
        with open(sys.argv[3], "w") as fh:
            fh.write("e0_1; w; 7\\n")
        """,
    )
    spec = _spec_for_script(script, effect="setLinkWeights")
    outcome = run_external_solver(spec, triangle_single, SolverBudget(10_000, 0))
    idx = [e.label for e in triangle_single.topology.edges].index("e0_1")
    assert outcome.config.weights[idx] == 7


def test_set_segments_effect(tmp_path, triangle_single):
    script = _stub_solver(
        tmp_path,
        """
        import sys
        with open(sys.argv[3], "w") as fh:
            fh.write("d0; s; 0,1,2\\n")
        """,
    )
    spec = _spec_for_script(script, effect="setSegments")
    outcome = run_external_solver(spec, triangle_single, SolverBudget(10_000, 0))
    assert outcome.config.sr_segments[0] == (0, 1, 2)


def test_unknown_label_raises_with_line_number(tmp_path, triangle_single):
    script = _stub_solver(
        tmp_path,
        """
        import sys
        with open(sys.argv[3], "w") as fh:
            fh.write("ghost; x; 0,1,2\\n")
        """,
    )
    spec = _spec_for_script(script)
    with pytest.raises(ExternalRunError, match="line 1.*ghost"):
        run_external_solver(spec, triangle_single, SolverBudget(10_000, 0))


def test_nonzero_exit_is_failed_run(tmp_path, triangle_single):
    script = _stub_solver(
        tmp_path,
        """
        import sys
        sys.stderr.write("cannot parse input\\n")
        sys.exit(3)
        """,
    )
    spec = _spec_for_script(script)
    outcome = run_external_solver(spec, triangle_single, SolverBudget(10_000, 0))
    assert outcome.failed
    assert outcome.config == triangle_single.routing
    assert "cannot parse input" in outcome.message


def test_deadline_kills_solver_and_parses_partial_output(tmp_path, triangle_single):
    script = _stub_solver(
        tmp_path,
        """
        import sys, time
        with open(sys.argv[3], "w") as fh:
            fh.write("d0; partial; 0,2\\n")
            fh.flush()
            time.sleep(60)
        """,
    )
    spec = _spec_for_script(script)
    start = time.monotonic()
    outcome = run_external_solver(spec, triangle_single, SolverBudget(700, 0))
    elapsed = time.monotonic() - start
    assert elapsed < 10
    assert outcome.truncated
    assert not outcome.failed
    assert 0 in outcome.config.explicit_paths


def test_temp_files_are_cleaned_up(tmp_path, triangle_single, monkeypatch):
    seen = []
    import tebench.extsolver as ext

    orig = ext.tempfile.mkdtemp

    def spy(**kwargs):
        path = orig(**kwargs)
        seen.append(Path(path))
        return path

    monkeypatch.setattr(ext.tempfile, "mkdtemp", spy)
    script = _stub_solver(
        tmp_path,
        """
        import sys
        with open(sys.argv[3], "w") as fh:
            fh.write("d0; x; 0,2\\n")
        """,
    )
    run_external_solver(_spec_for_script(script), triangle_single, SolverBudget(5000, 0))
    assert seen and not seen[0].exists()
