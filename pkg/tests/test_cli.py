"""End-to-end command-line checks: exit codes, artifacts, printed text.

Every invocation goes through cli.main(argv) so the argparse wiring and
the documented exit-code contract (0 ok, 1 usage, 2 infeasible,
3 verdict fail, 4 inconclusive) are exercised exactly as a shell would.
"""

import io
import json
import xml.etree.ElementTree as ET
from collections import Counter
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

from slidenav import cli, svg
from slidenav.trace import COLUMNS, Trace

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
STATIC = SCENARIOS / "static_disc.txt"
MOVING = SCENARIOS / "moving_disc.txt"
FAST = SCENARIOS / "fast_disc.txt"
MISTUNED = SCENARIOS / "mistuned_disc.txt"


@pytest.fixture(scope="module")
def run_artifacts(tmp_path_factory):
    """One full `run` of the static scenario; (exit code, out dir, stdout)."""
    out = tmp_path_factory.mktemp("cli_run")
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(["run", str(STATIC), "--out", str(out)])
    return code, out, buf.getvalue()


def test_run_exits_ok(run_artifacts):
    code, _, text = run_artifacts
    assert code == 0
    assert "outcome: TargetReached" in text
    assert "min distance:" in text


def test_run_writes_all_artifacts(run_artifacts):
    _, out, _ = run_artifacts
    for name in ("static_disc_trace.txt", "static_disc_trace.csv",
                 "static_disc.svg", "static_disc_summary.txt"):
        path = out / name
        assert path.is_file() and path.stat().st_size > 0, name


def test_summary_lists_events(run_artifacts):
    _, out, _ = run_artifacts
    text = (out / "static_disc_summary.txt").read_text()
    assert "enter_avoidance" in text
    assert "enter_pursuit" in text
    assert "terminal" in text


def test_csv_mirrors_trace(run_artifacts):
    _, out, _ = run_artifacts
    header = (out / "static_disc_trace.csv").read_text().splitlines()[0]
    assert header == ",".join(COLUMNS)
    raw = np.loadtxt(out / "static_disc_trace.csv", delimiter=",", skiprows=1)
    tr = Trace.read(out / "static_disc_trace.txt")
    # %.17g round-trips float64, so the mirror must match bit for bit
    same = (raw == tr.data) | (np.isnan(raw) & np.isnan(tr.data))
    assert same.all()


def _svg_root(text):
    return ET.fromstring(text)


def _tag_counts(root):
    return Counter(el.tag.rsplit("}", 1)[-1] for el in root.iter())


def _assert_finite_points(root):
    for el in root.iter():
        if el.tag.rsplit("}", 1)[-1] != "polyline":
            continue
        pts = np.array([p.split(",") for p in el.attrib["points"].split()],
                       dtype=float)
        assert pts.ndim == 2 and pts.shape[1] == 2
        assert np.isfinite(pts).all()


def test_svg_static_structure(run_artifacts, static_run):
    _, out, _ = run_artifacts
    root = _svg_root((out / "static_disc.svg").read_text())
    counts = _tag_counts(root)
    mode = static_run.trace.column("mode")
    n_seg = 1 + int(np.count_nonzero(np.diff(mode)))
    assert n_seg == 3  # pursuit, boundary following, pursuit
    # static obstacle: one boundary snapshot + one offset curve + path segments
    assert counts["polyline"] == n_seg + 2 == 5
    assert counts["circle"] == 2          # start dot, target ring
    assert counts["path"] == 1            # target cross
    assert counts["text"] == 4            # caption + three legend labels
    assert counts["line"] == 3            # legend swatches
    _assert_finite_points(root)


def test_svg_moving_snapshots(moving_run, moving_scenario):
    text = svg.render(moving_run.trace, moving_scenario.obstacle)
    root = _svg_root(text)
    counts = _tag_counts(root)
    mode = moving_run.trace.column("mode")
    n_seg = 1 + int(np.count_nonzero(np.diff(mode)))
    # moving obstacle: five boundary snapshots + five offset curves
    assert counts["polyline"] == n_seg + 10 == 13
    _assert_finite_points(root)


def test_run_overrides_inconclusive(tmp_path, capsys):
    code = cli.main(["run", str(STATIC), "--dt", "0.002",
                     "--horizon", "0.5", "--out", str(tmp_path)])
    assert code == 4
    assert "outcome: HorizonExpired" in capsys.readouterr().out
    header = (tmp_path / "static_disc_trace.txt").read_text()
    assert "# dt = 0.002" in header
    assert "# horizon = 0.5" in header
    assert "# outcome = HorizonExpired" in header


def test_run_variant_override_recorded(tmp_path, capsys):
    code = cli.main(["run", str(STATIC), "--variant", "reversed",
                     "--horizon", "0.5", "--out", str(tmp_path)])
    assert code == 4
    capsys.readouterr()
    assert "# variant = reversed" in (tmp_path / "static_disc_trace.txt").read_text()


def test_run_rejects_bad_variant(capsys):
    assert cli.main(["run", str(STATIC), "--variant", "sideways"]) == 1
    assert "invalid choice" in capsys.readouterr().err


def test_run_bad_scenario_exits_usage(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text(STATIC.read_text().replace("d_safe = 0.1", "d_safe = 0.25"))
    assert cli.main(["run", str(bad), "--out", str(tmp_path)]) == 1
    assert "corridor ordering violated" in capsys.readouterr().err


def test_run_missing_file(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "nope.txt")]) == 1
    assert capsys.readouterr().err.strip()


def test_usage_errors_exit_one(capsys):
    assert cli.main([]) == 1
    assert cli.main(["frobnicate"]) == 1
    capsys.readouterr()


def test_check_static_passes(capsys):
    assert cli.main(["check", str(STATIC)]) == 0
    text = capsys.readouterr().out
    assert "feasibility: PASS" in text
    assert "delta_max" in text
    assert "violations: none" in text


def test_check_suggest_delta(capsys):
    assert cli.main(["check", str(STATIC), "--suggest-delta"]) == 0
    assert "suggested delta = 0.021066491838214706" in capsys.readouterr().out


def test_check_fast_infeasible(capsys):
    assert cli.main(["check", str(FAST)]) == 2
    text = capsys.readouterr().out
    assert "feasibility: FAIL" in text
    assert "normal-speed bound |V_N| <= lambda_v*v0" in text


def test_check_mistuned_infeasible(capsys):
    assert cli.main(["check", str(MISTUNED), "--suggest-delta"]) == 2
    text = capsys.readouterr().out
    assert "relay speed bound" in text
    assert "relay margin" in text
    # the corridor itself is fine, so a workable delta is still suggested
    assert "suggested delta = 0.021066491838214706" in text


def test_check_writes_json(tmp_path, capsys):
    assert cli.main(["check", str(STATIC), "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    with open(tmp_path / "static_disc_feasibility.json") as fh:
        data = json.load(fh)
    assert data["ok"] is True
    assert data["corridor_user"] == [0.2, 0.4]
    assert data["violations"] == []
    assert data["gains"]["delta_max"] > 0.0


def test_verify_good_trace(static_trace_file, capsys):
    assert cli.main(["verify", str(static_trace_file)]) == 0
    text = capsys.readouterr().out
    assert "rate fit" in text
    assert "failed" not in text


def test_verify_truncated_inconclusive(tmp_path, static_run, capsys):
    tr = static_run.trace
    i0 = int(np.argmax(tr.column("mode") == 1.0))
    cut = Trace(tr.data[:i0 + 30].copy(), tr.meta, [])
    path = tmp_path / "cut.txt"
    cut.write(path)
    assert cli.main(["verify", str(path)]) == 4
    assert "inconclusive" in capsys.readouterr().out


def test_verify_tampered_meta_fails(tmp_path, static_run, capsys):
    tr = static_run.trace
    meta = dict(tr.meta)
    meta["d_safe"] = 1.0  # claims a floor the recorded run never kept
    path = tmp_path / "tampered.txt"
    Trace(tr.data.copy(), meta, list(tr.events)).write(path)
    assert cli.main(["verify", str(path)]) == 3
    text = capsys.readouterr().out
    assert "failed: safety" in text


def test_verify_garbage_file(tmp_path, capsys):
    path = tmp_path / "junk.txt"
    path.write_text("hello\n1 2 3\n")
    assert cli.main(["verify", str(path)]) == 1
    assert "cannot read trace" in capsys.readouterr().err


def test_batch_reports_each_row(tmp_path, capsys):
    code = cli.main(["batch", str(STATIC), str(FAST), "--out", str(tmp_path)])
    assert code == 2  # infeasible row wins over the passing one
    text = capsys.readouterr().out
    rows = [ln for ln in text.splitlines() if ln.startswith(("static_disc",
                                                             "fast_disc"))]
    assert len(rows) == 2
    assert "feasible, TargetReached" in rows[0]
    assert "verify: pass" in rows[0]
    assert "infeasible" in rows[1]
    assert (tmp_path / "static_disc.svg").is_file()


def test_batch_parse_error_wins(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text(STATIC.read_text().replace("d_safe = 0.1", "d_safe = 0.25"))
    code = cli.main(["batch", str(bad), str(FAST), "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "parse error" in err
