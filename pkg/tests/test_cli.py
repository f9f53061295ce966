import pytest

from greenfig.cli import UsageError, main, parse_bounds, parse_levels, read_config
from greenfig.gauss3d import cube_mesh, format_mesh
from greenfig.geom2d import Rect


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_levels():
    assert parse_levels("4..9") == [4, 5, 6, 7, 8, 9]
    assert parse_levels("3") == [3]
    for bad in ("9..4", "0..3", "4..15", "a..b"):
        with pytest.raises(UsageError):
            parse_levels(bad)


def test_parse_bounds():
    assert parse_bounds("-2,2", 2) == Rect(-2, 2, -2, 2)
    assert parse_bounds("-1,2,0,1", 2) == Rect(-1, 2, 0, 1)
    with pytest.raises(UsageError):
        parse_bounds("-1,2,0", 2)
    with pytest.raises(UsageError):
        parse_bounds("a,b", 3)


def test_green_passes_and_prints_summary_last(capsys):
    code, out, _ = run(capsys, "green", "--region", "square", "--field", "rot",
                       "--levels", "2..5", "--bounds=-1,2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "# schema=1"
    assert lines[-1].startswith("PASS")


def test_jordan_writes_csv_to_output(capsys, tmp_path):
    dest = tmp_path / "out.csv"
    code, out, _ = run(capsys, "jordan", "--region", "disk:512", "--levels", "3..6",
                       "--tol", "0.5", "--output", str(dest))
    assert code == 0
    assert out.count("\n") == 1 and out.startswith("PASS jordan")
    assert dest.read_text().startswith("# schema=1\n")


def test_nonconvergence_exits_one(capsys):
    code, out, _ = run(capsys, "jordan", "--region", "disk:512", "--levels", "2..4",
                       "--tol", "1e-6")
    assert code == 1
    assert out.strip().splitlines()[-1].startswith("FAIL")


@pytest.mark.parametrize("argv", [
    ["green", "--region", "square", "--levels", "9..4"],
    ["green", "--region", "square"],
    ["green", "--region", "no-such-thing", "--levels", "2..3"],
    ["green", "--region", "cube", "--levels", "2..3"],
    ["gauss", "--region", "square", "--levels", "2..3"],
    ["green", "--region", "square", "--field", "nope", "--levels", "2..3"],
    ["jordan", "--region", "square", "--levels", "2..3", "--tol", "-1"],
    ["jordan", "--region", "square", "--levels", "2..3", "--bounds=0,1"],
    ["--levels", "2..3"],
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("greenfig: error:")


def test_config_file_with_flags_winning(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# study\ncommand = jordan\nregion = disk:512\nlevels = 2..4\ntol = 1e-6\n")
    code, _, _ = run(capsys, "--config", str(cfg))
    assert code == 1
    code, out, _ = run(capsys, "--config", str(cfg), "--tol", "2")
    assert code == 0 and "tol=2.000e+00" in out


def test_config_errors_carry_line_numbers(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command = jordan\n\nlevels 3..5\n")
    with pytest.raises(UsageError, match=r"bad.cfg:3:"):
        read_config(str(cfg))
    cfg.write_text("command = jordan\ncolour = blue\n")
    with pytest.raises(UsageError, match=r"bad.cfg:2: unknown setting"):
        read_config(str(cfg))
    cfg.write_text("[run]\nsamples = many\n")
    with pytest.raises(UsageError, match=r"bad.cfg:2: samples must be int"):
        read_config(str(cfg))


def test_region_files(capsys, tmp_path):
    curve = tmp_path / "tri.curve"
    curve.write_text("0 0\n1 0\n0 1\n")
    code, out, _ = run(capsys, "jordan", "--region", str(curve), "--levels", "3..7",
                       "--tol", "0.2")
    assert code == 0 and "estimate=0.5" in out
    mesh = tmp_path / "cube.mesh"
    mesh.write_text(format_mesh(cube_mesh()))
    code, out, _ = run(capsys, "gauss", "--region", str(mesh), "--field", "radial",
                       "--levels", "2..4", "--bounds=-1,2")
    assert code == 0 and out.strip().splitlines()[-1].startswith("PASS")


def test_bad_region_file_exits_two(capsys, tmp_path):
    curve = tmp_path / "bad.curve"
    curve.write_text("0 0\n1 zero\n0 1\n")
    code, _, err = run(capsys, "jordan", "--region", str(curve), "--levels", "2..3")
    assert code == 2 and "bad.curve:2" in err


@pytest.mark.parametrize("argv", [
    ["green", "--region", "disk:1024", "--field", "weier", "--levels", "3..6", "--bounds=-2,2"],
    ["gauss", "--region", "icosphere:2", "--field", "radial", "--levels", "2..4"],
    ["jordan", "--region", "lshape", "--levels", "3..7"],
    ["additivity", "--samples", "200", "--seed", "3"],
], ids=["green", "gauss", "jordan", "additivity"])
def test_output_does_not_depend_on_threads(capsys, argv):
    outs = []
    for t in ("1", "8"):
        code, out, _ = run(capsys, *argv, "--threads", t)
        outs.append(out)
    assert outs[0] == outs[1]


def test_additivity_table(capsys):
    code, out, _ = run(capsys, "additivity", "--samples", "100")
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines() if not ln.startswith(("#", "PASS"))]
    assert rows[0] == ["function", "samples", "max_defect", "mean_defect", "tol", "pass"]
    area = next(r for r in rows if r[0] == "area")
    assert float(area[2]) == 0 and area[5] == "true"
