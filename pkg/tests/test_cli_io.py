import numpy as np
import pytest

from habitmfg import cli
from habitmfg.config import SimSettings, parse_config
from habitmfg.errors import ConfigurationError, ShapeError
from habitmfg.experiments import cmd_converge, cmd_figures, cmd_nashgap, cmd_solve, figure_panels, solve
from habitmfg.io import CurveTable, read_csv, read_meta, write_csv, write_meta

LINEAR = """
mode = linear
T = 2
mu = 0.2
sigma = 0.6
p = 0.5
x0 = 5
z0 = 1
delta = 0.1
n_steps = 400
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_defaults_and_hash():
    cfg = parse_config(LINEAR)
    assert cfg.alpha == 1.0 and cfg.seed == 42 and cfg.convention == "hjb"
    assert cfg.sim == SimSettings()
    assert cfg.habit.epsilon == 0.01
    assert len(cfg.config_hash()) == 16
    assert cfg.config_hash() == parse_config(LINEAR + "\n# a comment\n").config_hash()
    assert cfg.config_hash() != parse_config(LINEAR, overrides={"seed": 7}).config_hash()
    # the output directory does not change the hash
    assert cfg.config_hash() == cfg.replace(out="/elsewhere").config_hash()


def test_figure_preset_seeds_parameters():
    cfg = parse_config("figure = fig2_mult\nn_steps = 200")
    assert cfg.mode == "multiplicative" and cfg.p == 0.4 and cfg.z0 == 10
    assert cfg.sweep == ("delta", (0.1, 0.2, 0.3))
    cfg = parse_config("figure = fig2_mult\np = 0.3\nalpha_list = 0.5, 1")
    assert cfg.p == 0.3 and cfg.sweep == ("alpha", (0.5, 1.0))


@pytest.mark.parametrize("extra,match", [
    ("x0 = 1", "x0 > z0\\*T"),
    ("alpha = 1.5", "alpha in \\(0,1\\]"),
    ("bogus = 3", "unknown key"),
    ("sim.bogus = 3", "unknown key"),
    ("n_steps = 2.5", "n_steps"),
    ("sim.n_list = 8, 4, 16", "strictly increasing"),
    ("p_list = 0.2, 1.2", "p_list"),
    ("convention = sideways", "convention"),
])
def test_config_errors(extra, match):
    text = "\n".join(line for line in LINEAR.splitlines() if not line.startswith(extra.split()[0] + " "))
    with pytest.raises(ConfigurationError, match=match):
        parse_config(text + "\n" + extra)


def test_config_structural_errors(tmp_path):
    with pytest.raises(ConfigurationError, match="missing"):
        parse_config("mode = linear\nT = 2")
    with pytest.raises(ConfigurationError, match="duplicate"):
        parse_config(LINEAR + "\nmu = 0.3")
    with pytest.raises(ConfigurationError, match="expected 'key = value'"):
        parse_config(LINEAR + "\njust words\n")
    with pytest.raises(ConfigurationError, match="cannot read"):
        parse_config(str(tmp_path / "absent.cfg"))
    with pytest.raises(ConfigurationError, match="at most one"):
        parse_config(LINEAR + "\np_list = 0.2\ndelta_list = 0.1")


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.standard_normal((50, 3)) * 10.0 ** rng.integers(-300, 300, (50, 3))
    table = CurveTable(("a", "b", "c"), data)
    path = write_csv(tmp_path / "x.csv", table, {"seed": 5, "value": 0.1})
    back, meta = read_csv(path)
    assert back.columns == ("a", "b", "c")
    np.testing.assert_array_equal(back.data, data)
    assert meta == {"seed": "5", "value": "0.10000000000000001"}
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]


def test_meta_file(tmp_path):
    path = write_meta(tmp_path / "m.txt", {"slope": -1.0, "verdict": "pass"}, {"seed": 1})
    assert read_meta(path) == {"seed": "1", "slope": "-1", "verdict": "pass"}


def test_curve_table_shapes():
    with pytest.raises(ShapeError):
        CurveTable(("a", "b"), np.zeros((3, 3)))
    with pytest.raises(ShapeError):
        CurveTable.from_columns(a=[1, 2], b=[1, 2, 3])
    t = CurveTable.from_columns(a=[1, 2], b=[3, 4])
    np.testing.assert_array_equal(t["b"], [3, 4])


def test_solve_outputs(tmp_path):
    cfg = parse_config(LINEAR)
    paths = cmd_solve(cfg, tmp_path)
    table, head = read_csv(paths[0])
    assert head["command"] == "solve" and head["config_hash"] == cfg.config_hash() and head["seed"] == "42"
    assert table.columns == ("t", "zbar", "g_l", "phi")
    np.testing.assert_array_equal(table["zbar"], solve(cfg).zbar.values)
    meta = read_meta(paths[1])
    assert float(meta["K_surplus"]) > 0


def test_figures_consistent_with_solve(tmp_path):
    cfg = parse_config("figure = fig2_mult\nn_steps = 400")
    paths = cmd_figures(cfg, tmp_path)
    assert sorted(p.name for p in paths) == ["fig2_mult_C.csv", "fig2_mult_meta.txt", "fig2_mult_pi.csv",
                                             "fig2_mult_zbar.csv"]
    table, _ = read_csv(tmp_path / "fig2_mult_zbar.csv")
    assert table.columns == ("t", "delta=0.1", "delta=0.2", "delta=0.3")
    direct = solve(cfg.replace(delta=0.2, delta_list=None))
    np.testing.assert_array_equal(table["delta=0.2"], direct.zbar.values)
    C, _ = read_csv(tmp_path / "fig2_mult_C.csv")
    np.testing.assert_array_equal(C["delta=0.2"], direct.c_star * 1.0)


def test_figure1_plist_source_flag(tmp_path):
    cfg = parse_config("figure = fig1_linear\nn_steps = 200")
    cmd_figures(cfg, tmp_path / "a")
    meta = read_meta(tmp_path / "a" / "fig1_linear_meta.txt")
    assert meta["figure1_plist_source"] == "body_text"
    assert meta["values"] == "0.2,0.3,0.5" and meta["caption_plist"] == "0.2,0.5,0.7"
    cfg = parse_config("figure = fig1_linear\nn_steps = 200\np_list = 0.2, 0.5, 0.7")
    cmd_figures(cfg, tmp_path / "b")
    assert read_meta(tmp_path / "b" / "fig1_linear_meta.txt")["figure1_plist_source"] == "config"
    cmd_figures(parse_config("figure = fig2_linear\nn_steps = 200"), tmp_path / "c")
    assert "figure1_plist_source" not in read_meta(tmp_path / "c" / "fig2_linear_meta.txt")


def test_figure_panels_without_sweep():
    name, values, x, t, cols = figure_panels(parse_config(LINEAR))
    assert name == "p" and values == (0.5,) and x == 5.0
    assert len(cols["C"]) == 1 and cols["C"][0].shape == t.shape


def test_converge_needs_three_points(tmp_path):
    cfg = parse_config(LINEAR + "\nsim.n_list = 8")
    with pytest.raises(ConfigurationError, match="need >= 3 points"):
        cmd_converge(cfg, tmp_path)


def test_converge_and_nashgap_small(tmp_path):
    cfg = parse_config(LINEAR + "\nsim.n_list = 4, 16, 64\nsim.M = 50\nsim.M_gap = 200\nsim.n_steps = 50")
    paths, rep = cmd_converge(cfg, tmp_path)
    meta = read_meta(paths[1])
    assert float(meta["slope"]) == rep.slope and meta["band"] == "[-1.3, -0.7]"
    paths, ests = cmd_nashgap(cfg, tmp_path)
    table, _ = read_csv(paths[0])
    assert table.columns == ("n", "gap", "std_error", "infeasible")
    np.testing.assert_array_equal(table["n"], [4, 16, 64])
    assert read_meta(paths[1])["verdict"] in ("pass", "fail")


def test_cli_byte_identical_reruns(tmp_path):
    conf = write(tmp_path, LINEAR + "\nsim.n_list = 4, 8, 16\nsim.M_gap = 100\nsim.n_steps = 20\n")
    outs = []
    for k, threads in enumerate(("1", "3")):
        out = tmp_path / f"o{k}"
        assert cli.main(["nashgap", "--config", conf, "--out", str(out), "--threads", threads]) == 0
        assert cli.main(["solve", "--config", conf, "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"mfe.csv", "mfe_meta.txt", "nashgap.csv", "nashgap_meta.txt"}


def test_cli_seed_changes_output(tmp_path):
    conf = write(tmp_path, LINEAR + "\nsim.n_list = 4, 8, 16\nsim.M_gap = 100\nsim.n_steps = 20\n")
    cli.main(["nashgap", "--config", conf, "--out", str(tmp_path / "a")])
    cli.main(["nashgap", "--config", conf, "--out", str(tmp_path / "b"), "--seed", "7"])
    a = (tmp_path / "a" / "nashgap.csv").read_bytes()
    b = (tmp_path / "b" / "nashgap.csv").read_bytes()
    assert a != b and b"# seed=7" in b


def test_cli_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, LINEAR.replace("x0 = 5", "x0 = 1"), "bad.cfg")
    assert cli.main(["solve", "--config", bad, "--out", str(tmp_path)]) == 2
    assert "x0 > z0*T" in capsys.readouterr().err
    assert cli.main(["solve", "--config", write(tmp_path, LINEAR, "ok.cfg"), "--seed", "-1"]) == 2
    stiff = write(tmp_path, "figure = fig1_mult\nn_steps = 200\nmax_iter = 1\nmethod = picard\n", "s.cfg")
    assert cli.main(["solve", "--config", stiff, "--out", str(tmp_path)]) == 3
    assert "residual=" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        cli.main(["explode", "--config", bad])


def test_cli_infeasible_exit_code(tmp_path, capsys, monkeypatch):
    # config validation rejects x0 <= z0*T before solving, so exit 4 is reached
    # only by errors raised from inside a command
    from habitmfg import experiments
    from habitmfg.errors import InfeasibilityError

    def boom(cfg, out):
        raise InfeasibilityError("initial wealth cannot support addictive habit")

    monkeypatch.setattr(experiments, "cmd_solve", boom)
    assert cli.main(["solve", "--config", write(tmp_path, LINEAR), "--out", str(tmp_path)]) == 4
    assert "infeasible" in capsys.readouterr().err
