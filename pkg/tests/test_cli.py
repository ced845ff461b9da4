import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import cli
from src.core.context import reset_context
from src.sim.dgp import DgpSpec, generate_dgp

VARIABLES = ["GDPC1", "CPIAUCSL", "UNRATE", "GS10", "FEDFUNDS"]


@pytest.fixture(autouse=True)
def fresh_context():
    reset_context()
    yield
    reset_context()


def make_workspace(tmp_path: Path, **estimation) -> tuple[Path, np.ndarray]:
    """Simulated 5-variable quarterly dataset ending in 2019Q4 and a settings file."""
    _, data = generate_dgp(DgpSpec(n=5, p=2, T=120, seed=3))
    dates = pd.period_range("1990Q1", periods=120, freq="Q")
    frame = pd.DataFrame(data, columns=VARIABLES)
    frame.insert(0, "sasdate", [str(d) for d in dates])
    csv = tmp_path / "data.csv"
    frame.to_csv(csv, index=False)

    settings = {
        "data": {
            "path": str(csv),
            "start": "1990Q1",
            "end": "2019Q4",
            "series": [{"name": v, "mnemonic": v, "transformation": "level"} for v in VARIABLES],
        },
        "estimation": {
            "prior": "acp",
            "lags": 2,
            "draws": 20,
            "burn_in": 0,
            "seed": 11,
            "kappa1": 0.2,
            "kappa2": 0.05,
            "optimize_kappa": False,
            **estimation,
        },
        "forecast": {"horizon": 4},
        "bench": {"draws": 5, "repeats": 1, "T": 60, "configs": [{"n": 3, "p": 1, "h": 2, "n_o": 1}]},
    }
    config = tmp_path / "settings.json"
    config.write_text(json.dumps(settings), encoding="utf-8")
    return config, data


def write_scenario(tmp_path: Path, unrate: float) -> Path:
    path = tmp_path / "scenario.yaml"
    path.write_text(
        "start: 2020Q1\n"
        "horizon: 4\n"
        "equality:\n"
        f"  - {{variable: UNRATE, date: 2020Q1, value: {unrate!r}}}\n"
        f"  - {{variable: UNRATE, date: 2020Q2, value: {unrate!r}}}\n"
        "inequality:\n"
        "  - {variable: GS10, date: 2020Q2, lower: -1.0, upper: 1.0}\n",
        encoding="utf-8",
    )
    return path


def read_quantiles(out: Path) -> pd.DataFrame:
    return pd.read_csv(out / "quantiles.csv")


def test_version(capsys):
    assert cli.main(["ver"]) == 0
    assert "condcast" in capsys.readouterr().out


def test_no_command_prints_help(capsys):
    assert cli.main([]) == 0
    assert "estimate" in capsys.readouterr().out


def test_forecast_respects_scenario(tmp_path):
    config, data = make_workspace(tmp_path)
    unrate = float(np.round(data[-1, 2], 3))
    scenario = write_scenario(tmp_path, unrate)
    out = tmp_path / "out"

    code = cli.main(["forecast", "-c", str(config), "-s", str(scenario), "-o", str(out)])

    assert code == 0
    table = read_quantiles(out)
    assert list(table.columns) == ["variable", "date", "q05", "q16", "q50", "q84", "q95"]
    assert len(table) == 5 * 4
    pinned = table[(table["variable"] == "UNRATE") & table["date"].isin(["2020Q1", "2020Q2"])]
    np.testing.assert_allclose(pinned[["q05", "q50", "q95"]].to_numpy(), unrate, atol=1e-6)
    bounded = table[(table["variable"] == "GS10") & (table["date"] == "2020Q2")]
    assert bounded["q05"].iloc[0] > -1.0
    assert bounded["q95"].iloc[0] < 1.0
    q = table[["q05", "q16", "q50", "q84", "q95"]].to_numpy()
    assert np.all(np.diff(q, axis=1) >= 0.0)


def test_forecast_outputs_are_byte_identical(tmp_path):
    config, data = make_workspace(tmp_path)
    scenario = write_scenario(tmp_path, float(np.round(data[-1, 2], 3)))

    for name in ("a", "b"):
        args = ["forecast", "-c", str(config), "-s", str(scenario), "-o", str(tmp_path / name)]
        assert cli.main([*args, "--difference"]) == 0

    for file in ("quantiles.csv", "difference.csv"):
        assert (tmp_path / "a" / file).read_bytes() == (tmp_path / "b" / file).read_bytes()


def test_forecast_threads_do_not_change_output(tmp_path):
    config, data = make_workspace(tmp_path)
    scenario = write_scenario(tmp_path, float(np.round(data[-1, 2], 3)))
    base = ["forecast", "-c", str(config), "-s", str(scenario)]

    assert cli.main([*base, "-o", str(tmp_path / "one")]) == 0
    assert cli.main([*base, "-o", str(tmp_path / "four"), "--threads", "4"]) == 0

    assert (tmp_path / "one" / "quantiles.csv").read_bytes() == (
        tmp_path / "four" / "quantiles.csv"
    ).read_bytes()


def test_estimate_then_forecast_from_archive(tmp_path):
    config, _ = make_workspace(tmp_path)
    out = tmp_path / "est"

    assert cli.main(["estimate", "-c", str(config), "-o", str(out)]) == 0
    summary = json.loads((out / "estimation.json").read_text(encoding="utf-8"))
    assert summary["draws"] == 20
    assert summary["sample"] == ["1990Q1", "2019Q4"]

    args = ["forecast", "-c", str(config), "--posterior", str(out / "posterior.npz")]
    assert cli.main([*args, "-o", str(tmp_path / "fc"), "--save-draws"]) == 0
    with np.load(tmp_path / "fc" / "draws.npz") as archive:
        assert archive["draws"].shape == (20, 5 * 4)


def test_niw_prior_from_flags(tmp_path):
    config, _ = make_workspace(tmp_path)
    out = tmp_path / "niw"

    code = cli.main(
        ["estimate", "-c", str(config), "-o", str(out), "--prior", "niw", "--draws", "5", "--burn-in", "5"]
    )

    assert code == 0
    assert json.loads((out / "estimation.json").read_text(encoding="utf-8"))["kind"] == "reduced"


def test_irf_mode(tmp_path):
    config, _ = make_workspace(tmp_path)
    out = tmp_path / "irf"

    code = cli.main(["forecast", "-c", str(config), "-o", str(out), "--irf", "GDPC1", "--irf-horizon", "6"])

    assert code == 0
    table = pd.read_csv(out / "irf.csv")
    assert len(table) == 5 * 6
    first = table[(table["variable"] == "GDPC1") & (table["date"] == "2020Q1")]
    np.testing.assert_allclose(first[["q05", "q95"]].to_numpy(), 1.0, atol=1e-6)


def test_unknown_variable_exit_code(tmp_path, capsys):
    config, _ = make_workspace(tmp_path)
    scenario = tmp_path / "bad.yaml"
    scenario.write_text(
        "start: 2020Q1\nequality:\n  - {variable: PAYEMS, date: 2020Q1, value: 1.0}\n",
        encoding="utf-8",
    )

    code = cli.main(["forecast", "-c", str(config), "-s", str(scenario), "-o", str(tmp_path / "x")])

    assert code == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "UnknownVariable"
    assert record["category"] == "validation"


def test_missing_sample_range_exit_code(tmp_path):
    config, _ = make_workspace(tmp_path)
    settings = json.loads(config.read_text(encoding="utf-8"))
    settings["data"]["start"] = None
    config.write_text(json.dumps(settings), encoding="utf-8")

    assert cli.main(["estimate", "-c", str(config), "-o", str(tmp_path / "x")]) == 2


def test_missing_scenario_exit_code(tmp_path):
    config, _ = make_workspace(tmp_path)

    code = cli.main(["forecast", "-c", str(config), "-s", "no_such_scenario", "-o", str(tmp_path / "x")])

    assert code == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    from src.core.errors import NotPositiveDefinite

    def broken(*_args, **_kwargs):
        raise NotPositiveDefinite("posterior precision lost definiteness")

    config, _ = make_workspace(tmp_path)
    monkeypatch.setattr(cli, "estimate_posterior", broken)

    assert cli.main(["estimate", "-c", str(config), "-o", str(tmp_path / "x")]) == 3
    assert "NotPositiveDefinite" in capsys.readouterr().err


def test_bench_writes_tables(tmp_path):
    config, _ = make_workspace(tmp_path)
    out = tmp_path / "bench"

    assert cli.main(["bench", "-c", str(config), "-o", str(out), "--kind", "equality"]) == 0

    table = pd.read_csv(out / "bench_equality.csv")
    assert list(table.columns) == [
        "method",
        "n",
        "p",
        "h",
        "n_o",
        "seconds",
        "draws_per_sec",
        "violations",
    ]
    assert set(table["method"]) == {"precision", "dense"}
    assert (table["violations"] == 0).all()
