import numpy as np
import pandas as pd
import pytest

from src.core.errors import ValidationError
from src.db.config import BenchConfig
from src.sim.bench import (
    BENCH_COLUMNS,
    METHOD_DENSE,
    METHOD_PRECISION,
    BenchResult,
    build_case,
    constrained_indices,
    full_grid,
    run_benchmark,
    time_method,
    write_bench_table,
)
from src.sim.dgp import DgpSpec, generate_dgp


def test_full_grid_shape():
    grid = full_grid("equality")

    assert len(grid) == 18
    assert {(c.n, c.h) for c in grid} == {(8, 5), (15, 20), (40, 30)}
    assert {c.n_o for c in grid} == {1, 3, 5}
    assert {c.p for c in grid} == {2, 4}
    with pytest.raises(ValidationError):
        full_grid("soft")


def test_constrained_indices_cover_whole_paths():
    np.testing.assert_array_equal(constrained_indices(3, 2, 2), [0, 1, 3, 4])


def test_equality_case_pins_holdout_path():
    case = build_case(BenchConfig(n=4, p=2, h=3, n_o=2), "equality", n_draws=5, T=80, seed=1)

    assert len(case.posterior) == 5
    assert case.history.shape == (2, 4)
    assert case.constraints.kind() == "equality"
    assert len(case.constraints.equality) == 6


def test_inequality_case_band_width():
    case = build_case(BenchConfig(n=4, p=2, h=3, n_o=1), "inequality", n_draws=5, T=80, seed=1)

    ineq = case.constraints.inequality
    np.testing.assert_allclose(ineq.upper - ineq.lower, 0.2)


def test_inequality_band_centred_on_last_h_plus_one_periods():
    _, data = generate_dgp(DgpSpec(n=4, p=2, T=80, seed=1, holdout=3))
    centre = data[76:80, 0].mean()

    case = build_case(BenchConfig(n=4, p=2, h=3, n_o=1), "inequality", n_draws=5, T=80, seed=1)

    ineq = case.constraints.inequality
    np.testing.assert_allclose((ineq.upper + ineq.lower) / 2, centre)


def test_every_cell_is_violation_free():
    suite = [BenchConfig(n=3, p=2, h=4, n_o=1), BenchConfig(n=4, p=1, h=3, n_o=2)]

    eq = run_benchmark(suite, "equality", n_draws=20, repeats=1, T=80, seed=2)
    ineq = run_benchmark(suite, "inequality", n_draws=20, repeats=1, T=80, seed=2)

    assert [r.method for r in eq] == ["precision", "dense"] * 2
    assert [r.method for r in ineq] == ["precision", "gibbs"] * 2
    assert all(r.violations == 0 for r in eq + ineq)
    assert all(r.seconds > 0 and r.draws_per_sec > 0 for r in eq + ineq)


def test_posterior_parameter_source():
    cfg = BenchConfig(n=2, p=1, h=2, n_o=1)

    results = run_benchmark([cfg], "equality", n_draws=10, repeats=1, T=60, seed=3,
                            param_source="posterior", burn_in=20)

    assert all(r.violations == 0 for r in results)


def test_precision_path_beats_dense_on_large_system():
    case = build_case(BenchConfig(n=15, p=2, h=20, n_o=3), "equality", n_draws=10, seed=4)

    precision = time_method(case, METHOD_PRECISION, repeats=3)
    dense = time_method(case, METHOD_DENSE, repeats=3)

    assert dense.seconds / precision.seconds > 1.0


def test_bench_table_layout(tmp_path):
    results = [BenchResult("precision", 8, 2, 5, 1, 0.5, 2000.0, 0)]

    path = write_bench_table(results, tmp_path / "bench" / "eq.csv")

    text = path.read_text()
    assert text.splitlines()[0] == ",".join(BENCH_COLUMNS)
    assert text.splitlines()[1] == "precision,8,2,5,1,0.500000,2000.000000,0"
    assert list(pd.read_csv(path).columns) == BENCH_COLUMNS
