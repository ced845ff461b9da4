from src.sim.bench import (
    BenchResult,
    full_grid,
    run_benchmark,
    write_bench_table,
)
from src.sim.dgp import DgpSpec, generate_dgp
from src.sim.oracle import DenseEqualitySampler, dense_oracle_equality, dense_unconditional

__all__ = [
    "BenchResult",
    "DenseEqualitySampler",
    "DgpSpec",
    "dense_oracle_equality",
    "dense_unconditional",
    "generate_dgp",
    "full_grid",
    "run_benchmark",
    "write_bench_table",
]
