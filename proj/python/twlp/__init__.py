"""Linear programs with small-treewidth constraint matrices."""

from ._twlp import (  # noqa: F401
    DomainError,
    InputError,
    LpProblem,
    LpValueError,
    NumericalError,
    Solution,
    SolverError,
    StructuralError,
    TreeDecomposition,
    Triplet,
    check_td,
    corpus,
    generate,
    parse_lp,
    parse_td,
    reference_solve,
    solve,
    write_lp,
    write_td,
)


def solve_files(lp_path, td_path, **kwargs):
    with open(lp_path, encoding="utf-8") as f:
        problem = parse_lp(f.read())
    with open(td_path, encoding="utf-8") as f:
        td = parse_td(f.read())
    return solve(problem, td, **kwargs)


__all__ = [name for name in dir() if not name.startswith("_")]
