"""Benchmark problems and the command-line harness."""

from .problems import (
    PROBLEMS, Problem, ProblemSpec, brockett_objective, build_problem, gradcheck,
    rayleigh_objective,
)
