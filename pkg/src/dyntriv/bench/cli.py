"""Command-line benchmark harness.

``dyntriv run`` builds a problem, runs the trivialization engine and writes a
CSV trace; ``dyntriv gradcheck`` checks a problem's Euclidean gradient.
Options may come from a JSON file (``--config``) whose keys are the
``RunConfig`` field names; flags given on the command line override it.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical abort,
4 I/O failure.
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass

from .. import optim
from .. import triv as tv
from ..engine import EngineConfig, init_state, run
from ..errors import ConfigError, DomainError, NumericalAbort, SingularMatrixError
from .problems import PROBLEMS, ProblemSpec, build_problem, gradcheck

CSV_HEADER = ("step", "loss", "grad_norm", "membership", "rebase", "wall_ms")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec
    trivialization: str = "riemannian_exp"
    K: float = 100
    optimizer: str = "adam"
    lr: float = 1e-3
    max_steps: int = 2000
    grad_tol: float = None
    loss_tol: float = None
    carry_moments: bool = False
    record_time: bool = False
    output: str = None

    def __post_init__(self):
        k = self.K
        if not (k == math.inf or (isinstance(k, int) and k >= 1)):
            raise ConfigError(f"K must be a positive integer or 'inf', got {k!r}")
        if not (isinstance(self.lr, (int, float)) and self.lr > 0):
            raise ConfigError("lr must be positive")
        if not (isinstance(self.max_steps, int) and self.max_steps >= 1):
            raise ConfigError("max_steps must be a positive integer")
        if self.trivialization not in tv.KIND_NAMES:
            raise ConfigError(f"unknown trivialization {self.trivialization!r}")
        if self.optimizer not in optim.OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")


def parse_k(value):
    """Rebase period from text or JSON: a positive integer or ``inf``."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity"):
            return math.inf
        try:
            value = int(text)
        except ValueError:
            raise ConfigError(f"K must be a positive integer or 'inf', got {value!r}") from None
    if isinstance(value, float) and value == math.inf:
        return math.inf
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"K must be a positive integer or 'inf', got {value!r}")
    return value


_TOP_KEYS = {"problem", "trivialization", "K", "optimizer", "lr", "max_steps", "grad_tol",
             "loss_tol", "carry_moments", "record_time", "output"}
_PROBLEM_KEYS = {"name", "n", "k", "seed"}


def config_from_dict(d):
    """RunConfig from a JSON-style dict (``K`` may be the string ``"inf"``)."""
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    prob = d.get("problem")
    if not isinstance(prob, dict) or "name" not in prob:
        raise ConfigError("config needs a 'problem' object with a 'name'")
    bad = set(prob) - _PROBLEM_KEYS
    if bad:
        raise ConfigError(f"unknown problem keys: {', '.join(sorted(bad))}")
    rest = {k: v for k, v in d.items() if k != "problem"}
    if "K" in rest:
        rest["K"] = parse_k(rest["K"])
    try:
        return RunConfig(problem=ProblemSpec(**prob), **rest)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_to_dict(c):
    d = asdict(c)
    d["K"] = "inf" if c.K == math.inf else c.K
    return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: error: {message}")


def _parser():
    p = _Parser(prog="dyntriv", description="Dynamic trivialization benchmarks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="optimize a built-in problem and write a CSV trace")
    r.add_argument("--config", help="JSON file with RunConfig fields")
    r.add_argument("--problem", choices=PROBLEMS)
    r.add_argument("--n", type=int, help="matrix size, or vector length on sphere/hyperboloid")
    r.add_argument("--cols", type=int, help="number of columns for brockett (Stiefel k)")
    r.add_argument("--seed", type=int)
    r.add_argument("--triv", choices=tv.KIND_NAMES)
    r.add_argument("--k", help="rebase period: positive integer or 'inf'")
    r.add_argument("--opt", choices=optim.OPTIMIZERS)
    r.add_argument("--lr", type=float)
    r.add_argument("--steps", type=int)
    r.add_argument("--grad-tol", type=float)
    r.add_argument("--loss-tol", type=float)
    r.add_argument("--carry-moments", action="store_true", default=None)
    r.add_argument("--record-time", action="store_true", default=None,
                   help="fill wall_ms (makes the CSV non-reproducible)")
    r.add_argument("--out", help="CSV trace path")
    r.set_defaults(usage_parser=r)

    g = sub.add_parser("gradcheck", help="compare a problem's gradient with finite differences")
    g.add_argument("--problem", choices=PROBLEMS, required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--cols", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--h", type=float, default=1e-6)
    return p


def _load_json(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data


def _merge(args):
    d = _load_json(args.config) if args.config else {}
    prob = dict(d.get("problem") or {})
    for flag, key in (("problem", "name"), ("n", "n"), ("cols", "k"), ("seed", "seed")):
        if getattr(args, flag) is not None:
            prob[key] = getattr(args, flag)
    if "name" not in prob:
        args.usage_parser.error("--problem is required (or 'problem.name' in --config)")
    d["problem"] = prob
    flags = {"triv": "trivialization", "k": "K", "opt": "optimizer", "lr": "lr",
             "steps": "max_steps", "grad_tol": "grad_tol", "loss_tol": "loss_tol",
             "carry_moments": "carry_moments", "record_time": "record_time", "out": "output"}
    for flag, key in flags.items():
        v = getattr(args, flag)
        if v is not None:
            d[key] = v
    return config_from_dict(d)


def execute(c):
    """Run ``c``; returns ``(problem, final_state, trace)``."""
    problem = build_problem(c.problem)
    t = tv.Trivialization(c.trivialization, problem.manifold)
    s = init_state(t, problem.start, c.K, optim.make_optimizer(c.optimizer, c.lr),
                   EngineConfig(carry_moments=c.carry_moments, record_time=c.record_time))
    s, trace = run(s, problem.objective, c.max_steps, c.grad_tol, c.loss_tol)
    return problem, s, trace


def _fmt(x):
    return "%.17g" % x


def write_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in trace:
            w.writerow((r.step, _fmt(r.loss), _fmt(r.grad_norm), _fmt(r.membership),
                        int(r.rebase), _fmt(r.wall_ms)))


def summary_line(c, trace):
    k = "inf" if c.K == math.inf else str(c.K)
    last = trace[-1]
    return (f"{c.problem.name} k={k} triv={c.trivialization} opt={c.optimizer} "
            f"final_loss={last.loss:.10g} steps={last.step} membership={last.membership:.3g}")


def _cmd_run(args):
    c = _merge(args)
    try:
        _, _, trace = execute(c)
    except NumericalAbort as exc:
        if c.output and exc.trace:
            write_csv(c.output, exc.trace)
        raise
    if c.output:
        write_csv(c.output, trace)
    print(summary_line(c, trace))
    return EXIT_OK


def _cmd_gradcheck(args):
    spec = ProblemSpec(args.problem, n=args.n or 0, k=args.cols or 0, seed=args.seed)
    problem = build_problem(spec)
    err = gradcheck(problem.objective, problem.start, args.h)
    print(f"{spec.name} gradcheck max_rel_err={err:.3e}")
    return EXIT_OK


def run_cli(argv=None):
    """Entry point; returns the process exit code."""
    try:
        args = _parser().parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_gradcheck(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalAbort, DomainError, SingularMatrixError, FloatingPointError) as exc:
        print(f"dyntriv: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"dyntriv: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main():
    sys.exit(run_cli())
