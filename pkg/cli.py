"""
HL Lab - Command-line entry point

Subcommands:
- exponent: regime, reciprocal sums and critical exponent of p
- bound: theoretical constants for p and where they come from
- norm: sup-norm of a form read from a tensor file or a built-in example
- verify: check an inequality on one form or on a seeded ensemble
- khinchine-step: check the mixed-norm estimate with a randomized last slot
- search: lower bounds on optimal constants by ratio ascent
- probe: growth of sub-critical coefficient sums with n

Results go to standard output, diagnostics to standard error. Exit codes:
0 success, 2 usage, 3 domain, 4 certified violation.
"""

import argparse
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, TextIO

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel

from errors import HLLabError, UsageError
from exponents import (
    SubsetMode,
    bound_candidates,
    classify_regime,
    conjugate_exponent,
    constant_one_applies,
    critical_exponent,
    subset_parameter_s,
    RegimeTag,
)
from ksz import CSV_COLUMNS, DEFAULT_N_LIST, DEFAULT_PROBE_STARTS, DEFAULT_TRIALS, growth_probe
from norms import DEFAULT_VERTEX_BUDGET, NormConfig, sup_norm
from options import OptionParser, argparse_type
from parallel import resolve_threads
from records import VERSION, RunContext, emit, load_tensor, to_json
from search import SearchConfig, lower_bound_search, save_record
from tensor import CoeffTensor, Distribution, Field, littlewood_matrix, random_tensor
from verify import (
    BoundChoice,
    EnsembleSpec,
    Verdict,
    batch_verify,
    select_constant,
    verify_inequality,
    verify_khinchine_step,
)

logger = logging.getLogger("hllab")

EXIT_OK = 0
EXIT_VIOLATION = 4

EXAMPLES: Dict[str, Callable[[int], CoeffTensor]] = {
    "littlewood": lambda n: littlewood_matrix().padded((max(n, 2),) * 2),
    "identity": lambda n: CoeffTensor(np.eye(n)),
}


class RunConfig(BaseModel):
    """Fully resolved settings of one invocation"""

    subcommand: Literal["exponent", "bound", "norm", "verify", "khinchine-step", "search", "probe"]
    p: Optional[str] = None
    q: Optional[float] = None
    dims: Optional[List[int]] = None
    n: int = 2
    n_list: List[int] = list(DEFAULT_N_LIST)
    field: Literal["real", "complex"] = "real"
    dist: Literal["signs", "gaussian"] = "gaussian"
    mode: Literal["distinct_indices", "distinct_values"] = "distinct_indices"
    rule: Literal["classical", "universal", "main", "best"] = "best"
    extrapolated: bool = False
    seed: int = 0
    starts: int = 16
    max_iters: int = 10000
    tol: float = 1e-12
    vertex_budget: int = DEFAULT_VERTEX_BUDGET
    steps: int = 500
    restarts: int = 8
    step_size: float = 0.1
    trials: int = DEFAULT_TRIALS
    count: int = 100
    threads: int = 1
    example: Optional[str] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    format: Literal["json", "csv"] = "json"

    def norm_config(self, threads: Optional[int] = None) -> NormConfig:
        return NormConfig(
            starts=self.starts,
            max_iters=self.max_iters,
            tol=self.tol,
            seed=self.seed,
            threads=self.threads if threads is None else threads,
            vertex_budget=self.vertex_budget,
        )


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if not value:
        return default
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hllab", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"hllab {VERSION}")
    parser.add_argument("--log-level", default=None, help="stderr verbosity (default: HLLAB_LOG_LEVEL or WARNING)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, needs_p: bool = True):
        if needs_p:
            p.add_argument("--p", required=True, help="exponent list, e.g. inf,8,2")
        p.add_argument("--seed", type=argparse_type(int), default=None, help="master seed (default: HLLAB_SEED or 0)")
        p.add_argument("--threads", type=argparse_type(int), default=None,
                       help="worker threads (default: HLLAB_THREADS or all CPUs)")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--output", dest="output_path", default=None)

    def norm_flags(p: argparse.ArgumentParser, starts: int = 16):
        p.add_argument("--starts", type=argparse_type(int), default=starts)
        p.add_argument("--max-iters", type=argparse_type(int), default=10000)
        p.add_argument("--tol", type=argparse_type(OptionParser.real), default=1e-12)
        p.add_argument("--vertex-budget", type=argparse_type(int), default=None,
                       help="largest number of sign tuples (default: HLLAB_VERTEX_BUDGET or 2^24)")

    def tensor_flags(p: argparse.ArgumentParser):
        p.add_argument("--input", dest="input_path", default=None, help="tensor JSON file")
        p.add_argument("--dims", type=argparse_type(OptionParser.integers), default=None)
        p.add_argument("--field", choices=["real", "complex"], default="real")
        p.add_argument("--dist", choices=["signs", "gaussian"], default="gaussian")

    def subset_flags(p: argparse.ArgumentParser):
        p.add_argument("--mode", type=argparse_type(OptionParser.choice(SubsetMode)),
                       default=SubsetMode.DISTINCT_INDICES)
        p.add_argument("--rule", type=argparse_type(OptionParser.choice(BoundChoice)), default=BoundChoice.BEST)

    exponent = sub.add_parser("exponent", help="regime and critical exponent")
    common(exponent)

    bound = sub.add_parser("bound", help="constant bounds")
    common(bound)
    subset_flags(bound)
    bound.add_argument("--extrapolated", action="store_true", help="include non-minimal subset bounds")

    norm = sub.add_parser("norm", help="sup-norm of a form")
    common(norm)
    norm_flags(norm)
    norm.add_argument("--input", dest="input_path", default=None, help="tensor JSON file")
    norm.add_argument("--example", choices=sorted(EXAMPLES), default=None)
    norm.add_argument("--n", type=argparse_type(int), default=2)

    verify = sub.add_parser("verify", help="check an inequality")
    common(verify)
    norm_flags(verify)
    tensor_flags(verify)
    subset_flags(verify)
    verify.add_argument("--count", type=argparse_type(int), default=100)
    verify.add_argument("--example", choices=sorted(EXAMPLES), default=None)
    verify.add_argument("--n", type=argparse_type(int), default=2,
                        help="size of --example, and of ensembles without --dims")

    khinchine = sub.add_parser("khinchine-step", help="mixed-norm estimate with a randomized last slot")
    common(khinchine)
    norm_flags(khinchine)
    tensor_flags(khinchine)
    khinchine.add_argument("--example", choices=sorted(EXAMPLES), default=None)
    khinchine.add_argument("--n", type=argparse_type(int), default=2)

    search = sub.add_parser("search", help="lower bounds on optimal constants")
    common(search)
    norm_flags(search)
    search.add_argument("--n", type=argparse_type(int), required=True)
    search.add_argument("--restarts", type=argparse_type(int), default=8)
    search.add_argument("--steps", type=argparse_type(int), default=500)
    search.add_argument("--step-size", type=argparse_type(OptionParser.real), default=0.1)
    search.add_argument("--field", choices=["real", "complex"], default="real")
    search.add_argument("--input", dest="input_path", default=None, help="tensor JSON file used as an extra seed")

    probe = sub.add_parser("probe", help="growth of coefficient sums with n")
    common(probe)
    norm_flags(probe, starts=DEFAULT_PROBE_STARTS)
    probe.add_argument("--q", type=argparse_type(OptionParser.real), required=True)
    probe.add_argument("--n-list", type=argparse_type(OptionParser.integers), default=DEFAULT_N_LIST)
    probe.add_argument("--trials", type=argparse_type(int), default=DEFAULT_TRIALS)

    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge parsed flags with environment defaults"""
    values = {k: v for k, v in vars(args).items() if v is not None and k != "log_level"}
    values["seed"] = args.seed if args.seed is not None else _env_int("HLLAB_SEED", 0)
    values["threads"] = resolve_threads(args.threads)
    if "vertex_budget" in vars(args):
        values["vertex_budget"] = (args.vertex_budget if args.vertex_budget is not None
                                   else _env_int("HLLAB_VERTEX_BUDGET", DEFAULT_VERTEX_BUDGET))
    for key in ("mode", "rule"):
        if key in values:
            values[key] = values[key].value
    for key in ("dims", "n_list"):
        if key in values:
            values[key] = list(values[key])
    if values["seed"] < 0:
        raise UsageError(f"seed must be non-negative, got {values['seed']}")
    return RunConfig(**values)


def _vector(x) -> List[Any]:
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return [[float(z.real), float(z.imag)] for z in x]
    return [float(v) for v in x]


def _norm_dict(result) -> Dict[str, Any]:
    record = result.to_dict()
    record["witness"] = [_vector(x) for x in result.witness]
    return record


def _tensor(cfg: RunConfig, m: Optional[int] = None) -> CoeffTensor:
    """Tensor from --input, --example or a seeded draw of --dims"""
    if cfg.input_path:
        return load_tensor(cfg.input_path)
    if cfg.example:
        return EXAMPLES[cfg.example](cfg.n)
    if cfg.dims:
        return random_tensor(cfg.dims, cfg.field, cfg.dist, cfg.seed)
    if m is not None:
        return random_tensor((cfg.n,) * m, cfg.field, cfg.dist, cfg.seed)
    raise UsageError("give --input, --example or --dims")


def cmd_exponent(cfg: RunConfig) -> List[Dict[str, Any]]:
    p = OptionParser.exponents(cfg.p)
    regime = classify_regime(p)
    rho = critical_exponent(p)
    logger.info("✓ %s is in %s", p, regime.tag.value)
    return [{
        "p": p.format(),
        "m": p.m,
        "recip_sum": regime.recip_sum,
        "regime": regime.tag.value,
        "also_bh": regime.also_bh,
        "rho": rho,
        "head": [p.head(k) for k in range(1, p.m + 1)],
        "tail": [p.tail(k) for k in range(1, p.m + 1)],
        "conjugates": [conjugate_exponent(x) for x in p.entries],
    }]


def cmd_bound(cfg: RunConfig) -> List[Dict[str, Any]]:
    p = OptionParser.exponents(cfg.p)
    constant, source = select_constant(p, cfg.rule, cfg.mode)
    record = {
        "p": p.format(),
        "rule": cfg.rule,
        "constant": constant,
        "bound_source": source,
        "constant_one": constant_one_applies(p),
        "candidates": [
            {"value": c.value, "source": c.source.value, "indices": list(c.indices)}
            for c in bound_candidates(p, cfg.mode, cfg.extrapolated)
        ],
    }
    if classify_regime(p).tag is RegimeTag.DS_RANGE:
        report = subset_parameter_s(p, cfg.mode)
        record["subset"] = {
            "s": report.s,
            "indices": list(report.indices),
            "partial_sum": report.partial_sum,
            "mode": report.mode.value,
        }
    return [record]


def cmd_norm(cfg: RunConfig) -> List[Dict[str, Any]]:
    T = _tensor(cfg)
    p = OptionParser.exponent_sequence(cfg.p)
    result = sup_norm(T, p, cfg.norm_config())
    marker = "✓" if result.certified_exact else "~"
    logger.info("%s norm %.15g via %s", marker, result.value, result.method.value)
    return [_norm_dict(result)]


def cmd_verify(cfg: RunConfig) -> List[Dict[str, Any]]:
    p = OptionParser.exponents(cfg.p)
    if cfg.input_path or cfg.example:
        record = verify_inequality(_tensor(cfg), p, cfg.rule, cfg.norm_config(), cfg.mode, seed=cfg.seed)
        return [record.to_dict()]
    spec = EnsembleSpec(
        dist=Distribution(cfg.dist),
        dims=tuple(cfg.dims) if cfg.dims else (cfg.n,) * p.m,
        count=cfg.count,
        seed=cfg.seed,
        field=Field(cfg.field),
    )
    summary = batch_verify(spec, p, cfg.rule, cfg.norm_config(threads=1), cfg.mode, threads=cfg.threads)
    marker = "✗" if summary.violations else "✓"
    logger.info("%s %d/%d hold, %d inconclusive", marker, summary.holds, summary.count, summary.inconclusive)
    rows = [r.to_dict() for r in summary.records]
    if cfg.format == "json":
        rows.append({"summary": summary.to_dict()})
    return rows


def cmd_khinchine(cfg: RunConfig) -> List[Dict[str, Any]]:
    p_first = OptionParser.exponent_sequence(cfg.p)
    T = _tensor(cfg, m=len(p_first) + 1)
    record = verify_khinchine_step(T, p_first, cfg.norm_config())
    return [record.to_dict()]


def cmd_search(cfg: RunConfig) -> List[Dict[str, Any]]:
    p = OptionParser.exponents(cfg.p)
    initial = (load_tensor(cfg.input_path),) if cfg.input_path else ()
    search_cfg = SearchConfig(
        restarts=cfg.restarts,
        steps=cfg.steps,
        step_size=cfg.step_size,
        seed=cfg.seed,
        norm_cfg=cfg.norm_config(threads=1),
        initial=initial,
        field=Field(cfg.field),
        threads=cfg.threads,
    )
    record = lower_bound_search(p, cfg.n, search_cfg)
    result = record.to_dict()
    if cfg.output_path:
        sidecar = save_record(record, cfg.output_path)
        logger.info("✓ Saved best tensor to %s (record %s)", cfg.output_path, sidecar)
    return [result]


def cmd_probe(cfg: RunConfig) -> List[Dict[str, Any]]:
    p = OptionParser.exponents(cfg.p)
    table = growth_probe(p, cfg.q, cfg.n_list, cfg.trials, cfg.seed, cfg.norm_config(threads=1), cfg.threads)
    logger.info("✓ slope %.6g ± %.3g (maxima), %.6g ± %.3g (means, n >= %d)", table.slope, table.slope_stderr,
                table.mean_slope, table.mean_slope_stderr, table.min_fit_n)
    if cfg.format == "csv":
        return [row.to_dict() for row in table.rows]
    return [table.to_dict()]


COMMANDS: Dict[str, Callable[[RunConfig], List[Dict[str, Any]]]] = {
    "exponent": cmd_exponent,
    "bound": cmd_bound,
    "norm": cmd_norm,
    "verify": cmd_verify,
    "khinchine-step": cmd_khinchine,
    "search": cmd_search,
    "probe": cmd_probe,
}


def configure_logging(level: Optional[str] = None):
    level = (level or os.getenv("HLLAB_LOG_LEVEL") or "WARNING").upper()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(getattr(logging, level, logging.WARNING))


def _emit(rows: List[Dict[str, Any]], cfg: RunConfig, ctx: RunContext, stream: TextIO):
    if cfg.format == "csv":
        columns = CSV_COLUMNS if cfg.subcommand == "probe" else None
        emit(rows, "csv", stream, columns)
        return
    emit([ctx.stamp(row) for row in rows], "json", stream)


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """
    Execute one command

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])
        stdout: Result stream (default: sys.stdout)

    Returns:
        Process exit code
    """
    load_dotenv()
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.log_level)

    try:
        cfg = resolve_config(args)
        rows = COMMANDS[cfg.subcommand](cfg)
    except HLLabError as e:
        logger.error("✗ %s", e)
        return e.exit_code

    ctx = RunContext(cfg.model_dump(), cfg.seed)
    if cfg.output_path and cfg.subcommand != "search":
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as handle:
            _emit(rows, cfg, ctx, handle)
        logger.info("✓ Wrote %s", cfg.output_path)
    else:
        _emit(rows, cfg, ctx, stdout)

    if any(row.get("verdict") == Verdict.CERTIFIED_VIOLATION.value for row in rows):
        logger.error("✗ Certified violation of a proved inequality")
        return EXIT_VIOLATION
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
