"""
Run one configured task and write its artifacts.
"""

import logging
import os
from typing import Any, Callable, Dict, List, Optional

from coopmac.config import Mode, OutputFormat, RunConfig
from coopmac.dmc import evaluate_bounds, region_from_bounds
from coopmac.exponents import ExponentInputs, rho_sweep, slope_check
from coopmac.gaussian import GaussianParams, compute_bounds, power_feasible
from coopmac.helper import (
    read_dmc,
    read_frontier,
    frontier_table,
    rounded,
    write_frontier,
    write_json,
    write_sweep,
    write_table,
)
from coopmac.optimizer import (
    Frontier,
    contains,
    frontier,
    mac_baseline,
    polygon_frontier,
    tdma_point,
)
from coopmac.polytope import format_inequality, format_system, instantiate
from coopmac.regions import AGGREGATE_RATES, verify_projection

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ROW_LIMIT = 3
EXIT_VERIFICATION = 4


class RunResult:
    mode: Mode
    artifacts: List[str]
    verdict: Optional[str]
    exit_code: int
    payload: Dict[str, Any]

    def __init__(
        self,
        mode: Mode,
        artifacts: List[str],
        payload: Dict[str, Any],
        verdict: Optional[str] = None,
        exit_code: int = EXIT_OK,
    ) -> None:
        self.mode = mode
        self.artifacts = artifacts
        self.payload = payload
        self.verdict = verdict
        self.exit_code = exit_code


def _output_path(config: RunConfig, suffix: str = "") -> str:
    ext = str(config.output_format)
    path = config.output_path or f"coopmac-{config.mode}.{ext}"
    if suffix:
        stem, dot_ext = os.path.splitext(path)
        path = f"{stem}{suffix}{dot_ext or '.' + ext}"
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return path


def _write(config: RunConfig, payload: Any, rows: List[Dict[str, Any]], suffix: str = "") -> str:
    path = _output_path(config, suffix)
    if config.output_format == OutputFormat.json:
        write_json(payload, path)
    else:
        write_table(rows, path)
    logger.info("Wrote %s", path)
    return path


def _gains(config: RunConfig) -> List[GaussianParams]:
    assert config.gaussian is not None
    if not config.inter_user_gains:
        return [config.gaussian]
    return [config.gaussian.replace(k12=g, k21=g) for g in config.inter_user_gains]


def _gain_suffix(config: RunConfig, params: GaussianParams) -> str:
    return f"_k12_{params.k12:g}" if len(config.inter_user_gains) > 1 else ""


def run_region(config: RunConfig) -> RunResult:
    assert config.gaussian and config.schedule and config.policy
    bounds = compute_bounds(config.gaussian, config.policy, config.schedule)
    system = region_from_bounds(bounds, config.search.projected_rows)
    vertices = [[float(x), float(y)] for x, y in instantiate(system, {}).vertices()]
    check = power_feasible(config.policy, config.schedule, config.gaussian)
    payload = {
        "bounds": bounds.as_dict(),
        "rows": [format_inequality(r, AGGREGATE_RATES) for r in system.rows],
        "vertices": vertices,
        "power": {
            "feasible": check.feasible,
            "slack1": check.slack1,
            "slack2": check.slack2,
        },
    }
    rows = [{"r1": x, "r2": y} for x, y in vertices]
    logger.info("Region has %d vertices", len(vertices))
    return RunResult(config.mode, [_write(config, payload, rows)], payload)


def _frontier_payload(front: Frontier) -> List[Dict[str, Any]]:
    return frontier_table(front).to_dict("records")


def run_frontier(config: RunConfig) -> RunResult:
    artifacts = []
    payload: Dict[str, Any] = {}
    for params in _gains(config):
        front = frontier(params, config.search, threads=config.threads)
        path = _output_path(config, _gain_suffix(config, params))
        if config.output_format == OutputFormat.json:
            write_json(_frontier_payload(front), path)
        else:
            write_frontier(front, path)
        logger.info("Wrote %s", path)
        artifacts.append(path)
        payload[f"{params.k12:g}"] = len(front)
    return RunResult(config.mode, artifacts, payload)


def run_compare(config: RunConfig) -> RunResult:
    external = read_frontier(config.external_path, "external") if config.external_path else None
    tol = config.compare_tolerance
    rows = []
    verdict = "PASS"
    for params in _gains(config):
        cooperative = frontier(params, config.search, threads=config.threads)
        others = {
            "mac": polygon_frontier(mac_baseline(params).region(), params, "mac"),
            "tdma": tdma_point(params, config.search, threads=config.threads),
        }
        if external is not None:
            others["external"] = external
        for name, other in others.items():
            forward = contains(cooperative, other, tol)
            backward = contains(other, cooperative, tol)
            rows.append(
                {
                    "k12": params.k12,
                    "outer": "cooperative",
                    "inner": name,
                    "contains": forward,
                    "reverse": backward,
                }
            )
            logger.info(
                "k12=%g: cooperative %s %s", params.k12, "contains" if forward else "misses", name
            )
            if name == "mac" and not forward:
                verdict = "FAIL"
    payload = {"verdict": verdict, "tolerance": tol, "comparisons": rows}
    path = _write(config, payload, rows)
    code = EXIT_OK if verdict == "PASS" else EXIT_VERIFICATION
    return RunResult(config.mode, [path], payload, verdict, code)


def run_fme_verify(config: RunConfig) -> RunResult:
    report = verify_projection(config.row_limit, config.samples, config.seed)
    payload = report.as_dict()
    rows = [
        {"system": name, "row": row}
        for name in ("projected", "pruned", "template", "extra_rows", "missing_rows")
        for row in payload[name]
    ]
    path = _write(config, payload, rows)
    listing = _output_path(config, "_systems")
    listing = os.path.splitext(listing)[0] + ".txt"
    with open(listing, "w") as f:
        f.write("# projected\n" + format_system(report.projected))
        f.write("# pruned\n" + format_system(report.pruned))
    logger.info("Projection verdict: %s", report.verdict)

    failed = report.verdict == "FAIL" or (report.verdict == "FINDING" and config.strict)
    code = EXIT_VERIFICATION if failed else EXIT_OK
    return RunResult(config.mode, [path, listing], payload, report.verdict, code)


def run_exponent(config: RunConfig) -> RunResult:
    assert config.dmc_path and config.schedule
    spec, dist = read_dmc(config.dmc_path)
    results = rho_sweep(spec, dist, config.schedule, config.rho_steps)
    path = _output_path(config)
    if config.output_format == OutputFormat.json:
        write_json([r.as_dict() for r in results], path)
    else:
        write_sweep(results, path)

    finite, analytic = slope_check(ExponentInputs(spec, dist, config.schedule), config.h)
    report = {
        "h": config.h,
        "finite_diff": finite,
        "analytic": analytic,
        "discrepancy": abs(finite - analytic),
    }
    slope_path = os.path.splitext(_output_path(config, "_slope"))[0] + ".json"
    write_json(report, slope_path)
    logger.info("Wrote %s and %s", path, slope_path)
    return RunResult(config.mode, [path, slope_path], report)


def run_dmc_bounds(config: RunConfig) -> RunResult:
    assert config.dmc_path and config.schedule
    spec, dist = read_dmc(config.dmc_path)
    bounds = evaluate_bounds(spec, dist, config.schedule)
    payload = bounds.as_dict()
    return RunResult(config.mode, [_write(config, payload, [rounded(payload)])], payload)


HANDLERS: Dict[Mode, Callable[[RunConfig], RunResult]] = {
    Mode.region: run_region,
    Mode.frontier: run_frontier,
    Mode.compare: run_compare,
    Mode.fme_verify: run_fme_verify,
    Mode.exponent: run_exponent,
    Mode.dmc_bounds: run_dmc_bounds,
}


def run(config: RunConfig) -> RunResult:
    """Run the configured mode and write its artifacts."""
    logger.info("Running %s", config.mode)
    return HANDLERS[config.mode](config)
