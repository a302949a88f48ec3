"""
Run configuration: one YAML document per run, checked against
``data/schema/run_config.json``.
"""

import json
import logging
import os
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import yaml
from jsonschema import Draft7Validator

from coopmac.dmc import SlotSchedule
from coopmac.gaussian import GaussianParams, PowerPolicy
from coopmac.optimizer import SearchConfig
from coopmac.polytope import DEFAULT_ROW_LIMIT

logger = logging.getLogger(__name__)

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "../data/schema")


class ConfigError(ValueError):
    def __init__(self, message: str, location: Optional[str] = None) -> None:
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class ArgEnum(Enum):
    def __str__(self) -> str:
        return self.value


class Mode(ArgEnum):
    region = "region"
    frontier = "frontier"
    compare = "compare"
    fme_verify = "fme-verify"
    exponent = "exponent"
    dmc_bounds = "dmc-bounds"


class OutputFormat(ArgEnum):
    csv = "csv"
    json = "json"


def load_schema(name: str) -> Dict[str, Any]:
    with open(os.path.join(SCHEMA_DIR, name)) as f:
        return json.load(f)


def _line_of(node: Optional[yaml.Node], path: Sequence[Any]) -> Optional[int]:
    """1-based line of the YAML node at ``path``, or of its deepest existing parent."""
    line = node.start_mark.line + 1 if node is not None else None
    for key in path:
        if isinstance(node, yaml.MappingNode):
            node = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int):
            node = node.value[key] if key < len(node.value) else None
        else:
            node = None
        if node is None:
            break
        line = node.start_mark.line + 1
    return line


def _location(path: Sequence[Any], line: Optional[int], source: str) -> str:
    field = ".".join(str(p) for p in path) or "<root>"
    return f"{source}:{line} ({field})" if line is not None else f"{source} ({field})"


def load_document(path: str, schema_name: str) -> Dict[str, Any]:
    """Read and validate a YAML document.

    Args:
        path: the YAML file.
        schema_name: file name of the JSON schema under ``data/schema``.
    Returns:
        the parsed document.
    """
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read: {e.strerror}", path) from e
    try:
        root = yaml.compose(text)
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark is not None else path
        raise ConfigError(f"invalid YAML: {getattr(e, 'problem', e)}", where) from e
    if document is None:
        document = {}

    validator = Draft7Validator(load_schema(schema_name))
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        error = errors[0]
        path_list = list(error.absolute_path)
        raise ConfigError(error.message, _location(path_list, _line_of(root, path_list), path))
    return document


def _build(kind: Any, values: Dict[str, Any], block: str, source: str) -> Any:
    try:
        return kind(**values)
    except ValueError as e:
        raise ConfigError(str(e), f"{source} ({block})") from e


class RunConfig:
    mode: Mode
    gaussian: Optional[GaussianParams]
    schedule: Optional[SlotSchedule]
    policy: Optional[PowerPolicy]
    search: SearchConfig
    inter_user_gains: List[float]
    dmc_path: Optional[str]
    rho_steps: int
    h: float
    row_limit: int
    samples: int
    seed: int
    strict: bool
    external_path: Optional[str]
    compare_tolerance: float
    output_path: Optional[str]
    output_format: OutputFormat
    threads: int

    def __init__(
        self,
        mode: Mode,
        gaussian: Optional[GaussianParams] = None,
        schedule: Optional[SlotSchedule] = None,
        policy: Optional[PowerPolicy] = None,
        search: Optional[SearchConfig] = None,
        inter_user_gains: Optional[List[float]] = None,
        dmc_path: Optional[str] = None,
        rho_steps: int = 21,
        h: float = 1e-5,
        row_limit: int = DEFAULT_ROW_LIMIT,
        samples: int = 200,
        seed: int = 0,
        strict: bool = False,
        external_path: Optional[str] = None,
        compare_tolerance: float = 1e-3,
        output_path: Optional[str] = None,
        output_format: OutputFormat = OutputFormat.csv,
        threads: int = 1,
    ) -> None:
        self.mode = mode
        self.gaussian = gaussian
        self.schedule = schedule
        self.policy = policy
        self.search = search or SearchConfig()
        self.inter_user_gains = list(inter_user_gains or [])
        self.dmc_path = dmc_path
        self.rho_steps = rho_steps
        self.h = h
        self.row_limit = row_limit
        self.samples = samples
        self.seed = seed
        self.strict = strict
        self.external_path = external_path
        self.compare_tolerance = compare_tolerance
        self.output_path = output_path
        self.output_format = output_format
        self.threads = threads


def _resolve(base: str, path: Optional[str], what: str, source: str) -> Optional[str]:
    if path is None:
        return None
    full = path if os.path.isabs(path) else os.path.normpath(os.path.join(base, path))
    if not os.path.exists(full):
        raise ConfigError(f"{what} file {full} does not exist", source)
    return full


def load_config(
    path: str,
    out: Optional[str] = None,
    output_format: Optional[OutputFormat] = None,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    """Load a run configuration; the keyword arguments override the document."""
    doc = load_document(path, "run_config.json")
    base = os.path.dirname(os.path.abspath(path))

    gaussian = schedule = policy = None
    if "gaussian" in doc:
        gaussian = _build(GaussianParams, doc["gaussian"], "gaussian", path)
    if "schedule" in doc:
        schedule = _build(SlotSchedule, doc["schedule"], "schedule", path)
    if "policy" in doc:
        policy = _build(PowerPolicy, doc["policy"], "policy", path)
    search = _build(SearchConfig, doc.get("search", {}), "search", path)

    exponent = doc.get("exponent", {})
    fme = doc.get("fme", {})
    compare = doc.get("compare", {})
    output = doc.get("output", {})

    output_path = out or output.get("path")
    if output_path is not None and out is None and not os.path.isabs(output_path):
        output_path = os.path.normpath(os.path.join(base, output_path))
    if threads is not None and threads < 1:
        raise ConfigError("--threads must be at least 1")

    config = RunConfig(
        mode=Mode(doc["mode"]),
        gaussian=gaussian,
        schedule=schedule,
        policy=policy,
        search=search,
        inter_user_gains=doc.get("sweep", {}).get("inter_user_gain"),
        dmc_path=_resolve(base, doc.get("dmc"), "dmc", path),
        rho_steps=exponent.get("rho_steps", 21),
        h=exponent.get("h", 1e-5),
        row_limit=fme.get("row_limit", DEFAULT_ROW_LIMIT),
        samples=fme.get("samples", 200),
        seed=seed if seed is not None else fme.get("seed", 0),
        strict=fme.get("strict", False),
        external_path=_resolve(base, compare.get("external"), "external frontier", path),
        compare_tolerance=compare.get("tolerance", 1e-3),
        output_path=output_path,
        output_format=output_format or OutputFormat(output.get("format", "csv")),
        threads=threads or 1,
    )
    logger.info("Loaded %s config from %s", config.mode, path)
    return config
