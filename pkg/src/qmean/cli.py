"""Command-line harness for mean-estimation experiments.

Experiment files are JSON documents::

    {
      "name": "table1",
      "vectors": [[...], ...],      # or "angles": [[root, ..., leaves], ...]
      "shots": 8192,
      "seed": 0,
      "modes": ["exact", "sampled", "signs", "lowered"]
    }

``angles`` rows hold a flattened rotation tree (``d - 1`` angles, root
first).  Vectors are normalized on load.

Usage::

    qmean run FILE [--shots S] [--seed K] [--exact] [--sampled] [--signs]
                   [--lowered] [--format table|csv|json|plotdata] [--out PATH]
    qmean batch DIR [--format ...] [--out DIR] [--jobs J]
    qmean version

Exit status is 0 on success, 2 for parse or validation errors and 3 for
numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .encoder import VectorSet
from .errors import DistributionError, ParseError, QMeanError
from .meanest import (
    DEFAULT_EPSILON,
    DEFAULT_SHOTS,
    GateCountReport,
    MeanEstimate,
    build_circuit,
    estimate_from_distribution,
    gate_counts,
    lower_multicontrolled,
    recover_signs,
)
from .oracle import classical_mean
from .statevec import register_probabilities, run, sample

logger = logging.getLogger(__name__)

MODES = ("exact", "sampled", "signs", "lowered")
FORMATS = ("table", "csv", "json", "plotdata")
MAX_N = 64
MAX_D = 16

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    vectors: tuple[tuple[float, ...], ...] | None = None
    angles: tuple[tuple[float, ...], ...] | None = None
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    modes: frozenset = frozenset({"exact"})

    def vector_set(self) -> VectorSet:
        if self.vectors is not None:
            return VectorSet(self.vectors)
        return VectorSet.from_angles(self.angles)

    def with_modes(self, extra) -> "ExperimentSpec":
        return ExperimentSpec(self.name, self.vectors, self.angles, self.shots, self.seed,
                              frozenset(self.modes) | frozenset(extra))


def bundled_experiment(name: str) -> Path:
    """Path of a shipped fixture, e.g. ``bundled_experiment("table1")``."""
    ref = resources.files("qmean") / "data" / f"{name}.experiment"
    return Path(str(ref))


def _power_of_two(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


def _number_rows(value, key: str):
    if not isinstance(value, list) or not value:
        raise ParseError(f"field '{key}': expected a nonempty array of arrays")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise ParseError(f"field '{key}[{i}]': expected a nonempty array of numbers")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise ParseError(f"field '{key}[{i}][{j}]': expected a finite number, got {x!r}")
        if len(row) != len(value[0]):
            raise ParseError(f"field '{key}[{i}]': length {len(row)} differs from row 0 ({len(value[0])})")
        rows.append(tuple(float(x) for x in row))
    return tuple(rows)


def _int_field(doc: dict, key: str, default: int, lo: int, hi: int) -> int:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or not lo <= value <= hi:
        raise ParseError(f"field '{key}': expected an integer in [{lo}, {hi}], got {value!r}")
    return value


def parse_experiment_text(text: str, source: str = "<text>") -> ExperimentSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return _spec_from_doc(doc)
    except ParseError as exc:
        raise ParseError(f"{source}: {exc}") from None


def _spec_from_doc(doc) -> ExperimentSpec:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    unknown = set(doc) - {"name", "vectors", "angles", "shots", "seed", "modes"}
    if unknown:
        raise ParseError(f"unknown field(s): {', '.join(sorted(unknown))}")
    name = doc.get("name", "experiment")
    if not isinstance(name, str) or not name:
        raise ParseError("field 'name': expected a nonempty string")
    if ("vectors" in doc) == ("angles" in doc):
        raise ParseError("exactly one of 'vectors' or 'angles' must be given")

    vectors = angles = None
    if "vectors" in doc:
        vectors = _number_rows(doc["vectors"], "vectors")
        N, d = len(vectors), len(vectors[0])
    else:
        angles = _number_rows(doc["angles"], "angles")
        N, d = len(angles), len(angles[0]) + 1
    if not _power_of_two(N):
        raise ParseError(f"N must be a power of two >= 2, got {N} rows")
    if not _power_of_two(d):
        raise ParseError(f"d must be a power of two >= 2, got d={d}")
    if N > MAX_N or d > MAX_D:
        raise ParseError(f"N={N}, d={d} exceeds the caps N <= {MAX_N}, d <= {MAX_D}")

    if vectors is not None:
        normalized = []
        for i, row in enumerate(vectors):
            norm = math.sqrt(math.fsum(x * x for x in row))
            if norm == 0.0:
                raise ParseError(f"field 'vectors[{i}]': zero-norm row")
            if abs(norm - 1.0) > 1e-9:
                logger.info("vectors[%d] normalized (norm was %.17g)", i, norm)
                row = tuple(x / norm for x in row)
            normalized.append(row)
        vectors = tuple(normalized)

    modes = doc.get("modes", ["exact"])
    if not isinstance(modes, list) or any(m not in MODES for m in modes):
        raise ParseError(f"field 'modes': expected an array drawn from {list(MODES)}, got {modes!r}")
    shots = _int_field(doc, "shots", DEFAULT_SHOTS, 1, 2 ** 31 - 1)
    seed = _int_field(doc, "seed", 0, 0, 2 ** 64 - 1)
    return ExperimentSpec(name, vectors, angles, shots, seed, frozenset(modes))


def parse_experiment(source) -> ExperimentSpec:
    """Parse an experiment from a path or from the document text itself."""
    is_text = isinstance(source, str) and source.lstrip()[:1] in ("{", "[")
    if not is_text:
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
        return parse_experiment_text(text, str(path))
    return parse_experiment_text(source)


def spec_to_text(spec: ExperimentSpec) -> str:
    """Experiment document that parses back to ``spec``."""
    doc: dict = {"name": spec.name}
    if spec.vectors is not None:
        doc["vectors"] = [list(r) for r in spec.vectors]
    else:
        doc["angles"] = [list(r) for r in spec.angles]
    doc["shots"] = spec.shots
    doc["seed"] = spec.seed
    doc["modes"] = [m for m in MODES if m in spec.modes]
    return dump_json(doc) + "\n"


# -- running ----------------------------------------------------------------

@dataclass
class RunReport:
    spec: ExperimentSpec
    d: int
    N: int
    classical_mean: np.ndarray
    exact: np.ndarray | None = None
    sampled: np.ndarray | None = None
    counts: np.ndarray | None = None
    estimates: dict = field(default_factory=dict)
    gate_counts: GateCountReport | None = None
    lowered_gate_counts: GateCountReport | None = None
    duration: float = 0.0

    @property
    def num_outcomes(self) -> int:
        return 2 * self.d

    def labels(self) -> list[str]:
        width = self.d.bit_length()
        return [format(r, f"0{width}b") for r in range(self.num_outcomes)]

    def magnitude_error(self, which: str) -> np.ndarray:
        """``|estimate| - |classical mean|`` per component."""
        return np.abs(self.estimates[which].estimated_mean) - np.abs(self.classical_mean)

    def signed_error(self, which: str) -> np.ndarray | None:
        est = self.estimates[which]
        if est.signs is None:
            return None
        return est.estimated_mean - self.classical_mean


def run_experiment(spec: ExperimentSpec) -> RunReport:
    start = time.perf_counter()
    vs = spec.vector_set()
    circuit, layout = build_circuit(vs)
    report = RunReport(spec=spec, d=vs.d, N=vs.N, classical_mean=classical_mean(vs))
    report.gate_counts = gate_counts(circuit)
    if "lowered" in spec.modes:
        circuit = lower_multicontrolled(circuit)
        report.lowered_gate_counts = gate_counts(circuit, lower=False)
    exact = register_probabilities(run(circuit), layout.mean)
    if not np.isfinite(exact).all() or abs(exact.sum() - 1.0) > 1e-9:
        raise DistributionError("simulated distribution is not normalized")

    signs = recover_signs(vs, DEFAULT_EPSILON, base=exact) if "signs" in spec.modes else None
    wants_sampled = "sampled" in spec.modes
    if "exact" in spec.modes or not wants_sampled:
        report.exact = exact
        report.estimates["exact"] = estimate_from_distribution(exact, vs.d, mode="exact")
    if wants_sampled:
        hist = sample(exact, spec.shots, spec.seed)
        report.counts = hist.counts
        report.sampled = hist.frequencies()
        report.estimates["sampled"] = estimate_from_distribution(
            report.sampled, vs.d, mode="sampled", shots=spec.shots, seed=spec.seed
        )
        report.estimates["sampled"].counts = hist.counts
    if signs is not None:
        for est in report.estimates.values():
            est.signs = signs
            est.estimated_mean = signs * est.magnitudes
    report.duration = time.perf_counter() - start
    return report


# -- output -----------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dump_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dump_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dump_json(v, indent, _level + 1) for v in seq) + "]"
        items = [pad + dump_json(v, indent, _level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    return json.dumps(str(obj))


def _estimate_doc(est: MeanEstimate) -> dict:
    doc = {
        "mode": est.mode,
        "magnitudes": est.magnitudes,
        "estimated_mean": est.estimated_mean,
        "zero_outcome_probability": est.zero_outcome_probability,
    }
    if est.signs is not None:
        doc["signs"] = [int(s) for s in est.signs]
    if est.mode == "sampled":
        doc["shots"] = est.shots
        doc["seed"] = est.seed
    return doc


def report_to_dict(report: RunReport) -> dict:
    """Everything in the report except the wall-clock duration."""
    doc: dict = {
        "name": report.spec.name,
        "N": report.N,
        "d": report.d,
        "modes": [m for m in MODES if m in report.spec.modes],
        "labels": report.labels(),
        "classical_mean": report.classical_mean,
    }
    if report.exact is not None:
        doc["exact_distribution"] = report.exact
    if report.sampled is not None:
        doc["shots"] = report.spec.shots
        doc["seed"] = report.spec.seed
        doc["counts"] = report.counts
        doc["sampled_distribution"] = report.sampled
    doc["estimates"] = {}
    for key, est in report.estimates.items():
        entry = _estimate_doc(est)
        entry["magnitude_error"] = report.magnitude_error(key)
        signed = report.signed_error(key)
        if signed is not None:
            entry["signed_error"] = signed
        doc["estimates"][key] = entry
    doc["gate_counts"] = report.gate_counts.as_dict()
    if report.lowered_gate_counts is not None:
        doc["lowered_gate_counts"] = report.lowered_gate_counts.as_dict()
    return doc


def _emit_csv(report: RunReport) -> str:
    lines = ["outcome,label,exact_p,sampled_p,count"]
    for r, label in enumerate(report.labels()):
        exact = _fmt(report.exact[r]) if report.exact is not None else ""
        sampled = _fmt(report.sampled[r]) if report.sampled is not None else ""
        count = str(int(report.counts[r])) if report.counts is not None else ""
        lines.append(f"{r},{label},{exact},{sampled},{count}")
    return "\n".join(lines) + "\n"


def _emit_plotdata(report: RunReport) -> str:
    source, probs = ("sampled", report.sampled) if report.sampled is not None else ("exact", report.exact)
    lines = [f"# {report.spec.name}: mean-register outcome probabilities ({source})"]
    lines += [f"{label} {_fmt(p)}" for label, p in zip(report.labels(), probs)]
    return "\n".join(lines) + "\n"


def _emit_table(report: RunReport) -> str:
    spec = report.spec
    out = [f"experiment {spec.name}: N={report.N}, d={report.d}, "
           f"{report.gate_counts.total} gates ({report.gate_counts.lowered_total} after lowering)"]
    out.append("")
    header = f"{'outcome':>8} {'label':>6} {'exact':>10} {'sampled':>10} {'count':>7}"
    out.append(header)
    for r, label in enumerate(report.labels()):
        exact = f"{report.exact[r]:10.6f}" if report.exact is not None else f"{'-':>10}"
        sampled = f"{report.sampled[r]:10.6f}" if report.sampled is not None else f"{'-':>10}"
        count = f"{int(report.counts[r]):7d}" if report.counts is not None else f"{'-':>7}"
        out.append(f"{r:>8} {label:>6} {exact} {sampled} {count}")
    out.append("")
    out.append(f"{'k':>3} {'classical':>11}" + "".join(f" {key:>11} {'err':>10}" for key in report.estimates))
    for k in range(report.d):
        row = f"{k:>3} {report.classical_mean[k]:11.6f}"
        for key, est in report.estimates.items():
            row += f" {est.estimated_mean[k]:11.6f} {report.magnitude_error(key)[k]:10.2e}"
        out.append(row)
    if spec.modes & {"sampled"}:
        out.append(f"\nshots={spec.shots} seed={spec.seed}")
    out.append(f"elapsed {report.duration:.4f} s")
    return "\n".join(out) + "\n"


def emit(report: RunReport, fmt: str = "table") -> str:
    """Render a report.

    ``csv`` and ``json`` write floats with 17 significant digits and leave
    out the wall-clock time, so equal inputs give byte-identical text.
    """
    if fmt == "table":
        return _emit_table(report)
    if fmt == "csv":
        return _emit_csv(report)
    if fmt == "json":
        return dump_json(report_to_dict(report)) + "\n"
    if fmt == "plotdata":
        return _emit_plotdata(report)
    raise ValueError(f"unknown format {fmt!r}")


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- entry point ------------------------------------------------------------

_EXTENSIONS = {"table": "txt", "csv": "csv", "json": "json", "plotdata": "dat"}


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (DistributionError, FloatingPointError, np.linalg.LinAlgError)):
        return EXIT_NUMERIC
    if isinstance(exc, QMeanError):
        return EXIT_INVALID
    return EXIT_NUMERIC


def _cmd_run(args) -> int:
    spec = parse_experiment(Path(args.file))
    flags = [m for m in MODES if getattr(args, m)]
    spec = spec.with_modes(flags)
    overrides = {}
    if args.shots is not None:
        overrides["shots"] = args.shots
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        spec = ExperimentSpec(spec.name, spec.vectors, spec.angles,
                              overrides.get("shots", spec.shots), overrides.get("seed", spec.seed), spec.modes)
    text = emit(run_experiment(spec), args.format)
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_one(path: Path, out_dir: Path, fmt: str) -> tuple[Path, int, str]:
    try:
        report = run_experiment(parse_experiment(path))
        write_atomic(out_dir / f"{path.stem}.{_EXTENSIONS[fmt]}", emit(report, fmt))
        return path, EXIT_OK, "ok"
    except Exception as exc:  # reported per file; the batch keeps going
        return path, _exit_code(exc), str(exc)


def _cmd_batch(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise ParseError(f"{directory}: not a directory")
    files = sorted(directory.glob("*.experiment"))
    if not files:
        raise ParseError(f"{directory}: no *.experiment files")
    out_dir = Path(args.out) if args.out else directory
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(lambda p: _run_one(p, out_dir, args.format), files))
    status = EXIT_OK
    for path, code, msg in results:
        print(f"{path.name}: {msg}")
        status = max(status, code)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmean", description="Quantum mean-estimator experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment file")
    p_run.add_argument("file")
    p_run.add_argument("--shots", type=int)
    p_run.add_argument("--seed", type=int)
    for mode in MODES:
        p_run.add_argument(f"--{mode}", action="store_true")
    p_run.add_argument("--format", choices=FORMATS, default="table")
    p_run.add_argument("--out")
    p_run.set_defaults(func=_cmd_run)

    p_batch = sub.add_parser("batch", help="run every *.experiment file in a directory")
    p_batch.add_argument("dir")
    p_batch.add_argument("--format", choices=FORMATS, default="json")
    p_batch.add_argument("--out")
    p_batch.add_argument("--jobs", type=int, default=4)
    p_batch.set_defaults(func=_cmd_batch)

    p_version = sub.add_parser("version", help="print the package version")
    p_version.set_defaults(func=lambda args: print(__version__) or EXIT_OK)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        code = _exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
