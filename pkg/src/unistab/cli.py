"""Command line interface, group-file format and run reports.

Group files are JSON::

    {"dimension": 2,
     "generators": [[[[0, 0], [-1, 0]], [[1, 0], [0, 0]]]],
     "tolerance": {"eps_entry": 1e-9},      # optional, any subset
     "max_order": 20000}                    # optional

Each generator is a list of rows, each row a list of ``[re, im]`` pairs. A
FILE argument of the form ``builtin:NAME`` loads ``NAME.json`` from the
bundled corpus instead of the file system.

Exit codes: 0 success, 1 a Certified vector whose stabilizer is not the
group (an internal inconsistency), 2 input error, 3 tolerance ambiguity.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import _kernels
from .errors import AmbiguousIdentification, InputError, NonSquareMatrix, SchemaError, UnistabError
from .genericity import Verdict, certify, sample
from .group import DEFAULT_MAX_ORDER, FiniteMatrixGroup, close, orbit
from .numerics import ToleranceConfig, spans
from .stabilizer import Comparison, compare, fixes_point, setwise_stabilizer

__all__ = [
    "GroupSpec",
    "RunReport",
    "emit_report",
    "format_vector",
    "list_builtin",
    "load_group_text",
    "main",
    "parse_group_file",
    "parse_report",
    "parse_vector",
    "run_command",
]

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_AMBIGUOUS = 3

_TOL_KEYS = ("eps_entry", "eps_rank", "sep_factor")


# ---------------------------------------------------------------- group files


@dataclass
class GroupSpec:
    dimension: int
    generators: list[np.ndarray]
    tolerance: ToleranceConfig
    max_order: int = DEFAULT_MAX_ORDER
    description: str | None = None

    def close(self) -> FiniteMatrixGroup:
        return close(self.generators, self.tolerance, self.max_order)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v)


def _complex_entry(v, path: str) -> complex:
    if not (isinstance(v, list) and len(v) == 2 and all(_is_number(t) for t in v)):
        raise SchemaError(f"{path}: expected a [re, im] pair of finite numbers, got {v!r}")
    return complex(v[0], v[1])


def parse_group_file(text: str, environ=None) -> GroupSpec:
    """Parse and validate a group document.

    Tolerance fields absent from the document fall back to the environment
    overrides, then to the defaults. Unitarity is checked later, by ``close``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("$: expected a JSON object")
    if "dimension" not in doc:
        raise SchemaError("$.dimension: required field is missing")
    n = doc["dimension"]
    if not (isinstance(n, int) and not isinstance(n, bool) and n > 0):
        raise SchemaError(f"$.dimension: expected a positive integer, got {n!r}")
    if "generators" not in doc:
        raise SchemaError("$.generators: required field is missing")
    raw = doc["generators"]
    if not isinstance(raw, list) or not raw:
        raise SchemaError("$.generators: expected a non-empty list of matrices")
    gens = []
    for k, mat in enumerate(raw):
        path = f"$.generators[{k}]"
        if not isinstance(mat, list):
            raise SchemaError(f"{path}: expected a list of rows")
        if len(mat) != n:
            raise NonSquareMatrix(f"{path}: has {len(mat)} rows, dimension is {n}")
        rows = []
        for r, row in enumerate(mat):
            if not isinstance(row, list):
                raise SchemaError(f"{path}[{r}]: expected a list of entries")
            if len(row) != n:
                raise NonSquareMatrix(f"{path}[{r}]: has {len(row)} entries, dimension is {n}")
            rows.append([_complex_entry(v, f"{path}[{r}][{c}]") for c, v in enumerate(row)])
        gens.append(np.array(rows, dtype=np.complex128))

    overrides = {}
    tol_doc = doc.get("tolerance", {})
    if not isinstance(tol_doc, dict):
        raise SchemaError("$.tolerance: expected an object")
    for key, value in tol_doc.items():
        if key not in _TOL_KEYS:
            raise SchemaError(f"$.tolerance.{key}: unknown tolerance field")
        if not _is_number(value):
            raise SchemaError(f"$.tolerance.{key}: expected a number, got {value!r}")
        overrides[key] = float(value)
    tol = ToleranceConfig.from_env(environ, **overrides)

    max_order = doc.get("max_order", DEFAULT_MAX_ORDER)
    if not (isinstance(max_order, int) and not isinstance(max_order, bool) and max_order > 0):
        raise SchemaError(f"$.max_order: expected a positive integer, got {max_order!r}")
    description = doc.get("description")
    return GroupSpec(n, gens, tol, max_order, description)


def list_builtin() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("unistab").joinpath("groups").iterdir() if p.name.endswith(".json"))


def load_group_text(source: str) -> bytes:
    """Raw bytes of a group file path or a ``builtin:NAME`` reference."""
    if source.startswith("builtin:"):
        name = source[len("builtin:") :]
        if name not in list_builtin():
            raise InputError(f"unknown builtin group {name!r}; available: {', '.join(list_builtin())}")
        return resources.files("unistab").joinpath("groups", f"{name}.json").read_bytes()
    try:
        with open(source, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror}") from exc


# ---------------------------------------------------------------- vectors


def parse_vector(text: str) -> np.ndarray:
    """``"1,0 0,1"`` -> ``[1, 1j]``: space-separated ``re,im`` coordinates."""
    coords = []
    for tok in text.split():
        parts = tok.split(",")
        if len(parts) != 2:
            raise InputError(f"bad coordinate {tok!r}; expected re,im")
        try:
            coords.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InputError(f"bad coordinate {tok!r}; expected re,im") from exc
    if not coords:
        raise InputError("empty vector")
    return np.array(coords, dtype=np.complex128)


def format_vector(v) -> str:
    return " ".join(f"{float(c.real)!r},{float(c.imag)!r}" for c in np.asarray(v, dtype=np.complex128))


def _pairs(v) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(v, dtype=np.complex128)]


def _matrix_pairs(m) -> list:
    return [_pairs(row) for row in np.asarray(m)]


# ---------------------------------------------------------------- reports


@dataclass
class RunReport:
    command: list[str]
    input_digest: str | None
    tolerance: dict
    seed: int | None = None
    results: dict = field(default_factory=dict)
    wall_time: float | None = None
    backend: str = _kernels.BACKEND


def emit_report(report: RunReport, fmt: str = "text") -> str:
    if fmt == "jsonl":
        return _emit_jsonl(report)
    if fmt == "text":
        return _emit_text(report)
    raise InputError(f"unknown report format {fmt!r}")


def _dump(obj) -> str:
    return json.dumps(obj, allow_nan=False, separators=(",", ":"))


def _emit_jsonl(report: RunReport) -> str:
    lines = [
        _dump(
            {
                "record": "header",
                "command": report.command,
                "input_digest": report.input_digest,
                "tolerance": report.tolerance,
                "seed": report.seed,
                "backend": report.backend,
            }
        )
    ]
    results = dict(report.results)
    samples = results.pop("samples", None)
    if samples is not None:
        lines += [_dump({"record": "sample", **s}) for s in samples]
        results["sample_records"] = len(samples)
    tail = {"record": "result", **results}
    if report.wall_time is not None:
        tail["wall_time"] = report.wall_time
    lines.append(_dump(tail))
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> RunReport:
    """Inverse of the json-lines form of :func:`emit_report`."""
    records = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not records or records[0].get("record") != "header":
        raise SchemaError("report does not start with a header record")
    head = records[0]
    samples = [{k: v for k, v in r.items() if k != "record"} for r in records if r.get("record") == "sample"]
    tail = next((r for r in records if r.get("record") == "result"), None)
    if tail is None:
        raise SchemaError("report has no result record")
    results = {k: v for k, v in tail.items() if k not in ("record", "wall_time")}
    if "sample_records" in results:
        if results.pop("sample_records") != len(samples):
            raise SchemaError("sample record count does not match")
        results["samples"] = samples
    return RunReport(
        command=head["command"],
        input_digest=head["input_digest"],
        tolerance=head["tolerance"],
        seed=head["seed"],
        results=results,
        wall_time=tail.get("wall_time"),
        backend=head["backend"],
    )


def _emit_text(report: RunReport) -> str:
    out = ["$ unistab " + " ".join(report.command)]
    if report.input_digest:
        out.append(f"input sha256: {report.input_digest}")
    out.append("tolerance: " + " ".join(f"{k}={v!r}" for k, v in report.tolerance.items()))
    if report.seed is not None:
        out.append(f"seed: {report.seed}")
    results = dict(report.results)
    samples = results.pop("samples", None)
    for key, value in results.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, allow_nan=False)
        out.append(f"{key}: {value}")
    if samples:
        out.append("samples:")
        for k, s in enumerate(samples):
            cert = s["certificate"]
            gap = "none" if cert["min_gap"] is None else f"{cert['min_gap']:.4g}"
            line = f"  #{k:<4d} {cert['verdict']:<21s} min_gap={gap}"
            if s["stabilizer_order"] is not None:
                line += f" stabilizer_order={s['stabilizer_order']} {s['comparison']}"
            out.append(line)
    if report.wall_time is not None:
        out.append(f"wall time: {report.wall_time:.3f} s")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- commands


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "jsonl"), default="text")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--timing", action="store_true", help="record wall time in the report")

    p = argparse.ArgumentParser(prog="unistab", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    c = sub.add_parser("close", parents=[common], help="close generators into a group")
    c.add_argument("file")
    for name, help_ in (
        ("orbit", "orbit of a vector"),
        ("certify", "genericity certificate of a vector"),
        ("stabilize", "setwise stabilizer of an orbit"),
    ):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("file")
        s.add_argument("--x", required=True, help='vector as space-separated re,im pairs, e.g. "1,0 0,1"')
    v = sub.add_parser("verify", parents=[common], help="sample random vectors and check G = U(Gx)")
    v.add_argument("file")
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    d = sub.add_parser("demo", parents=[common], help="built-in showcases")
    d.add_argument("which", choices=("square", "q8"))
    d.add_argument("--seed", type=int, default=0)
    return p


class _UsageError(InputError):
    kind = "UsageError"


def _parse_args(argv):
    parser = _parser()

    def fail(message):
        raise _UsageError(message)

    parser.error = fail
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.error = fail
    return parser.parse_args(argv)


def _load(source: str, environ):
    data = load_group_text(source)
    spec = parse_group_file(data.decode("utf-8"), environ)
    return spec, hashlib.sha256(data).hexdigest()


def _vector_for(spec: GroupSpec, text: str) -> np.ndarray:
    x = parse_vector(text)
    if x.shape[0] != spec.dimension:
        raise InputError(f"vector has dimension {x.shape[0]}, group acts on C^{spec.dimension}")
    return x


def _cmd_close(args, spec):
    g = spec.close()
    return {"dimension": g.n, "order": g.order, "element_count": len(g.elements), "generator_indices": list(g.generator_indices)}, EXIT_OK


def _cmd_orbit(args, spec):
    g = spec.close()
    x = _vector_for(spec, args.x)
    p = orbit(g, x)
    return {
        "group_order": g.order,
        "points": [_pairs(pt) for pt in p.points],
        "multiplicities": p.multiplicities.tolist(),
        "spanning": spans(p.points, g.n, g.tol),
    }, EXIT_OK


def _cmd_certify(args, spec):
    g = spec.close()
    cert = certify(g, _vector_for(spec, args.x))
    code = EXIT_AMBIGUOUS if cert.verdict is Verdict.BORDERLINE else EXIT_OK
    return {"group_order": g.order, "certificate": cert.to_dict()}, code


def _stabilize(g: FiniteMatrixGroup, x) -> dict:
    p = orbit(g, x)
    stab = setwise_stabilizer(p, g.tol)
    verdict = compare(g, stab)
    extra = [
        _matrix_pairs(c)
        for c in stab.elements
        if fixes_point(c, p.points[0], g.tol) and g.member_index(c) is None
    ]
    return {
        "group_order": g.order,
        "orbit_size": len(p),
        "stabilizer_order": stab.order,
        "comparison": verdict.value,
        "permutations": stab.permutations.tolist(),
        "extra_symmetries_fixing_x": extra,
    }


def _cmd_stabilize(args, spec):
    g = spec.close()
    return _stabilize(g, _vector_for(spec, args.x)), EXIT_OK


def _verify_results(g, count, seed):
    report = sample(g, count, seed, check_stabilizer=True)
    results = {
        "group_order": g.order,
        "sample_count": report.sample_count,
        "rng": report.rng,
        "verdict_counts": report.verdict_counts,
        "certified_equal": sum(
            1 for e in report.per_sample if e.certificate.verdict is Verdict.CERTIFIED and e.comparison == "Equal"
        ),
        "violations": report.violations,
        "samples": [e.to_dict() for e in report.per_sample],
    }
    if report.violations:
        code = EXIT_VIOLATION
    elif report.verdict_counts[Verdict.BORDERLINE.value]:
        code = EXIT_AMBIGUOUS
    else:
        code = EXIT_OK
    return results, code


def _cmd_verify(args, spec):
    if args.samples < 0:
        raise InputError("--samples must be non-negative")
    return _verify_results(spec.close(), args.samples, args.seed)


def _cmd_demo(args, environ):
    if args.which == "square":
        spec, digest = _load("builtin:c4_u2", environ)
        g = spec.close()
        x = np.array([1, 0], dtype=np.complex128)
        res = {"demo": "square", "reference_order": g.order, "x": _pairs(x)}
        res.update(_stabilize(g, x))
        code = EXIT_OK if res["comparison"] == Comparison.PROPER_SUPERGROUP.value else EXIT_VIOLATION
        return res, code, digest, spec.tolerance
    spec, digest = _load("builtin:q8_u2", environ)
    g = spec.close()
    found = None
    for k in range(64):
        rep = sample(g, 1, (args.seed + k) % 2**64)
        entry = rep.per_sample[0]
        if entry.certificate.verdict is Verdict.CERTIFIED:
            found = entry
            break
    if found is None:
        raise AmbiguousIdentification("no Certified vector found in 64 draws")
    res = {"demo": "q8", "reference_order": g.order, "x": _pairs(found.vector), "certificate": found.certificate.to_dict()}
    res.update(_stabilize(g, found.vector))
    code = EXIT_OK if res["comparison"] == Comparison.EQUAL.value else EXIT_VIOLATION
    return res, code, digest, spec.tolerance


def _echoed_command(argv):
    # where the report is written must not change its bytes
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a in ("--output", "-o"):
            skip = True
        elif not (a.startswith("--output=") or (a.startswith("-o") and len(a) > 2)):
            out.append(a)
    return out


def _execute(argv, environ=None):
    argv = list(argv)
    start = time.perf_counter()
    report = RunReport(command=_echoed_command(argv), input_digest=None, tolerance=ToleranceConfig().to_dict())
    args = None
    try:
        args = _parse_args(argv)
        report.tolerance = ToleranceConfig.from_env(environ).to_dict()
        if getattr(args, "seed", None) is not None:
            if not 0 <= args.seed < 2**64:
                raise InputError("--seed must be a 64-bit unsigned integer")
            report.seed = args.seed
        if args.cmd == "demo":
            results, code, digest, tol = _cmd_demo(args, environ)
        else:
            spec, digest = _load(args.file, environ)
            tol = spec.tolerance
            handler = {
                "close": _cmd_close,
                "orbit": _cmd_orbit,
                "certify": _cmd_certify,
                "stabilize": _cmd_stabilize,
                "verify": _cmd_verify,
            }[args.cmd]
            results, code = handler(args, spec)
        report.input_digest = digest
        report.tolerance = tol.to_dict()
        report.results = results
    except UnistabError as exc:
        code = EXIT_AMBIGUOUS if isinstance(exc, AmbiguousIdentification) else EXIT_INPUT
        report.results = {"error": {"kind": exc.kind, "message": str(exc)}}
    if args is not None and args.timing:
        report.wall_time = time.perf_counter() - start
    return code, report, args


def run_command(argv, environ=None) -> tuple[int, RunReport]:
    """Run one CLI invocation and return ``(exit_code, report)`` without printing."""
    code, report, _ = _execute(argv, environ)
    return code, report


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        _parser().print_help()
        return EXIT_OK if argv else EXIT_INPUT
    code, report, args = _execute(argv)
    fmt = args.format if args is not None else "text"
    text = emit_report(report, fmt)
    err = report.results.get("error")
    if err is not None:
        print(f"error[{err['kind']}]: {err['message']}", file=sys.stderr)
    if args is not None and args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
