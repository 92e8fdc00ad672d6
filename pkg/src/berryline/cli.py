"""Command-line front end.

    berryline berry two-level --Rc 1 --r 1 --branch plus --points 100000
    berryline broaden --l 1e-2 --Rc 1 --h0 linear --omega 1 --format json
    berryline scaling --which two-level --ratios 1e-4,1e-3,1e-2 --out study
    berryline mead-compare --nu0 1 --ratio 1e-3

Every command accepts ``--config PATH``: either flat ``key = value`` text
(``#`` starts a comment, keys are the long flag names without the leading
dashes) or a JSON report written by an earlier run, whose echoed inputs are
reused. Flags override the config file.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from . import berry, broadening, quantize
from .errors import BadInput, NumericalFailure
from .models import CollectiveModel, ThreeLevelModel, TwoLevelModel
from .numerics import fit_loglog

SCHEMA_VERSION = "1"
PROG = "berryline"
OUTPUT_KEYS = ("format", "out", "quiet")
FORMATS = ("json", "csv", "both")
DEFAULT_FORMAT = {"scaling": "both"}


class ConfigError(Exception):
    pass


# -- value parsing -----------------------------------------------------------


def _float(text: str) -> float:
    x = float(text)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _int(text: str) -> int:
    return int(text)


def _float_list(text: str) -> list[float]:
    items = [s.strip() for s in str(text).split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return [_float(s) for s in items]


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


def _positive(x):
    if not x > 0:
        raise ValueError("must be > 0")


def _nonnegative(x):
    if not x >= 0:
        raise ValueError("must be >= 0")


def _at_least(n: int, what: str):
    def check(x):
        if x < n:
            raise ValueError(f"{what} >= {n} required")

    return check


def _theta_range(x):
    if not 0.0 <= x <= math.pi / 2:
        raise ValueError("theta must lie in [0, pi/2]")


def _ratio_range(xs):
    if any(not x > 0 for x in xs):
        raise ValueError("ratios must be > 0")


@dataclass(frozen=True)
class Param:
    name: str
    parse: Callable[[str], Any]
    default: Any
    help: str = ""
    check: Optional[Callable[[Any], None]] = None
    # echo/use only when this predicate holds on the resolved config
    when: Optional[Callable[[dict], bool]] = None


def _two_level(cfg):
    return cfg["model"] == "two-level"


def _su3(cfg):
    return cfg["model"] == "su3"


def _linear(cfg):
    return cfg["h0"] == "linear"


def _quadratic(cfg):
    return cfg["h0"] == "quadratic"


HBAR = Param("hbar", _float, 1.0, "reduced Planck constant", _positive)
COLLECTIVE = [
    Param("h0", _choice("linear", "quadratic"), "linear", "collective Hamiltonian kind"),
    Param("omega", _float, 1.0, "slope of linear H0", _positive, _linear),
    Param("inertia", _float, 1.0, "moment of inertia of quadratic H0", _positive, _quadratic),
    HBAR,
]
TOLERANCES = [
    Param("gap-tol", _float, berry.DEFAULT_GAP_TOL, "minimum spectral gap", _positive),
    Param("phase-tol", _float, berry.DEFAULT_PHASE_TOL, "max phase change when K doubles", _positive),
]

COMMANDS: dict[str, list[Param]] = {
    "berry": [
        Param("model", _choice("two-level", "su3"), "two-level", "internal model"),
        Param("Rc", _float, 1.0, "characteristic scale", _nonnegative, _two_level),
        Param("r", _float, 0.0, "transverse offset", _nonnegative, _two_level),
        Param("branch", _choice("plus", "minus", "both"), "both", "two-level branch", None, _two_level),
        Param("winding", _int, 1, "turns of the field vector", None, _two_level),
        Param("theta", _float, math.pi / 3, "SU(3) angle theta", _theta_range, _su3),
        Param("phi", _float, math.pi / 4, "SU(3) angle phi", None, _su3),
        Param("chi1", _float, 0.0, "initial chi1", None, _su3),
        Param("chi2", _float, 0.0, "initial chi2", None, _su3),
        Param("n1", _int, 1, "chi1 winding", None, _su3),
        Param("n2", _int, 0, "chi2 winding", None, _su3),
        Param("level", _int, 0, "SU(3) level index (0 tracks mu1)", None, _su3),
        Param("method", _choice("auto", "tracked", "eigen"), "auto", "SU(3) state source", None, _su3),
        Param("panels", _int, 4096, "quadrature panels", _at_least(8, "panel count"), _su3),
        Param("points", _int, 16384, "loop points K", _at_least(berry.MIN_POINTS, "K")),
        *TOLERANCES,
    ],
    "spectrum": [
        Param("Rc", _float, 1.0, "characteristic scale", _nonnegative),
        Param("r", _float, 0.0, "transverse offset", _nonnegative),
        Param("m-min", _int, -3, "lowest quantum number"),
        Param("m-max", _int, 3, "highest quantum number"),
        *COLLECTIVE,
    ],
    "broaden": [
        Param("model", _choice("two-level", "su3"), "two-level", "internal model"),
        Param("l", _float, 1e-3, "fundamental length", _positive),
        Param("Rc", _float, 1.0, "characteristic scale", _positive),
        Param("m", _int, 0, "quantum number"),
        Param("branch", _choice("plus", "minus"), "plus", "two-level branch", None, _two_level),
        Param("n-samples", _int, 101, "patch grid size", _at_least(2, "n-samples")),
        *COLLECTIVE,
    ],
    "scaling": [
        Param("which", _choice("two-level", "su3", "mead"), "two-level", "quantity to fit"),
        Param("ratios", _float_list, [1e-4, 3e-4, 1e-3, 3e-3, 1e-2], "comma-separated l/Rc", _ratio_range),
        Param("Rc", _float, 1.0, "characteristic scale", _positive, lambda c: c["which"] != "mead"),
        Param("m", _int, 0, "quantum number", None, lambda c: c["which"] != "mead"),
        Param("n-samples", _int, 101, "patch grid size", _at_least(2, "n-samples"), lambda c: c["which"] != "mead"),
        Param("nu0", _float, 1.0, "reference frequency", _positive, lambda c: c["which"] == "mead"),
        Param("beta", _float, 1.0, "beta(Rc/l)", _positive, lambda c: c["which"] == "mead"),
        *COLLECTIVE,
    ],
    "mead-compare": [
        Param("nu0", _float, 1.0, "reference frequency", _positive),
        Param("ratio", _float, 1e-3, "l/Rc", _positive),
        Param("beta", _float, 1.0, "beta(Rc/l)", _positive),
        Param("Rc", _float, 1.0, "characteristic scale", _positive),
        Param("m", _int, 0, "quantum number"),
        Param("n-samples", _int, 101, "patch grid size", _at_least(2, "n-samples")),
        *COLLECTIVE,
    ],
}


# -- configuration -------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    inputs: dict[str, Any]
    format: str = "json"
    out: Optional[str] = None
    quiet: bool = False
    warnings: list[str] = field(default_factory=list)


def read_config_file(path: str | os.PathLike, command: str) -> dict[str, str]:
    """Raw ``key -> value`` strings from a config file or a JSON report."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("inputs"), dict):
            raise ConfigError(f"JSON config {path} has no 'inputs' object")
        if doc.get("command", command) != command:
            raise ConfigError(f"JSON config {path} was written by '{doc['command']}', not '{command}'")
        return {k: format_value(v) for k, v in doc["inputs"].items()}

    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: missing key")
        values[key] = value
    return values


def resolve(command: str, raw: dict[str, str]) -> dict[str, Any]:
    """Parse and validate raw strings against the command's parameter table;
    defaults fill the gaps. Returns only the parameters in effect."""
    params = COMMANDS[command]
    known = {p.name for p in params}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown key '{key}' for command '{command}'")
    cfg: dict[str, Any] = {}
    for p in params:
        if p.name in raw:
            try:
                value = p.parse(raw[p.name])
                if p.check is not None:
                    p.check(value)
            except ValueError as exc:
                raise ConfigError(f"invalid value for '{p.name}': {raw[p.name]!r} ({exc})") from None
        else:
            value = p.default
        cfg[p.name] = value
    return {p.name: cfg[p.name] for p in params if p.when is None or p.when(cfg)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Geometric phases, Berry-corrected quantization and fundamental-length broadening.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, params in COMMANDS.items():
        sp = sub.add_parser(name)
        if name == "berry":
            sp.add_argument("model", nargs="?", default=argparse.SUPPRESS, help="two-level or su3")
        for p in params:
            if name == "berry" and p.name == "model":
                continue
            sp.add_argument(f"--{p.name}", dest=p.name, default=argparse.SUPPRESS, help=p.help)
        sp.add_argument("--config", default=None, help="key = value file or earlier JSON report")
        sp.add_argument("--format", default=None, help="json, csv or both")
        sp.add_argument("--out", default=None, help="output path (stem when --format both)")
        sp.add_argument("--quiet", action="store_true", default=None)
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    output = {k: args.pop(k) for k in OUTPUT_KEYS}

    raw: dict[str, str] = {}
    if config_path is not None:
        raw = read_config_file(config_path, command)
    for key in OUTPUT_KEYS:
        if output[key] is None and key in raw:
            output[key] = raw[key]
        raw.pop(key, None)
    raw.update(args)

    fmt = output["format"] or DEFAULT_FORMAT.get(command, "json")
    if fmt not in FORMATS:
        raise ConfigError(f"invalid value for 'format': {fmt!r} (expected json, csv or both)")
    quiet = output["quiet"]
    if isinstance(quiet, str):
        if quiet.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"invalid value for 'quiet': {quiet!r}")
        quiet = quiet.lower() in ("true", "1", "yes")
    return RunConfig(
        command=command,
        inputs=resolve(command, raw),
        format=fmt,
        out=output["out"],
        quiet=bool(quiet),
    )


# -- serialization -------------------------------------------------------------


def format_float(x: float) -> str:
    """17 significant digits; always carries a decimal point or exponent."""
    s = format(x, ".17g")
    if not any(c in s for c in ".e") and "inf" not in s and "nan" not in s:
        s += ".0"
    return s


def format_value(v: Any) -> str:
    """Config-file spelling of an echoed input value."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, list):
        return ",".join(format_value(x) for x in v)
    return str(v)


def dumps(obj: Any, indent: int = 0) -> str:
    """Deterministic JSON: insertion-ordered keys, 17-digit floats."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(dumps(x, indent + 1) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(x, indent + 1) for x in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            ["" if v is None else format_float(v) if isinstance(v, float) else v for v in row]
        )
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- commands --------------------------------------------------------------------


def _collective(cfg) -> CollectiveModel:
    param = cfg["omega"] if cfg["h0"] == "linear" else cfg["inertia"]
    return CollectiveModel(cfg["h0"], param, cfg["hbar"])


def _phase_row(label, res: berry.BerryPhaseResult) -> dict[str, Any]:
    return {
        "branch": label,
        "analytic": res.analytic,
        "numerical": res.numerical,
        "unwrapped": res.unwrapped,
        "discrepancy": res.discrepancy,
        "resolution_change": res.resolution_change,
    }


def _run_berry(cfg):
    header = ["branch", "analytic", "numerical", "unwrapped", "discrepancy"]
    tols = dict(gap_tol=cfg["gap-tol"], phase_tol=cfg["phase-tol"])
    if cfg["model"] == "two-level":
        loop = berry.ParameterLoop.two_level(TwoLevelModel(cfg["Rc"], cfg["r"]), cfg["winding"], cfg["points"])
        labels = ["plus", "minus"] if cfg["branch"] == "both" else [cfg["branch"]]
        phases = [_phase_row(b, berry.wilson_loop_phase(loop, b, **tols)) for b in labels]
        results: dict[str, Any] = {"phases": phases}
        if len(phases) == 2:
            results["antisymmetry"] = berry.wrap_phase(phases[0]["numerical"] + phases[1]["numerical"])
    else:
        model = ThreeLevelModel(cfg["theta"], cfg["phi"], cfg["chi1"], cfg["chi2"])
        loop = berry.ParameterLoop.su3(model, cfg["n1"], cfg["n2"], cfg["points"])
        res = berry.wilson_loop_phase(loop, cfg["level"], method=cfg["method"], **tols)
        phases = [_phase_row(cfg["level"], res)]
        results = {"phases": phases}
        if cfg["level"] == 0:
            results["connection_integral"] = berry.connection_integral_su3(loop, cfg["panels"])
    rows = [[p[h] for h in header] for p in phases]
    return results, header, rows


def _run_spectrum(cfg):
    if cfg["m-min"] > cfg["m-max"]:
        raise ConfigError("invalid value for 'm-max': must be >= m-min")
    levels = quantize.spectrum(
        _collective(cfg), TwoLevelModel(cfg["Rc"], cfg["r"]), range(cfg["m-min"], cfg["m-max"] + 1)
    )
    header = ["m", "branch", "gamma", "P_quantized", "energy_exact", "energy_first_order"]
    rows = [
        [lv.m, "plus" if lv.branch > 0 else "minus", lv.gamma, lv.P_quantized, lv.energy_exact, lv.energy_first_order]
        for lv in levels
    ]
    results = {
        "levels": [dict(zip(header, row)) for row in rows],
        "max_truncation_residual": quantize.max_truncation_residual(levels),
    }
    return results, header, rows


def _run_broaden(cfg):
    config = broadening.PatchConfig(
        l=cfg["l"],
        Rc=cfg["Rc"],
        n_samples=cfg["n-samples"],
        collective=_collective(cfg),
        m=cfg["m"],
        branch=cfg.get("branch", "plus"),
    )
    sweep = broadening.sweep_patch if cfg["model"] == "two-level" else broadening.sweep_patch_su3
    rep = sweep(config)
    results = {
        "dE_berry": rep.dE_berry,
        "dE_gap": rep.dE_gap,
        "dE_predicted": rep.dE_predicted,
        "relative_error": rep.relative_error,
        "coefficient": rep.coefficient,
        "gap_to_berry_ratio": rep.gap_to_berry_ratio,
    }
    rows = [[r, s, g] for (r, s), (_, g) in zip(rep.samples, rep.gap_samples)]
    return results, ["r", "berry_shift", "gap_shift"], rows


def _run_scaling(cfg):
    which = cfg["which"].replace("-", "_")
    kwargs: dict[str, Any] = {"collective": _collective(cfg)}
    if which == "mead":
        kwargs.update(nu0=cfg["nu0"], beta=cfg["beta"])
    else:
        kwargs.update(Rc=cfg["Rc"], m=cfg["m"], n_samples=cfg["n-samples"])
    pairs = broadening.scaling_samples(cfg["ratios"], which, **kwargs)
    fit = fit_loglog([p[0] for p in pairs], [p[1] for p in pairs])
    results = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "rms_residual": fit.rms_residual,
        "n_points": fit.n_points,
        "samples": [list(p) for p in pairs],
    }
    return results, ["ratio", "dE"], [list(p) for p in pairs]


def _run_mead(cfg):
    cmp = broadening.compare_with_mead(
        cfg["ratio"],
        nu0=cfg["nu0"],
        beta=cfg["beta"],
        Rc=cfg["Rc"],
        collective=_collective(cfg),
        n_samples=cfg["n-samples"],
        m=cfg["m"],
    )
    results = {
        "mead_bound": cmp.mead.bound,
        "dE_berry": cmp.report.dE_berry,
        "dE_predicted": cmp.report.dE_predicted,
        "geometric_to_mead": cmp.measured_ratio,
        "geometric_to_mead_predicted": cmp.predicted_ratio,
    }
    header = ["ratio", "mead_bound", "dE_berry", "dE_predicted", "geometric_to_mead"]
    row = [cfg["ratio"], cmp.mead.bound, cmp.report.dE_berry, cmp.report.dE_predicted, cmp.measured_ratio]
    return results, header, [row]


RUNNERS = {
    "berry": _run_berry,
    "spectrum": _run_spectrum,
    "broaden": _run_broaden,
    "scaling": _run_scaling,
    "mead-compare": _run_mead,
}


def execute(config: RunConfig) -> tuple[dict[str, Any], str]:
    """Run the command; returns ``(envelope, csv_text)``."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        results, header, rows = RUNNERS[config.command](config.inputs)
    notes = config.warnings + [str(w.message) for w in caught]
    envelope = {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "inputs": dict(config.inputs),
        "results": results,
        "warnings": notes,
    }
    return envelope, to_csv(header, rows)


def run(config: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        envelope, table = execute(config)
    except ConfigError as exc:
        print(f"{PROG}: error: {exc}", file=stderr)
        return 2
    except BadInput as exc:
        print(f"{PROG}: error: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    except NumericalFailure as exc:
        print(f"{PROG}: {type(exc).__name__}: {exc}", file=stderr)
        return 3

    doc = dumps(envelope) + "\n"
    outputs: list[tuple[Optional[Path], str]] = []
    if config.format in ("json", "both"):
        outputs.append((None, doc))
    if config.format in ("csv", "both"):
        outputs.append((None, table))
    if config.out is not None:
        out = Path(config.out)
        if config.format == "both":
            outputs = [(out.with_suffix(".json"), doc), (out.with_suffix(".csv"), table)]
        else:
            outputs = [(out, outputs[0][1])]
    for path, text in outputs:
        if path is None:
            stdout.write(text)
        else:
            write_atomic(path, text)
            if not config.quiet:
                print(f"wrote {path}", file=stderr)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
