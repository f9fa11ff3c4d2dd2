"""Command-line front end.

Subcommands: certify, barrier-scan, geodesic-probe, foliate, slice-probe.
Exit codes: 0 = success / condition holds, 2 = condition violated or
degenerate, 1 = usage or evaluation error.

Run configuration is a flat sectioned key = value text file:

    # comment
    [model]
    builtin = schwarzschild-interior     # or an inline chart:
    param[M] = 1.0                       # coordinates = t, x
                                         # g[t,t] = "-1"
                                         # g[x,x] = "1"
                                         # singular_loci = "x - 2*M"
    [field]
    builtin = canonical                  # requires alpha = ...
    alpha = 0.5                          # or: expression = "0.5*(x^2...)"

    [certify]                            # box[t] = -1, 1  per coordinate
    samples_per_axis = 5                 # (model's default box otherwise)

    [barrier-scan]
    M = 1.0
    r_lo = 0.5
    r_hi = 1.9
    samples = 100

    [geodesic-probe]
    position = 0, 0, 0, 0
    velocity = 0, 1, 0, 0
    span = 0, 1
    step = 0.001
    c = 1.0                              # loop mode instead:
                                         # loop[t] = "0"
                                         # loop[x] = "cos(6.2831853071795865*s)"
    [slice-probe]
    coordinate = t
    value = 0.0
    point[0] = 0, 0.3, -0.2, 0.7
    maximal = true

    [foliate]
    coordinate = tau
    values = 0.5, 1, 2
    point = 1, 0.8, 1.0, 0.4

Expression payloads are quoted verbatim; everything else is numbers, names,
or comma lists. Reports are deterministic for a given config apart from the
leading timestamp line, which --no-timestamp suppresses; CSV uses '.' as the
decimal separator and 17 significant digits.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .catalog import builtin_models
from .convexity import ConvexityQuery, certify_region
from .errors import ConfigError, ToolkitError
from .expressions import ScalarField
from .foliation import (SliceSpec, barrier_scan, mean_curvature, slice_laplacian,
                        slice_restricted_hessian)
from .geodesics import (CurveSpec, GeodesicState, closed_curve_probe,
                        convexity_along_curve, integrate_geodesic)
from .geometry import Point, SpacetimeModel

_REQUIRED = object()


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


# --------------------------------------------------------------------------
# config file
# --------------------------------------------------------------------------

class ConfigValue:
    __slots__ = ("items", "line")

    def __init__(self, items, line):
        self.items = items  # list of ("expr" | "token", text)
        self.line = line


def _split_value(text, lineno):
    """Split on top-level commas; double-quoted chunks are verbatim payloads."""
    items = []
    buf = []
    in_quotes = False
    was_quoted = False
    for ch in text:
        if in_quotes:
            if ch == '"':
                in_quotes = False
            else:
                buf.append(ch)
        elif ch == '"':
            if buf and "".join(buf).strip():
                raise ConfigError("unexpected quote inside a value", lineno)
            in_quotes = True
            was_quoted = True
        elif ch == ",":
            items.append(("expr" if was_quoted else "token", "".join(buf).strip()))
            buf = []
            was_quoted = False
        else:
            buf.append(ch)
    if in_quotes:
        raise ConfigError("unterminated quote", lineno)
    last = "".join(buf).strip()
    if last or was_quoted or items:
        items.append(("expr" if was_quoted else "token", last))
    if not items:
        raise ConfigError("empty value", lineno)
    return items


class Config:
    def __init__(self, sections):
        self.sections = sections

    @classmethod
    def from_text(cls, text) -> "Config":
        sections: dict[str, dict[str, ConfigValue]] = {}
        current = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            # comments start at an unquoted '#'
            stripped_chars = []
            in_quotes = False
            for ch in raw:
                if ch == '"':
                    in_quotes = not in_quotes
                if ch == "#" and not in_quotes:
                    break
                stripped_chars.append(ch)
            line = "".join(stripped_chars).strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]") or len(line) < 3:
                    raise ConfigError("malformed section header", lineno)
                current = line[1:-1].strip()
                sections.setdefault(current, {})
                continue
            if "=" not in line:
                raise ConfigError("expected 'key = value'", lineno)
            if current is None:
                raise ConfigError("key outside any [section]", lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            if not key:
                raise ConfigError("empty key", lineno)
            if key in sections[current]:
                raise ConfigError(f"duplicate key '{key}'", lineno)
            sections[current][key] = ConfigValue(_split_value(value, lineno), lineno)
        return cls(sections)

    @classmethod
    def from_path(cls, path) -> "Config":
        try:
            with open(path, encoding="utf-8") as handle:
                return cls.from_text(handle.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None

    def section(self, name) -> dict[str, ConfigValue]:
        return self.sections.get(name, {})

    def has(self, section, key) -> bool:
        return key in self.section(section)

    def value(self, section, key, default=_REQUIRED) -> ConfigValue:
        sec = self.section(section)
        if key not in sec:
            if default is _REQUIRED:
                raise ConfigError(f"missing '{key}' in [{section}]")
            return default
        return sec[key]

    def scalar(self, section, key, default=_REQUIRED) -> str:
        v = self.value(section, key, default)
        if v is default and v is not _REQUIRED and not isinstance(v, ConfigValue):
            return v
        if len(v.items) != 1:
            raise ConfigError(f"'{key}' expects a single value", v.line)
        return v.items[0][1]

    def number(self, section, key, default=_REQUIRED) -> float:
        raw = self.scalar(section, key, default)
        if not isinstance(raw, str):
            return raw
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"'{key}' is not a number: {raw!r}",
                              self.value(section, key).line) from None

    def numbers(self, section, key) -> list[float]:
        v = self.value(section, key)
        out = []
        for _, text in v.items:
            try:
                out.append(float(text))
            except ValueError:
                raise ConfigError(f"'{key}' contains a non-number: {text!r}", v.line) from None
        return out

    def flag(self, section, key, default=False) -> bool:
        raw = self.scalar(section, key, None)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ConfigError(f"'{key}' must be true or false, got {raw!r}",
                          self.value(section, key).line)

    def bracketed(self, section, prefix) -> dict[str, ConfigValue]:
        """All keys of the form prefix[inner], mapped by inner text."""
        out = {}
        for key, v in self.section(section).items():
            if key.startswith(prefix + "[") and key.endswith("]"):
                out[key[len(prefix) + 1:-1].strip()] = v
        return out


# --------------------------------------------------------------------------
# model / field resolution
# --------------------------------------------------------------------------

def resolve_model(cfg: Config) -> SpacetimeModel:
    sec = cfg.section("model")
    if not sec:
        raise ConfigError("missing [model] section")
    overrides = {name: float(v.items[0][1])
                 for name, v in cfg.bracketed("model", "param").items()}
    if cfg.has("model", "builtin"):
        name = cfg.scalar("model", "builtin")
        return builtin_models().model(name, **overrides)
    coords = [text for _, text in cfg.value("model", "coordinates").items]
    components = {}
    for inner, v in cfg.bracketed("model", "g").items():
        pair = [s.strip() for s in inner.split(",")]
        if len(pair) != 2 or not all(c in coords for c in pair):
            raise ConfigError(f"bad metric component key 'g[{inner}]'", v.line)
        if len(v.items) != 1:
            raise ConfigError(f"'g[{inner}]' expects one expression", v.line)
        components[(coords.index(pair[0]), coords.index(pair[1]))] = v.items[0][1]
    loci = ()
    if cfg.has("model", "singular_loci"):
        loci = tuple(text for _, text in cfg.value("model", "singular_loci").items)
    return SpacetimeModel.from_components(
        name="inline", coordinate_names=coords, components=components,
        parameters=overrides, singular_loci=loci)


def resolve_field(cfg: Config, model: SpacetimeModel) -> ScalarField:
    sec = cfg.section("field")
    if not sec:
        raise ConfigError("missing [field] section")
    if cfg.has("field", "builtin"):
        name = cfg.scalar("field", "builtin")
        if not cfg.has("field", "alpha"):
            raise ConfigError(f"unbound parameter alpha for builtin field '{name}'")
        return builtin_models().field(name, alpha=cfg.number("field", "alpha"))
    text = cfg.scalar("field", "expression", None)
    if text is None:
        raise ConfigError("field needs either 'builtin' or 'expression'")
    return model.field(text)


# --------------------------------------------------------------------------
# report writer
# --------------------------------------------------------------------------

class Report:
    def __init__(self, structured=False, timestamp=True):
        self.structured = structured
        self.lines: list[str] = []
        if timestamp:
            self.lines.append(f"# generated: {datetime.now(timezone.utc).isoformat()}")

    def kv(self, key, value):
        if self.structured:
            self.lines.append(f"{key} = {_fmt(value)}")
        else:
            self.lines.append(f"{key.replace('.', ' ').replace('_', ' ')}: {_fmt(value)}")

    def raw(self, line):
        self.lines.append(line)

    def comment(self, text):
        self.lines.append(f"# {text}")

    def csv_row(self, values):
        self.lines.append(",".join(_fmt(float(v)) for v in values))

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"


def _emit(report: Report, out_path):
    text = report.render()
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_certify(args) -> int:
    cfg = Config.from_path(args.config)
    model = resolve_model(cfg)
    field = resolve_field(cfg, model)
    boxes = cfg.bracketed("certify", "box")
    if boxes:
        region = []
        for name in model.coordinate_names:
            if name not in boxes:
                raise ConfigError(f"certify box missing coordinate '{name}'")
            lohi = [float(t) for _, t in boxes[name].items]
            if len(lohi) != 2:
                raise ConfigError(f"box[{name}] expects 'lo, hi'", boxes[name].line)
            region.append((lohi[0], lohi[1]))
        region = tuple(region)
    elif model.sample_box is not None:
        region = model.sample_box
    else:
        raise ConfigError("no certify box given and the model declares no default")
    query = ConvexityQuery(
        region=region,
        samples_per_axis=int(args.grid or cfg.number("certify", "samples_per_axis", 5.0)),
        psd_tolerance=args.tolerance or cfg.number("certify", "psd_tolerance", 1e-10),
        c_search_ceiling=cfg.number("certify", "c_ceiling", 1e3),
    )
    cert = certify_region(model, field, query)
    report = Report(args.structured, not args.no_timestamp)
    report.kv("verdict", cert.verdict)
    if cert.c_interval is not None:
        report.kv("c_interval.lo", cert.c_interval.lo)
        report.kv("c_interval.hi", cert.c_interval.hi)
        report.kv("c_interval.ceiling_hit", cert.c_interval.ceiling_hit)
    else:
        report.kv("c_interval", "empty")
    if cert.witness is not None:
        report.kv("witness", ", ".join(_fmt(c) for c in cert.witness.coordinates))
    report.kv("grid", " x ".join(str(n) for n in cert.grid))
    report.kv("samples", cert.per_point_stats.samples)
    report.kv("hessian.lorentzian_everywhere", cert.lorentzian_hessian_everywhere)
    report.kv("hessian.signatures_seen", ", ".join(cert.signature_labels))
    report.kv("per_point.c_lo_min", cert.per_point_stats.c_lo_min)
    report.kv("per_point.c_lo_max", cert.per_point_stats.c_lo_max)
    report.kv("per_point.c_hi_min", cert.per_point_stats.c_hi_min)
    report.kv("per_point.c_hi_max", cert.per_point_stats.c_hi_max)
    report.kv("psd_tolerance", cert.psd_tolerance)
    report.comment("sampled certificate: holds at the grid resolution above, not proven globally")
    _emit(report, args.out)
    return 0 if cert.verdict == "certified" else 2


def cmd_barrier_scan(args) -> int:
    cfg = Config.from_path(args.config)
    mass = cfg.number("barrier-scan", "M")
    r_lo = cfg.number("barrier-scan", "r_lo")
    r_hi = cfg.number("barrier-scan", "r_hi")
    samples = int(args.grid or cfg.number("barrier-scan", "samples", 100.0))
    result = barrier_scan(mass, r_lo, r_hi, samples)
    report = Report(args.structured, not args.no_timestamp)
    report.raw("r,TrK")
    for r, v in result.r_samples:
        report.csv_row((r, v))
    for lo, hi in result.zero_crossings:
        report.comment(f"zero-crossing bracket: [{_fmt(lo)}, {_fmt(hi)}]")
    report.comment(f"maximal surface expected at 3M/2 = {_fmt(1.5 * mass)}")
    report.comment(f"sign_pattern_ok: {_fmt(result.sign_pattern_ok)}")
    _emit(report, args.out)
    return 0 if result.sign_pattern_ok else 2


def cmd_geodesic_probe(args) -> int:
    cfg = Config.from_path(args.config)
    model = resolve_model(cfg)
    field = resolve_field(cfg, model)
    c = cfg.number("geodesic-probe", "c", 1.0)
    tolerance = args.tolerance or cfg.number("geodesic-probe", "tolerance", 1e-10)
    report = Report(args.structured, not args.no_timestamp)
    loops = cfg.bracketed("geodesic-probe", "loop")
    if loops:
        texts = []
        for name in model.coordinate_names:
            if name not in loops:
                raise ConfigError(f"loop is missing coordinate '{name}'")
            texts.append(loops[name].items[0][1])
        curve = CurveSpec.from_texts(texts, extra_symbols=tuple(model.parameters))
        n_samples = int(cfg.number("geodesic-probe", "loop_samples", 256.0))
        probe = closed_curve_probe(field, model, curve, c, n_samples, tolerance)
        report.kv("mode", "closed-loop")
        report.kv("obstructed", probe.obstructed)
        report.kv("min_margin", probe.min_margin)
        report.kv("argmin_parameter", probe.argmin_parameter)
        report.kv("min_hessian_margin", probe.min_hessian_margin)
        report.kv("c", probe.c)
        report.kv("samples", probe.n_samples)
        _emit(report, args.out)
        return 2 if probe.obstructed else 0
    position = cfg.numbers("geodesic-probe", "position")
    velocity = cfg.numbers("geodesic-probe", "velocity")
    span = cfg.numbers("geodesic-probe", "span")
    if len(span) != 2:
        raise ConfigError("span expects 'start, end'")
    step = cfg.number("geodesic-probe", "step", 1e-3)
    trajectory = integrate_geodesic(model, GeodesicState.of(position, velocity),
                                    (span[0], span[1]), step)
    margins = convexity_along_curve(field, trajectory, c, tolerance)
    report.raw("lambda," + ",".join(model.coordinate_names) + ",norm")
    for (lam, state), norm in zip(trajectory.samples, trajectory.norm_history):
        report.csv_row((lam, *state.position.coordinates, norm))
    report.comment(f"initial_class: {margins.initial_class.value}")
    report.comment(f"min_margin: {_fmt(margins.min_margin)} at lambda = "
                   f"{_fmt(margins.argmin_lambda)}")
    report.comment(f"norm_drift: {_fmt(trajectory.max_norm_drift)}")
    if trajectory.truncated:
        report.comment(f"truncated: {trajectory.truncation_reason}")
    _emit(report, args.out)
    if trajectory.truncated:
        return 1
    return 0 if margins.passed else 2


def cmd_foliate(args) -> int:
    cfg = Config.from_path(args.config)
    model = resolve_model(cfg)
    field = resolve_field(cfg, model)
    coord = cfg.scalar("foliate", "coordinate")
    if coord not in model.coordinate_names:
        raise ConfigError(f"'{coord}' is not a coordinate of the model")
    k = model.coordinate_names.index(coord)
    values = cfg.numbers("foliate", "values")
    base = cfg.numbers("foliate", "point")
    report = Report(args.structured, not args.no_timestamp)
    report.raw(f"{coord},TrK")
    for value in values:
        coords = list(base)
        coords[k] = value
        trk = mean_curvature(field, model, Point(coords))
        report.csv_row((value, trk))
    _emit(report, args.out)
    return 0


def cmd_slice_probe(args) -> int:
    cfg = Config.from_path(args.config)
    model = resolve_model(cfg)
    field = resolve_field(cfg, model)
    spec = SliceSpec(cfg.scalar("slice-probe", "coordinate"),
                     cfg.number("slice-probe", "value"))
    maximal = cfg.flag("slice-probe", "maximal", False)
    points = cfg.bracketed("slice-probe", "point")
    if not points:
        raise ConfigError("slice-probe needs at least one point[...] entry")
    report = Report(args.structured, not args.no_timestamp)
    report.kv("slice", f"{spec.coordinate} = {_fmt(spec.value)}")
    report.kv("declared_maximal", maximal)
    all_positive = True
    for label in sorted(points):
        coords = [float(t) for _, t in points[label].items]
        p = Point(coords)
        hess = slice_restricted_hessian(field, model, spec, p)
        lap = slice_laplacian(field, model, spec, p)
        eigenvalues = np.linalg.eigvalsh(hess)
        report.kv(f"point.{label}.coordinates", ", ".join(_fmt(c) for c in coords))
        report.kv(f"point.{label}.hessian_eigenvalues",
                  ", ".join(_fmt(float(ev)) for ev in eigenvalues))
        report.kv(f"point.{label}.laplacian", lap)
        if lap <= 0.0:
            all_positive = False
    if maximal:
        report.kv("subharmonicity", "holds" if all_positive else "violated")
    _emit(report, args.out)
    return 0 if (not maximal or all_positive) else 2


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stconvex",
        description="Certify spacetime convexity and probe its geometric consequences.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("certify", cmd_certify, "certify a field over a coordinate box"),
        ("barrier-scan", cmd_barrier_scan, "table the interior mean-curvature closed form"),
        ("geodesic-probe", cmd_geodesic_probe, "integrate a geodesic or probe a closed loop"),
        ("foliate", cmd_foliate, "mean-curvature table along a level-set family"),
        ("slice-probe", cmd_slice_probe, "restricted Hessian and Laplacian on a slice"),
    )
    for name, handler, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the run configuration")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--grid", type=int, default=None,
                       help="override the sampling resolution")
        p.add_argument("--tolerance", type=float, default=None,
                       help="override the command's tolerance")
        p.add_argument("--no-timestamp", action="store_true",
                       help="suppress the leading timestamp line")
        p.add_argument("--structured", action="store_true",
                       help="machine-readable key = value report")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
