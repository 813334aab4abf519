"""Command-line front end.

Every subcommand writes its outputs under the output root (``--out-dir``,
else ``$PDMDIRAC_OUT_DIR``, else the working directory) and prints its main
payload to stdout. ``--config file.json`` supplies values that override the
flags; the merged configuration is validated against :data:`CONFIG_SCHEMA`
before anything is computed.

Exit codes: 0 success, 2 invalid input, 3 numerical failure. Failures print
a JSON object to stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .dirac_system import build_coupled_operator, coupled_operator_from_samples, linear_odd_extension, pt_symmetry_check
from .discretization import Grid
from .errors import EigenSolveError, IntegrationError, PDMError
from .foldy_wouthuysen import commutator_checks, mass_scale_sweep
from .harmonic import analytic_eigenfunction, analytic_energies, numeric_energies
from .heun import free_state, frobenius_at_one, map_to_heun, scattering_sweep, wronskian
from .potentials import effective_potential_reduced, potential_csv, schrodingerizing_potential
from .profiles import MassProfile
from .svg import LineChart

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("profile", "potential", "spectrum", "scatter", "heun", "fw-check", "pt-check", "figures")

_positive = {"type": "number", "exclusiveMinimum": 0}
_profile_object = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["linear", "hyperbolic", "constant"]},
        "mu": _positive,
        "m0": _positive,
        "a": _positive,
        "xlo": {"type": "number"},
        "xhi": {"type": "number"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "pdmdirac run configuration",
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "profile": {"oneOf": [{"enum": ["linear", "hyperbolic", "constant"]}, _profile_object]},
        "mu": _positive,
        "m0": _positive,
        "a": _positive,
        "xlo": {"type": "number"},
        "xhi": {"type": "number"},
        "n": {"type": "integer", "minimum": 5, "maximum": 200000},
        "k": {"type": "integer", "minimum": 1, "maximum": 64},
        "E": {"type": "number"},
        "emin": _positive,
        "emax": _positive,
        "steps": {"type": "integer", "minimum": 2, "maximum": 100000},
        "order": {"type": "integer", "minimum": 1, "maximum": 200},
        "xi": {"type": "number"},
        "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "factors": {"type": "array", "items": _positive, "minItems": 1},
        "half_width": _positive,
        "form": {"enum": ["gauge", "pointwise"]},
        "tol_real": _positive,
        "mus": {"type": "array", "items": _positive, "minItems": 1},
        "hyperbolic_params": {
            "type": "array",
            "items": {"type": "array", "items": _positive, "minItems": 2, "maxItems": 2},
            "minItems": 1,
        },
    },
    "additionalProperties": False,
}


class UsageError(PDMError, ValueError):
    """Bad command line or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- output helpers ------------------------------------------------------------------


def out_root(cli_value: str | None) -> Path:
    root = Path(cli_value or os.environ.get("PDMDIRAC_OUT_DIR") or ".")
    root.mkdir(parents=True, exist_ok=True)
    return root


def atomic_write(path: Path, text: str) -> Path:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _num(v) -> str:
    return f"{float(v):.17g}"


def csv_text(header: list[str], columns: list) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_num(v) for v in row))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def json_text(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


# -- configuration ---------------------------------------------------------------------


def _add_profile_flags(sp, default_kind="hyperbolic", kinds=("linear", "hyperbolic", "constant"), flag="--profile"):
    names = [flag] if flag == "--profile" else [flag, "--profile"]
    sp.add_argument(*names, dest="profile", choices=kinds, default=default_kind)
    sp.add_argument("--mu", type=float, default=1.0)
    sp.add_argument("--m0", type=float, default=1.0)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--xlo", type=float, default=None)
    sp.add_argument("--xhi", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdmdirac", description="Position-dependent-mass Dirac toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="JSON file whose values override the flags")
    common.add_argument("--out-dir", default=None, help="output root (default $PDMDIRAC_OUT_DIR or .)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("profile", parents=[common], help="tabulate m, m', m''")
    _add_profile_flags(p, flag="--kind")
    p.add_argument("--n", type=int, default=401)

    p = sub.add_parser("potential", parents=[common], help="tabulate V = i m'/(2m) and V_eff")
    _add_profile_flags(p)
    p.add_argument("--n", type=int, default=401)
    p.add_argument("--E", type=float, default=0.0)

    p = sub.add_parser("spectrum", parents=[common], help="linear-mass bound-state energies")
    _add_profile_flags(p, default_kind="linear")
    p.add_argument("--n", type=int, default=4000)
    p.add_argument("--k", type=int, default=4)

    p = sub.add_parser("scatter", parents=[common], help="T(E), R(E) for the hyperbolic barrier")
    p.add_argument("--m0", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--emin", type=float, default=0.2)
    p.add_argument("--emax", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=50)

    p = sub.add_parser("heun", parents=[common], help="Frobenius solutions at xi = 1")
    p.add_argument("--m0", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--E", type=float, default=1.0)
    p.add_argument("--order", type=int, default=40)
    p.add_argument("--xi", type=float, default=1.25)

    p = sub.add_parser("fw-check", parents=[common], help="Foldy-Wouthuysen commutator identities")
    _add_profile_flags(p, kinds=("hyperbolic", "constant"))
    p.set_defaults(m0=5.0)
    p.add_argument("--n", type=int, default=2001)
    p.add_argument("--window", type=float, nargs=2, default=[-2.0, 2.0])
    p.add_argument("--factors", type=float, nargs="+", default=[1.0, 2.0, 4.0, 8.0])

    p = sub.add_parser("pt-check", parents=[common], help="matrix-level PT symmetry and spectrum")
    _add_profile_flags(p, kinds=("hyperbolic", "linear"))
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--half-width", type=float, default=10.0)
    p.add_argument("--form", choices=("gauge", "pointwise"), default="gauge")
    p.add_argument("--tol-real", type=float, default=1e-8)

    p = sub.add_parser("figures", parents=[common], help="SVG figures with their CSV data")
    p.add_argument("--n", type=int, default=801)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--m0", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--E", type=float, default=2.0)
    p.add_argument("--mus", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    return parser


def load_config(args: argparse.Namespace) -> dict:
    """Flags merged with the --config file (file wins), validated against the schema."""
    cfg = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "out_dir")}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                extra = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(extra, dict):
            raise UsageError("config file must hold a JSON object")
        if "command" in extra and extra["command"] != args.command:
            raise UsageError(f"config is for {extra['command']!r}, not {args.command!r}")
        cfg.update(extra)
    if "hyperbolic_params" not in cfg and args.command == "figures":
        cfg["hyperbolic_params"] = [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]]
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    if isinstance(cfg.get("profile"), dict):
        spec = cfg.pop("profile")
        cfg["profile"] = spec["kind"]
        cfg.update({k: v for k, v in spec.items() if k != "kind"})
    return cfg


def profile_from_config(cfg: dict) -> MassProfile:
    kind = cfg.get("profile", "hyperbolic")
    if kind == "linear":
        return MassProfile.linear(cfg["mu"], cfg.get("xhi") or 20.0)
    lo = cfg.get("xlo", -20.0)
    hi = cfg.get("xhi", 20.0)
    if kind == "hyperbolic":
        return MassProfile.hyperbolic(cfg["m0"], cfg["a"], lo, hi)
    return MassProfile.constant(cfg["m0"], (lo, hi))


def _profile_grid(p: MassProfile, n: int) -> Grid:
    return Grid(p.x_lo, p.x_hi, n)


# -- subcommands -------------------------------------------------------------------------


def cmd_profile(cfg, root):
    p = profile_from_config(cfg)
    x = _profile_grid(p, cfg["n"]).nodes
    text = csv_text(
        ["x [length]", "m [mass]", "dm/dx [mass/length]", "d2m/dx2 [mass/length^2]"],
        [x, p.mass(x), p.dmass(x), p.d2mass(x)],
    )
    atomic_write(root / "profile.csv", text)
    return text


def cmd_potential(cfg, root):
    p = profile_from_config(cfg)
    text = potential_csv(p, _profile_grid(p, cfg["n"]), cfg["E"])
    atomic_write(root / "potential.csv", text)
    return text


def _eigenfunction_chart(mu, x_hi, spec_grid, spec) -> tuple[LineChart, list, list]:
    """Analytic eigenfunctions (solid) and sign-aligned numeric ones (dashed)."""
    view = min(x_hi, 6.0 / math.sqrt(mu))
    grid = Grid(0.0, view, 601)
    chart = LineChart("Lowest linear-mass eigenfunctions", "x", "phi_n(x)")
    cols, header = [grid.nodes], ["x [length]"]
    xs = spec_grid.interior
    keep = xs <= view
    for j, n in enumerate((1, 3, 5, 7)[: spec.eigenvectors.shape[1]]):
        f = analytic_eigenfunction(mu, n, grid).values.real
        chart.add(grid.nodes, f, f"n={n} analytic")
        v = spec.eigenvectors[:, j].real / math.sqrt(spec_grid.h)
        ref = analytic_eigenfunction(mu, n, Grid(spec_grid.x_lo, spec_grid.x_hi, spec_grid.n)).values.real[1:-1]
        v = v * np.sign(np.dot(v, ref))
        chart.add(xs[keep], v[keep], f"n={n} numeric", dashed=True)
        cols.append(f)
        header.append(f"phi_{n} [length^-1/2]")
    return chart, header, cols


def cmd_spectrum(cfg, root):
    if cfg.get("profile") != "linear":
        raise UsageError("bound states exist only for the linear profile; the hyperbolic barrier is repulsive")
    mu, x_hi, k = cfg["mu"], cfg.get("xhi") or 20.0, cfg["k"]
    grid = Grid(0.0, x_hi, cfg["n"])
    spec = numeric_energies(mu, grid, k=k)
    ns = list(range(1, 2 * k, 2))
    exact = analytic_energies(mu, ns)
    num = spec.eigenvalues.real
    text = csv_text(
        ["n [-]", "E_analytic [energy]", "E_numeric [energy]", "abs_err [energy]"],
        [ns, exact, num, np.abs(num - exact)],
    )
    atomic_write(root / "spectrum.csv", text)
    chart, _, _ = _eigenfunction_chart(mu, x_hi, grid, spec)
    atomic_write(root / "spectrum_eigenfunctions.svg", chart.render())
    return text


def cmd_scatter(cfg, root):
    if cfg["emax"] < cfg["emin"]:
        raise UsageError("emax must not be below emin")
    E = np.linspace(cfg["emin"], cfg["emax"], cfg["steps"])
    rows = scattering_sweep(cfg["m0"], cfg["a"], E)
    text = csv_text(["E [energy]", "T [-]", "R [-]"], rows.T)
    atomic_write(root / "scatter.csv", text)
    return text


def cmd_heun(cfg, root):
    params = map_to_heun(cfg["m0"], cfg["a"], cfg["E"])
    xi = cfg["xi"]
    sols = {}
    series = []
    for s in (0.0, 0.5):
        f = frobenius_at_one(params, s, cfg["order"])
        series.append(f)
        sols[f"exponent_{s:g}"] = {
            "exponent": s,
            "coefficients": f.coefficients,
            "value": f(xi),
            "derivative": f(xi, 1),
        }
    payload = {
        "config": cfg,
        "parameters": params.to_dict(),
        "fuchsian_residual": params.fuchsian_residual,
        "xi": xi,
        "solutions": sols,
        "wronskian": wronskian(series[0], series[1], xi),
    }
    text = json_text(payload)
    atomic_write(root / "heun.json", text)
    return text


def cmd_fw_check(cfg, root):
    p = profile_from_config(cfg)
    grid = _profile_grid(p, cfg["n"])
    window = tuple(cfg["window"])
    report = commutator_checks(p, grid, window)
    payload = {"config": cfg, **report.to_dict(), "mass_scale_sweep": mass_scale_sweep(p, grid, window, cfg["factors"])}
    text = json_text(payload)
    atomic_write(root / "fw_check.json", text)
    return text


def cmd_pt_check(cfg, root):
    grid = Grid.symmetric(cfg["half_width"], cfg["n"])
    if cfg["profile"] == "linear":
        p = MassProfile.linear(cfg["mu"], cfg["half_width"])
        m, V = linear_odd_extension(p, grid)
        H = coupled_operator_from_samples(m, V, grid)
        gamma = "sigma3"
    else:
        p = MassProfile.hyperbolic(cfg["m0"], cfg["a"], -cfg["half_width"], cfg["half_width"])
        V = schrodingerizing_potential(p, grid)
        H = build_coupled_operator(p, V, grid, form=cfg["form"])
        gamma = "identity"
    report = pt_symmetry_check(H, gamma=gamma, tol_real=cfg["tol_real"])
    payload = {"config": cfg, **report.to_dict(), "real_fraction": report.real_fraction}
    text = json_text(payload)
    atomic_write(root / "pt_check.json", text)
    return text


def _figure(root, stem, chart, header, cols, written):
    written.append(str(atomic_write(root / f"{stem}.svg", chart.render()).name))
    written.append(str(atomic_write(root / f"{stem}.csv", csv_text(header, cols)).name))


def cmd_figures(cfg, root):
    n = cfg["n"]
    written = []

    # mass profiles
    x = Grid(0.0, 5.0, n).nodes
    chart = LineChart("Linear mass distributions", "x", "m(x)")
    cols, header = [x], ["x [length]"]
    for mu in cfg["mus"]:
        m = MassProfile.linear(mu).mass(x)
        chart.add(x, m, f"mu={mu:g}")
        cols.append(m)
        header.append(f"m_mu={mu:g} [mass]")
    _figure(root, "mass_linear", chart, header, cols, written)

    x = Grid(-6.0, 6.0, n).nodes
    chart = LineChart("Hyperbolic mass distributions", "x", "m(x)")
    cols, header = [x], ["x [length]"]
    for m0, a in cfg["hyperbolic_params"]:
        m = MassProfile.hyperbolic(m0, a).mass(x)
        chart.add(x, m, f"m0={m0:g}, a={a:g}")
        cols.append(m)
        header.append(f"m_m0={m0:g}_a={a:g} [mass]")
    _figure(root, "mass_hyperbolic", chart, header, cols, written)

    # V^2 and V_eff
    mu = cfg["mu"]
    p = MassProfile.linear(mu, 5.0)
    grid = Grid(0.0, 5.0, n)
    V = schrodingerizing_potential(p, grid, exclude_singular=True).values
    v2 = (V * V).real
    veff = effective_potential_reduced(p, grid)
    chart = LineChart("Linear mass: V^2 and effective potential", "x", "energy^2")
    chart.add(grid.nodes[1:], np.maximum(v2[1:], -10.0), "V^2 (clipped at -10)")
    chart.add(grid.nodes, veff, "V_eff = m^2")
    _figure(root, "potentials_linear", chart, ["x [length]", "V^2 [energy^2]", "V_eff [energy^2]"], [grid.nodes, v2, veff], written)

    p = MassProfile.hyperbolic(cfg["m0"], cfg["a"])
    grid = Grid(-6.0, 6.0, n)
    V = schrodingerizing_potential(p, grid).values
    v2 = (V * V).real
    veff = effective_potential_reduced(p, grid)
    chart = LineChart("Hyperbolic mass: V^2 and effective potential", "x", "energy^2")
    chart.add(grid.nodes, v2, "V^2")
    chart.add(grid.nodes, veff, "V_eff = m^2")
    _figure(root, "potentials_hyperbolic", chart, ["x [length]", "V^2 [energy^2]", "V_eff [energy^2]"], [grid.nodes, v2, veff], written)

    # linear-mass eigenfunctions
    grid = Grid(0.0, max(20.0, 10.0 / math.sqrt(mu)), 4000)
    spec = numeric_energies(mu, grid, k=4)
    chart, header, cols = _eigenfunction_chart(mu, grid.x_hi, grid, spec)
    _figure(root, "eigenfunctions_linear", chart, header, cols, written)

    # free state
    grid = Grid(-15.0, 15.0, n)
    phi = free_state(cfg["m0"], cfg["a"], cfg["E"], grid).values
    chart = LineChart(f"Free state at E={cfg['E']:g}", "x", "phi(x)")
    chart.add(grid.nodes, phi.real, "Re phi")
    chart.add(grid.nodes, phi.imag, "Im phi", dashed=True)
    chart.add(grid.nodes, np.abs(phi) ** 2, "|phi|^2")
    _figure(
        root, "free_state", chart,
        ["x [length]", "Re phi [-]", "Im phi [-]", "|phi|^2 [-]"],
        [grid.nodes, phi.real, phi.imag, np.abs(phi) ** 2], written,
    )
    text = json_text({"config": cfg, "outputs": written})
    atomic_write(root / "figures.json", text)
    return text


HANDLERS = {
    "profile": cmd_profile,
    "potential": cmd_potential,
    "spectrum": cmd_spectrum,
    "scatter": cmd_scatter,
    "heun": cmd_heun,
    "fw-check": cmd_fw_check,
    "pt-check": cmd_pt_check,
    "figures": cmd_figures,
}


def _error_details(exc) -> dict:
    details = {}
    for attr in ("nodes", "positions", "location"):
        if getattr(exc, attr, None) is not None:
            details[attr] = getattr(exc, attr)
    state = getattr(exc, "state", None)
    if state:
        details["state"] = {k: v for k, v in state.items() if np.isscalar(v)}
    return details


def _fail(exc, code) -> int:
    sys.stderr.write(
        json_text({"error": type(exc).__name__, "message": str(exc), "exit_code": code, "details": _error_details(exc)})
    )
    return code


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args)
        root = out_root(args.out_dir)
        text = HANDLERS[args.command](cfg, root)
    except jsonschema.ValidationError as exc:
        return _fail(UsageError(f"config rejected: {exc.message}"), EXIT_INPUT)
    except (EigenSolveError, IntegrationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    except (PDMError, ValueError, OSError) as exc:
        return _fail(exc, EXIT_INPUT)
    sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
