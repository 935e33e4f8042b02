"""Command-line experiment runner.

Usage::

    cuspspectra spectrum --zeta 1 --c 0.5 --out spectrum.csv
    cuspspectra coeff --zeta 1 --c 0.5
    cuspspectra homokern --n 2000 --out homokern.csv
    cuspspectra verify --suite quick

Defaults (one table, :data:`DEFAULTS`; ``None`` entries depend on the mode):

==========  ===========  ==========  ===========  ===========================
field       spectrum     coeff       homokern     meaning
==========  ===========  ==========  ===========  ===========================
zeta        1.0          1.0         --           screening rate
c           0.5          0.5         --           cusp coupling
symmetry    symmetric    symmetric   --           ``--antisymmetric`` flips it
l_max       48           --          --           highest partial wave
radial_n    320          96          2000         radial / Nystrom nodes
r_max       14 / zeta    25 / zeta   6.0          radial cut-off / half-width
u_order     see below    --          --           angular quadrature order
window      100:400      --          40:300       plateau rank window
suite       --           --          --           ``quick`` (verify only)
==========  ===========  ==========  ===========  ===========================

``u_order`` defaults to ``max(l_max + 16, 64)``. Precedence is flags, then
``--config`` (a JSON object with the field names above), then the table.
Exit status: 0 on success, 1 on usage or
configuration errors, 2 when a verification fails or a computation cannot
be resolved.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .acceptance import run_suite
from .cusp_states import CuspState, Symmetry, coefficient_A, default_coefficient_grid
from .density_operator import assemble_spectrum, default_grid, default_u_order
from .errors import UnderResolvedError
from .homokernel import HomogeneousKernelSpec, KernelFamily, Weight, model_coefficient, nystrom_1d_spectrum
from .quadrature import RadialGrid
from .spectral_analysis import plateau_estimate

__all__ = ["DEFAULTS", "ExperimentConfig", "ConfigError", "build_parser", "execute_command", "main"]

log = logging.getLogger("cuspspectra")

MODES = ("spectrum", "coeff", "homokern", "verify")
SUITES = ("quick", "full")

DEFAULTS = {
    "zeta": 1.0,
    "c": 0.5,
    "symmetry": Symmetry.SYMMETRIC.value,
    "l_max": 48,
    "radial_n": {"spectrum": 320, "coeff": 96, "homokern": 2000},
    "r_max": {"spectrum": ("per_zeta", 14.0), "coeff": ("per_zeta", 25.0), "homokern": ("fixed", 6.0)},
    "window": {"spectrum": (100, 400), "homokern": (40, 300)},
    "suite": "quick",
}

FLAGS = {
    "mode": "mode",
    "zeta": "--zeta",
    "c": "--c",
    "symmetry": "--antisymmetric",
    "l_max": "--lmax",
    "radial_n": "--n",
    "r_max": "--rmax",
    "u_order": "--uorder",
    "window": "--window",
    "out": "--out",
    "suite": "--suite",
}

MAIN_POWER = 8.0 / 3.0
MAIN_TOLERANCE = 0.25
HOMOKERN_ALPHA = 1.0
HOMOKERN_TOLERANCE = 0.10
PANEL_ORDER = 20


class ConfigError(ValueError):
    """Invalid configuration; ``flag`` names the offending option."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully described experiment. ``None`` fields take mode defaults in :meth:`resolved`."""

    mode: str
    zeta: float | None = None
    c: float | None = None
    symmetry: str | None = None
    l_max: int | None = None
    radial_n: int | None = None
    r_max: float | None = None
    u_order: int | None = None
    window: tuple[int, int] | None = None
    out: str | None = None
    suite: str | None = None

    def __post_init__(self):
        if self.window is not None:
            object.__setattr__(self, "window", tuple(int(w) for w in self.window))

    # -- serialisation ------------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["window"] is not None:
            d["window"] = list(d["window"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError("--config", f"unknown key(s) {', '.join(unknown)}")
        if "mode" not in data or data["mode"] is None:
            raise ConfigError("mode", "no mode given (spectrum, coeff, homokern or verify)")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("--config", "top level must be a JSON object")
        return cls.from_dict(data)

    def merged(self, overrides: dict) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    # -- defaults and validation -------------------------------------------

    def resolved(self) -> "ExperimentConfig":
        """Fill mode defaults and validate; raises :class:`ConfigError`."""
        mode = self.mode
        if mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {mode!r}")
        vals = self.to_dict()
        vals["window"] = self.window
        for key in ("zeta", "c", "symmetry", "suite"):
            if vals[key] is None:
                vals[key] = DEFAULTS[key]
        if mode == "spectrum" and vals["l_max"] is None:
            vals["l_max"] = DEFAULTS["l_max"]
        if vals["radial_n"] is None and mode in DEFAULTS["radial_n"]:
            vals["radial_n"] = DEFAULTS["radial_n"][mode]
        if vals["window"] is None and mode in DEFAULTS["window"]:
            vals["window"] = DEFAULTS["window"][mode]
        cfg = ExperimentConfig(**vals)
        cfg._validate_basic()
        extra = {}
        if cfg.r_max is None and mode in DEFAULTS["r_max"]:
            kind, value = DEFAULTS["r_max"][mode]
            extra["r_max"] = value / cfg.zeta if kind == "per_zeta" else value
        if mode == "spectrum" and cfg.u_order is None:
            extra["u_order"] = default_u_order(cfg.l_max)
        cfg = dataclasses.replace(cfg, **extra)
        cfg._validate_mode()
        return cfg

    def _validate_basic(self):
        def number(name, lo, hi, integer=False):
            v = getattr(self, name)
            if v is None:
                return
            if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and int(v) != v):
                raise ConfigError(FLAGS[name], f"expected {'an integer' if integer else 'a number'}, got {v!r}")
            if not (math.isfinite(v) and lo <= v <= hi):
                raise ConfigError(FLAGS[name], f"must lie in [{lo:g}, {hi:g}], got {v!r}")

        number("zeta", 1e-3, 1e3)
        number("c", -1e3, 1e3)
        number("l_max", 0, 200, integer=True)
        number("radial_n", 8, 10000, integer=True)
        number("r_max", 1e-6, 1e6)
        number("u_order", 1, 4096, integer=True)
        if self.symmetry not in (s.value for s in Symmetry):
            raise ConfigError(FLAGS["symmetry"], f"symmetry must be symmetric or antisymmetric, got {self.symmetry!r}")
        if self.suite not in SUITES:
            raise ConfigError("--suite", f"must be one of {', '.join(SUITES)}, got {self.suite!r}")
        if self.window is not None:
            if len(self.window) != 2:
                raise ConfigError("--window", "expected two ranks k_lo:k_hi")
            lo, hi = self.window
            if lo < 1 or hi < lo:
                raise ConfigError("--window", f"need 1 <= k_lo <= k_hi, got {lo}:{hi}")

    def _validate_mode(self):
        if self.mode == "spectrum":
            if self.radial_n < 16:
                raise ConfigError("--n", f"spectrum needs at least 16 radial nodes, got {self.radial_n}")
            if self.u_order < self.l_max + 1:
                raise ConfigError("--uorder", f"must be at least l_max + 1 = {self.l_max + 1}, got {self.u_order}")
        elif self.mode == "coeff":
            if self.r_max * self.zeta < 10.0:
                raise ConfigError("--rmax", f"coefficient grid needs r_max * zeta >= 10, got {self.r_max * self.zeta:g}")
        elif self.mode == "homokern":
            if self.radial_n < 64 or self.radial_n % PANEL_ORDER:
                raise ConfigError("--n", f"must be a multiple of {PANEL_ORDER} and >= 64, got {self.radial_n}")


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected k_lo:k_hi, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cuspspectra", description="Eigenvalue-decay experiments for cusp density operators.")
    p.add_argument("mode", nargs="?", choices=MODES, help="experiment to run")
    p.add_argument("--zeta", type=float, help="screening rate (> 0)")
    p.add_argument("--c", type=float, help="cusp coupling")
    p.add_argument("--antisymmetric", dest="symmetry", action="store_const",
                   const=Symmetry.ANTISYMMETRIC.value, help="use the antisymmetric state")
    p.add_argument("--lmax", dest="l_max", type=int, help="highest partial wave")
    p.add_argument("--n", dest="radial_n", type=int, help="radial (or Nystrom) node count")
    p.add_argument("--rmax", dest="r_max", type=float, help="radial cut-off (homokern: half-width)")
    p.add_argument("--uorder", dest="u_order", type=int, help="angular Gauss-Legendre order")
    p.add_argument("--window", type=_window, help="plateau window k_lo:k_hi")
    p.add_argument("--out", help="output path (CSV, or JSON for coeff/verify)")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--suite", choices=SUITES, help="verify suite")
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {args.config!r}: {exc.strerror}") from None
        try:
            base = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON in {args.config!r}: {exc.msg}") from None
        if not isinstance(base, dict):
            raise ConfigError("--config", "top level must be a JSON object")
        if overrides.get("mode") is not None:
            base = {**base, "mode": overrides["mode"]}
        try:
            cfg = ExperimentConfig.from_dict(base)
        except TypeError as exc:
            raise ConfigError("--config", str(exc)) from None
    else:
        if args.mode is None:
            raise ConfigError("mode", "no mode given (spectrum, coeff, homokern or verify)")
        cfg = ExperimentConfig(mode=args.mode)
    return cfg.merged(overrides).resolved()


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------


def _check_writable(path: str | None):
    if path is None:
        return
    target = Path(path)
    parent = target.parent if str(target.parent) else Path(".")
    if target.is_dir():
        raise ConfigError("--out", f"{path!r} is a directory")
    if not parent.is_dir():
        raise ConfigError("--out", f"cannot write {path!r}: directory {str(parent)!r} does not exist")
    if not os.access(parent, os.W_OK) or (target.exists() and not os.access(target, os.W_OK)):
        raise ConfigError("--out", f"cannot write {path!r}: permission denied")


def _write(path: str, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ConfigError("--out", f"cannot write {path!r}: {exc.strerror}") from None


def verdict_path(out: str) -> str:
    return str(Path(out).with_suffix(".verdict.json"))


def csv_body(values, ells, power: float) -> str:
    lines = ["k,ell,lambda,scaled"]
    for k, (lam, ell) in enumerate(zip(values, ells), start=1):
        lines.append(f"{k},{int(ell)},{lam:.11e},{k ** power * lam:.11e}")
    return "\n".join(lines) + "\n"


def _verdict(experiment, cfg, A, power, est, tolerance, passed) -> dict:
    return {
        "experiment": experiment,
        "parameters": cfg.to_dict(),
        "A": A,
        "A_power": A**power,
        "window": list(est.window) if est is not None else None,
        "g_estimate": est.g_estimate if est is not None else None,
        "G_estimate": est.G_estimate if est is not None else None,
        "tolerance": tolerance,
        "pass": passed,
    }


def _plateau(series, p, window):
    lo, hi = window
    hi = min(hi, series.trust_k)
    if hi < lo:
        log.warning("window %d:%d lies beyond trust_k = %d; no plateau estimate", lo, window[1], series.trust_k)
        return None
    if hi < window[1]:
        log.info("window end clipped to trust_k = %d", hi)
    return plateau_estimate(series, p, (lo, hi))


def _emit(cfg, body: str, verdict: dict):
    text = json.dumps(verdict, indent=2, sort_keys=True) + "\n"
    if cfg.out is None:
        sys.stdout.write(body)
        log.info("verdict: %s", json.dumps(verdict, sort_keys=True))
        return
    _write(cfg.out, body)
    _write(verdict_path(cfg.out), text)
    log.info("wrote %s and %s", cfg.out, verdict_path(cfg.out))


# --------------------------------------------------------------------------
# Modes
# --------------------------------------------------------------------------


def _state(cfg) -> CuspState:
    return CuspState(cfg.zeta, cfg.c, cfg.symmetry)


def run_spectrum(cfg) -> int:
    state = _state(cfg)
    grid = default_grid(state, n=cfg.radial_n, r_max=cfg.r_max)
    log.info("assembling spectrum: %s", cfg.to_json())
    series = assemble_spectrum(state, cfg.l_max, grid, cfg.u_order)
    log.info("trust_k = %d of %d eigenvalues", series.trust_k, len(series))
    keep = series.count_above(series.metadata["floor"])
    values = series.expanded()[:keep]
    ells = series.expanded_channels()[:keep]
    A = coefficient_A(state, default_coefficient_grid(state))
    est = _plateau(series, 1.0 / MAIN_POWER, cfg.window)
    passed = None
    if est is not None and A > 0:
        target = A**MAIN_POWER
        passed = bool(abs(est.scaled_median - target) <= MAIN_TOLERANCE * target and est.brackets(target))
        log.info("plateau median %.6g vs A^(8/3) = %.6g", est.scaled_median, target)
    _emit(cfg, csv_body(values, ells, MAIN_POWER), _verdict("spectrum", cfg, A, MAIN_POWER, est, MAIN_TOLERANCE, passed))
    return 0


def run_coeff(cfg) -> int:
    state = _state(cfg)
    A = coefficient_A(state, RadialGrid.gauss_legendre(cfg.radial_n, cfg.r_max))
    print(f"A={A:.6f}")
    print(f"A^(8/3)={A ** MAIN_POWER:.6f}")
    if cfg.out is not None:
        verdict = _verdict("coeff", cfg, A, MAIN_POWER, None, None, None)
        _write(cfg.out, json.dumps(verdict, indent=2, sort_keys=True) + "\n")
    return 0


def run_homokern(cfg) -> int:
    w = Weight("gaussian", 1.0)
    spec = HomogeneousKernelSpec(HOMOKERN_ALPHA, 1, KernelFamily.SCALAR_ABS, a=w, b=w)
    log.info("1-D Nystrom: %s", cfg.to_json())
    series = nystrom_1d_spectrum(spec, cfg.radial_n, cfg.r_max, panel_order=PANEL_ORDER)
    power = 1.0 / spec.p
    keep = series.trust_k
    values = series.expanded()[:keep]
    C = model_coefficient(spec, spec.a, spec.b)
    est = _plateau(series, spec.p, cfg.window)
    passed = None
    if est is not None:
        target = C**power
        passed = bool(abs(est.scaled_median - target) <= HOMOKERN_TOLERANCE * target)
        log.info("plateau median %.6g vs C^2 = %.6g", est.scaled_median, target)
    body = csv_body(values, [0] * len(values), power)
    _emit(cfg, body, _verdict("homokern", cfg, C, power, est, HOMOKERN_TOLERANCE, passed))
    return 0


def run_verify(cfg) -> int:
    results = run_suite(cfg.suite)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    if cfg.out is not None:
        report = {"suite": cfg.suite, "checks": [dataclasses.asdict(r) for r in results], "pass": ok}
        _write(cfg.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    log.info("%s suite: %d/%d checks passed", cfg.suite, sum(r.passed for r in results), len(results))
    return 0 if ok else 2


RUNNERS = {"spectrum": run_spectrum, "coeff": run_coeff, "homokern": run_homokern, "verify": run_verify}


def execute_command(argv) -> int:
    """Parse ``argv``, run the experiment and return the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        _check_writable(cfg.out)
        return RUNNERS[cfg.mode](cfg)
    except ConfigError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except UnderResolvedError as exc:
        log.error("under-resolved: %s", exc)
        return 2


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return execute_command(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
