"""Command-line harness: invariant suite, canonical studies and single-shot tools.

Exit codes: 0 success, 1 a check or verification failed, 2 configuration or
usage error.  CSV outputs start with a metadata comment line; JSON outputs
carry the same metadata under "meta".
"""
from __future__ import annotations

import argparse
import contextlib
import copy
import datetime as _dt
import hashlib
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from unittest import mock

import numpy as np

from . import __version__
from .caloricpoly import CaloricPolynomial, heat_polynomial, heat_residual, random_caloric
from .errors import CaloricError, ConfigError

log = logging.getLogger("caloric")

STUDIES = ("frequency", "minkowski", "neck", "graph")

DEFAULTS = {
    "function": "h1",
    "seed": 0,
    "quad_order": 48,
    "out": "results",
    "format": "csv",
    "threads": 1,
    "frequency": {"base": None, "tau_min": 1e-4, "tau_max": 1e2, "ratio": 2 ** 0.25},
    "minkowski": {"kind": "nodal", "radii": [2.0 ** -j for j in range(3, 8)], "h_factor": 0.125,
                  "C": 1.0, "n_boot": 2000},
    "strata": {"k": None, "eps": 1e-3, "h": 2.0 ** -6, "r": 2.0 ** -4, "kind": "nodal"},
    "neck": {"k": None, "r_star": 2.0 ** -5, "radius": 1.0, "center": None, "gamma": 0.125,
             "delta": 0.05, "eta": 0.05, "eta_b": 0.005, "alpha": 0.25, "max_balls": 2000},
    "graph": {"c_impl": 10.0},
}


# ---------------------------------------------------------------------------
# functions
# ---------------------------------------------------------------------------

def _builtin(name: str) -> CaloricPolynomial | None:
    if name.startswith("heat:"):
        parts = [int(p) for p in name.split(":")[1:]]
        m = parts[0]
        axis = parts[1] if len(parts) > 1 else 0
        n = parts[2] if len(parts) > 2 else axis + 1
        return heat_polynomial(m, axis, n)
    table = {
        "h1": lambda: heat_polynomial(1, 0, 1),
        "h2": lambda: heat_polynomial(2, 0, 1),
        "1+h2": lambda: heat_polynomial(2, 0, 1) + CaloricPolynomial.constant(1),
        "xy": lambda: CaloricPolynomial(2, {((1, 1), 0): Fraction(1)}),
    }
    return table[name]() if name in table else None


def load_function(spec: str) -> CaloricPolynomial:
    """A builtin name (h1, h2, 1+h2, xy, heat:m[:axis[:n]]), JSON text or a JSON file path."""
    if not isinstance(spec, str) or not spec:
        raise ConfigError("function spec missing")
    try:
        u = _builtin(spec)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad builtin function {spec!r}") from exc
    if u is not None:
        return u
    if not spec.lstrip().startswith("{") and not Path(spec).exists():
        raise ConfigError(f"function spec not found: {spec}")
    p = CaloricPolynomial.from_spec(spec)
    if not p.is_caloric:
        raise ConfigError("function is not caloric")
    return p


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"config key {path + k!r} must be a mapping")
            out[k] = _merge(base[k], v, path + k + ".")
        else:
            out[k] = v
    return out


@dataclass
class ExperimentConfig:
    function: str = DEFAULTS["function"]
    seed: int = 0
    quad_order: int = 48
    out: str = "results"
    format: str = "csv"
    threads: int = 1
    frequency: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["frequency"]))
    minkowski: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["minkowski"]))
    strata: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["strata"]))
    neck: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["neck"]))
    graph: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["graph"]))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        cfg = cls(**_merge(DEFAULTS, d))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @property
    def hash(self) -> str:
        body = self.to_dict()
        body.pop("out")
        body.pop("threads")
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:12]

    def validate(self) -> None:
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not isinstance(self.quad_order, int) or self.quad_order < 2:
            raise ConfigError("quad_order must be an integer >= 2")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError("threads must be a positive integer")
        if self.minkowski["kind"] not in ("nodal", "singular"):
            raise ConfigError("minkowski.kind must be nodal or singular")
        radii = self.minkowski["radii"]
        if not isinstance(radii, list) or len(radii) < 4 or any(not r > 0 for r in radii):
            raise ConfigError("minkowski.radii needs at least four positive radii")
        if max(radii) < 10 * min(radii):
            raise ConfigError("minkowski.radii must span at least one decade")
        if not 0 < self.minkowski["h_factor"] <= 0.125:
            raise ConfigError("minkowski.h_factor must lie in (0, 1/8]")
        if not self.neck["r_star"] > 0:
            raise ConfigError("neck.r_star must be positive")
        load_function(self.function)


def _meta(cfg: ExperimentConfig) -> dict:
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return {"version": __version__, "config": cfg.hash, "generated": now, "seed": cfg.seed}


def _header(cfg: ExperimentConfig) -> str:
    m = _meta(cfg)
    return f"# caloric {m['version']} config={m['config']} generated={m['generated']}\n"


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def write_csv(path: Path, cfg: ExperimentConfig, header: list, rows) -> Path:
    with open(path, "w") as fh:
        fh.write(_header(cfg))
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.floating, float)):
        return float(o) if math.isfinite(o) else str(float(o))
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    return o


def write_json(path: Path, cfg: ExperimentConfig, payload: dict) -> Path:
    body = {"meta": _meta(cfg), **_jsonable(payload)}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------

def _checks(quad_order: int, seed: int) -> list:
    """Named (label, callable -> (ok, detail)) pairs."""
    from . import frequency as fq
    from .gaussquad import HeatKernelMeasure, gaussian_moment, integrate_fn, integrate_poly
    from .graph import bmo_norm, half_time_derivative
    from .measures import WeightedCloud, beta_number, beta_number_bruteforce
    from .spacetime import SpaceTimePoint
    from .strata import GridRegion, nodal_region
    from .symmetry import best_symmetry_plane, brute_force_symmetry

    rng = np.random.default_rng(seed)

    def spectral_residual():
        bad = [m for m in range(8) if not heat_residual(heat_polynomial(m, 0, 2)).is_zero()]
        return not bad, {"failing_m": bad}

    def spectral_orthogonality():
        mu = HeatKernelMeasure(SpaceTimePoint.origin(1), 1)
        worst = max(abs(integrate_poly(heat_polynomial(a, 0, 1) * heat_polynomial(b, 0, 1), mu))
                    for a in range(6) for b in range(a))
        return worst == 0, {"max_offdiag": float(worst)}

    def quadrature_exactness():
        mu = HeatKernelMeasure(SpaceTimePoint.origin(1), 1.0)
        deg = 18
        val, _ = integrate_fn(lambda P: P[:, 0] ** deg, mu, quad_order, adaptive=False)
        exact = float(gaussian_moment(deg, 2))
        rel = abs(val - exact) / exact
        return rel < 1e-12, {"order": quad_order, "degree": deg, "rel_error": rel}

    def frequency_homogeneous():
        errs = [abs(fq.functionals(heat_polynomial(m, 0, 1), [0, 0], 0.7).N - m) for m in range(1, 8)]
        return max(errs) < 1e-10, {"max_error": max(errs)}

    def frequency_closed_form():
        u = heat_polynomial(2, 0, 1) + CaloricPolynomial.constant(1)
        errs = [abs(fq.functionals(u, [0, 0], t).N - 16 * t * t / (1 + 8 * t * t)) for t in (0.1, 0.5, 1.0, 3.0)]
        q = fq.functionals(u, [0, 0], 1.0, method="quadrature", order=quad_order)
        errs.append(abs(q.N - 16 / 9))
        return max(errs) < 1e-9, {"max_error": max(errs)}

    def frequency_ordering():
        worst = np.inf
        for _ in range(10):
            u = random_caloric(2, 4, rng)
            taus = np.geomspace(1e-2, 1e1, 8)
            p = fq.profile(u, [0.1, -0.2, 0.0], taus)
            N2 = fq.profile(u, [0.1, -0.2, 0.0], 2 * taus).N
            worst = min(worst, float(np.min(p.E)), float(np.min(p.D - p.N)), float(np.min(N2 - p.D)),
                        float(np.min(np.diff(p.N))))
        return worst >= -1e-9, {"min_margin": worst}

    def symmetry_eigen():
        u = random_caloric(2, 3, rng)
        s = best_symmetry_plane(u, [0, 0, 0], 0.5, 1).score
        b = brute_force_symmetry(u, [0, 0, 0], 0.5, 1)
        return s <= b + 1e-9, {"eigen": s, "brute": b}

    def beta_pca():
        P = rng.normal(size=(24, 3))
        mu = WeightedCloud(P)
        a = beta_number(mu, [0, 0, 0], 3.0, 2, family="all").value
        b = beta_number_bruteforce(mu, [0, 0, 0], 3.0, 2)
        return a <= b + 1e-9, {"pca": a, "brute": b}

    def strata_rle():
        reg = nodal_region(heat_polynomial(2, 0, 1), 2.0 ** -4)
        back = GridRegion.from_rle(reg.to_rle())
        return back == reg and reg.count() > 0, {"nodes": reg.count()}

    def graph_tones():
        T = 256
        t = np.arange(T) * 2 * np.pi / T
        err = max(float(np.abs(half_time_derivative(np.cos(m * t), 2 * np.pi / T) - math.sqrt(m) * np.cos(m * t)).max())
                  for m in (1, 3, 7))
        return err < 1e-10 and bmo_norm(np.full((8, 8), 2.0)) == 0, {"tone_error": err}

    return [
        ("spectral.heat_residual", spectral_residual),
        ("spectral.orthogonality", spectral_orthogonality),
        ("quadrature.exactness", quadrature_exactness),
        ("frequency.homogeneous", frequency_homogeneous),
        ("frequency.closed_form", frequency_closed_form),
        ("frequency.ordering", frequency_ordering),
        ("symmetry.eigen_vs_brute", symmetry_eigen),
        ("measures.beta_pca", beta_pca),
        ("strata.rle_roundtrip", strata_rle),
        ("graph.tones_and_bmo", graph_tones),
    ]


@contextlib.contextmanager
def _inject(fault: str | None):
    """Deliberate faults used to check that the suite catches them."""
    if fault is None:
        yield
        return
    if fault == "sign-E":
        from . import frequency as fq
        orig = fq._energy_from_masses
        with mock.patch.object(fq, "_energy_from_masses", lambda a, taus: -orig(a, taus)):
            yield
        return
    raise ConfigError(f"unknown fault {fault!r}")


def run_verify(quad_order: int = 48, seed: int = 0, inject: str | None = None) -> tuple[int, list]:
    """Run the invariant suite; returns (exit code, report rows)."""
    report = []
    with _inject(inject):
        for name, fn in _checks(quad_order, seed):
            try:
                ok, detail = fn()
            except Exception as exc:  # noqa: BLE001 - any error is reported as a failed check
                ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
            report.append({"check": name, "passed": bool(ok), "detail": _jsonable(detail)})
    return (0 if all(r["passed"] for r in report) else 1), report


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------

def _ball(n: int, center, radius: float):
    from .spacetime import ParabolicBall, SpaceTimePoint
    c = SpaceTimePoint.origin(n) if center is None else SpaceTimePoint.from_array(center)
    return ParabolicBall(c, radius)


def study_frequency(u, cfg: ExperimentConfig, out: Path, taus=None) -> list:
    from .frequency import geometric_taus, profile
    p = cfg.frequency
    base = p["base"] if p["base"] is not None else [0.0] * (u.n + 1)
    if taus is None:
        taus = geometric_taus(p["tau_min"], p["tau_max"], p["ratio"])
    rows = list(profile(u, base, taus).rows())
    if cfg.format == "json":
        return [write_json(out / "frequency.json", cfg, {"columns": ["tau", "H", "E", "N", "D"], "rows": rows})]
    return [write_csv(out / "frequency.csv", cfg, ["tau", "H", "E", "N", "D"], rows)]


def minkowski_volumes(u, kind: str, radii, h_factor: float = 0.125, C: float = 1.0, threads: int = 1) -> list:
    """(r, content) pairs with a fresh grid of spacing h_factor * r per radius."""
    from .strata import minkowski_content, nodal_region, singular_region

    def one(r):
        h = h_factor * r
        ball = _ball(u.n, None, 1.0)
        reg = nodal_region(u, h, ball) if kind == "nodal" else singular_region(u, h, C, ball)
        return float(r), float(minkowski_content(reg, r))

    radii = sorted(float(r) for r in radii)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, radii))
    return [one(r) for r in radii]


def study_minkowski(u, cfg: ExperimentConfig, out: Path) -> list:
    from .strata import dimension_fit
    p = cfg.minkowski
    vols = minkowski_volumes(u, p["kind"], p["radii"], p["h_factor"], p["C"], cfg.threads)
    fit = dimension_fit(vols, n_boot=p["n_boot"], seed=cfg.seed)
    files = [write_json(out / "minkowski_fit.json", cfg, {"kind": p["kind"], **asdict(fit),
                                                         "codimension_estimate": fit.slope})]
    if cfg.format == "json":
        files.append(write_json(out / "minkowski.json", cfg, {"columns": ["r", "vol"], "rows": vols}))
    else:
        files.append(write_csv(out / "minkowski.csv", cfg, ["r", "vol"], vols))
    return files


def _neck_run(u, cfg: ExperimentConfig):
    from .neck import greedy_neck_decomposition
    p = cfg.neck
    k = p["k"] if p["k"] is not None else u.n + 1
    return k, greedy_neck_decomposition(
        u, _ball(u.n, p["center"], p["radius"]), k, p["r_star"], eta=p["eta"], delta=p["delta"],
        alpha=p["alpha"], gamma=p["gamma"], eta_b=p["eta_b"], max_balls=p["max_balls"], seed=cfg.seed)


def study_neck(u, cfg: ExperimentConfig, out: Path) -> list:
    from .neck import verify_neck
    k, dec = _neck_run(u, cfg)
    tree = dec.to_dict()
    tree["k"] = k
    tree["verification"] = []
    for nk in dec.necks:
        rep = verify_neck(u, nk, seed=cfg.seed)
        tree["verification"].append({a: {"passed": r.passed, "margin": r.margin}
                                     for a, r in rep.items() if a != "passed"})
    files = [write_json(out / "neck.json", cfg, tree)]
    rows = [(cls, val) for cls, val in dec.ledger.items()]
    files.append(write_csv(out / "neck_ledger.csv", cfg, ["class", "sum_r_k"], rows))
    for i, nk in enumerate(dec.necks):
        cloud = nk.cloud
        rows = [list(p) + [w, r] for p, w, r in zip(cloud.points, cloud.weights, nk.radii)]
        header = [f"x{j + 1}" for j in range(u.n)] + ["t", "weight", "radius"]
        files.append(write_csv(out / f"neck_{i}_centers.csv", cfg, header, rows))
    return files


def study_graph(u, cfg: ExperimentConfig, out: Path) -> list:
    from .errors import NonGraphicalError
    from .graph import graph_from_centers
    k, dec = _neck_run(u, cfg)
    files = []
    summary = []
    for i, nk in enumerate(dec.necks):
        if not nk.plane.vertical:
            summary.append({"neck": i, "skipped": "horizontal model plane"})
            continue
        try:
            G = graph_from_centers(nk.centers, nk.plane)
        except NonGraphicalError as exc:
            summary.append({"neck": i, "error": str(exc), "witnesses": exc.witnesses})
            continue
        d = G.k - 2
        header = [f"v{j + 1}" for j in range(d)] + ["t"] + [f"offset{j + 1}" for j in range(G.offsets.shape[1])]
        rows = [list(c) + list(o) for c, o in zip(G.coords, G.offsets)]
        files.append(write_csv(out / f"graph_{i}.csv", cfg, header, rows))
        summary.append({"neck": i, "lipschitz_est": G.lipschitz_est, "n_samples": len(G.coords)})
    files.append(write_json(out / "graph.json", cfg, {"k": k, "graphs": summary}))
    return files


def run_study(name: str, cfg: ExperimentConfig) -> list:
    """Run a canonical study; returns the written files."""
    if name not in STUDIES:
        raise ConfigError(f"unknown study {name!r}; choose from {', '.join(STUDIES)}")
    u = load_function(cfg.function)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    resolved = out / "config.resolved.json"
    if not resolved.exists():
        resolved.write_text(cfg.dumps() + "\n")
    fn = {"frequency": study_frequency, "minkowski": study_minkowski, "neck": study_neck, "graph": study_graph}[name]
    return fn(u, cfg, out)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--quad-order", type=int, dest="quad_order")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--fn", dest="function", help="function: builtin name, JSON text or JSON file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="caloric", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"caloric {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the invariant suite")
    _common(p)
    p.add_argument("--inject", choices=("sign-E",), help=argparse.SUPPRESS)

    p = sub.add_parser("study", help="run a canonical study")
    p.add_argument("name")
    _common(p)

    p = sub.add_parser("frequency", help="frequency profile at one base point")
    _common(p)
    p.add_argument("--base", type=_floats)
    p.add_argument("--taus", type=_floats, help="explicit scales (comma separated)")

    p = sub.add_parser("symmetry", help="best plane of symmetry")
    _common(p)
    p.add_argument("--base", type=_floats)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("strata", help="effective set and stratum membership on a grid")
    _common(p)
    p.add_argument("--kind", choices=("nodal", "singular"))
    p.add_argument("--k", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--r", type=float)

    p = sub.add_parser("minkowski", help="Minkowski content over radii and dimension fit")
    _common(p)
    p.add_argument("--kind", choices=("nodal", "singular"))
    p.add_argument("--radii", type=_floats)

    p = sub.add_parser("neck", help="greedy neck decomposition")
    _common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--rstar", type=float)

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("config")
    return ap


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if getattr(args, "config", None) else ExperimentConfig()
    for key in ("out", "format", "quad_order", "seed", "threads", "function"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    cmd = args.command
    if cmd == "frequency" and args.base is not None:
        cfg.frequency["base"] = args.base
    if cmd == "minkowski":
        if args.kind:
            cfg.minkowski["kind"] = args.kind
        if args.radii:
            cfg.minkowski["radii"] = args.radii
    if cmd == "strata":
        for key in ("kind", "k", "eps", "h", "r"):
            if getattr(args, key) is not None:
                cfg.strata[key] = getattr(args, key)
    if cmd == "neck":
        if args.k is not None:
            cfg.neck["k"] = args.k
        if args.rstar is not None:
            cfg.neck["r_star"] = args.rstar
    cfg.validate()
    return cfg


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _cmd_strata(cfg: ExperimentConfig) -> int:
    from .strata import StratumSpec, effective_region, stratum_region
    u = load_function(cfg.function)
    p = cfg.strata
    k = p["k"] if p["k"] is not None else (u.n + 1 if p["kind"] == "nodal" else u.n)
    reg = effective_region(u, p["h"], p["r"], p["kind"], _ball(u.n, None, 1.0))
    strat = stratum_region(u, StratumSpec(k, p["eps"], p["r"]), reg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective.rle").write_text(_header(cfg) + reg.to_rle())
    (out / "stratum.rle").write_text(_header(cfg) + strat.to_rle())
    violations = reg.difference_count(strat)
    _emit({"nodes": reg.count(), "in_stratum": strat.count(), "violations": violations, "k": k})
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "validate":
            cfg = ExperimentConfig.load(args.config)
            _emit({"valid": True, "hash": cfg.hash})
            return 0
        cfg = _config_from_args(args)
        if args.command == "verify":
            code, report = run_verify(cfg.quad_order, cfg.seed, args.inject)
            _emit({"meta": _meta(cfg), "passed": code == 0, "checks": report})
            return code
        if args.command == "study":
            files = run_study(args.name, cfg)
            _emit({"files": [str(f) for f in files]})
            return 0
        if args.command == "frequency":
            u = load_function(cfg.function)
            if args.taus:
                out = Path(cfg.out)
                out.mkdir(parents=True, exist_ok=True)
                _emit({"files": [str(f) for f in study_frequency(u, cfg, out, args.taus)]})
                return 0
            _emit({"files": [str(f) for f in run_study("frequency", cfg)]})
            return 0
        if args.command == "symmetry":
            from .symmetry import best_symmetry_plane
            u = load_function(cfg.function)
            base = args.base or [0.0] * (u.n + 1)
            s = best_symmetry_plane(u, base, args.r, args.k)
            _emit({"meta": _meta(cfg), "plane": s.plane.to_dict(), "score": s.score, "mode": s.mode, "r": s.r})
            return 0
        if args.command == "strata":
            return _cmd_strata(cfg)
        if args.command == "minkowski":
            _emit({"files": [str(f) for f in run_study("minkowski", cfg)]})
            return 0
        if args.command == "neck":
            _emit({"files": [str(f) for f in run_study("neck", cfg)]})
            return 0
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except CaloricError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    return 2  # pragma: no cover - argparse enforces a command


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
