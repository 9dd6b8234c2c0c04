"""Stage runner and the comparison report.

Artifacts of a config live in ``<output_dir>/<config hash>/``:

``orbits.csv``
    period, tau-orbit start point ``p0..``, classification, S, residual,
    exponents ``chi0..``.
``counts.csv``
    eps, n, count.
``entropy.json``
    The fitted :class:`EntropyEstimate`.
``certificates.csv``
    N, t, A, components, certified, symbolic, estimator, porradaa, K.
``mixing.csv``
    m, tau, gap.
``report.json``
    The :class:`ComparisonReport`.
``run_info.json``
    Timestamps, timings and library versions; the only file that differs
    between reruns.

Directions of the comparison: the entropy estimate counts orbits of a
finite seed set, so it tends to sit below the true entropy; ``S_lower`` is
a lower bound of ``S`` from a finite periodic search; certificates are
lower bounds of the entropy at the resolution of the boundary sampling.
"""

import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from ..cocycle import (
    is_diagonalizable_real_simple,
    mixing_gap,
    mixing_period,
    transition_distance,
    verify_mixing,
)
from ..core import Word
from ..entropy import SeparatedSetEntropy, grid_seeds, ruelle_consistency
from ..errors import BudgetError, ConfigError, SymplecticEntropyError
from ..models import build_model
from ..periodic import PeriodicOrbitScanner
from ..snake import afirma_bounds, build_horseshoe, build_tangency_model, certify_against_estimator
from .config import SCHEMA_VERSION
from .io import read_json, write_csv, write_json, atomic_write_text

WORKERS_ENV = "SYMPLECTIC_ENTROPY_WORKERS"
PORRADA_TOL = 1e-12

# cause codes
RUELLE_DIRECTION = "RUELLE_DIRECTION"
NO_HYPERBOLIC_ORBIT = "NO_HYPERBOLIC_ORBIT"
ESTIMATE_BELOW_S = "ESTIMATE_BELOW_S"
PORRADA_MISMATCH = "PORRADA_MISMATCH"
PORRADAA_FAIL = "PORRADAA_FAIL"
ESTIMATOR_UNDERCOUNT = "ESTIMATOR_UNDERCOUNT"
ESTIMATOR_SKIPPED = "ESTIMATOR_SKIPPED"
CERTIFICATE_REFUSED = "CERTIFICATE_REFUSED"
CERTIFICATES_NOT_MONOTONE = "CERTIFICATES_NOT_MONOTONE"
MIXING_BUDGET = "MIXING_BUDGET"
STAGE_FAILED = "STAGE_FAILED"


def worker_count():
    """Thread count from the environment variable, at least 1."""
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


@dataclass
class ComparisonReport:
    """Outcome of a run.

    ``flags`` holds dicts with a machine-readable ``code``, a ``severity``
    (``"inconsistency"`` or ``"note"``) and a ``message``.
    """

    config_hash: str
    model: dict
    stages: list
    h_est: dict = None
    S_lower: dict = None
    certificates: list = field(default_factory=list)
    afirma: dict = None
    mixing: dict = None
    gap: float = None
    flags: list = field(default_factory=list)
    stage_errors: dict = field(default_factory=dict)

    @property
    def status(self):
        return "partial" if self.stage_errors else "complete"

    @property
    def exit_code(self):
        return 1 if self.stage_errors else 0

    @property
    def codes(self):
        return [f["code"] for f in self.flags]

    @property
    def inconsistencies(self):
        return [f for f in self.flags if f["severity"] == "inconsistency"]

    def flag(self, code, message, severity="inconsistency", **extra):
        self.flags.append({"code": code, "severity": severity, "message": message, **extra})

    def to_dict(self):
        out = asdict(self)
        out["status"] = self.status
        return out

    @classmethod
    def from_dict(cls, data):
        data = {k: v for k, v in data.items() if k not in ("status", "schema_version")}
        return cls(**data)


def _package_version():
    from .. import __version__

    return __version__


def run_dir(config):
    return Path(config["output_dir"]) / config.hash


def _scan(config, model, report, out):
    spec = config["scan"]
    scanner = PeriodicOrbitScanner(model, spec["max_period"], spec["grid"], spec["newton_tol"],
                                   spec["max_iters"], spec["class_tol"]).fit()
    d = model.dim
    header = ["period"] + [f"p{i}" for i in range(d)] + ["classification", "S", "residual"] + \
        [f"chi{i}" for i in range(d)]
    rows = [[o.period, *map(float, o.points[0]), str(o.classification), o.S, o.residual,
             *map(float, o.exponents.chis)] for o in scanner.orbits_]
    write_csv(out / "orbits.csv", header, rows)
    diag = asdict(scanner.diagnostics_)
    if scanner.witness_ is None:
        report.S_lower = {"value": None, "witness": None, "orbits": len(scanner.orbits_), "diagnostics": diag}
        report.flag(NO_HYPERBOLIC_ORBIT, "no hyperbolic periodic orbit found up to period "
                    f"{spec['max_period']}; S_lower is empty", severity="note")
    else:
        report.S_lower = {"value": float(scanner.S_lower_), "witness": scanner.witness_.to_row(),
                          "orbits": len(scanner.orbits_), "diagnostics": diag}


def _entropy(config, model, report, out):
    spec = config["entropy"]
    lo, hi = spec["seed_box"]
    seeds = grid_seeds(model.dim, spec["grid"], lo, hi)
    window = None if spec["window"] is None else tuple(spec["window"])
    est = SeparatedSetEntropy(model, spec["epsilons"], spec["n_max"], window=window,
                              seed_order=spec["seed_order"], saturation=spec["saturation"]).fit(seeds)
    e = est.estimate_
    rows = [[float(eps), int(n), int(e.counts[i, j])]
            for i, eps in enumerate(e.epsilons) for j, n in enumerate(e.n_values)]
    write_csv(out / "counts.csv", ["eps", "n", "count"], rows)
    write_json(out / "entropy.json", e.to_dict())
    report.h_est = e.to_dict()


def _certify(model, N, delta, K, eps, depth):
    cert = build_horseshoe(model, N, delta=delta, K=K)
    if model.n == 1:
        # shallower refinement when the seed budget runs out
        for d in range(depth, 1, -1):
            try:
                check = certify_against_estimator(cert, model, eps=eps, depth=d)
                check["depth"] = d
                break
            except BudgetError as exc:
                check = {"skipped": str(exc)}
    else:
        check = {"skipped": "restricted estimator only runs for n = 1"}
    return cert, check


def _snake(config, report, out):
    spec = config["snake"]
    mult = spec["multipliers"] * spec["n"] if len(spec["multipliers"]) == 1 else spec["multipliers"]
    model = build_tangency_model(spec["n"], mult, T=spec["T"], a=spec["a"], b=spec["b"],
                                 c=spec["c"], kappa=spec["kappa"])
    K, table = afirma_bounds(model, spec["N_list"], delta=spec["delta"])
    report.afirma = {"K": K, "table": table}

    def one(N):
        try:
            return N, _certify(model, N, spec["delta"], K, spec["eps"], spec["depth"]), None
        except SymplecticEntropyError as exc:
            return N, None, exc

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(one, spec["N_list"]))
    rows, certs = [], []
    for N, result, exc in results:
        if exc is not None:
            report.flag(CERTIFICATE_REFUSED, f"N={N}: {exc}", N=N)
            continue
        cert, check = result
        entry = {"certificate": cert.to_dict(), "check": check}
        certs.append(entry)
        if "skipped" in check:
            report.flag(ESTIMATOR_SKIPPED, f"N={N}: {check['skipped']}", severity="note", N=N)
        else:
            if abs(check["certified_entropy"] - check["symbolic_entropy"]) > PORRADA_TOL:
                report.flag(PORRADA_MISMATCH, f"N={N}: certified entropy differs from the shift entropy "
                            "of the transition matrix", N=N)
            if check["flag_porradaa"]:
                report.flag(PORRADAA_FAIL, f"N={N}: certified entropy below n chi_min_plus - eps", N=N)
            if check["flag_undercount"]:
                report.flag(ESTIMATOR_UNDERCOUNT, f"N={N}: restricted estimator "
                            f"{check['estimator_entropy']:.4f} below certified {cert.entropy:.4f}", N=N)
        rows.append([N, cert.t, cert.A, len(cert.components), cert.entropy,
                     check.get("symbolic_entropy"), check.get("estimator_entropy"), check.get("porradaa"), K])
    values = [c["certificate"]["entropy"] for c in certs]
    if any(b < a for a, b in zip(values, values[1:])):
        report.flag(CERTIFICATES_NOT_MONOTONE, "certified entropy is not monotone along the N list",
                    severity="note")
    report.certificates = certs
    write_csv(out / "certificates.csv",
              ["N", "t", "A", "components", "certified", "symbolic", "estimator", "porradaa", "K"], rows)
    write_json(out / "certificates.json", {"afirma": report.afirma, "certificates": certs})


def mixing_frame(unstable):
    u = np.asarray(unstable, dtype=float)
    ok, frame = is_diagonalizable_real_simple(Word([np.diag(np.concatenate([u, 1.0 / u]))]))
    if not ok:
        raise ConfigError("mixing base is not diagonalizable with real simple spectrum")
    return frame


def mixing_table(frame, m_list):
    return [(int(m), int(mixing_period(frame, m)), float(mixing_gap(frame, m))) for m in m_list]


def _mixing(config, report, out):
    spec = config["mixing"]
    frame = mixing_frame(spec["unstable"])
    rows = mixing_table(frame, spec["m_list"])
    write_csv(out / "mixing.csv", ["m", "tau", "gap"], rows)
    n = frame.dim_half
    distance = max(transition_distance(frame, i) for i in range(1, 2 * n) if n == 1 or i != n)
    result = {"table": [list(r) for r in rows], "eps": spec["eps"], "transition_distance": distance}
    try:
        m0, gap = verify_mixing(frame, eps=spec["eps"])
        result.update(m0=m0, gap=gap)
    except BudgetError as exc:
        result.update(m0=None, gap=exc.best)
        report.flag(MIXING_BUDGET, str(exc))
    report.mixing = result


def likely_cause(h_est, tol):
    """Attribute an ``h_est > S_lower + tol`` flag to one side.

    The estimator is blamed when its rates disagree across ``eps`` by more
    than ``tol`` or a fit window has fewer than 3 points; otherwise the
    periodic search is, since ``S_lower`` only grows with a longer search.
    """
    rates = [r for r in h_est.get("rates", []) if r is not None]
    windows = h_est.get("windows", [])
    if (len(rates) > 1 and max(rates) - min(rates) > tol) or any(hi - lo + 1 < 3 for lo, hi in windows):
        return "estimator over-count"
    return "insufficient periodic search"


def _compare(config, report):
    if report.h_est is None or report.S_lower is None:
        return
    S = report.S_lower["value"]
    h = report.h_est["value"]
    tol = config["compare"]["tol"]
    ruelle = ruelle_consistency(h, S, tol=tol)
    if S is None:
        return
    report.gap = h - S
    if ruelle.flagged:
        cause = likely_cause(report.h_est, tol)
        report.flag(RUELLE_DIRECTION, f"{ruelle.message}; likely cause: {cause}", likely_cause=cause)
    elif -report.gap > tol:
        report.flag(ESTIMATE_BELOW_S, f"entropy estimate {h:.4f} is more than {tol} below S_lower "
                    f"{S:.4f}; finer eps or longer n may close it", severity="note")


def load_report(path):
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    return ComparisonReport.from_dict(read_json(path))


def run(config, use_cache=True):
    """Run the configured stages and write artifacts.

    A completed run with the same hash is loaded from disk instead of being
    recomputed.  A failing stage is recorded in ``stage_errors`` and the
    remaining stages still run.
    """
    out = run_dir(config)
    report_path = out / "report.json"
    if use_cache and report_path.exists():
        cached = load_report(report_path)
        if cached.status == "complete" and cached.config_hash == config.hash:
            return cached
    started = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "config.json", config.canonical + "\n")
    report = ComparisonReport(config_hash=config.hash, model=dict(config["model"]), stages=list(config["stages"]))
    timings = {}
    model = None
    for stage in ("scan", "entropy", "snake", "mixing"):
        if stage not in config["stages"]:
            continue
        t0 = time.perf_counter()
        try:
            if stage in ("scan", "entropy") and model is None:
                model = build_model(config["model"])
            if stage == "scan":
                _scan(config, model, report, out)
            elif stage == "entropy":
                _entropy(config, model, report, out)
            elif stage == "snake":
                _snake(config, report, out)
            else:
                _mixing(config, report, out)
        except (SymplecticEntropyError, ValueError, ArithmeticError, KeyError) as exc:
            report.stage_errors[stage] = f"{type(exc).__name__}: {exc}"
            report.flag(STAGE_FAILED, f"stage {stage} failed: {exc}", stage=stage)
        timings[stage] = time.perf_counter() - t0
    _compare(config, report)
    write_json(report_path, report.to_dict())
    write_json(out / "run_info.json", {
        "finished": datetime.now(timezone.utc).isoformat(),
        "seconds": time.perf_counter() - started,
        "stage_seconds": timings,
        "versions": {"symplectic_entropy": _package_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "workers": worker_count(),
    })
    return report


def render_report(report):
    """Human-readable summary of a report."""
    lines = [f"run {report.config_hash}  status: {report.status}  schema {SCHEMA_VERSION}",
             f"model: {report.model}"]
    if report.h_est is not None:
        h = report.h_est
        lines.append(f"h_est = {h['value']:.6f}  (rates {', '.join(f'{r:.4f}' for r in h['rates'])}; "
                     f"eps {h['epsilons']}; windows {h['windows']})")
    if report.S_lower is not None:
        S = report.S_lower
        if S["value"] is None:
            lines.append(f"S_lower: none ({S['orbits']} orbits, no hyperbolic one)")
        else:
            w = S["witness"]
            lines.append(f"S_lower = {S['value']:.6f}  witness period {w['period']} at "
                         f"({', '.join(f'{v:.6f}' for v in w['point'])}) [{w['classification']}]")
    if report.gap is not None:
        lines.append(f"gap h_est - S_lower = {report.gap:+.6f}")
    if report.afirma is not None:
        lines.append(f"afirma K = {report.afirma['K']:.6g} over N = "
                     f"{[row['N'] for row in report.afirma['table']]}")
    for entry in report.certificates:
        c, chk = entry["certificate"], entry["check"]
        est = chk.get("estimator_entropy")
        est_text = "skipped" if est is None else f"{est:.6f}"
        lines.append(f"certificate N={c['N']} t={c['t']} components={c['component_count']} "
                     f"entropy={c['entropy']:.6f} estimator={est_text}")
    if report.mixing is not None:
        mx = report.mixing
        lines.append("mixing:  m      tau       gap")
        for m, tau, gap in mx["table"]:
            lines.append(f"        {m:5d} {tau:7d}  {gap:.6e}")
        if mx.get("m0") is not None:
            lines.append(f"first m with gap < {mx['eps']}: {mx['m0']} (gap {mx['gap']:.6e})")
        if mx.get("transition_distance") is not None:
            lines.append(f"transition distance from coordinate swaps: {mx['transition_distance']:.3e}")
    for f in report.flags:
        lines.append(f"[{f['severity']}] {f['code']}: {f['message']}")
    for stage, err in report.stage_errors.items():
        lines.append(f"stage {stage} failed: {err}")
    return "\n".join(lines)
