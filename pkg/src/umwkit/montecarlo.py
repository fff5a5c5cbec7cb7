"""Monte Carlo studies of estimator quality: bias, MSE and coverage rate.

Replicate b of cell c draws its generator from the stream key
(base_seed, 1, c, b), and regression covariates come from (base_seed, 2, n),
so results are bit-identical for any degree of parallelism.  Non-converged
replicates are dropped and counted per cell.
"""

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .distribution import UmwParams, sample
from .errors import (
    ConvergenceFailure,
    DegenerateProbability,
    DomainError,
    RankDeficientDesign,
)
from .inference import Dataset, fit_umw
from .links import LINK_NAMES, get_link
from .regression import RegressionTheta, fit_rq, make_spec, simulate_response

__all__ = [
    "StudyScenario",
    "CellResult",
    "MonteCarloReport",
    "run_dist_study",
    "run_reg_study",
    "run_study",
    "aggregate_metrics",
    "preset_scenarios",
    "parse_scenario_text",
    "load_scenario",
    "report_to_csv",
    "estimates_to_csv",
]

MAX_FAILURE_FRACTION = 0.05


@dataclass(frozen=True)
class StudyScenario:
    """Truth, grids and seed for one simulation study."""

    name: str
    true_params: object  # UmwParams or RegressionTheta
    sample_sizes: tuple
    replicates: int
    base_seed: int
    quantile_levels: tuple = ()
    link: str = "logit"
    coverage_level: float = 0.95

    def __post_init__(self):
        if not isinstance(self.true_params, (UmwParams, RegressionTheta)):
            raise DomainError("true_params must be UmwParams or RegressionTheta")
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "quantile_levels",
                           tuple(float(t) for t in self.quantile_levels))
        if self.replicates < 1:
            raise DomainError("replicates must be >= 1")
        if not self.sample_sizes or any(n < 5 for n in self.sample_sizes):
            raise DomainError("sample sizes must be positive (>= 5)")
        if any(not 0.0 < t < 1.0 for t in self.quantile_levels):
            raise DomainError("quantile levels must lie in (0, 1)")
        if not 0.0 < self.coverage_level < 1.0:
            raise DomainError("coverage_level must lie in (0, 1)")
        if self.kind == "regression":
            if not self.quantile_levels:
                object.__setattr__(self, "quantile_levels", (0.5,))
            if self.link not in LINK_NAMES:
                raise DomainError(f"unknown link {self.link!r}")

    @property
    def kind(self) -> str:
        return "regression" if isinstance(self.true_params, RegressionTheta) else "distribution"

    @property
    def parameter_names(self) -> tuple:
        if self.kind == "distribution":
            return ("alpha", "gamma", "lam")
        k = self.true_params.beta.size
        return ("gamma", "lam") + tuple(f"beta{j}" for j in range(k))

    @property
    def truth_vector(self) -> np.ndarray:
        if self.kind == "distribution":
            p = self.true_params
            return np.array([p.alpha, p.gamma, p.lam])
        return self.true_params.as_vector()


@dataclass(frozen=True)
class CellResult:
    scenario: str
    parameter: str
    n: int
    tau: float | None
    bias: float
    mse: float
    coverage: float
    n_failed: int


@dataclass(frozen=True)
class MonteCarloReport:
    scenario: StudyScenario
    cells: tuple
    estimates: dict | None = None  # (n, tau) -> (R, q) array, NaN rows = failed


def aggregate_metrics(estimates, std_errors, truth: float, level: float = 0.95):
    """(bias, mse, coverage) for one parameter over converged replicates."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise DomainError("no replicates to aggregate")
    se = np.asarray(std_errors, dtype=float)
    err = est - truth
    z = ndtri(0.5 + level / 2.0)
    covered = np.abs(err) <= z * se
    return float(err.mean()), float(np.mean(err**2)), float(covered.mean())


def _dist_chunk(args):
    alpha, gamma, lam, n, base_seed, cell, b_lo, b_hi = args
    p = UmwParams(alpha, gamma, lam)
    out = []
    for b in range(b_lo, b_hi):
        rng = np.random.default_rng(np.random.SeedSequence((base_seed, 1, cell, b)))
        try:
            f = fit_umw(Dataset(sample(p, n, rng)))
            ok = (f.converged and f.std_errors is not None
                  and not np.any(np.isnan(f.std_errors)))
            out.append((f.estimates, f.std_errors, ok))
        except (ConvergenceFailure, DomainError):
            out.append((None, None, False))
    return out


def _reg_chunk(args):
    gamma, lam, beta, link_name, design, tau, base_seed, cell, b_lo, b_hi = args
    link = get_link(link_name)
    mu = link.inverse(design @ np.asarray(beta))
    out = []
    for b in range(b_lo, b_hi):
        rng = np.random.default_rng(np.random.SeedSequence((base_seed, 1, cell, b)))
        try:
            y = simulate_response(mu, gamma, lam, tau, rng)
            f = fit_rq(make_spec(design, y, tau=tau, link=link_name))
            ok = (f.converged and f.std_errors is not None
                  and not np.any(np.isnan(f.std_errors)))
            out.append((f.estimates, f.std_errors, ok))
        except (ConvergenceFailure, DomainError, RankDeficientDesign, DegenerateProbability):
            out.append((None, None, False))
    return out


def _run_chunks(worker, arg_builder, replicates, threads):
    """Split [0, R) into ranges, run the worker over them, reassemble in order."""
    n_chunks = 1 if threads <= 1 else min(replicates, threads * 4)
    step = math.ceil(replicates / n_chunks)
    ranges = [(lo, min(lo + step, replicates)) for lo in range(0, replicates, step)]
    jobs = [arg_builder(lo, hi) for lo, hi in ranges]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(worker, jobs))
    else:
        parts = [worker(j) for j in jobs]
    return [rec for part in parts for rec in part]


def _covariates(base_seed: int, n: int, k: int) -> np.ndarray:
    """Intercept plus k-1 uniform(0,1) columns, fixed across all replicates."""
    rng = np.random.default_rng(np.random.SeedSequence((base_seed, 2, n)))
    return np.column_stack([np.ones(n)] + [rng.uniform(size=n) for _ in range(k - 1)])


def _aggregate_cell(scenario, records, names, truth, n, tau, collect):
    r = scenario.replicates
    q = len(names)
    ok_idx = [i for i, rec in enumerate(records) if rec[2]]
    n_failed = r - len(ok_idx)
    if n_failed > MAX_FAILURE_FRACTION * r and r >= 20:
        raise ConvergenceFailure(
            f"{n_failed}/{r} replicates failed in cell n={n}"
            + (f", tau={tau}" if tau is not None else "")
        )
    if not ok_idx:
        raise ConvergenceFailure(f"all {r} replicates failed in cell n={n}")
    est = np.vstack([records[i][0] for i in ok_idx])
    ses = np.vstack([records[i][1] for i in ok_idx])
    cells = []
    for j, name in enumerate(names):
        bias, mse, cover = aggregate_metrics(est[:, j], ses[:, j], truth[j],
                                             scenario.coverage_level)
        cells.append(CellResult(scenario=scenario.name, parameter=name, n=n, tau=tau,
                                bias=bias, mse=mse, coverage=cover, n_failed=n_failed))
    dump = None
    if collect:
        dump = np.full((r, q), np.nan)
        for i in ok_idx:
            dump[i] = records[i][0]
    return cells, dump


def run_dist_study(scenario: StudyScenario, threads: int = 1,
                   collect_estimates: bool = False) -> MonteCarloReport:
    """Sample -> fit -> aggregate for each n in the scenario grid."""
    if scenario.kind != "distribution":
        raise DomainError("run_dist_study needs a distribution scenario")
    p = scenario.true_params
    names = scenario.parameter_names
    truth = scenario.truth_vector
    all_cells = []
    dumps = {}
    for ci, n in enumerate(scenario.sample_sizes):
        records = _run_chunks(
            _dist_chunk,
            lambda lo, hi, _n=n, _ci=ci: (p.alpha, p.gamma, p.lam, _n,
                                          scenario.base_seed, _ci, lo, hi),
            scenario.replicates, threads,
        )
        cells, dump = _aggregate_cell(scenario, records, names, truth, n, None,
                                      collect_estimates)
        all_cells.extend(cells)
        if dump is not None:
            dumps[(n, None)] = dump
    return MonteCarloReport(scenario=scenario, cells=tuple(all_cells),
                            estimates=dumps if collect_estimates else None)


def run_reg_study(scenario: StudyScenario, threads: int = 1,
                  collect_estimates: bool = False) -> MonteCarloReport:
    """Simulate responses at fixed covariates, fit, aggregate per (n, tau)."""
    if scenario.kind != "regression":
        raise DomainError("run_reg_study needs a regression scenario")
    theta = scenario.true_params
    names = scenario.parameter_names
    truth = scenario.truth_vector
    k = theta.beta.size
    all_cells = []
    dumps = {}
    taus = scenario.quantile_levels
    for ni, n in enumerate(scenario.sample_sizes):
        design = _covariates(scenario.base_seed, n, k)
        for ti, tau in enumerate(taus):
            ci = ni * len(taus) + ti
            records = _run_chunks(
                _reg_chunk,
                lambda lo, hi, _n=n, _tau=tau, _ci=ci, _x=design: (
                    theta.gamma, theta.lam, tuple(theta.beta), scenario.link,
                    _x, _tau, scenario.base_seed, _ci, lo, hi),
                scenario.replicates, threads,
            )
            cells, dump = _aggregate_cell(scenario, records, names, truth, n, tau,
                                          collect_estimates)
            all_cells.extend(cells)
            if dump is not None:
                dumps[(n, tau)] = dump
    return MonteCarloReport(scenario=scenario, cells=tuple(all_cells),
                            estimates=dumps if collect_estimates else None)


def run_study(scenario: StudyScenario, threads: int = 1,
              collect_estimates: bool = False) -> MonteCarloReport:
    if scenario.kind == "distribution":
        return run_dist_study(scenario, threads, collect_estimates)
    return run_reg_study(scenario, threads, collect_estimates)


# ---- published scenario presets --------------------------------------------

_DIST_N_GRID = (40, 80, 120, 160, 200)
_REG_N_GRID = (50, 150, 300, 500)
_REG_TAU_GRID = (0.1, 0.5, 0.9)
DEFAULT_REPLICATES = 5000
FULL_REPLICATES = 10000


def preset_scenarios(replicates: int = DEFAULT_REPLICATES,
                     base_seed: int = 20260808) -> dict:
    """The built-in simulation designs (four distribution, two regression)."""
    dist = {
        "dist-scenario1": (0.7, 1.3, 0.5),
        "dist-scenario2": (0.3, 0.8, 1.2),
        "dist-scenario3": (1.3, 1.1, 0.6),
        "dist-scenario4": (0.5, 0.9, 0.8),
    }
    reg = {
        "reg-scenario1": (2.7, 1.8, (0.2, -0.4, 0.5)),
        "reg-scenario2": (1.5, 2.3, (0.5, -0.6, 0.2)),
    }
    out = {}
    for name, (a, g, l) in dist.items():
        out[name] = StudyScenario(
            name=name, true_params=UmwParams(a, g, l), sample_sizes=_DIST_N_GRID,
            replicates=replicates, base_seed=base_seed,
        )
    for name, (g, l, beta) in reg.items():
        out[name] = StudyScenario(
            name=name, true_params=RegressionTheta(gamma=g, lam=l, beta=np.array(beta)),
            sample_sizes=_REG_N_GRID, quantile_levels=_REG_TAU_GRID,
            replicates=replicates, base_seed=base_seed,
        )
    return out


# ---- declarative scenario files --------------------------------------------

_SCENARIO_KEYS = {
    "name", "kind", "alpha", "gamma", "lambda", "beta", "link",
    "n", "tau", "replicates", "seed", "coverage_level",
}


def parse_scenario_text(text: str, default_name: str = "scenario") -> StudyScenario:
    """Parse a key = value scenario description (comma-separated lists,
    '#' comments)."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"scenario line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in _SCENARIO_KEYS:
            raise DomainError(f"scenario line {lineno}: unknown key {key!r}")
        fields[key] = value.strip()

    kind = fields.get("kind", "distribution").lower()
    name = fields.get("name", default_name)

    def _floats(key):
        return tuple(float(v) for v in fields[key].split(","))

    def _ints(key):
        return tuple(int(v) for v in fields[key].split(","))

    try:
        replicates = int(fields.get("replicates", DEFAULT_REPLICATES))
        seed = int(fields.get("seed", 0))
        coverage = float(fields.get("coverage_level", 0.95))
        sizes = _ints("n")
        gamma = float(fields["gamma"])
        lam = float(fields["lambda"])
        if kind == "distribution":
            truth = UmwParams(float(fields["alpha"]), gamma, lam)
            taus = ()
        elif kind == "regression":
            truth = RegressionTheta(gamma=gamma, lam=lam, beta=np.array(_floats("beta")))
            taus = _floats("tau") if "tau" in fields else (0.5,)
        else:
            raise DomainError(f"unknown scenario kind {kind!r}")
    except KeyError as exc:
        raise DomainError(f"scenario file missing required key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise DomainError(f"scenario file: {exc}") from None

    return StudyScenario(
        name=name, true_params=truth, sample_sizes=sizes, replicates=replicates,
        base_seed=seed, quantile_levels=taus,
        link=fields.get("link", "logit"), coverage_level=coverage,
    )


def load_scenario(path) -> StudyScenario:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    import os
    stem = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_scenario_text(text, default_name=stem)


# ---- report emission --------------------------------------------------------

def report_to_csv(report: MonteCarloReport) -> str:
    """CSV with columns scenario,parameter,n,tau,bias,mse,coverage,n_failed."""
    buf = io.StringIO()
    buf.write("scenario,parameter,n,tau,bias,mse,coverage,n_failed\n")
    for c in report.cells:
        tau = "" if c.tau is None else repr(c.tau)
        buf.write(f"{c.scenario},{c.parameter},{c.n},{tau},"
                  f"{c.bias!r},{c.mse!r},{c.coverage!r},{c.n_failed}\n")
    return buf.getvalue()


def estimates_to_csv(report: MonteCarloReport) -> str:
    """Long-format per-replicate estimate dump (plot-ready; NaN = failed)."""
    if report.estimates is None:
        raise DomainError("report was produced without collect_estimates")
    names = report.scenario.parameter_names
    buf = io.StringIO()
    buf.write("scenario,n,tau,replicate,parameter,estimate\n")
    for (n, tau), arr in report.estimates.items():
        tau_s = "" if tau is None else repr(tau)
        for b in range(arr.shape[0]):
            for j, pname in enumerate(names):
                buf.write(f"{report.scenario.name},{n},{tau_s},{b},{pname},{float(arr[b, j])!r}\n")
    return buf.getvalue()
