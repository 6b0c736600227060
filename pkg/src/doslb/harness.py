"""Experiment configuration, the simulation loop and report writers."""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from . import gaps, instances, metrics, svg
from .environment import NoiseKind, NoiseModel, RngState, step
from .errors import ConfigError, DoslbError
from .estimation import Geometry, GramState, RadiusParams
from .policies import FallbackMode, PolicyConfig, PolicyKind, select

GEOMETRIES = {"l1": Geometry.BOX_L1, "linf": Geometry.BOX_LINF, "ellipsoid-reference": Geometry.POLYGON}


def parse_seeds(spec):
    """Accept a list, an int, "0-29" or "1,4,7"."""
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        return [int(s) for s in spec]
    out = []
    for part in str(spec).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError("empty seed list")
    return out


@dataclass
class ExperimentConfig:
    instance: str = "example1"
    policies: list = field(default_factory=lambda: ["doslb"])
    T: int = 10000
    seeds: list = field(default_factory=lambda: [0])
    lam: object = "auto"
    delta: float = 0.01
    eps: float = 0.01
    noise: NoiseModel = field(default_factory=lambda: NoiseModel.gaussian(math.sqrt(0.1)))
    geometry: str = "l1"
    S: object = "auto"
    R: float = 1.0
    lts_inflation: float = 1.0
    lts_beta_power: float = 0.5
    fallback: str = "known-only"
    max_lps: int = 10 ** 6
    levels: dict = field(default_factory=dict)
    out: str = None
    jobs: int = 1

    def validate(self):
        if int(self.T) < 1:
            raise ConfigError("T must be at least 1")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if not 0.0 < float(self.delta) < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if float(self.eps) < 0.0:
            raise ConfigError("eps must be nonnegative")
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"geometry must be one of {sorted(GEOMETRIES)}")
        for p in self.policies:
            try:
                PolicyKind(p)
            except ValueError:
                raise ConfigError(f"unknown policy {p!r}") from None
        if self.lam != "auto" and float(self.lam) <= 0.0:
            raise ConfigError("lambda must be positive")
        return self

    def to_dict(self):
        n = self.noise
        noise = {"kind": n.kind.value, "sigma": n.sigma, "independent": n.independent}
        return {
            "instance": self.instance, "policies": list(self.policies), "T": int(self.T),
            "seeds": [int(s) for s in self.seeds], "lambda": self.lam, "delta": float(self.delta),
            "eps": float(self.eps), "noise": noise, "geometry": self.geometry, "S": self.S, "R": float(self.R),
            "lts_inflation": float(self.lts_inflation), "lts_beta_power": float(self.lts_beta_power),
            "fallback": self.fallback, "max_lps": int(self.max_lps),
            "levels": {int(k): float(v) for k, v in self.levels.items()}, "out": self.out, "jobs": int(self.jobs),
        }


def _noise_from(data):
    if data is None:
        return NoiseModel.gaussian(math.sqrt(0.1))
    if isinstance(data, str):
        data = {"kind": data}
    kind = NoiseKind(data.get("kind", "gaussian"))
    indep = bool(data.get("independent", True))
    if kind is NoiseKind.GAUSSIAN:
        if "variance" in data:
            sigma = math.sqrt(float(data["variance"]))
        else:
            sigma = float(data.get("sigma", math.sqrt(0.1)))
        return NoiseModel.gaussian(sigma, indep)
    if kind is NoiseKind.BERNOULLI:
        return NoiseModel.bernoulli(indep)
    return NoiseModel.none()


def config_from_dict(data):
    data = dict(data or {})
    known = {"instance", "policies", "policy", "T", "seeds", "lambda", "delta", "eps", "noise", "geometry",
             "S", "R", "lts_inflation", "lts_beta_power", "fallback", "max_lps", "levels", "out", "jobs"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    cfg = ExperimentConfig()
    try:
        if "instance" in data:
            cfg.instance = str(data["instance"])
        if "policy" in data:
            cfg.policies = [str(data["policy"])]
        if "policies" in data:
            pol = data["policies"]
            cfg.policies = [str(p) for p in (pol if isinstance(pol, list) else [pol])]
        if "T" in data:
            cfg.T = int(data["T"])
        if "seeds" in data:
            cfg.seeds = parse_seeds(data["seeds"])
        if "lambda" in data:
            cfg.lam = data["lambda"] if data["lambda"] == "auto" else float(data["lambda"])
        for key in ("delta", "eps", "R", "lts_inflation", "lts_beta_power"):
            if key in data:
                setattr(cfg, key, float(data[key]))
        if "S" in data:
            cfg.S = data["S"] if data["S"] == "auto" else float(data["S"])
        if "noise" in data:
            cfg.noise = _noise_from(data["noise"])
        for key in ("geometry", "fallback", "out"):
            if key in data:
                setattr(cfg, key, None if data[key] is None else str(data[key]))
        if "max_lps" in data:
            cfg.max_lps = int(data["max_lps"])
        if "jobs" in data:
            cfg.jobs = int(data["jobs"])
        if "levels" in data:
            cfg.levels = {int(k): float(v) for k, v in (data["levels"] or {}).items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return cfg.validate()


def load_config(path):
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh))


# -- setup ------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Setup:
    """Everything derived from a config before any run starts."""

    instance: object
    report: object
    lam: float
    params: RadiusParams
    geometry: Geometry
    xi: float


def prepare(cfg, with_gaps=True):
    inst = instances.resolve(cfg.instance)
    for k, v in sorted(cfg.levels.items()):
        inst = inst.with_level(int(k) - 1, float(v))
    rep = instances.validate(inst)
    lam = rep.suggested_lambda if cfg.lam == "auto" else float(cfg.lam)
    S = rep.S if cfg.S == "auto" else float(cfg.S)
    params = RadiusParams(float(cfg.delta), inst.U, S, float(cfg.R))
    xi = math.nan
    if with_gaps:
        try:
            xi = gaps.xi(inst).xi
        except DoslbError:
            xi = math.nan
    return Setup(inst, rep, lam, params, GEOMETRIES[cfg.geometry], xi)


def policy_config(cfg, kind, setup):
    return PolicyConfig(
        kind=PolicyKind(kind), radius_params=setup.params, geometry=setup.geometry,
        lts_inflation=float(cfg.lts_inflation), lts_beta_power=float(cfg.lts_beta_power),
        fallback_mode=FallbackMode(cfg.fallback), max_lps=int(cfg.max_lps),
    )


# -- simulation -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RunResult:
    policy: str
    seed: int
    trajectory: metrics.Trajectory
    final_state: GramState


def simulate(instance, pcfg, T, seed, noise, lam, recorder=None):
    """select -> step -> record -> update, T times. The policy only sees rounds < t."""
    view = instance.public_view()
    g = GramState.fresh(instance.d, lam, instance.K, instance.U)
    env_rng = RngState(int(seed))
    pol_rng = env_rng.derive(1)
    rec = recorder or metrics.RoundRecorder(instance, pcfg.radius_params, pcfg.geometry)
    traj = metrics.Trajectory(instance.d, instance.M)
    oracle = instance if pcfg.kind is PolicyKind.ORACLE else None
    for t in range(1, int(T) + 1):
        dec, pol_rng = select(pcfg, view, g, pol_rng, oracle)
        fb, env_rng = step(instance, dec.x, noise, env_rng)
        traj.append(rec.record(t, dec, g, fb.reward))
        g = g.update(dec.x, fb)
    return RunResult(pcfg.kind.value, int(seed), traj, g)


def _run_one(args):
    cfg, kind, seed = args
    setup = prepare(cfg, with_gaps=False)
    pcfg = policy_config(cfg, kind, setup)
    return simulate(setup.instance, pcfg, cfg.T, seed, cfg.noise, setup.lam)


def run(cfg, policies=None):
    """All (policy, seed) runs, ordered by policy then seed regardless of completion order."""
    cfg.validate()
    jobs = [(cfg, p, s) for p in (policies or cfg.policies) for s in cfg.seeds]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


# -- reports ----------------------------------------------------------------------------

def _mean_std(rows):
    a = np.array(rows, dtype=np.float64)
    std = a.std(axis=0, ddof=1) if a.shape[0] > 1 else np.zeros(a.shape[1])
    return a.mean(axis=0), std


def _write_csv(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([metrics.fmt(v) if not isinstance(v, str) else v for v in row])


def _write_rounds(path, results, eps, d):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(metrics.rounds_header(d))
        for r in results:
            w.writerows(metrics.rounds_rows(f"{r.policy}-{r.seed}", r.seed, r.trajectory, eps))


def _summaries(results, cfg, setup):
    d = setup.instance.d
    out = []
    for r in results:
        out.append(metrics.summarize(r.trajectory, cfg.eps, d, setup.lam, cfg.delta, setup.instance.U, setup.xi))
    return out


def _run_table(path, results, sums, setup):
    header = ["run_id", "policy", "seed", "T", "regret", "relaxed_regret", "efficacy_regret", "safety_regret",
              "nonopt_bis_count", "eps_violation_count", "potential", "all_rounds_covered", "fallback_rounds"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r, s in zip(results, sums):
            tr = r.trajectory
            w.writerow([f"{r.policy}-{r.seed}", r.policy, r.seed, s.T, metrics.fmt(s.regret[-1]),
                        metrics.fmt(s.relaxed_regret[-1]), metrics.fmt(s.efficacy_regret[-1]),
                        metrics.fmt(s.safety_regret[-1]), int(s.nonopt_bis_count[-1]),
                        int(s.eps_violation_count[-1]), metrics.fmt(s.potential[-1]),
                        int(bool(np.all(tr.covered))), int(np.sum(tr.fallback))])


def _aggregate(sums, attr):
    m, s = _mean_std([getattr(x, attr) for x in sums])
    return m, s


def _finite_or_none(v):
    return float(v) if v is not None and math.isfinite(v) else None


def _summary_doc(cfg, setup, groups):
    rep = setup.report
    doc = {
        "config": cfg.to_dict(),
        "resolved": {
            "lambda": float(setup.lam), "S": float(setup.params.S), "R": float(setup.params.R),
            "geometry": setup.geometry.value, "Xi": _finite_or_none(setup.xi),
            "L": float(rep.L), "x_star": [float(v) for v in setup.instance.x_star],
            "opt_value": float(setup.instance.opt_value),
        },
        "policies": {},
    }
    T = int(cfg.T)
    for name, sums in groups.items():
        entry = {}
        for attr in ("regret", "relaxed_regret", "efficacy_regret", "safety_regret", "nonopt_bis_count",
                     "eps_violation_count"):
            vals = np.array([getattr(s, attr)[-1] for s in sums], dtype=np.float64)
            entry[attr] = {"mean": float(vals.mean()), "std": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0}
        entry["runs"] = len(sums)
        doc["policies"][name] = entry
    bounds = {}
    d = setup.instance.d
    if setup.lam >= 1.0:
        bounds["general"] = metrics.bound_general(T, d, setup.lam, cfg.delta, setup.instance.U)
    if math.isfinite(setup.xi) and setup.xi > 0 and cfg.eps > 0:
        bounds["polytope"] = metrics.bound_polytope(T, d, setup.lam, setup.xi, cfg.eps)
        bounds["bis_count"] = metrics.bound_bis_count(T, d, setup.lam, setup.xi)
    if cfg.eps > 0:
        bounds["eps_violations"] = metrics.bound_eps_violations(T, d, setup.lam, cfg.eps)
    doc["bounds_at_T"] = bounds
    return doc


def write_run_report(out, cfg, setup, results):
    os.makedirs(out, exist_ok=True)
    d = setup.instance.d
    sums = _summaries(results, cfg, setup)
    _write_rounds(os.path.join(out, "rounds.csv"), results, cfg.eps, d)
    _run_table(os.path.join(out, "runs.csv"), results, sums, setup)
    groups = {}
    for r, s in zip(results, sums):
        groups.setdefault(r.policy, []).append(s)
    with open(os.path.join(out, "summary.yaml"), "w") as fh:
        yaml.safe_dump(_summary_doc(cfg, setup, groups), fh, sort_keys=False)

    name = results[0].policy
    ss = groups[name]
    T = ss[0].T
    t = np.arange(1, T + 1)
    m_reg, s_reg = _aggregate(ss, "regret")
    m_rel, s_rel = _aggregate(ss, "relaxed_regret")
    header = ["t", "mean_regret", "std_regret", "mean_relaxed_regret", "std_relaxed_regret"]
    cols = [t, m_reg, s_reg, m_rel, s_rel]
    series = [
        {"label": "Regret_T", "y": m_reg, "lo": m_reg - s_reg, "hi": m_reg + s_reg},
        {"label": "relaxed Regret_T", "y": m_rel, "lo": m_rel - s_rel, "hi": m_rel + s_rel},
    ]
    if ss[0].bound_general is not None:
        header.append("bound_general")
        cols.append(ss[0].bound_general)
        series.append({"label": "bound (general)", "y": ss[0].bound_general, "dash": True})
    if ss[0].bound_polytope is not None:
        header.append("bound_polytope")
        cols.append(ss[0].bound_polytope)
        series.append({"label": "bound (polytope)", "y": ss[0].bound_polytope, "dash": True})
    _write_csv(os.path.join(out, "fig_regret.csv"), header, cols)
    svg.line_plot(os.path.join(out, "fig_regret.svg"), t, series, f"Regret ({name})", "t", "cumulative regret")

    m_c, s_c = _aggregate(ss, "nonopt_bis_count")
    header = ["t", "mean_nonopt_bis_count", "std_nonopt_bis_count"]
    cols = [t, m_c, s_c]
    series = [{"label": "non-optimal BIS rounds", "y": m_c, "lo": np.maximum(m_c - s_c, 0), "hi": m_c + s_c}]
    if ss[0].bound_bis_count is not None:
        header.append("bound_bis_count")
        cols.append(ss[0].bound_bis_count)
        series.append({"label": "bound", "y": ss[0].bound_bis_count, "dash": True})
    # the plotted band is clipped at zero for the log axis; write exactly that
    header.insert(3, "band_low")
    cols.insert(3, np.maximum(m_c - s_c, 0))
    _write_csv(os.path.join(out, "fig_bis_count.csv"), header, cols)
    svg.line_plot(os.path.join(out, "fig_bis_count.svg"), t, series, f"Non-optimally associated rounds ({name})",
                  "t", "count (log scale)", logy=True)
    return groups


def write_compare_report(out, cfg, setup, results):
    os.makedirs(out, exist_ok=True)
    groups = write_run_report(out, cfg, setup, results)
    T = int(cfg.T)
    t = np.arange(1, T + 1)
    for attr, fig, ylabel in (("efficacy_regret", "fig_compare_efficacy", "efficacy regret"),
                              ("safety_regret", "fig_compare_safety", "safety regret")):
        header = ["t"]
        cols = [t]
        series = []
        for name, ss in groups.items():
            m, s = _aggregate(ss, attr)
            header += [f"mean_{name}", f"std_{name}"]
            cols += [m, s]
            series.append({"label": name, "y": m, "lo": m - s, "hi": m + s})
        _write_csv(os.path.join(out, fig + ".csv"), header, cols)
        svg.line_plot(os.path.join(out, fig + ".svg"), t, series, ylabel.capitalize(), "t", ylabel)
    return groups


def with_overrides(cfg, **kw):
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(cfg, **kw).validate()
