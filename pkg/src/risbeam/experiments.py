"""
The three experiment protocols and their CSV artifacts.

``run`` trains and/or solves one scenario, ``sweep_users`` maps sum rate
against the number of users, and ``compare_throughput`` builds the
alpha-fair throughput table for several RIS sizes. Every random draw comes
from a ``(seed, stream)`` generator, so a configuration and seed fully
determine every file written.
"""

import csv
import dataclasses
import logging
import os
from dataclasses import dataclass

import numpy as np

from . import config as config_mod
from . import neural
from .beamforming import compute_sinr, stream_targets, total_power, zf_beamformer
from .channel import realize
from .ddpg import STREAM_LAYOUT, evaluate_policy, train
from .errors import InfeasibleError
from .metrics import alpha_fair_throughput, improvement_percent, per_user_rates
from .numerics import make_rng
from .scenario import place_users

log = logging.getLogger(__name__)

MOVING_AVERAGE_WINDOW = 100


def fmt(x):
    """Shortest round-tripping text for a number."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([fmt(v) for v in row])


def build_scenario(exp, seed=None, cfg=None, distribution=None, count=None):
    """Place users and realise the channels for one experiment cell."""
    seed = exp.seed if seed is None else seed
    cfg = exp.scenario if cfg is None else cfg
    users = exp.users
    rng = make_rng(seed, STREAM_LAYOUT)
    dist = distribution or users.distribution
    if count is None and users.count is None:
        layout = place_users(cfg, dist, rng, density=users.density_per_km2)
    else:
        layout = place_users(cfg, dist, rng, count=count or users.count)
    return realize(cfg, exp.noise, layout)


def solve_zf(scenario):
    """Minimum-power zero forcing; raises ``InfeasibleError`` over budget."""
    cfg = scenario.cfg
    w = zf_beamformer(scenario.h, stream_targets(cfg), scenario.sigma2)
    p = total_power(w)
    if p > cfg.p_t * (1.0 + 1e-12):
        raise InfeasibleError(f"zero forcing needs {p:.4g} W, above the "
                              f"{cfg.p_t:.4g} W budget")
    return w


@dataclass
class SchemeResult:
    scheme: str
    w: np.ndarray
    report: object
    rates: np.ndarray

    @property
    def sum_rate(self):
        return float(self.rates.sum())


def _result(scheme, scenario, w):
    report = compute_sinr(scenario.h, w, scenario.sigma2)
    rates = per_user_rates(report, scenario.cfg.bandwidth_hz, scenario.cfg.k_sat)
    return SchemeResult(scheme, w, report, rates)


def zf_result(scenario):
    return _result("zf", scenario, solve_zf(scenario))


def ddpg_result(scenario, agent_cfg, progress=None):
    trained = train(scenario, agent_cfg, progress)
    _, w, _ = evaluate_policy(trained.nets, scenario, agent_cfg)
    return _result("ddpg", scenario, w), trained


def moving_average(x, window=MOVING_AVERAGE_WINDOW):
    """Trailing mean over up to ``window`` samples."""
    x = np.asarray(x, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def _stream_roles(cfg):
    return ["uplink"] * cfg.k_sat + ["user"] * cfg.k_ue


def write_sinr_report(path, scenario, results):
    rows = []
    roles = _stream_roles(scenario.cfg)
    for res in results:
        r = res.report
        for k in range(len(r)):
            with np.errstate(divide="ignore"):
                db = 10.0 * np.log10(r.sinr[k])
            rows.append((res.scheme, k, roles[k], r.sinr[k], db, r.signal[k],
                         r.interference[k], r.noise))
    write_csv(path, ("scheme", "stream", "role", "sinr", "sinr_db", "signal_w",
                     "interference_w", "noise_w"), rows)


def write_rates(path, results):
    rows = []
    for res in results:
        for k, rate in enumerate(res.rates):
            rows.append((res.scheme, k, rate))
        rows.append((res.scheme, "sum", res.sum_rate))
    write_csv(path, ("scheme", "user", "rate_bps"), rows)


def write_training_log(path, log_):
    write_csv(path, log_.COLUMNS, log_.rows())


def write_reward_curve(path, rewards):
    ma = moving_average(rewards)
    write_csv(path, ("step", "reward", f"moving_avg_{MOVING_AVERAGE_WINDOW}"),
              zip(range(1, len(rewards) + 1), rewards, ma))


def save_checkpoints(directory, nets):
    os.makedirs(directory, exist_ok=True)
    for name in ("actor", "critic", "actor_target", "critic_target"):
        neural.save_checkpoint(getattr(nets, name), os.path.join(directory, f"{name}.json"))


def run(exp, out_dir=None, progress=None):
    """Train and/or solve the configured scenario and write every artifact.

    Returns a dict of the scheme results (and the training result, if any).
    """
    out_dir = out_dir or exp.output_dir
    os.makedirs(out_dir, exist_ok=True)
    config_mod.save(exp, os.path.join(out_dir, "resolved_config.yaml"))
    scenario = build_scenario(exp)
    results, trained = [], None
    if exp.scheme in ("zf", "both"):
        results.append(zf_result(scenario))
    if exp.scheme in ("ddpg", "both"):
        res, trained = ddpg_result(scenario, exp.agent, progress)
        results.append(res)
        write_training_log(os.path.join(out_dir, "training_log.csv"), trained.log)
        write_reward_curve(os.path.join(out_dir, "reward_curve.csv"), trained.log.rewards())
        save_checkpoints(os.path.join(out_dir, "checkpoints"), trained.nets)
        if exp.svg:
            from . import plots
            plots.reward_curve_svg(os.path.join(out_dir, "reward_curve.svg"),
                                   trained.log.rewards(), moving_average(trained.log.rewards()))
    write_sinr_report(os.path.join(out_dir, "sinr_report.csv"), scenario, results)
    write_rates(os.path.join(out_dir, "rates.csv"), results)
    return {"scenario": scenario, "results": {r.scheme: r for r in results}, "trained": trained}


def _schemes(exp):
    return {"zf": ("zf",), "ddpg": ("ddpg",), "both": ("zf", "ddpg")}[exp.scheme]


def sweep_users(exp, out_dir=None, progress=None):
    """Mean and standard deviation of the sum rate per (distribution, count, scheme).

    Cells where zero forcing is infeasible for any seed are reported as NaN
    and logged.
    """
    out_dir = out_dir or exp.output_dir
    os.makedirs(out_dir, exist_ok=True)
    config_mod.save(exp, os.path.join(out_dir, "resolved_config.yaml"))
    rows = []
    for dist in exp.sweep.distributions:
        for count in exp.sweep.counts:
            samples = {s: [] for s in _schemes(exp)}
            for seed in exp.sweep.seeds:
                scenario = build_scenario(exp, seed=seed, distribution=dist, count=count)
                for scheme in samples:
                    try:
                        if scheme == "zf":
                            samples[scheme].append(zf_result(scenario).sum_rate)
                        else:
                            agent = dataclasses.replace(exp.agent, seed=seed)
                            samples[scheme].append(ddpg_result(scenario, agent)[0].sum_rate)
                    except InfeasibleError as exc:
                        log.warning("%s, %d users, seed %d: %s infeasible (%s)",
                                    dist, count, seed, scheme, exc)
                        samples[scheme].append(float("nan"))
                if progress is not None:
                    progress(dist, count, seed)
            for scheme, vals in samples.items():
                vals = np.array(vals)
                rows.append((dist, count, scheme, float(vals.mean()), float(vals.std())))
    write_csv(os.path.join(out_dir, "fig4_data.csv"),
              ("distribution", "n_users", "scheme", "mean_sum_rate_bps", "std"), rows)
    if exp.svg:
        from . import plots
        plots.sweep_svg(os.path.join(out_dir, "fig4_data.svg"), rows)
    return rows


def compare_throughput(exp, out_dir=None, progress=None):
    """Alpha-fair throughput of ZF and DDPG for every RIS size and alpha.

    One agent is trained per RIS size; the alphas only change how its rates
    are scored.
    """
    out_dir = out_dir or exp.output_dir
    os.makedirs(out_dir, exist_ok=True)
    config_mod.save(exp, os.path.join(out_dir, "resolved_config.yaml"))
    rows = []
    for side in exp.compare.ris_sides:
        scenario = build_scenario(exp, cfg=exp.scenario.replace(ris_side=side))
        zf = zf_result(scenario)
        ddpg, _ = ddpg_result(scenario, exp.agent)
        for alpha in exp.compare.alphas:
            _, zf_tp = alpha_fair_throughput(zf.rates, alpha)
            _, dd_tp = alpha_fair_throughput(ddpg.rates, alpha)
            rows.append(("zf", side, alpha, zf_tp, 0.0))
            rows.append(("ddpg", side, alpha, dd_tp, improvement_percent(dd_tp, zf_tp)))
        if progress is not None:
            progress(side)
    write_csv(os.path.join(out_dir, "table2_replica.csv"),
              ("scheme", "ris_side", "alpha", "throughput_bps", "improvement_pct_vs_zf"), rows)
    return rows
