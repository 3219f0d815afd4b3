"""Batch command line front end.

Subcommands: ``analytic`` (closed-form tables), ``simulate`` (one Monte
Carlo run), ``optimize`` (solve for the best displacement factor),
``figure`` (desk-scale datasets behind the standard plots), ``validate``
(analytic-vs-simulation consistency battery). Curves land in CSV, single
runs in JSON; every CSV starts with a ``# seed=... version=...`` comment.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .analytic1d import (avg_throughput_1d, displacement_probs_1d,
                         exact_number_beta_1d, optimal_beta_success_1d,
                         optimal_beta_throughput_1d, success_prob_1d,
                         throughput_terms)
from .analytic2d import (LoadRegime, asymptotic_beta_success_2d,
                         avg_throughput_2d, displacement_probs_2d,
                         optimal_beta_success_2d, optimal_beta_throughput_2d,
                         success_prob_2d)
from .model import CellGeometry, Dimension, SystemParams
from .montecarlo import (Objective, Scheme, Variant, multi_uav_1d,
                         multi_uav_sweep_1d, run_scheme)
from .numerics import golden_max, quad_1d

_SCHEME_NAMES = {
    "non_adaptive": Variant.NON_ADAPTIVE,
    "majority_vote": Variant.MAJORITY_VOTE,
    "exact_number": Variant.EXACT_NUMBER,
    "perfect_knowledge": Variant.PERFECT_KNOWLEDGE,
}


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class ExperimentConfig:
    """Run configuration in engineering units.

    Power in mW, altitude and cell half-width in meters, gains and SNR
    threshold in dB, noise in dBm. The user density field picks the cell
    shape: density_per_m means a line cell, density_per_m2 a square cell.
    mu_list / rho_list drive sweeps; rho entries are coverage radii as
    fractions of the cell half-width.
    """

    tx_power_mw: float = 10.0
    altitude_m: float = 100.0
    theta_db: float = -47.0
    noise_dbm: float = -110.0
    cell_half_width_m: float = 1000.0
    density_per_m: float | None = None
    density_per_m2: float | None = None
    gamma_th_db: float | None = None
    scheme: str | None = None
    beta: float | None = None
    mu_list: list | None = None
    rho_list: list | None = None
    objective: str | None = None
    n_side: int | None = None
    seed: int | None = None
    n_realizations: int | None = None
    out: str | None = None

    @classmethod
    def from_dict(cls, record: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        for key in record:
            if key not in known:
                raise ConfigError(f"unknown config field: {key}")
        cfg = cls(**record)
        cfg.validate()
        return cfg

    def validate(self):
        for field in ("tx_power_mw", "altitude_m", "cell_half_width_m"):
            value = getattr(self, field)
            if not (isinstance(value, (int, float)) and value > 0):
                raise ConfigError(f"{field} must be a positive number")
        if self.density_per_m is not None and self.density_per_m2 is not None:
            raise ConfigError("set density_per_m or density_per_m2, not both")
        for field in ("density_per_m", "density_per_m2"):
            value = getattr(self, field)
            if value is not None and value <= 0:
                raise ConfigError(f"{field} must be positive")
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise ConfigError("beta must lie in [0, 1]")
        if self.scheme is not None and self.scheme not in _SCHEME_NAMES:
            raise ConfigError(
                f"scheme must be one of {sorted(_SCHEME_NAMES)}")
        if self.objective is not None and self.objective not in (
                "throughput", "success"):
            raise ConfigError("objective must be 'throughput' or 'success'")
        if self.n_side is not None and self.n_side < 0:
            raise ConfigError("n_side must be nonnegative")
        for field in ("mu_list", "rho_list"):
            values = getattr(self, field)
            if values is not None:
                if not values or any(v <= 0 for v in values):
                    raise ConfigError(f"{field} entries must be positive")
        if self.n_realizations is not None and self.n_realizations < 1:
            raise ConfigError("n_realizations must be at least 1")

    def to_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items()
                if v is not None}

    # unit conversions

    def system_params(self) -> SystemParams:
        return SystemParams(
            transmit_power=self.tx_power_mw * 1e-3,
            altitude_h=self.altitude_m,
            ref_gain_theta=10.0 ** (self.theta_db / 10.0),
            noise_power=10.0 ** ((self.noise_dbm - 30.0) / 10.0),
        )

    def cell(self) -> CellGeometry:
        R = self.cell_half_width_m
        if self.density_per_m2 is not None:
            return CellGeometry(R, self.density_per_m2, Dimension.SQUARE)
        if self.density_per_m is not None:
            return CellGeometry(R, self.density_per_m, Dimension.LINE)
        # 1e-3 users per meter makes the stock mu = 2 line cell
        return CellGeometry(R, 1e-3, Dimension.LINE)

    def gamma_th(self) -> float | None:
        if self.gamma_th_db is None:
            return None
        return 10.0 ** (self.gamma_th_db / 10.0)

    def mus(self, fallback=None) -> list:
        if self.mu_list is not None:
            return [float(m) for m in self.mu_list]
        if fallback is not None:
            return list(fallback)
        return [self.cell().mean_load_mu]

    def rho_ratios(self, fallback) -> list:
        if self.rho_list is not None:
            return [float(r) for r in self.rho_list]
        return list(fallback)

    def betas(self, fallback) -> list:
        if self.beta is not None:
            return [float(self.beta)]
        return list(fallback)


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    with open(path) as f:
        try:
            record = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
    return ExperimentConfig.from_dict(record)


def _emit_csv(out_path: str | None, seed, header: list, rows: list):
    def write(f):
        f.write(f"# seed={seed} version={__version__}\n")
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)

    if out_path is None:
        write(sys.stdout)
    else:
        with open(out_path, "w", newline="") as f:
            write(f)


def _emit_json(out_path: str | None, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path is None:
        print(text)
    else:
        with open(out_path, "w") as f:
            f.write(text + "\n")


_BETA_GRID = [round(0.02 * i, 10) for i in range(26)]
_RHO_GRID = [round(0.05 * i, 10) for i in range(1, 29)]


def _interval_rows(interval):
    return float(interval.lo), float(interval.hi)


def cmd_analytic(args) -> int:
    cfg = load_config(args.config)
    params = cfg.system_params()
    R = cfg.cell_half_width_m
    q = args.quantity
    if q == "displacement_probs_1d":
        header = ["mu", "q0", "q1", "q2"]
        rows = [[mu, *displacement_probs_1d(mu).q] for mu in cfg.mus()]
    elif q == "displacement_probs_2d":
        header = ["mu", "q0", "q1", "q2", "q3", "q4"]
        rows = [[mu, *displacement_probs_2d(mu).q] for mu in cfg.mus()]
    elif q in ("throughput_1d", "throughput_2d"):
        fn = avg_throughput_1d if q == "throughput_1d" else avg_throughput_2d
        header = ["mu", "beta", "avg_throughput"]
        rows = [[mu, b, fn(b, mu, params, R)]
                for mu in cfg.mus() for b in cfg.betas(_BETA_GRID)]
    elif q in ("success_1d", "success_2d"):
        header = ["mu", "rho_ratio", "beta", "success_prob"]
        rows = []
        for mu in cfg.mus():
            for r in cfg.rho_ratios([0.3, 0.5, 0.75, 1.0, 1.3]):
                for b in cfg.betas(_BETA_GRID):
                    p = (success_prob_1d(b, r * R, mu, R) if q == "success_1d"
                         else success_prob_2d(b, r * R, mu, R))
                    rows.append([mu, r, b, p])
    elif q in ("beta_star_throughput_1d", "beta_star_throughput_2d"):
        fn = (optimal_beta_throughput_1d if q.endswith("1d")
              else optimal_beta_throughput_2d)
        header = ["mu", "beta_star"]
        rows = [[mu, fn(mu, params, R)] for mu in cfg.mus()]
    elif q == "beta_star_success_1d":
        header = ["rho_ratio", "beta_lo", "beta_hi"]
        rows = [[r, *_interval_rows(optimal_beta_success_1d(r * R, R))]
                for r in cfg.rho_ratios(_RHO_GRID)]
    elif q == "beta_star_success_2d":
        header = ["mu", "rho_ratio", "beta_lo", "beta_hi"]
        rows = [[mu, r, *_interval_rows(optimal_beta_success_2d(r * R, mu, R))]
                for mu in cfg.mus() for r in cfg.rho_ratios(_RHO_GRID)]
    elif q in ("beta_star_success_2d_lowload", "beta_star_success_2d_highload"):
        regime = LoadRegime.LOW if q.endswith("lowload") else LoadRegime.HIGH
        header = ["rho_ratio", "beta_lo", "beta_hi"]
        rows = [[r, *_interval_rows(asymptotic_beta_success_2d(r * R, regime, R))]
                for r in cfg.rho_ratios(_RHO_GRID)]
    else:
        print(f"unknown quantity: {q}", file=sys.stderr)
        return 2
    _emit_csv(args.out, args.seed, header, rows)
    return 0


def _resolve_scheme(cfg: ExperimentConfig) -> Scheme:
    if cfg.scheme is None:
        raise ConfigError("scheme is required for simulate runs")
    variant = _SCHEME_NAMES[cfg.scheme]
    objective = (Objective.SUCCESS_PROB if cfg.objective == "success"
                 else Objective.AVG_THROUGHPUT)
    if objective is Objective.SUCCESS_PROB and cfg.gamma_th_db is None:
        raise ConfigError("success objective needs gamma_th_db")
    beta = cfg.beta if cfg.beta is not None else 0.0
    return Scheme(variant, objective, beta, cfg.gamma_th())


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    params = cfg.system_params()
    cell = cfg.cell()
    seed = args.seed
    n = args.realizations if args.realizations else (cfg.n_realizations
                                                     or 100_000)
    objective = (Objective.SUCCESS_PROB if cfg.objective == "success"
                 else Objective.AVG_THROUGHPUT)
    started = time.perf_counter()
    if cfg.n_side is not None:
        if cfg.beta is None:
            raise ConfigError("multi-UAV runs need a fixed beta")
        est = multi_uav_1d(cell, params, cfg.beta, cfg.n_side, n, seed,
                           objective, cfg.gamma_th(), args.threads)
        kind = f"multi_uav(n_side={cfg.n_side})"
    else:
        scheme = _resolve_scheme(cfg)
        est = run_scheme(cell, params, scheme, n, seed, args.threads)
        kind = scheme.variant.value
    payload = {
        "scheme": kind,
        "objective": objective.value,
        "mean": est.mean,
        "std_error": est.std_error,
        "n_kept": est.n_kept,
        "n_total": est.n_total,
        "seed": est.seed,
        "elapsed_s": round(time.perf_counter() - started, 3),
        "config": cfg.to_dict(),
    }
    _emit_json(args.out, payload)
    return 0


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    params = cfg.system_params()
    cell = cfg.cell()
    R = cfg.cell_half_width_m
    two_d = cell.dimension == Dimension.SQUARE
    mu = cfg.mus()[0]
    payload = {"objective": args.objective, "mu": mu,
               "dimension": int(cell.dimension), "config": cfg.to_dict()}
    if args.objective == "throughput":
        solver = optimal_beta_throughput_2d if two_d else optimal_beta_throughput_1d
        payload["beta_star"] = solver(mu, params, R)
    else:
        if cfg.gamma_th_db is None:
            raise ConfigError("success objective needs gamma_th_db")
        rho = _coverage_radius_checked(params, cfg.gamma_th())
        payload["rho_ratio"] = rho / R
        best = (optimal_beta_success_2d(rho, mu, R) if two_d
                else optimal_beta_success_1d(rho, R))
        payload["beta_lo"], payload["beta_hi"] = _interval_rows(best)
        payload["flat"] = bool(best.hi > best.lo)
    _emit_json(args.out, payload)
    return 0


def _coverage_radius_checked(params, gamma_th):
    from .model import coverage_radius
    return coverage_radius(params, gamma_th)


# ---------------------------------------------------------------------------
# figure datasets


def _fig_beta_curves_1d(cfg, params, R, seed, n, threads):
    rows = []
    for mu in cfg.mus([0.2, 2.0, 20.0]):
        cell = CellGeometry.from_mean_load(mu, R, Dimension.LINE)
        for b in cfg.betas([round(0.02 * i, 10) for i in range(26)]):
            est = run_scheme(cell, params,
                             Scheme(Variant.MAJORITY_VOTE, beta=b), n, seed,
                             threads)
            rows.append([mu, b, avg_throughput_1d(b, mu, params, R), est.mean,
                         est.std_error])
    return ["mu", "beta", "analytic", "simulated", "std_error"], rows


def _fig_scheme_compare_1d(cfg, params, R, seed, n, threads):
    rows = []
    for mu in cfg.mus([0.2, 0.5, 1.0, 2.0, 4.0, 8.0]):
        cell = CellGeometry.from_mean_load(mu, R, Dimension.LINE)
        beta_star = optimal_beta_throughput_1d(mu, params, R)
        schemes = [
            ("non_adaptive", Scheme(Variant.NON_ADAPTIVE)),
            ("majority_vote", Scheme(Variant.MAJORITY_VOTE, beta=beta_star)),
            ("exact_number", Scheme(Variant.EXACT_NUMBER)),
            ("perfect_knowledge", Scheme(Variant.PERFECT_KNOWLEDGE)),
        ]
        for name, scheme in schemes:
            est = run_scheme(cell, params, scheme, n, seed, threads)
            rows.append([mu, name, est.mean, est.std_error, est.n_kept])
    return ["mu", "scheme", "mean", "std_error", "n_kept"], rows


def _fig_success_curves_1d(cfg, params, R, seed, n, threads):
    rows = []
    mu = cfg.mus()[0]
    cell = CellGeometry.from_mean_load(mu, R, Dimension.LINE)
    a, h = params.link_budget_a, params.altitude_h
    for r in cfg.rho_ratios([0.3, 0.5, 0.75]):
        rho = r * R
        gamma = a / (rho * rho + h * h)
        for b in cfg.betas([round(0.02 * i, 10) for i in range(26)]):
            est = run_scheme(cell, params,
                             Scheme(Variant.MAJORITY_VOTE,
                                    Objective.SUCCESS_PROB, b, gamma),
                             n, seed, threads)
            rows.append([mu, r, b, success_prob_1d(b, rho, mu, R), est.mean,
                         est.std_error])
    return (["mu", "rho_ratio", "beta", "analytic", "simulated", "std_error"],
            rows)


def _fig_success_compare_1d(cfg, params, R, seed, n, threads):
    rows = []
    r = cfg.rho_ratios([0.5])[0]
    rho = r * R
    gamma = params.link_budget_a / (rho * rho + params.altitude_h ** 2)
    beta_star = optimal_beta_success_1d(rho, R).midpoint
    for mu in cfg.mus([0.2, 0.5, 1.0, 2.0, 4.0, 8.0]):
        cell = CellGeometry.from_mean_load(mu, R, Dimension.LINE)
        schemes = [
            ("non_adaptive",
             Scheme(Variant.NON_ADAPTIVE, Objective.SUCCESS_PROB,
                    gamma_th=gamma)),
            ("majority_vote",
             Scheme(Variant.MAJORITY_VOTE, Objective.SUCCESS_PROB, beta_star,
                    gamma)),
            ("exact_number",
             Scheme(Variant.EXACT_NUMBER, Objective.SUCCESS_PROB,
                    gamma_th=gamma)),
            ("perfect_knowledge",
             Scheme(Variant.PERFECT_KNOWLEDGE, Objective.SUCCESS_PROB,
                    gamma_th=gamma)),
        ]
        for name, scheme in schemes:
            est = run_scheme(cell, params, scheme, n, seed, threads)
            rows.append([mu, r, name, est.mean, est.std_error, est.n_kept])
    return (["mu", "rho_ratio", "scheme", "mean", "std_error", "n_kept"], rows)


def _fig_beta_star_2d(cfg, params, R, seed, n, threads):
    # simulated argmax scans a coarse beta grid at a reduced realization count
    rows = []
    scan = [round(0.05 * i, 10) for i in range(11)]
    n_scan = max(n // 5, 1_000)
    for mu in cfg.mus([0.5, 1.0, 2.0, 4.0, 8.0, 16.0]):
        cell = CellGeometry.from_mean_load(mu, R, Dimension.SQUARE)
        means = [run_scheme(cell, params, Scheme(Variant.MAJORITY_VOTE, beta=b),
                            n_scan, seed, threads).mean for b in scan]
        rows.append([mu, optimal_beta_throughput_2d(mu, params, R),
                     scan[int(np.argmax(means))], n_scan])
    return ["mu", "beta_star_analytic", "beta_star_simulated", "n_scan"], rows


def _fig_scheme_compare_2d(cfg, params, R, seed, n, threads):
    # the per-realization search scheme runs at n/10: it is two orders of
    # magnitude slower per realization than the closed-form ones
    rows = []
    n_pk = max(n // 10, 1_000)
    for mu in cfg.mus([0.5, 1.0, 2.0, 4.0, 8.0]):
        cell = CellGeometry.from_mean_load(mu, R, Dimension.SQUARE)
        beta_star = optimal_beta_throughput_2d(mu, params, R)
        runs = [
            ("non_adaptive", Scheme(Variant.NON_ADAPTIVE), n),
            ("majority_vote", Scheme(Variant.MAJORITY_VOTE, beta=beta_star), n),
            ("perfect_knowledge", Scheme(Variant.PERFECT_KNOWLEDGE), n_pk),
        ]
        for name, scheme, n_run in runs:
            est = run_scheme(cell, params, scheme, n_run, seed, threads)
            rows.append([mu, name, est.mean, est.std_error, est.n_kept])
    return ["mu", "scheme", "mean", "std_error", "n_kept"], rows


def _fig_beta_star_success_2d(cfg, params, R, seed, n, threads):
    rows = []
    mu = cfg.mus([4.0])[0]
    for r in cfg.rho_ratios(_RHO_GRID):
        lo, hi = _interval_rows(optimal_beta_success_2d(r * R, mu, R))
        rows.append([mu, r, lo, hi, int(hi > lo)])
    return ["mu", "rho_ratio", "beta_lo", "beta_hi", "flat_interval"], rows


def _fig_success_compare_2d(cfg, params, R, seed, n, threads):
    # per-realization search at n/10, as in the 2D throughput comparison
    rows = []
    mu = cfg.mus([4.0])[0]
    cell = CellGeometry.from_mean_load(mu, R, Dimension.SQUARE)
    a, h = params.link_budget_a, params.altitude_h
    n_pk = max(n // 10, 1_000)
    for r in cfg.rho_ratios([0.3, 0.5, 0.7, 0.9, 1.1, 1.3]):
        rho = r * R
        gamma = a / (rho * rho + h * h)
        beta_star = optimal_beta_success_2d(rho, mu, R).midpoint
        runs = [
            ("non_adaptive",
             Scheme(Variant.NON_ADAPTIVE, Objective.SUCCESS_PROB,
                    gamma_th=gamma), n),
            ("majority_vote",
             Scheme(Variant.MAJORITY_VOTE, Objective.SUCCESS_PROB, beta_star,
                    gamma), n),
            ("perfect_knowledge",
             Scheme(Variant.PERFECT_KNOWLEDGE, Objective.SUCCESS_PROB,
                    gamma_th=gamma), n_pk),
        ]
        for name, scheme, n_run in runs:
            est = run_scheme(cell, params, scheme, n_run, seed, threads)
            rows.append([mu, r, round(10.0 * math.log10(gamma), 6), name,
                         est.mean, est.std_error, est.n_kept])
    return (["mu", "rho_ratio", "gamma_th_db", "scheme", "mean", "std_error",
             "n_kept"], rows)


def _fig_multi_uav(cfg, params, R, seed, n, threads):
    rows = []
    n_side = cfg.n_side if cfg.n_side is not None else 10
    betas = cfg.betas([round(0.05 * i, 10) for i in range(13)])
    for mu in cfg.mus([0.2, 2.0, 20.0]):
        cell = CellGeometry.from_mean_load(mu, R, Dimension.LINE)
        single = optimal_beta_throughput_1d(mu, params, R)
        ests = multi_uav_sweep_1d(cell, params, betas, n_side, n, seed,
                                  n_threads=threads)
        for b, est in zip(betas, ests):
            rows.append([mu, n_side, b, est.mean, est.std_error, single])
    return (["mu", "n_side", "beta", "mean", "std_error",
             "single_cell_beta_star"], rows)


_FIGURES = {
    "fig4a": _fig_beta_curves_1d,
    "fig4b": _fig_scheme_compare_1d,
    "fig5a": _fig_success_curves_1d,
    "fig5b": _fig_success_compare_1d,
    "fig6a": _fig_beta_star_2d,
    "fig6b": _fig_scheme_compare_2d,
    "fig7a": _fig_beta_star_success_2d,
    "fig7b": _fig_success_compare_2d,
    "fig8": _fig_multi_uav,
}


def cmd_figure(args) -> int:
    if args.name not in _FIGURES:
        print(f"unknown figure name: {args.name} "
              f"(expected one of {sorted(_FIGURES)})", file=sys.stderr)
        return 2
    cfg = load_config(args.config)
    params = cfg.system_params()
    R = cfg.cell_half_width_m
    n = args.realizations if args.realizations else 100_000
    header, rows = _FIGURES[args.name](cfg, params, R, args.seed, n,
                                       args.threads)
    _emit_csv(args.out, args.seed, header, rows)
    return 0


# ---------------------------------------------------------------------------
# validation battery


def _run_checks(full: bool, seed: int, threads: int):
    params = ExperimentConfig().system_params()
    R = 1000.0
    n = 1_000_000 if full else 100_000
    checks = []

    def check(name, deviation, tol):
        checks.append((name, float(deviation), float(tol),
                       bool(abs(deviation) <= tol)))

    probs = displacement_probs_1d(1e-4)
    check("near_empty_cell_majority_prob_1d", probs.q1 - 0.5, 1e-4)
    check("near_empty_cell_minority_prob_1d", probs.q2, 1e-4)
    for mu in (0.5, 4.0):
        q = displacement_probs_1d(mu)
        check(f"displacement_prob_closure_1d_mu{mu:g}",
              q.q0 + q.q1 + q.q2 - 0.5, 1e-12)

    q2d = displacement_probs_2d(4.0)
    check("displacement_prob_closure_2d_mu4", sum(q2d.q) - 0.25, 1e-12)
    half = displacement_probs_2d(2.0, n_sectors=2)
    line = displacement_probs_1d(2.0)
    check("two_sector_reduction_matches_1d", half.q[1] - line.q1, 1e-9)

    # throughput expansion against direct numeric integration
    mu, beta = 2.0, 0.3
    probs = displacement_probs_1d(mu)
    terms = throughput_terms(beta, params, R)
    a, h = params.link_budget_a, params.altitude_h

    def rate(x):
        return np.log2(1.0 + a / (x * x + h * h))

    own = quad_1d(lambda x: rate(x + beta * R), -R, 0.0, rel_tol=1e-10).value / R
    check("throughput_own_block_vs_quadrature",
          own - (terms.zeta + terms.kappa_term), 1e-8)
    exact = avg_throughput_1d(beta, mu, params, R)
    direct = 2.0 * (probs.q1 * (terms.zeta + terms.kappa_term)
                    + probs.q2 * (terms.xi - terms.kappa_term)
                    + probs.q0 * terms.vartheta)
    check("throughput_assembly_identity", exact - direct, 1e-12)

    bstar = optimal_beta_throughput_1d(mu, params, R)
    g = golden_max(lambda b: avg_throughput_1d(b, mu, params, R), 0.0, 0.5,
                   tol_x=1e-9)
    check("throughput_root_vs_golden_1d", bstar - g.x, 1e-6)
    check("near_empty_beta_star_is_half_1d",
          optimal_beta_throughput_1d(1e-4, params, R) - 0.5, 1e-3)
    stars = [optimal_beta_throughput_1d(m, params, R)
             for m in (0.5, 1.0, 2.0, 4.0, 8.0)]
    check("beta_star_decreasing_in_load_1d",
          max(0.0, max(b2 - b1 for b1, b2 in zip(stars, stars[1:]))), 0.0)

    check("success_centered_equals_coverage_ratio",
          success_prob_1d(0.0, 0.4 * R, mu, R) - 0.4, 1e-12)
    plateau = [success_prob_1d(b, 0.3 * R, mu, R)
               for b in np.linspace(0.3, 0.7, 41)]
    check("success_plateau_flat_1d", max(plateau) - min(plateau), 1e-10)
    grid = np.linspace(0.0, 1.0, 2001)
    vals = [success_prob_1d(b, 0.75 * R, mu, R) for b in grid]
    check("success_argmax_unique_1d",
          grid[int(np.argmax(vals))] - 0.25, 1e-3)

    b2 = optimal_beta_throughput_2d(4.0, params, R)
    g2 = golden_max(lambda b: avg_throughput_2d(b, 4.0, params, R), 0.0, 0.5,
                    tol_x=1e-9)
    check("throughput_root_vs_golden_2d", b2 - g2.x, 1e-4)
    best = optimal_beta_success_2d(0.6 * R, 4.0, R)
    vals2 = [success_prob_2d(b, 0.6 * R, 4.0, R) for b in grid]
    check("success_solver_vs_grid_2d",
          best.midpoint - grid[int(np.argmax(vals2))], 2e-3)
    low = asymptotic_beta_success_2d(R, LoadRegime.LOW, R)
    check("low_load_edge_value_2d", low.midpoint - (1.0 - 0.5 * math.sqrt(2.0)),
          1e-12)
    check("exact_number_factor_vs_golden",
          exact_number_beta_1d(3, 1, params, R)
          - golden_max(lambda b: 3.0 * (throughput_terms(b, params, R).zeta
                                        + throughput_terms(b, params, R).kappa_term)
                       + 1.0 * (throughput_terms(b, params, R).xi
                                - throughput_terms(b, params, R).kappa_term),
                       0.0, 0.5, tol_x=1e-9).x,
          1e-6)

    # simulation cross-checks
    cell = CellGeometry.from_mean_load(mu, R, Dimension.LINE)
    est = run_scheme(cell, params, Scheme(Variant.MAJORITY_VOTE, beta=beta), n,
                     seed, threads)
    check("sim_vs_analytic_throughput_1d", est.mean - exact,
          3.0 * est.std_error)
    na = run_scheme(cell, params, Scheme(Variant.NON_ADAPTIVE), 20_000, seed,
                    threads)
    mv0 = run_scheme(cell, params, Scheme(Variant.MAJORITY_VOTE, beta=0.0),
                     20_000, seed, threads)
    check("non_adaptive_equals_zero_displacement", na.mean - mv0.mean, 0.0)
    rho = 0.4 * R
    gamma = a / (rho * rho + h * h)
    est_s = run_scheme(cell, params,
                       Scheme(Variant.MAJORITY_VOTE, Objective.SUCCESS_PROB,
                              beta, gamma), n, seed, threads)
    check("sim_vs_analytic_success_1d",
          est_s.mean - success_prob_1d(beta, rho, mu, R),
          3.0 * est_s.std_error)
    cell2 = CellGeometry.from_mean_load(4.0, R, Dimension.SQUARE)
    est2 = run_scheme(cell2, params, Scheme(Variant.MAJORITY_VOTE, beta=0.3),
                      n, seed, threads)
    check("sim_vs_analytic_throughput_2d",
          est2.mean - avg_throughput_2d(0.3, 4.0, params, R),
          3.0 * est2.std_error)
    est2s = run_scheme(cell2, params,
                       Scheme(Variant.MAJORITY_VOTE, Objective.SUCCESS_PROB,
                              0.25, a / ((0.6 * R) ** 2 + h * h)), n, seed,
                       threads)
    check("sim_vs_analytic_success_2d",
          est2s.mean - success_prob_2d(0.25, 0.6 * R, 4.0, R),
          3.0 * est2s.std_error)
    one = run_scheme(cell, params, Scheme(Variant.MAJORITY_VOTE, beta=0.3),
                     30_000, seed, n_threads=1, chunk_size=1 << 13)
    two = run_scheme(cell, params, Scheme(Variant.MAJORITY_VOTE, beta=0.3),
                     30_000, seed, n_threads=2, chunk_size=1 << 13)
    check("thread_count_invariance", one.mean - two.mean, 0.0)
    if full:
        en = run_scheme(cell, params, Scheme(Variant.EXACT_NUMBER), n, seed,
                        threads)
        mv = run_scheme(cell, params,
                        Scheme(Variant.MAJORITY_VOTE,
                               beta=optimal_beta_throughput_1d(mu, params, R)),
                        n, seed, threads)
        slack = math.hypot(en.std_error, mv.std_error)
        check("exact_number_not_below_majority_vote",
              min(en.mean - mv.mean + slack, 0.0), 0.0)
        pk = run_scheme(cell, params, Scheme(Variant.PERFECT_KNOWLEDGE), n,
                        seed, threads)
        check("perfect_knowledge_tops_exact_number",
              min(pk.mean - en.mean + slack, 0.0), 0.0)
    return checks


def cmd_validate(args) -> int:
    started = time.perf_counter()
    checks = _run_checks(args.full, args.seed, args.threads)
    failures = 0
    for name, deviation, tol, ok in checks:
        status = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        print(f"{status} {name}: |deviation|={abs(deviation):.3e} "
              f"tolerance={tol:.3e}")
    elapsed = time.perf_counter() - started
    print(f"{len(checks) - failures}/{len(checks)} checks passed "
          f"in {elapsed:.1f}s")
    if args.out:
        report = [{"name": n, "deviation": d, "tolerance": t, "passed": ok}
                  for n, d, t, ok in checks]
        _emit_json(args.out, {"checks": report, "elapsed_s": elapsed})
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavdeploy",
        description="Adaptive UAV placement: closed forms, Monte Carlo runs, "
                    "figure datasets, and consistency validation.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--realizations", type=int, default=0,
                        help="Monte Carlo realization count")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="output path (default: stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", parents=[common],
                       help="closed-form tables as CSV")
    p.add_argument("quantity")
    p.set_defaults(fn=cmd_analytic)

    p = sub.add_parser("simulate", parents=[common],
                       help="one Monte Carlo run as JSON")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("optimize", parents=[common],
                       help="solve for the optimal displacement factor")
    p.add_argument("objective", choices=["throughput", "success"])
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("figure", parents=[common],
                       help="desk-scale dataset behind one standard figure")
    p.add_argument("name")
    p.set_defaults(fn=cmd_figure)

    p = sub.add_parser("validate", parents=[common],
                       help="analytic vs simulation consistency battery")
    p.add_argument("--full", action="store_true",
                   help="million-realization oracles")
    p.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
