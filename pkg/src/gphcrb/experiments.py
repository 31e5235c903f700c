"""Monte-Carlo studies of empirical prediction MSE versus the bounds,
plus the CO2 forecasting study.

Each replicate draws one GP realization over train+test points from the
configured truth, refits the hyperparameters, predicts, and accumulates
squared errors; curves compare the empirical MSE against the bounds at
the true and at the learned hyperparameters. Replicates own derived rng
streams keyed by (seed, replicate index) and are accumulated in index
order, so results are byte-reproducible regardless of how many worker
processes run them (GP_HCRB_THREADS caps the pool; 0 = auto, 1 = serial).
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import io
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import hcrb
from .co2 import Co2Record, window
from .errors import AllStartsFailed, ConfigError, NumericalError
from .gp import Dataset, GpModel, Hyperparameters, predict, sample_realization
from .kernels import gram
from .learning import FitConfig, FitResult, fit_ml
from .means import basis_of_linear_mean

THREADS_ENV = "GP_HCRB_THREADS"

VARIANTS = ("full_learn", "fixed_subset")


def n_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if val < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0")
    if val == 0:
        return min(os.cpu_count() or 1, 8)
    return val


def make_grid(spec) -> np.ndarray:
    """Accept either an explicit list of points or {from, to, n}."""
    if isinstance(spec, dict):
        return np.linspace(float(spec["from"]), float(spec["to"]), int(spec["n"]))
    return np.asarray(spec, dtype=float)


def draw_design(spec: dict) -> np.ndarray:
    """The documented default training design: n points drawn once from
    Uniform(low, high) with a fixed seed, sorted, reused across replicates."""
    rng = np.random.default_rng(int(spec.get("seed", 0)))
    xs = rng.uniform(float(spec["low"]), float(spec["high"]), int(spec["n"]))
    return np.sort(xs)


@dataclass(frozen=True)
class McExperimentConfig:
    """One synthetic Monte-Carlo study."""

    truth: GpModel
    train_xs: np.ndarray
    test_xs: np.ndarray
    n_mc: int
    fit: FitConfig
    seed: int = 0
    variant: str = "full_learn"
    init: Optional[Hyperparameters] = None  # fit start; truth when None
    marginalized: Optional[GpModel] = None  # alternate model for the paired study
    marginalized_fit: Optional[FitConfig] = None

    def __post_init__(self):
        if self.n_mc < 1:
            raise ConfigError("n_mc must be >= 1")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        object.__setattr__(self, "train_xs", np.asarray(self.train_xs, dtype=float))
        object.__setattr__(self, "test_xs", np.asarray(self.test_xs, dtype=float))
        if not (
            np.all(np.isfinite(self.train_xs)) and np.all(np.isfinite(self.test_xs))
        ):
            raise ConfigError("train/test points must be finite")
        if self.variant == "fixed_subset" and self.fit.fixed_mask is None:
            raise ConfigError("fixed_subset variant needs fit.fixed_mask")

    @staticmethod
    def from_json(obj: dict) -> "McExperimentConfig":
        truth = GpModel.from_json(obj["truth"])
        if "train_xs" in obj:
            train_xs = np.asarray(obj["train_xs"], dtype=float)
        elif "design" in obj:
            train_xs = draw_design(obj["design"])
        else:
            raise ConfigError("config needs train_xs or design")
        marg = obj.get("marginalized")
        return McExperimentConfig(
            truth=truth,
            train_xs=train_xs,
            test_xs=make_grid(obj["test_xs"]),
            n_mc=int(obj["n_mc"]),
            fit=FitConfig.from_json(obj.get("fit", {})),
            seed=int(obj.get("seed", 0)),
            variant=obj.get("variant", "full_learn"),
            init=Hyperparameters.from_json(obj["init"]) if "init" in obj else None,
            marginalized=GpModel.from_json(marg) if marg else None,
            marginalized_fit=(
                FitConfig.from_json(obj["marginalized_fit"])
                if "marginalized_fit" in obj
                else None
            ),
        )


@dataclass(frozen=True)
class McCurves:
    """Per-test-point Monte-Carlo curves and bound references."""

    test_xs: np.ndarray
    empirical_mse: np.ndarray
    mc_se: np.ndarray
    bcrb_truth: np.ndarray
    hcrb_truth: np.ndarray
    bcrb_fit_mean: np.ndarray
    hcrb_fit_mean: np.ndarray
    n_effective: int
    n_dropped: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            [
                "x",
                "empirical_mse",
                "mc_se",
                "bcrb_truth",
                "hcrb_truth",
                "bcrb_fit_mean",
                "hcrb_fit_mean",
            ]
        )
        for i in range(self.test_xs.size):
            w.writerow(
                [
                    f"{v:.17g}"
                    for v in (
                        self.test_xs[i],
                        self.empirical_mse[i],
                        self.mc_se[i],
                        self.bcrb_truth[i],
                        self.hcrb_truth[i],
                        self.bcrb_fit_mean[i],
                        self.hcrb_fit_mean[i],
                    )
                ]
            )
        return buf.getvalue()


def bounds_at(model: GpModel, train_xs: np.ndarray, test_xs: np.ndarray):
    """(bcrb, hcrb) arrays at the given parameters; y-independent."""
    data = Dataset(xs=train_xs, ys=np.zeros(len(np.atleast_1d(train_xs))))
    items = hcrb(model, data, test_xs)
    return (
        np.array([it.bcrb for it in items]),
        np.array([it.hcrb for it in items]),
    )


def _replicate_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, rep]))


def _mc_replicate(cfg: McExperimentConfig, rep: int):
    """One replicate: simulate, fit, predict, bound. Returns None on a
    dropped replicate (fit failure or numerical breakdown)."""
    rng = _replicate_rng(cfg.seed, rep)
    n = cfg.train_xs.size
    xs_all = np.concatenate([cfg.train_xs, cfg.test_xs])
    f, y_all = sample_realization(
        cfg.truth, xs_all, rng, with_noise=True, noise_indices=np.arange(n)
    )
    data = Dataset(xs=cfg.train_xs, ys=y_all[:n])
    fstar = f[n:]
    init = cfg.init if cfg.init is not None else cfg.truth.theta
    try:
        fit = fit_ml(cfg.truth.mean, cfg.truth.kernel, data, init, cfg.fit)
        model_hat = cfg.truth.with_theta(fit.theta_hat)
        pred = predict(model_hat, data, cfg.test_xs)
        bcrb_fit, hcrb_fit = bounds_at(model_hat, cfg.train_xs, cfg.test_xs)
    except (AllStartsFailed, NumericalError):
        return None
    sq_err = (fstar - pred.fhat) ** 2
    return sq_err, bcrb_fit, hcrb_fit


_POOL_CFG = None


def _pool_init(cfg):
    global _POOL_CFG
    _POOL_CFG = cfg


def _pool_task(rep: int):
    return _mc_replicate(_POOL_CFG, rep)


def _map_replicates(cfg, worker, task):
    workers = n_workers()
    if workers <= 1 or cfg.n_mc == 1:
        return [worker(cfg, rep) for rep in range(cfg.n_mc)]
    with concurrent.futures.ProcessPoolExecutor(
        max_workers=workers, initializer=_pool_init, initargs=(cfg,)
    ) as pool:
        chunk = max(1, cfg.n_mc // (8 * workers))
        return list(pool.map(task, range(cfg.n_mc), chunksize=chunk))


def run_mc(cfg: McExperimentConfig) -> McCurves:
    """Run the study; failed replicates are dropped and counted, never
    silently absorbed."""
    results = _map_replicates(cfg, _mc_replicate, _pool_task)
    ok = [r for r in results if r is not None]
    n_eff = len(ok)
    if n_eff == 0:
        raise AllStartsFailed("every replicate was dropped")
    sq = np.stack([r[0] for r in ok])
    bcrb_fit = np.stack([r[1] for r in ok])
    hcrb_fit = np.stack([r[2] for r in ok])
    bcrb0, hcrb0 = bounds_at(cfg.truth, cfg.train_xs, cfg.test_xs)
    mc_se = (
        np.std(sq, axis=0, ddof=1) / np.sqrt(n_eff) if n_eff > 1 else np.zeros(sq.shape[1])
    )
    return McCurves(
        test_xs=cfg.test_xs,
        empirical_mse=sq.mean(axis=0),
        mc_se=mc_se,
        bcrb_truth=bcrb0,
        hcrb_truth=hcrb0,
        bcrb_fit_mean=bcrb_fit.mean(axis=0),
        hcrb_fit_mean=hcrb_fit.mean(axis=0),
        n_effective=n_eff,
        n_dropped=cfg.n_mc - n_eff,
    )


@dataclass(frozen=True)
class MarginalizedCurves:
    """Paired study: original model with its hybrid bound versus the
    marginalized model with its predictive variance."""

    test_xs: np.ndarray
    mse_original: np.ndarray
    mse_marginalized: np.ndarray
    hcrb_original_fit_mean: np.ndarray
    predvar_marginalized_fit_mean: np.ndarray
    hcrb_original_truth: np.ndarray
    n_effective: int
    n_dropped: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            [
                "x",
                "mse_original",
                "mse_marginalized",
                "hcrb_original_fit_mean",
                "predvar_marginalized_fit_mean",
                "hcrb_original_truth",
            ]
        )
        for i in range(self.test_xs.size):
            w.writerow(
                [
                    f"{v:.17g}"
                    for v in (
                        self.test_xs[i],
                        self.mse_original[i],
                        self.mse_marginalized[i],
                        self.hcrb_original_fit_mean[i],
                        self.predvar_marginalized_fit_mean[i],
                        self.hcrb_original_truth[i],
                    )
                ]
            )
        return buf.getvalue()


def _marg_replicate(cfg: McExperimentConfig, rep: int):
    """One paired replicate. Data always comes from the original model;
    both models are fit to it."""
    rng = _replicate_rng(cfg.seed, rep)
    n = cfg.train_xs.size
    xs_all = np.concatenate([cfg.train_xs, cfg.test_xs])
    f, y_all = sample_realization(
        cfg.truth, xs_all, rng, with_noise=True, noise_indices=np.arange(n)
    )
    data = Dataset(xs=cfg.train_xs, ys=y_all[:n])
    fstar = f[n:]
    init = cfg.init if cfg.init is not None else cfg.truth.theta
    marg = cfg.marginalized
    marg_fit_cfg = cfg.marginalized_fit if cfg.marginalized_fit is not None else cfg.fit
    try:
        fit_orig = fit_ml(cfg.truth.mean, cfg.truth.kernel, data, init, cfg.fit)
        model_orig = cfg.truth.with_theta(fit_orig.theta_hat)
        pred_orig = predict(model_orig, data, cfg.test_xs)
        _, hcrb_orig = bounds_at(model_orig, cfg.train_xs, cfg.test_xs)

        fit_marg = fit_ml(marg.mean, marg.kernel, data, marg.theta, marg_fit_cfg)
        model_marg = marg.with_theta(fit_marg.theta_hat)
        pred_marg = predict(model_marg, data, cfg.test_xs)
    except (AllStartsFailed, NumericalError):
        return None
    return (
        (fstar - pred_orig.fhat) ** 2,
        (fstar - pred_marg.fhat) ** 2,
        hcrb_orig,
        pred_marg.var,
    )


def _marg_pool_task(rep: int):
    return _marg_replicate(_POOL_CFG, rep)


def run_marginalized_comparison(cfg: McExperimentConfig) -> MarginalizedCurves:
    """The original-versus-marginalized study; requires cfg.marginalized."""
    if cfg.marginalized is None:
        raise ConfigError("marginalized comparison needs cfg.marginalized")
    if cfg.marginalized.mean.n_params != 0:
        raise ConfigError("marginalized model must have a zero-parameter mean")
    basis_of_linear_mean(cfg.truth.mean)  # original mean must be linear in alpha
    results = _map_replicates(cfg, _marg_replicate, _marg_pool_task)
    ok = [r for r in results if r is not None]
    n_eff = len(ok)
    if n_eff == 0:
        raise AllStartsFailed("every replicate was dropped")
    _, hcrb0 = bounds_at(cfg.truth, cfg.train_xs, cfg.test_xs)
    return MarginalizedCurves(
        test_xs=cfg.test_xs,
        mse_original=np.stack([r[0] for r in ok]).mean(axis=0),
        mse_marginalized=np.stack([r[1] for r in ok]).mean(axis=0),
        hcrb_original_fit_mean=np.stack([r[2] for r in ok]).mean(axis=0),
        predvar_marginalized_fit_mean=np.stack([r[3] for r in ok]).mean(axis=0),
        hcrb_original_truth=hcrb0,
        n_effective=n_eff,
        n_dropped=cfg.n_mc - n_eff,
    )


def diffuse_linear_variance(model: GpModel, train_xs, test_xs) -> np.ndarray:
    """Predictive variance of the marginalized model in the diffuse limit
    of its linear-coefficient prior, computed through the classical
    bordered kriging system

        [[K + s2 I, U], [U', 0]] [lam; nu] = [k_star; u_star]
        var = k_ss - lam . k_star - nu . u_star

    rather than through the g/M route, so comparing it against
    :func:`gphcrb.bounds.hcrb` is a genuine cross-check. ``model`` is the
    ORIGINAL model (linear-in-parameters mean plus base kernel).
    """
    u = basis_of_linear_mean(model.mean)
    bundle = gram(model.kernel, train_xs, test_xs)
    n = bundle.kmat.shape[0]
    umat = u(train_xs)
    p = umat.shape[1]
    asys = np.zeros((n + p, n + p))
    asys[:n, :n] = bundle.kmat + model.theta.sigma2 * np.eye(n)
    asys[:n, n:] = umat
    asys[n:, :n] = umat.T
    ustar = u(test_xs)
    out = np.empty(bundle.kss.size)
    for t in range(bundle.kss.size):
        rhs = np.concatenate([bundle.kstar[t], ustar[t]])
        sol = np.linalg.solve(asys, rhs)
        out[t] = bundle.kss[t] - bundle.kstar[t] @ sol[:n] - ustar[t] @ sol[n:]
    return out


def check_marginalized_identity(model: GpModel, train_xs, test_xs) -> dict:
    """Analytic identity behind the paired study: when only the affine
    kernel parameters are free, the marginalized model's predictive
    variance approaches the original model's hybrid bound; in the diffuse
    limit the two are equal. Returns both curves and their residual."""
    _, hcrb0 = bounds_at(model, np.asarray(train_xs, dtype=float), np.asarray(test_xs, dtype=float))
    marg = diffuse_linear_variance(model, train_xs, test_xs)
    resid = np.max(np.abs(hcrb0 - marg) / (1.0 + np.abs(hcrb0)))
    return {"hcrb": hcrb0, "marginalized_var": marg, "max_rel_residual": float(resid)}


@dataclass(frozen=True)
class Co2Result:
    rows: list  # per validation month dicts
    coverage_bcrb: float
    coverage_hcrb: float
    train_coverage_bcrb: float
    fit: FitResult
    n_train: int
    n_valid: int

    def bands_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["x", "y", "fhat", "lo_bcrb", "hi_bcrb", "lo_hcrb", "hi_hcrb"]
        w.writerow(cols)
        for row in self.rows:
            w.writerow([f"{row[c]:.17g}" for c in cols])
        return buf.getvalue()

    def coverage_json(self) -> str:
        return json.dumps(
            {
                "coverage_bcrb": self.coverage_bcrb,
                "coverage_hcrb": self.coverage_hcrb,
                "train_coverage_bcrb": self.train_coverage_bcrb,
                "n_train": self.n_train,
                "n_valid": self.n_valid,
                "fit": self.fit.to_json(),
            },
            indent=2,
        )


def run_co2(
    records: list[Co2Record],
    train_range: tuple,
    valid_range: tuple,
    template: GpModel,
    fit_cfg: FitConfig,
    x_center: Optional[float] = None,
) -> Co2Result:
    """Fit on the training months, predict the validation months with
    +-3 sigma and +-3 sqrt(hcrb) bands, and report band coverage.

    Inputs are centered at ``x_center`` (training midpoint by default)
    before fitting so the affine mean is well-conditioned on calendar
    years; reported x values stay in decimal-date coordinates.
    """
    train = window(records, *train_range)
    valid = window(records, *valid_range)
    center = float(np.mean(train.xs)) if x_center is None else float(x_center)
    train_c = Dataset(xs=train.xs - center, ys=train.ys)
    fit = fit_ml(template.mean, template.kernel, train_c, template.theta, fit_cfg)
    model_hat = template.with_theta(fit.theta_hat)

    valid_xs_c = valid.xs - center
    items = hcrb(model_hat, train_c, valid_xs_c)
    rows = []
    in_bcrb = in_hcrb = 0
    for i, it in enumerate(items):
        y = valid.ys[i]
        half_b = 3.0 * np.sqrt(it.bcrb)
        half_h = 3.0 * np.sqrt(it.hcrb)
        if abs(y - it.fhat) <= half_b:
            in_bcrb += 1
        if abs(y - it.fhat) <= half_h:
            in_hcrb += 1
        rows.append(
            {
                "x": float(valid.xs[i, 0]),
                "y": float(y),
                "fhat": it.fhat,
                "lo_bcrb": it.fhat - half_b,
                "hi_bcrb": it.fhat + half_b,
                "lo_hcrb": it.fhat - half_h,
                "hi_hcrb": it.fhat + half_h,
            }
        )
    pred_train = predict(model_hat, train_c, train_c.xs)
    resid = np.abs(train.ys - pred_train.fhat)
    train_cov = float(np.mean(resid <= 3.0 * np.sqrt(pred_train.var)))
    return Co2Result(
        rows=rows,
        coverage_bcrb=in_bcrb / len(items),
        coverage_hcrb=in_hcrb / len(items),
        train_coverage_bcrb=train_cov,
        fit=fit,
        n_train=train.n,
        n_valid=valid.n,
    )


def summary_json(curves, cfg: McExperimentConfig, wall_time: float) -> str:
    """Run summary emitted next to curves.csv."""
    return json.dumps(
        {
            "n_mc": cfg.n_mc,
            "n_effective": curves.n_effective,
            "n_dropped": curves.n_dropped,
            "variant": cfg.variant,
            "seed": cfg.seed,
            "fit": dataclasses.asdict(cfg.fit)
            | {
                "fixed_mask": (
                    None
                    if cfg.fit.fixed_mask is None
                    else [bool(b) for b in cfg.fit.fixed_mask]
                )
            },
            "wall_time_s": wall_time,
        },
        indent=2,
    )
