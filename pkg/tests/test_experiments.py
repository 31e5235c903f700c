import json
from pathlib import Path

import numpy as np
import pytest

from gphcrb import GpModel, Hyperparameters, KernelSpec, MeanSpec, experiments
from gphcrb.errors import AllStartsFailed, ConfigError
from gphcrb.experiments import (
    McExperimentConfig,
    check_marginalized_identity,
    run_marginalized_comparison,
    run_mc,
)
from gphcrb.learning import FitConfig

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def small_cfg(**overrides):
    truth = GpModel(
        MeanSpec("constant", [20.0]),
        KernelSpec("se", [2.0, 0.8]),
        Hyperparameters([20.0], [2.0, 0.8], 4.0),
    )
    base = dict(
        truth=truth,
        train_xs=np.linspace(-4, 4, 8),
        test_xs=np.linspace(-6, 6, 5),
        n_mc=4,
        fit=FitConfig(n_starts=1, max_iters=60, seed=0),
        seed=11,
    )
    base.update(overrides)
    return McExperimentConfig(**base)


class TestRunMc:
    def test_smoke_single_replicate(self):
        curves = run_mc(small_cfg(n_mc=1))
        text = curves.to_csv()
        header = text.splitlines()[0]
        assert header == "x,empirical_mse,mc_se,bcrb_truth,hcrb_truth,bcrb_fit_mean,hcrb_fit_mean"
        assert len(text.splitlines()) == 6
        assert curves.n_effective == 1
        assert np.all(curves.mc_se == 0.0)

    def test_determinism_same_seed(self, monkeypatch):
        monkeypatch.setenv(experiments.THREADS_ENV, "1")
        a = run_mc(small_cfg())
        b = run_mc(small_cfg())
        assert a.to_csv() == b.to_csv()

    def test_serial_and_parallel_agree(self, monkeypatch):
        monkeypatch.setenv(experiments.THREADS_ENV, "1")
        serial = run_mc(small_cfg())
        monkeypatch.setenv(experiments.THREADS_ENV, "2")
        parallel = run_mc(small_cfg())
        assert serial.to_csv() == parallel.to_csv()

    def test_bound_ordering_and_finiteness(self):
        curves = run_mc(small_cfg())
        assert np.all(curves.hcrb_truth >= curves.bcrb_truth)
        for field in ("empirical_mse", "mc_se", "bcrb_fit_mean", "hcrb_fit_mean"):
            assert np.all(np.isfinite(getattr(curves, field)))
        assert np.all(curves.empirical_mse >= 0)

    def test_noiseless_degenerate_limit(self, monkeypatch):
        monkeypatch.setenv(experiments.THREADS_ENV, "1")
        truth = GpModel(
            MeanSpec("constant", [5.0]),
            KernelSpec("se", [1e-6, 1.0]),
            Hyperparameters([5.0], [1e-6, 1.0], 1e-12),
        )
        xs = np.linspace(-2, 2, 6)
        cfg = McExperimentConfig(
            truth=truth,
            train_xs=xs,
            test_xs=xs,  # evaluate at the training points
            n_mc=3,
            fit=FitConfig(fixed_mask=[True, True, True, True]),
            seed=0,
            variant="fixed_subset",
        )
        curves = run_mc(cfg)
        assert np.all(curves.empirical_mse <= 1e-8)

    def test_dropped_replicates_are_counted(self, monkeypatch):
        monkeypatch.setenv(experiments.THREADS_ENV, "1")
        calls = {"n": 0}
        real_fit = experiments.fit_ml

        def flaky(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] % 2 == 0:
                raise AllStartsFailed("injected")
            return real_fit(*args, **kwargs)

        monkeypatch.setattr(experiments, "fit_ml", flaky)
        curves = run_mc(small_cfg(n_mc=6))
        assert curves.n_dropped == 3
        assert curves.n_effective == 3

    def test_variant_validation(self):
        with pytest.raises(ConfigError):
            small_cfg(variant="bogus")
        with pytest.raises(ConfigError):
            small_cfg(variant="fixed_subset")  # mask missing
        with pytest.raises(ConfigError):
            small_cfg(n_mc=0)


class TestMarginalized:
    def load_cfg(self, n_mc=2):
        obj = json.loads((CONFIG_DIR / "marginalized_comparison.json").read_text())
        obj["n_mc"] = n_mc
        for key in ("fit", "marginalized_fit"):
            obj[key]["n_starts"] = 1
        return McExperimentConfig.from_json(obj)

    def test_fixed_subset_identity_analytic(self):
        cfg = self.load_cfg()
        chk = check_marginalized_identity(cfg.truth, cfg.train_xs, cfg.test_xs)
        assert chk["max_rel_residual"] <= 1e-8
        assert np.all(chk["hcrb"] >= 0)

    def test_both_learned_produces_four_finite_curves(self, monkeypatch):
        monkeypatch.setenv(experiments.THREADS_ENV, "1")
        cfg = self.load_cfg()
        curves = run_marginalized_comparison(cfg)
        for field in (
            "mse_original",
            "mse_marginalized",
            "hcrb_original_fit_mean",
            "predvar_marginalized_fit_mean",
        ):
            vals = getattr(curves, field)
            assert vals.shape == cfg.test_xs.shape
            assert np.all(np.isfinite(vals))
        assert curves.n_effective == 2

    def test_requires_marginalized_model(self):
        with pytest.raises(ConfigError):
            run_marginalized_comparison(small_cfg())


class TestConfigParsing:
    def test_design_is_deterministic(self):
        a = experiments.draw_design({"n": 5, "low": -1, "high": 1, "seed": 3})
        b = experiments.draw_design({"n": 5, "low": -1, "high": 1, "seed": 3})
        assert np.array_equal(a, b)
        assert np.all(np.diff(a) >= 0)

    def test_grid_forms(self):
        assert np.allclose(experiments.make_grid({"from": 0, "to": 1, "n": 3}), [0, 0.5, 1])
        assert np.array_equal(experiments.make_grid([1.0, 2.0]), [1.0, 2.0])

    def test_shipped_configs_parse(self):
        for name in (
            "fig4_constant_mean.json",
            "fig5_linear_mean.json",
            "fig6_sinusoid_mean.json",
            "marginalized_comparison.json",
        ):
            cfg = McExperimentConfig.from_json(json.loads((CONFIG_DIR / name).read_text()))
            assert cfg.train_xs.size == 25
            assert cfg.test_xs.size == 17
