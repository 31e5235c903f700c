"""Regenerate the bundled check-identity fixtures under tests/fixtures/.

Twenty random model+dataset pairs spanning every mean and kernel kind,
plus the N=1 closed-form bound fixture. Deterministic; run from the
repository root after changing model serialization.
"""

import json
import pathlib

import numpy as np

from gphcrb import Dataset, GpModel, Hyperparameters, KernelSpec, MeanSpec
from gphcrb.means import mean_eval

ROOT = pathlib.Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"

MEANS = ("constant", "linear", "affine", "sinusoid")
KERNELS = ("se", "periodic", "rq", "affine", "sum")


def rand_mean(kind, rng):
    alpha = {
        "constant": [rng.normal(0, 3)],
        "linear": [rng.normal(0, 2)],
        "affine": rng.normal(0, 2, 2).tolist(),
        "sinusoid": [rng.uniform(0.5, 3), rng.uniform(0.5, 3), rng.uniform(0, np.pi)],
    }[kind]
    return MeanSpec(kind, alpha)


def rand_kernel(kind, rng):
    if kind == "sum":
        return KernelSpec("sum", children=(rand_kernel("se", rng), rand_kernel("affine", rng)))
    beta = {
        "se": [rng.uniform(0.5, 2.5), rng.uniform(0.4, 1.5)],
        "periodic": [rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(1, 5)],
        "rq": [rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 3)],
        "affine": [rng.uniform(0.1, 2), rng.uniform(0.1, 2)],
    }[kind]
    return KernelSpec(kind, beta)


def identity_cases():
    rng = np.random.default_rng(424242)
    out = FIXTURES / "identity"
    for case in range(20):
        mean_kind = MEANS[case % len(MEANS)]
        kernel_kind = KERNELS[case % len(KERNELS)]
        kernel = rand_kernel(kernel_kind, rng)
        while True:
            mean = rand_mean(mean_kind, rng)
            n = int(rng.integers(mean.n_params + 1, 9))
            xs = np.sort(rng.uniform(-3, 3, n))
            jac = mean_eval(mean, xs).jac
            if np.linalg.cond(jac.T @ jac) < 1e6:
                break
        theta = Hyperparameters(mean.alpha, kernel.beta, rng.uniform(0.1, 2))
        model = GpModel(mean, kernel, theta)
        data = Dataset(xs=xs, ys=rng.normal(0, 2, n))
        case_dir = out / f"case{case:02d}"
        case_dir.mkdir(parents=True, exist_ok=True)
        (case_dir / "data.csv").write_text(data.to_csv())
        cfg = {
            "dataset": "data.csv",
            "model": model.to_json(),
            "test_xs": np.sort(rng.uniform(-4, 4, 3)).tolist(),
        }
        (case_dir / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")
    print(f"wrote 20 identity fixtures under {out}")


def bound_n1_case():
    out = FIXTURES / "bound_n1"
    out.mkdir(parents=True, exist_ok=True)
    model = GpModel(
        MeanSpec("constant", [20.0]),
        KernelSpec("se", [2.0, 1.0]),
        Hyperparameters([20.0], [2.0, 1.0], 4.0),
    )
    data = Dataset(xs=[0.0], ys=[26.0])
    (out / "data.csv").write_text(data.to_csv())
    cfg = {
        "dataset": "data.csv",
        "model": model.to_json(),
        # at sqrt(2 ln 2) the SE(2,1) cross-covariance is exactly 2,
        # giving fhat 21.5, bcrb 3.5, gap 4.5, hcrb 8
        "test_xs": [float(np.sqrt(2.0 * np.log(2.0)))],
    }
    (out / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")
    print(f"wrote N=1 bound fixture under {out}")


if __name__ == "__main__":
    identity_cases()
    bound_n1_case()
