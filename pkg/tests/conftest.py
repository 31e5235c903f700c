import numpy as np
import pytest

from gphcrb import GpModel, Hyperparameters, KernelSpec, MeanSpec, kernels

MEAN_KINDS = ("constant", "linear", "affine", "sinusoid")
KERNEL_KINDS = ("se", "periodic", "rq", "affine", "sum")


@pytest.fixture(scope="session", autouse=True)
def _warm_backend():
    # Compile the jitted kernels once so timed tests measure math, not JIT.
    kernels.warmup()


def random_mean(kind: str, rng: np.random.Generator) -> MeanSpec:
    if kind == "constant":
        return MeanSpec("constant", [rng.normal(0, 3)])
    if kind == "linear":
        return MeanSpec("linear", [rng.normal(0, 2)])
    if kind == "affine":
        return MeanSpec("affine", rng.normal(0, 2, 2))
    return MeanSpec(
        "sinusoid",
        [rng.uniform(0.5, 3), rng.uniform(0.5, 3), rng.uniform(0, np.pi)],
    )


def random_kernel(kind: str, rng: np.random.Generator) -> KernelSpec:
    if kind == "se":
        return KernelSpec("se", [rng.uniform(0.5, 2.5), rng.uniform(0.4, 1.5)])
    if kind == "periodic":
        return KernelSpec(
            "periodic",
            [
                rng.uniform(0.5, 2),
                rng.uniform(0.5, 2),
                rng.uniform(0.5, 2),
                rng.uniform(1, 5),
            ],
        )
    if kind == "rq":
        return KernelSpec("rq", [rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 3)])
    if kind == "affine":
        return KernelSpec("affine", [rng.uniform(0.1, 2), rng.uniform(0.1, 2)])
    return KernelSpec(
        "sum",
        children=(random_kernel("se", rng), random_kernel("affine", rng)),
    )


def random_instance(rng: np.random.Generator, mean_kind=None, kernel_kind=None, n=None):
    """A random model plus data, for identity/property tests.

    Redraws designs whose mean Jacobian is ill-conditioned (e.g. three
    sinusoid parameters against two observations), since the bounds are
    undefined there by contract; singular designs get their own tests.
    """
    from gphcrb.means import mean_eval

    mean_kind = mean_kind or rng.choice(MEAN_KINDS)
    kernel_kind = kernel_kind or rng.choice(KERNEL_KINDS)
    kernel = random_kernel(kernel_kind, rng)
    while True:
        mean = random_mean(mean_kind, rng)
        p = mean.n_params
        size = n or int(rng.integers(max(2, p + 1), 9))
        xs = np.sort(rng.uniform(-3, 3, size))
        jac = mean_eval(mean, xs).jac
        if p == 0 or np.linalg.cond(jac.T @ jac) < 1e6:
            break
    theta = Hyperparameters(mean.alpha, kernel.beta, rng.uniform(0.1, 2))
    model = GpModel(mean, kernel, theta)
    ys = rng.normal(0, 2, size)
    xstar = rng.uniform(-4, 4)
    return model, xs, ys, xstar
