import numpy as np


def numeric_grad(f, x: np.ndarray, eps: float = 1e-6, indices=None) -> np.ndarray:
    """Central differences of the scalar f() w.r.t. x, perturbed in place."""
    grad = np.zeros_like(x)
    positions = indices if indices is not None else list(np.ndindex(*x.shape))
    for idx in positions:
        old = x[idx]
        x[idx] = old + eps
        plus = f()
        x[idx] = old - eps
        minus = f()
        x[idx] = old
        grad[idx] = (plus - minus) / (2 * eps)
    return grad


def sample_indices(shape, count: int, rng: np.random.Generator):
    flat = rng.choice(int(np.prod(shape)), size=min(count, int(np.prod(shape))), replace=False)
    return [np.unravel_index(i, shape) for i in flat]


def assert_close(analytic: np.ndarray, numeric: np.ndarray, indices=None) -> None:
    if indices is not None:
        analytic = np.array([analytic[i] for i in indices])
        numeric = np.array([numeric[i] for i in indices])
    np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-7)
