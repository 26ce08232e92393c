"""Zero-mean Gaussian process regression on standardized data.

The kernel tree plays the role of a correlation function ``R``; the overall
process variance ``sigma2`` is profiled out of the likelihood in closed form,

    sigma2_hat = y' R^-1 y / n
    lml        = -n/2 log(2 pi sigma2_hat) - 1/2 log det R - n/2,

where ``R = K + (nugget + jitter) I``. The nugget is the noise variance
relative to the process variance, ``eta2 = nugget * sigma2``. All quantities
here are in standardized units unless a name says otherwise.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg, optimize

from .algebra import KernelExpr, gather, kernel_diag, kernel_matrix, scatter
from .data import Dataset, Standardization
from .expr import format_kernel, parse_kernel

log = logging.getLogger(__name__)

JITTER_LADDER = (1e-10, 1e-8, 1e-6, 1e-4)
DEFAULT_JITTER = 1e-10
NOISE_BOUNDS = (1e-12, 1.0)
NOISE_INIT = 1e-2
MODEL_VERSION = "kernelgp-model/1"
Z95 = 1.96


class ConditioningError(np.linalg.LinAlgError):
    """The covariance matrix could not be factorized."""

    def __init__(self, message, ladder=()):
        self.ladder = tuple(ladder)
        super().__init__(message)


class FitError(RuntimeError):
    """No optimizer restart produced a finite likelihood."""

    def __init__(self, message, diagnostics=()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)


class ModelFormatError(ValueError):
    """A serialized model is unreadable or has an unsupported version."""


def gram(tree: KernelExpr, X) -> np.ndarray:
    """Symmetric Gram matrix of ``tree`` over the rows of X."""
    K = kernel_matrix(tree, X)[0]
    if not np.all(np.isfinite(K)):
        i, j = np.argwhere(~np.isfinite(K))[0]
        raise FloatingPointError(f"non-finite kernel value at ({i}, {j})")
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


def _ladder(jitter):
    return (jitter,) + tuple(j for j in JITTER_LADDER if j > jitter)


def factorize(R, jitter=DEFAULT_JITTER):
    """Lower Cholesky factor of ``R + jitter I``, escalating jitter on failure.

    Returns ``(L, jitter_used)``.
    """
    eye = np.eye(R.shape[0])
    ladder = _ladder(jitter)
    for j in ladder:
        try:
            L = linalg.cholesky(R + j * eye, lower=True, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            continue
        if np.all(np.isfinite(L)):
            return L, j
    raise ConditioningError(
        f"covariance matrix not positive definite with jitter in {list(ladder)}", ladder
    )


@dataclass
class _Profile:
    lml: float
    sigma2: float
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    grad: np.ndarray | None = None
    grad_nugget: float | None = None


def _profile(tree, Xs, ys, nugget, jitter, grad=False) -> _Profile:
    n = ys.shape[0]
    K, G = kernel_matrix(tree, Xs, grad=grad)
    if not np.all(np.isfinite(K)):
        raise ConditioningError("non-finite kernel values")
    K = np.triu(K) + np.triu(K, 1).T
    L, used = factorize(K + nugget * np.eye(n), jitter)
    alpha = linalg.cho_solve((L, True), ys, check_finite=False)
    sigma2 = float(ys @ alpha) / n
    if not (math.isfinite(sigma2) and sigma2 > 0):
        raise ConditioningError(f"degenerate process variance {sigma2}")
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    lml = float(-0.5 * n * math.log(2 * math.pi * sigma2) - 0.5 * logdet - 0.5 * n)
    prof = _Profile(lml, sigma2, L, alpha, used)
    if grad:
        R_inv = linalg.cho_solve((L, True), np.eye(n), check_finite=False)
        quad = np.einsum("i,pij,j->p", alpha, G, alpha)
        trace = np.einsum("ij,pij->p", R_inv, G)
        prof.grad = 0.5 * quad / sigma2 - 0.5 * trace
        prof.grad_nugget = 0.5 * float(alpha @ alpha) / sigma2 - 0.5 * float(np.trace(R_inv))
    return prof


def log_marginal_likelihood(tree, dataset: Dataset, nugget=0.0, jitter=DEFAULT_JITTER):
    """Concentrated log marginal likelihood of the standardized data.

    Returns
    -------
    lml : float
    sigma2 : float
        Profiled process variance.
    """
    prof = _profile(tree, dataset.Xs, dataset.ys, nugget, jitter)
    return prof.lml, prof.sigma2


def lml_gradient(tree, dataset: Dataset, nugget=0.0, jitter=DEFAULT_JITTER, wrt_nugget=False):
    """Gradient of the concentrated lml in the optimizer's coordinates.

    Coordinates follow ``gather(tree)``: ``log(value)`` for positive
    parameters, the raw value for power-exponential exponents. With
    ``wrt_nugget`` the derivative with respect to ``log(nugget)`` is appended.
    """
    layout = gather(tree)
    prof = _profile(tree, dataset.Xs, dataset.ys, nugget, jitter, grad=True)
    g = prof.grad * np.where(layout.log_scale, layout.values, 1.0)
    if wrt_nugget:
        g = np.append(g, nugget * prof.grad_nugget)
    return g


@dataclass
class FitOptions:
    """Settings for :func:`fit`.

    ``noise`` is the nugget (noise variance over process variance). With
    ``optimize_noise`` it becomes one more optimized coordinate, searched in
    log space within ``noise_bounds`` and started from ``noise`` if positive.
    """

    noise: float = 0.0
    optimize_noise: bool = False
    noise_bounds: tuple = NOISE_BOUNDS
    restarts: int = 10
    seed: int = 0
    bounds: dict | None = None
    jitter: float = DEFAULT_JITTER
    maxiter: int = 1000


@dataclass
class FittedGP:
    """A GP conditioned on its training data, ready for prediction."""

    tree: KernelExpr
    dataset: Dataset
    sigma2: float
    nugget: float
    jitter: float
    chol: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    lml: float
    seed: int | None = None

    @property
    def eta2(self) -> float:
        """Noise variance in standardized units."""
        return self.nugget * self.sigma2

    @property
    def process_variance(self) -> float:
        """``sigma2`` in original (squared) units of y."""
        return self.sigma2 * self.dataset.standardization.y_scale**2

    @property
    def noise_variance(self) -> float:
        return self.eta2 * self.dataset.standardization.y_scale**2

    @property
    def kernel(self) -> str:
        return format_kernel(self.tree)

    def predict(self, X, include_noise=False) -> "Prediction":
        return predict(self, X, include_noise)

    def correlation_matrix(self) -> np.ndarray:
        """``R_n`` as factorized, jitter included."""
        return self.chol @ self.chol.T


def condition(
    tree, dataset: Dataset, nugget=0.0, jitter=DEFAULT_JITTER, sigma2=None, seed=None
) -> FittedGP:
    """Condition ``tree`` on ``dataset`` with fixed hyperparameters.

    ``sigma2`` defaults to its profiled maximum-likelihood value.
    """
    if tree.dim != dataset.dim:
        raise ValueError(f"kernel dimension {tree.dim} != data dimension {dataset.dim}")
    prof = _profile(tree, dataset.Xs, dataset.ys, nugget, jitter)
    return FittedGP(
        tree=tree,
        dataset=dataset,
        sigma2=prof.sigma2 if sigma2 is None else float(sigma2),
        nugget=float(nugget),
        jitter=prof.jitter,
        chol=prof.chol,
        weights=prof.alpha,
        lml=prof.lml,
        seed=seed,
    )


def fit(tree: KernelExpr, dataset: Dataset, options: FitOptions | None = None, **kwargs) -> FittedGP:
    """Maximize the concentrated lml over the kernel hyperparameters.

    Runs L-BFGS-B with the analytic gradient from ``options.restarts`` start
    points: the tree's own values (clipped into bounds) first, then points
    drawn uniformly in the optimizer's coordinates from a generator seeded
    with ``options.seed``. The best local optimum is returned.

    Keyword arguments override fields of ``options``.
    """
    options = options or FitOptions()
    if kwargs:
        options = FitOptions(**{**options.__dict__, **kwargs})
    if options.restarts < 1:
        raise ValueError("restarts must be >= 1")
    if tree.dim != dataset.dim:
        raise ValueError(f"kernel dimension {tree.dim} != data dimension {dataset.dim}")

    layout = gather(tree, options.bounds)
    lo, hi = layout.unconstrained_bounds()
    z_init = np.clip(layout.to_unconstrained(), lo, hi)
    n_tree = len(layout)
    if options.optimize_noise:
        nlo, nhi = np.log(options.noise_bounds)
        start = options.noise if options.noise > 0 else NOISE_INIT
        lo, hi = np.append(lo, nlo), np.append(hi, nhi)
        z_init = np.append(z_init, np.clip(np.log(start), nlo, nhi))
    Xs, ys = dataset.Xs, dataset.ys

    def unpack(z):
        values = layout.from_unconstrained(z[:n_tree])
        nugget = math.exp(z[n_tree]) if options.optimize_noise else options.noise
        return scatter(tree, values), values, nugget

    def objective(z):
        t, values, nugget = unpack(z)
        try:
            prof = _profile(t, Xs, ys, nugget, options.jitter, grad=True)
        except ConditioningError:
            return 1e25, np.zeros_like(z)
        g = prof.grad * np.where(layout.log_scale, values, 1.0)
        if options.optimize_noise:
            g = np.append(g, nugget * prof.grad_nugget)
        return -prof.lml, -g

    rng = np.random.default_rng(options.seed)
    starts = [z_init] + [rng.uniform(lo, hi) for _ in range(options.restarts - 1)]
    candidates = []
    diagnostics = []
    f_init, _ = objective(z_init)
    if f_init < 1e25:
        candidates.append((-f_init, z_init))
    for k, z0 in enumerate(starts):
        try:
            res = optimize.minimize(
                objective,
                z0,
                jac=True,
                method="L-BFGS-B",
                bounds=list(zip(lo, hi)),
                options={"maxiter": options.maxiter},
            )
        except (ValueError, FloatingPointError) as exc:
            diagnostics.append(f"restart {k}: {exc}")
            continue
        if not np.isfinite(res.fun) or res.fun >= 1e25:
            diagnostics.append(f"restart {k}: no finite likelihood ({res.message})")
            continue
        diagnostics.append(f"restart {k}: lml={-res.fun:.6g} after {res.nit} iterations")
        candidates.append((-float(res.fun), np.clip(res.x, lo, hi)))
    for line in diagnostics:
        log.debug(line)
    if not candidates:
        raise FitError("all optimizer restarts failed", diagnostics)

    best = max(range(len(candidates)), key=lambda i: candidates[i][0])
    best_tree, _, nugget = unpack(candidates[best][1])
    return condition(best_tree, dataset, nugget, options.jitter, seed=options.seed)


@dataclass
class Prediction:
    """Posterior mean and variance in original units, with 95% bands."""

    mean: np.ndarray
    variance: np.ndarray

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)

    @property
    def lower95(self) -> np.ndarray:
        return self.mean - Z95 * self.std

    @property
    def upper95(self) -> np.ndarray:
        return self.mean + Z95 * self.std


def _query(model, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if model.dataset.dim == 1 else X[None, :]
    if X.ndim != 2 or X.shape[1] != model.dataset.dim:
        raise ValueError(f"query points must have {model.dataset.dim} columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("query points must be finite")
    return X


def predict(model: FittedGP, X, include_noise=False) -> Prediction:
    """Posterior of the latent function at the rows of X.

    With ``include_noise`` the noise variance is added, giving the predictive
    distribution of a new observation.
    """
    X = _query(model, X)
    st = model.dataset.standardization
    Xq = st.x(X)
    Kq = kernel_matrix(model.tree, model.dataset.Xs, Xq)[0]
    mean_s = Kq.T @ model.weights
    v = linalg.solve_triangular(model.chol, Kq, lower=True, check_finite=False)
    var_s = model.sigma2 * (kernel_diag(model.tree, Xq) - np.sum(v * v, axis=0))
    if include_noise:
        var_s = var_s + model.eta2
    var_s = np.maximum(var_s, 0.0)
    return Prediction(st.y_inverse(mean_s), var_s * st.y_scale**2)


def regression_metrics(y, pred: Prediction) -> dict:
    """RMSE, mean absolute error and 95%-band coverage of ``pred`` against ``y``."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("empty test set")
    err = pred.mean - y
    inside = (y >= pred.lower95) & (y <= pred.upper95)
    return {
        "rmse": float(np.sqrt(np.mean(err**2))),
        "mae": float(np.mean(np.abs(err))),
        "coverage95": float(np.mean(inside)),
    }


# -- serialization -----------------------------------------------------------


def model_to_dict(model: FittedGP) -> dict:
    return {
        "version": MODEL_VERSION,
        "kernel": format_kernel(model.tree),
        "dim": model.dataset.dim,
        "sigma2": model.sigma2,
        "eta2": model.eta2,
        "nugget": model.nugget,
        "jitter": model.jitter,
        "standardization": model.dataset.standardization.to_dict(),
        "X": model.dataset.X.tolist(),
        "y": model.dataset.y.tolist(),
        "lml": model.lml,
        "seed": model.seed,
    }


def model_from_dict(d: dict) -> FittedGP:
    if not isinstance(d, dict) or d.get("version") != MODEL_VERSION:
        found = d.get("version") if isinstance(d, dict) else None
        raise ModelFormatError(f"unsupported model version {found!r}, expected {MODEL_VERSION!r}")
    try:
        tree = parse_kernel(d["kernel"], int(d["dim"]))
        st = Standardization.from_dict(d["standardization"])
        dataset = Dataset(np.array(d["X"], dtype=float), np.array(d["y"], dtype=float), st)
        model = condition(tree, dataset, float(d["nugget"]), float(d["jitter"]), float(d["sigma2"]), d.get("seed"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid model document: {exc}") from exc
    model.lml = float(d["lml"])
    return model


def save_model(model: FittedGP, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_model(path) -> FittedGP:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ModelFormatError(f"cannot read model {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model {path} is not valid JSON: {exc}") from None
    return model_from_dict(doc)
