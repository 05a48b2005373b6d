"""Temporal dependence structures for lifting marginals to joint paths.

A copula spec declares how the per-step uniforms of a sampled path
co-vary.  :func:`sample_copula` turns one into an (M, h) matrix of
uniforms with the requested dependence; every coordinate is marginally
uniform on (0, 1) whatever the dependence structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from fforms.core import TrajectoryEnsemble
from fforms.errors import InputError

_OPEN_EPS = 1e-15


@dataclass(frozen=True)
class Independence:
    """Coordinates are i.i.d. uniforms: no temporal dependence."""

    name = "independence"

    def describe(self) -> dict:
        return {"copula": self.name}


@dataclass(frozen=True)
class Comonotonic:
    """Perfect positive dependence: one uniform shared by all steps."""

    name = "comonotonic"

    def describe(self) -> dict:
        return {"copula": self.name}


@dataclass(frozen=True)
class Countermonotonic:
    """Perfect negative dependence, u2 = 1 - u1; exists only for h = 2."""

    name = "countermonotonic"

    def describe(self) -> dict:
        return {"copula": self.name}


@dataclass(frozen=True)
class GaussianAR1:
    """Gaussian copula with correlation rho^|i-j| between steps i and j."""

    rho: float

    name = "gaussian_ar1"

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise InputError(f"AR(1) correlation must lie in (-1, 1), got {self.rho}")

    def correlation(self, horizon: int) -> np.ndarray:
        lags = np.abs(np.subtract.outer(np.arange(horizon), np.arange(horizon)))
        return self.rho ** lags

    def describe(self) -> dict:
        return {"copula": self.name, "rho": self.rho}


class GaussianFull:
    """Gaussian copula with an explicit correlation matrix."""

    name = "gaussian_full"

    def __init__(self, correlation):
        self.R = _check_correlation(np.asarray(correlation, dtype=float))

    def describe(self) -> dict:
        return {"copula": self.name, "R": self.R.tolist()}


class StudentTCopula:
    """Student-t copula: Gaussian dependence plus joint tail dependence."""

    name = "student_t"

    def __init__(self, correlation, nu: float):
        self.R = _check_correlation(np.asarray(correlation, dtype=float))
        if not nu > 0.0:
            raise InputError(f"copula degrees of freedom must be > 0, got {nu}")
        self.nu = float(nu)

    def describe(self) -> dict:
        return {"copula": self.name, "R": self.R.tolist(), "nu": self.nu}


@dataclass(frozen=True)
class ECC:
    """Ensemble copula coupling: impose a reference ensemble's rank pattern.

    Variant "R" matches sampled rows to randomly ordered reference rows;
    variant "Q" matches them to reference rows sorted by their first-step
    value (deterministic rank template).
    """

    reference: TrajectoryEnsemble
    variant: str = "R"

    name = "ecc"

    def __post_init__(self):
        if self.variant not in ("Q", "R"):
            raise InputError(f"ECC variant must be 'Q' or 'R', got {self.variant!r}")

    def describe(self) -> dict:
        return {
            "copula": self.name,
            "variant": self.variant,
            "reference_paths": self.reference.n_paths,
        }


CopulaSpec = (
    Independence
    | Comonotonic
    | Countermonotonic
    | GaussianAR1
    | GaussianFull
    | StudentTCopula
    | ECC
)


def _check_correlation(R: np.ndarray) -> np.ndarray:
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise InputError("correlation matrix must be square")
    if not np.allclose(R, R.T, atol=1e-10):
        raise InputError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(R), 1.0, atol=1e-10):
        raise InputError("correlation matrix must have unit diagonal")
    smallest = float(np.linalg.eigvalsh(R)[0])
    if smallest <= 1e-10:
        raise InputError(
            f"correlation matrix must be positive definite (smallest eigenvalue {smallest:.3g})"
        )
    R = R.copy()
    R.flags.writeable = False
    return R


def sample_copula(spec: CopulaSpec, n_paths: int, horizon: int, seed: int) -> np.ndarray:
    """Draw ``n_paths`` dependence vectors of ``horizon`` uniforms.

    Deterministic given (spec, n_paths, horizon, seed).  Raises for
    specs that are invalid at this horizon (countermonotonic with
    h != 2, correlation matrices of the wrong size, reference ensembles
    with a different horizon).
    """
    if n_paths < 1:
        raise InputError("need at least one path")
    if horizon < 1:
        raise InputError("horizon must be >= 1")
    rng = np.random.default_rng(seed)

    if isinstance(spec, Independence):
        u = rng.random((n_paths, horizon))
    elif isinstance(spec, Comonotonic):
        u = np.tile(rng.random((n_paths, 1)), (1, horizon))
    elif isinstance(spec, Countermonotonic):
        if horizon != 2:
            raise InputError(
                "countermonotonic copula exists only for h = 2 "
                f"(requested h = {horizon})"
            )
        base = rng.random((n_paths, 1))
        u = np.hstack([base, 1.0 - base])
    elif isinstance(spec, GaussianAR1):
        u = _gaussian_uniforms(spec.correlation(horizon), n_paths, rng)
    elif isinstance(spec, GaussianFull):
        _require_size(spec.R, horizon)
        u = _gaussian_uniforms(spec.R, n_paths, rng)
    elif isinstance(spec, StudentTCopula):
        _require_size(spec.R, horizon)
        z = rng.standard_normal((n_paths, horizon)) @ np.linalg.cholesky(spec.R).T
        w = rng.chisquare(spec.nu, size=n_paths)
        t = z * np.sqrt(spec.nu / w)[:, None]
        u = stats.t.cdf(t, df=spec.nu)
    elif isinstance(spec, ECC):
        u = _ecc_uniforms(spec, n_paths, horizon, rng)
    else:
        raise InputError(f"unknown copula spec {spec!r}")

    return np.clip(u, _OPEN_EPS, 1.0 - _OPEN_EPS)


def _require_size(R: np.ndarray, horizon: int) -> None:
    if R.shape[0] != horizon:
        raise InputError(f"correlation matrix is {R.shape[0]}x{R.shape[0]}, horizon is {horizon}")


def _gaussian_uniforms(R: np.ndarray, n_paths: int, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(R)
    z = rng.standard_normal((n_paths, R.shape[0])) @ chol.T
    return stats.norm.cdf(z)


def _ecc_uniforms(spec: ECC, n_paths: int, horizon: int, rng: np.random.Generator) -> np.ndarray:
    ref = spec.reference
    if ref.meta.horizon != horizon:
        raise InputError(
            f"ECC reference horizon {ref.meta.horizon} does not match requested {horizon}"
        )
    ref_m = ref.n_paths
    if spec.variant == "R":
        if n_paths == ref_m:
            idx = rng.permutation(ref_m)
        elif n_paths < ref_m:
            idx = rng.choice(ref_m, size=n_paths, replace=False)
        else:
            idx = rng.choice(ref_m, size=n_paths, replace=True)
    else:  # "Q": deterministic template, evenly spaced through the
        # reference rows ordered by their first-step value
        order = np.argsort(ref.paths[:, 0], kind="stable")
        positions = np.minimum(
            ((np.arange(n_paths) + 0.5) * ref_m / n_paths).astype(int), ref_m - 1
        )
        idx = order[positions]
    template = ref.paths[idx]

    v = rng.random((n_paths, horizon))
    u = np.empty_like(v)
    for k in range(horizon):
        ranks = np.argsort(np.argsort(template[:, k], kind="stable"), kind="stable")
        u[:, k] = np.sort(v[:, k])[ranks]
    return u
