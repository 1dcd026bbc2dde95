"""Estimators of the observed block of the combination matrix."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from netinfer.errors import IllConditionedError, ParameterError
from netinfer.moments import SampleMoments

MAX_CONDITION = 1e12


class EstimatorKind(str, enum.Enum):
    UNBIASED_CUMULATIVE = "proposed"
    UNBIASED_INSTANT = "instant"
    GRANGER = "granger"
    ONE_LAG = "one_lag"
    RESIDUAL = "residual"


@dataclass(frozen=True)
class TopologyEstimate:
    kind: EstimatorKind
    n: int
    matrix: np.ndarray
    mu: float | None = None

    @property
    def s_size(self) -> int:
        return self.matrix.shape[0]


def _check_mu(mu: float) -> None:
    if not 0.0 < mu < 1.0:
        raise ParameterError(f"mu must lie in (0, 1), got {mu}")


def unbiased_instant(y_prev, y_t, y_next, y_next2, mu: float, t: int = 1) -> TopologyEstimate:
    """Single-time estimate ``(y_{t+1} y_t^T - y_{t+2} y_{t-1}^T) / mu^2``."""
    _check_mu(mu)
    vecs = [np.asarray(v, dtype=np.float64) for v in (y_prev, y_t, y_next, y_next2)]
    if any(v.ndim != 1 for v in vecs) or len({v.size for v in vecs}) != 1:
        raise ParameterError("unbiased_instant needs four 1-D vectors of equal length")
    y_prev, y_t, y_next, y_next2 = vecs
    E = (np.outer(y_next, y_t) - np.outer(y_next2, y_prev)) / mu**2
    return TopologyEstimate(EstimatorKind.UNBIASED_INSTANT, t, E, mu)


def unbiased_cumulative(moments: SampleMoments, mu: float) -> TopologyEstimate:
    """The proposed estimator ``(R1_hat - R3_hat) / mu^2``; unbiased for A_S at any n."""
    _check_mu(mu)
    E = (moments.r1 - moments.r3) / mu**2
    return TopologyEstimate(EstimatorKind.UNBIASED_CUMULATIVE, moments.n, E, mu)


def granger(moments: SampleMoments) -> TopologyEstimate:
    """``R1_hat R0_hat^{-1}``, solved through a Cholesky factorization of R0_hat.

    Raises :class:`IllConditionedError` rather than regularizing when R0_hat is
    singular or its condition number exceeds ``MAX_CONDITION``.
    """
    r0, r1 = moments.r0, moments.r1
    cond = float(np.linalg.cond(r0)) if r0.size else np.inf
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError("R0_hat is numerically singular", cond)
    try:
        factor = scipy.linalg.cho_factor(r0)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError("R0_hat is not positive definite", cond) from exc
    # X R0 = R1  <=>  R0 X^T = R1^T  (R0 symmetric)
    X = scipy.linalg.cho_solve(factor, r1.T).T
    return TopologyEstimate(EstimatorKind.GRANGER, moments.n, X)


def one_lag(moments: SampleMoments) -> TopologyEstimate:
    return TopologyEstimate(EstimatorKind.ONE_LAG, moments.n, moments.r1.copy())


def residual(moments: SampleMoments) -> TopologyEstimate:
    return TopologyEstimate(EstimatorKind.RESIDUAL, moments.n, moments.r1 - moments.r0)


def estimate(kind, moments: SampleMoments, mu: float) -> TopologyEstimate:
    """Dispatch on ``kind`` for the moment-based estimators."""
    kind = EstimatorKind(kind)
    if kind is EstimatorKind.UNBIASED_CUMULATIVE:
        return unbiased_cumulative(moments, mu)
    if kind is EstimatorKind.GRANGER:
        return granger(moments)
    if kind is EstimatorKind.ONE_LAG:
        return one_lag(moments)
    if kind is EstimatorKind.RESIDUAL:
        return residual(moments)
    raise ParameterError(f"{kind.value} is not computed from accumulated moments")
