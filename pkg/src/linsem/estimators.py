"""Estimator-style wrappers: fit on a covariance matrix or on data, then
read fitted attributes or transform new inputs."""

from __future__ import annotations

from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import GraphLike, check_covariance, check_data, check_graph
from .algebra import sigma_assignment
from .constraints import all_constraints
from .decomposition import mixed_components, tian_tau_all, tian_tau_inverse
from .identifiability import identify, recover_parameters


def _to_covariance(X: ArrayLike, n: int, input: str) -> NDArray:
    if input == "covariance":
        return check_covariance(X, n)
    if input == "data":
        return check_covariance(np.cov(check_data(X, n), rowvar=False), n)
    raise ValueError(f"input must be 'covariance' or 'data', got {input!r}")


class LinearSEM(BaseEstimator):
    """Identify the model of ``graph`` and recover (Lambda, Omega) from a
    covariance matrix.

    Fitted attributes: ``status_``, ``lambda_``, ``omega_``, ``residual_``.
    Recovery uses the half-trek certificate of the graph, or the node-wise
    route through ancestral subgraphs and mixed components.
    """

    def __init__(self, graph: GraphLike = None, input: str = "covariance"):
        self.graph = graph
        self.input = input

    def fit(self, X: ArrayLike, y=None):
        G = check_graph(self.graph)
        S = _to_covariance(X, G.n, self.input)
        self.graph_ = G
        self.report_ = identify(G)
        self.status_ = self.report_.status
        rec = recover_parameters(G, S)
        self.lambda_ = rec.lam
        self.omega_ = rec.omega
        self.residual_ = rec.residual
        return self

    def covariance(self) -> NDArray:
        check_is_fitted(self, "lambda_")
        n = self.lambda_.shape[0]
        Inv = np.linalg.inv(np.eye(n) - self.lambda_)
        return Inv.T @ self.omega_ @ Inv


class TianDecomposer(TransformerMixin, BaseEstimator):
    """Map a covariance matrix to the covariance matrices of the mixed
    components and back."""

    def __init__(self, graph: GraphLike = None, input: str = "covariance"):
        self.graph = graph
        self.input = input

    def fit(self, X: Optional[ArrayLike] = None, y=None):
        self.graph_ = check_graph(self.graph)
        self.decomposition_ = mixed_components(self.graph_)
        self.blocks_ = [self.graph_.label_list(b) for b in self.decomposition_.blocks]
        return self

    def transform(self, X: ArrayLike) -> list[NDArray]:
        check_is_fitted(self, "decomposition_")
        S = _to_covariance(X, self.graph_.n, self.input)
        return tian_tau_all(self.graph_, S, self.decomposition_)

    def inverse_transform(self, taus: list[NDArray]) -> NDArray:
        check_is_fitted(self, "decomposition_")
        return tian_tau_inverse(self.graph_, taus, self.decomposition_)


class ConstraintTester(TransformerMixin, BaseEstimator):
    """Discover model constraints at ``fit`` and evaluate them at ``transform``.

    ``transform`` returns, per constraint, the polynomial value divided by
    the sum of absolute term values, so entries near zero indicate the
    constraint holds.
    """

    def __init__(self, graph: GraphLike = None, max_cond: Optional[int] = None, max_minor_size: int = 2,
                 max_depth: int = 2, input: str = "covariance", seed: int = 0):
        self.graph = graph
        self.max_cond = max_cond
        self.max_minor_size = max_minor_size
        self.max_depth = max_depth
        self.input = input
        self.seed = seed

    def fit(self, X: Optional[ArrayLike] = None, y=None):
        self.graph_ = check_graph(self.graph)
        self.constraints_ = all_constraints(self.graph_, self.max_cond, self.max_minor_size,
                                            self.max_depth, self.seed)
        return self

    def transform(self, X: ArrayLike) -> NDArray:
        check_is_fitted(self, "constraints_")
        S = _to_covariance(X, self.graph_.n, self.input)
        a = sigma_assignment(S.tolist())
        out = np.empty(len(self.constraints_))
        for k, c in enumerate(self.constraints_):
            scale = c.poly.abs_term_sum(a)
            out[k] = c.poly.eval_float(a) / scale if scale > 0 else 0.0
        return out


__all__ = ["LinearSEM", "TianDecomposer", "ConstraintTester"]
