"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .graph import MixedGraph, parse_graph, read_graph
from .numerics import NumericsError

GraphLike = Union[MixedGraph, str, Path]


def check_graph(graph: GraphLike) -> MixedGraph:
    """Accept a MixedGraph, a path to a graph file or graph text."""
    if isinstance(graph, MixedGraph):
        return graph
    if isinstance(graph, Path) or (isinstance(graph, str) and "\n" not in graph and Path(graph).exists()):
        return read_graph(graph)
    if isinstance(graph, str):
        return parse_graph(graph)
    raise TypeError(f"cannot interpret {type(graph).__name__} as a mixed graph")


def check_covariance(S: ArrayLike, n: Optional[int] = None, rtol: float = 1e-10) -> NDArray:
    """Square, finite, symmetric to ``rtol`` and positive definite; returns
    the symmetrized float array."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NumericsError(f"covariance must be square, got shape {S.shape}")
    if n is not None and S.shape[0] != n:
        raise NumericsError(f"covariance has {S.shape[0]} rows but the graph has {n} nodes")
    if not np.all(np.isfinite(S)):
        raise NumericsError("covariance has non-finite entries")
    scale = max(1.0, float(np.abs(S).max()))
    if np.abs(S - S.T).max() > rtol * scale:
        raise NumericsError("covariance is not symmetric")
    S = (S + S.T) / 2
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise NumericsError("covariance is not positive definite") from None
    return S


def check_data(X: ArrayLike, n: int) -> NDArray:
    """Sample matrix with one column per node and at least two rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != n:
        raise NumericsError(f"data must have shape (samples, {n}), got {X.shape}")
    if X.shape[0] < 2:
        raise NumericsError("need at least two samples")
    return X
