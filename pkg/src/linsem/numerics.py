"""Floating-point layer: parameter sampling, block-LDL factorization,
Newton multistart on the fiber equations, and matrix I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .graph import MixedGraph


class NumericsError(ValueError):
    """Numerical precondition failure (not PD, singular, malformed matrix)."""


@dataclass
class Tolerances:
    """Default numerical tolerances; every field can be overridden from the CLI."""

    newton_residual: float = 1e-10
    newton_max_iter: int = 100
    det_floor: float = 1e-8
    cluster_radius: float = 1e-5
    ldl_reconstruction: float = 1e-9
    spectral_radius: float = 0.9


DEFAULT_TOL = Tolerances()


@dataclass
class ParamPoint:
    """A pair (Lambda, Omega) supported on the directed and bidirected edges."""

    lam: NDArray[np.float64]
    omega: NDArray[np.float64]


def check_param_point(G: MixedGraph, p: ParamPoint, atol: float = 0.0) -> None:
    """Raise NumericsError unless ``p`` respects the supports of ``G``,
    ``Omega`` is positive definite and ``I - Lambda`` is invertible."""
    n = G.n
    if p.lam.shape != (n, n) or p.omega.shape != (n, n):
        raise NumericsError("parameter matrices have the wrong shape")
    for i in range(n):
        for j in range(n):
            if (i, j) not in G.directed and abs(p.lam[i, j]) > atol:
                raise NumericsError(f"lambda[{i},{j}] is off the directed support")
            if i != j and not G.has_bidirected(i, j) and abs(p.omega[i, j]) > atol:
                raise NumericsError(f"omega[{i},{j}] is off the bidirected support")
    if not np.allclose(p.omega, p.omega.T):
        raise NumericsError("omega is not symmetric")
    try:
        np.linalg.cholesky(p.omega)
    except np.linalg.LinAlgError:
        raise NumericsError("omega is not positive definite") from None
    if abs(np.linalg.det(np.eye(n) - p.lam)) < 1e-12:
        raise NumericsError("I - Lambda is singular")


def spectral_radius(M: NDArray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def sample_params(G: MixedGraph, seed: int | np.random.Generator = 0, scale: float = 1.0,
                  tol: Tolerances = DEFAULT_TOL) -> ParamPoint:
    """Random generic parameters for ``G``.

    Edge coefficients are uniform on [-scale, scale] with the band
    (-0.1 scale, 0.1 scale) removed.  Omega is diagonally dominant, hence
    positive definite with exactly the bidirected support.  On cyclic
    graphs Lambda is rescaled so that its spectral radius is below the
    configured bound.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = G.n
    lam = np.zeros((n, n))
    for t, h in G.sorted_directed():
        mag = rng.uniform(0.1 * scale, scale)
        lam[t, h] = mag if rng.random() < 0.5 else -mag
    om = np.zeros((n, n))
    for i, j in G.sorted_bidirected():
        om[i, j] = om[j, i] = rng.uniform(-1.0, 1.0)
    for i in range(n):
        om[i, i] = np.abs(om[i]).sum() + rng.uniform(0.5, 1.5)
    if not G.is_acyclic:
        rho = spectral_radius(lam)
        while rho >= tol.spectral_radius:
            lam *= 0.95 * tol.spectral_radius / rho
            rho = spectral_radius(lam)
    return ParamPoint(lam, om)


def phi_numeric(lam: NDArray, om: NDArray) -> NDArray:
    """Covariance (I - Lambda)^{-T} Omega (I - Lambda)^{-1}."""
    n = lam.shape[0]
    IL = np.eye(n) - lam
    if n and abs(np.linalg.det(IL)) < 1e-12:
        raise NumericsError("I - Lambda is numerically singular")
    Inv = np.linalg.inv(IL)
    S = Inv.T @ om @ Inv
    return (S + S.T) / 2


def check_pd(S: NDArray, what: str = "matrix") -> None:
    if S.size == 0:
        return
    if not np.allclose(S, S.T, atol=1e-10 * max(1.0, np.abs(S).max())):
        raise NumericsError(f"{what} is not symmetric")
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise NumericsError(f"{what} is not positive definite") from None


# -- block LDL ----------------------------------------------------------------


@dataclass
class BlockLdl:
    """Factorization S = (I - A)^{-T} Delta (I - A)^{-1} for ordered blocks."""

    A: NDArray[np.float64]
    Delta: NDArray[np.float64]
    blocks: list[list[int]]

    def reconstruct(self) -> NDArray:
        n = self.A.shape[0]
        Inv = np.linalg.inv(np.eye(n) - self.A)
        return Inv.T @ self.Delta @ Inv


def block_ldl(S: NDArray, blocks: Sequence[Sequence[int]]) -> BlockLdl:
    """Unique block-LDL factors of a positive definite ``S``.

    ``A`` is strictly block upper triangular for the given block order and
    ``Delta`` is block diagonal.  Column block ``v`` of ``A`` holds the
    regression coefficients of ``v`` on all earlier blocks, and the
    diagonal block of ``Delta`` is the corresponding Schur complement.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    flat = [i for b in blocks for i in b]
    if sorted(flat) != list(range(n)):
        raise NumericsError("blocks must partition the index set")
    A = np.zeros((n, n))
    Delta = np.zeros((n, n))
    pre: list[int] = []
    for b in blocks:
        b = list(b)
        Svv = S[np.ix_(b, b)]
        if pre:
            Spp = S[np.ix_(pre, pre)]
            Spv = S[np.ix_(pre, b)]
            coef = np.linalg.solve(Spp, Spv)
            A[np.ix_(pre, b)] = coef
            schur = Svv - Spv.T @ coef
        else:
            schur = Svv.copy()
        schur = (schur + schur.T) / 2
        try:
            np.linalg.cholesky(schur)
        except np.linalg.LinAlgError:
            raise NumericsError(f"pivot block {b} is not positive definite") from None
        Delta[np.ix_(b, b)] = schur
        pre.extend(b)
    return BlockLdl(A, Delta, [list(b) for b in blocks])


# -- fiber equations ----------------------------------------------------------


def fiber_equations(G: MixedGraph) -> list[tuple[int, int]]:
    """Index pairs (i < j) with no bidirected edge: the entries of
    (I - Lambda)^T Sigma (I - Lambda) that must vanish."""
    return [(i, j) for i in range(G.n) for j in range(i + 1, G.n) if not G.has_bidirected(i, j)]


def fiber_residual(G: MixedGraph, Sigma: NDArray, lam: NDArray) -> float:
    eqs = fiber_equations(G)
    if not eqs:
        return 0.0
    IL = np.eye(G.n) - lam
    W = IL.T @ Sigma @ IL
    return float(max(abs(W[i, j]) for i, j in eqs))


@dataclass
class NewtonResult:
    """Outcome of Newton's method from a single start."""

    converged: bool
    lam: Optional[NDArray]
    iterations: int
    residual: float
    reason: str = ""


def newton_fiber_solve(G: MixedGraph, Sigma: NDArray, start: NDArray,
                       tol: Tolerances = DEFAULT_TOL) -> NewtonResult:
    """Solve the fiber equations from one start (see ``newton_multistart``)."""
    return newton_multistart(G, Sigma, np.asarray(start)[None], tol)[0]


def newton_multistart(G: MixedGraph, Sigma: NDArray, starts: NDArray,
                      tol: Tolerances = DEFAULT_TOL) -> list[NewtonResult]:
    """Gauss-Newton on [(I - Lambda)^T Sigma (I - Lambda)]_ij = 0 for all
    non-adjacent pairs, batched over ``starts`` of shape (s, n, n).

    The Jacobian is analytic: d W_ij / d lambda_kl = -(d_il M_kj + d_jl M_ki)
    with M = Sigma (I - Lambda).  Steps use the pseudo-inverse so
    overdetermined systems are handled.  A point is accepted when the
    residual sup-norm drops below the tolerance and |det(I - Lambda)| stays
    above the floor.
    """
    n = G.n
    edges = G.sorted_directed()
    eqs = fiber_equations(G)
    starts = np.asarray(starts, dtype=float)
    s = starts.shape[0]
    ek = np.array([k for k, _ in edges], dtype=int)
    el = np.array([l for _, l in edges], dtype=int)
    qi = np.array([i for i, _ in eqs], dtype=int)
    qj = np.array([j for _, j in eqs], dtype=int)
    x = starts[:, ek, el] if edges else np.zeros((s, 0))
    eye = np.eye(n)
    active = np.ones(s, dtype=bool)
    done = np.zeros(s, dtype=bool)
    iters = np.zeros(s, dtype=int)
    res = np.full(s, np.inf)

    def build(xb):
        L = np.zeros((xb.shape[0], n, n))
        if edges:
            L[:, ek, el] = xb
        return L

    di = (qi[:, None] == el[None, :]).astype(float)
    dj = (qj[:, None] == el[None, :]).astype(float)
    for it in range(tol.newton_max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        L = build(x[idx])
        IL = eye - L
        M = Sigma @ IL
        W = np.transpose(IL, (0, 2, 1)) @ M
        r = W[:, qi, qj] if eqs else np.zeros((idx.size, 0))
        rn = np.abs(r).max(axis=1) if eqs else np.zeros(idx.size)
        res[idx] = rn
        ok = rn < tol.newton_residual
        bad = ~np.isfinite(rn) | (rn > 1e12)
        done[idx[ok]] = True
        active[idx[ok | bad]] = False
        iters[idx] = it
        if it == tol.newton_max_iter:
            break
        go = ~(ok | bad)
        if not go.any() or not edges:
            continue
        g = idx[go]
        Mg = M[go]
        J = -(di[None] * Mg[:, ek[None, :], qj[:, None]] + dj[None] * Mg[:, ek[None, :], qi[:, None]])
        step = np.einsum("bij,bj->bi", np.linalg.pinv(J), r[go])
        x[g] = x[g] - step
    out = []
    for b in range(s):
        lam = build(x[b:b + 1])[0]
        if not done[b]:
            out.append(NewtonResult(False, None, int(iters[b]), float(res[b]), "no convergence"))
            continue
        if abs(np.linalg.det(eye - lam)) < tol.det_floor:
            out.append(NewtonResult(False, None, int(iters[b]), float(res[b]), "det(I - Lambda) near zero"))
            continue
        out.append(NewtonResult(True, lam, int(iters[b]), float(res[b])))
    return out


def cluster_points(points: Sequence[NDArray], radius: float = DEFAULT_TOL.cluster_radius) -> list[NDArray]:
    """Greedy clustering at relative distance ``radius``; returns representatives
    sorted lexicographically by their flattened entries."""
    reps: list[NDArray] = []
    for p in points:
        for q in reps:
            if np.linalg.norm(p - q) <= radius * max(1.0, np.linalg.norm(q)):
                break
        else:
            reps.append(p)
    return sorted(reps, key=lambda a: tuple(np.round(a.ravel(), 8)))


@dataclass
class MultistartSummary:
    """Distinct real fiber points found from many Newton starts."""

    solutions: list[NDArray]
    converged: int
    starts: int
    details: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.solutions)


def fiber_points(G: MixedGraph, Sigma: NDArray, n_starts: int, rng: np.random.Generator,
                 start_scale: float = 2.0, tol: Tolerances = DEFAULT_TOL) -> MultistartSummary:
    """Run Newton from ``n_starts`` random starts and cluster the solutions."""
    n = G.n
    starts = np.zeros((n_starts, n, n))
    for t, h in G.sorted_directed():
        starts[:, t, h] = rng.normal(0.0, start_scale, size=n_starts)
    results = newton_multistart(G, Sigma, starts, tol)
    sols = [r.lam for r in results if r.converged]
    return MultistartSummary(cluster_points(sols, tol.cluster_radius), len(sols), n_starts)


# -- matrix I/O ---------------------------------------------------------------


def parse_matrix(text: str) -> tuple[NDArray, Optional[list[str]]]:
    """Parse a ``matrix r c`` text block or the JSON ``{"nodes", "data"}`` form."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
            data = np.array(obj["data"], dtype=float)
        except (ValueError, KeyError, TypeError) as exc:
            raise NumericsError(f"malformed JSON matrix: {exc}") from None
        nodes = [str(x) for x in obj["nodes"]] if obj.get("nodes") is not None else None
        if data.ndim != 2:
            raise NumericsError("JSON matrix data must be two-dimensional")
        if nodes is not None and len(nodes) != data.shape[0]:
            raise NumericsError("node list does not match matrix size")
        return data, nodes
    lines = [ln for ln in stripped.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise NumericsError("empty matrix file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "matrix":
        raise NumericsError("matrix file must start with 'matrix <rows> <cols>'")
    try:
        r, c = int(head[1]), int(head[2])
    except ValueError:
        raise NumericsError("matrix dimensions must be integers") from None
    rows = []
    for k, ln in enumerate(lines[1:], start=2):
        try:
            row = [float(x) for x in ln.split()]
        except ValueError:
            raise NumericsError(f"non-numeric entry in matrix row {k}") from None
        if len(row) != c:
            raise NumericsError(f"matrix row {k} has {len(row)} entries, expected {c}")
        rows.append(row)
    if len(rows) != r:
        raise NumericsError(f"matrix has {len(rows)} rows, expected {r}")
    data = np.array(rows, dtype=float).reshape(r, c)
    if not np.all(np.isfinite(data)):
        raise NumericsError("matrix has non-finite entries")
    return data, None


def read_matrix(path) -> tuple[NDArray, Optional[list[str]]]:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def format_matrix(M: NDArray) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = [f"matrix {M.shape[0]} {M.shape[1]}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in M]
    return "\n".join(lines) + "\n"


def matrix_json(M: NDArray, nodes: Optional[Sequence[str]] = None) -> dict:
    return {"nodes": list(nodes) if nodes is not None else None,
            "data": [[float(x) for x in row] for row in np.atleast_2d(M)]}
