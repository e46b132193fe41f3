"""Computer-algebra scripts for fiber and implicitization computations.

Two dialects are emitted: Singular and Macaulay2.  Tasks:

* ``identifiability``: fiber ideal over the field of rational functions in
  a generic parameter point, queried for dimension and multiplicity.
* ``leading-terms``: fiber ideal with symbolic Sigma and a block order
  putting Lambda first, queried for its reduced Groebner basis.
* ``vanishing-ideal``: the same ideal with Lambda eliminated.

Cyclic graphs get saturation by det(I - Lambda).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graph import MixedGraph
from .numerics import fiber_equations

DIALECTS = ("singular", "m2")
TASKS = ("identifiability", "leading-terms", "vanishing-ideal")
EXTENSIONS = {"singular": ".sing", "m2": ".m2"}


@dataclass(frozen=True)
class CasScript:
    dialect: str
    task: str
    text: str

    @property
    def extension(self) -> str:
        return EXTENSIONS[self.dialect]


def _suffix(i: int, j: int, n: int) -> str:
    return f"{i + 1}_{j + 1}" if n > 9 else f"{i + 1}{j + 1}"


def _lam(i, j, n, prefix="l"):
    return prefix + _suffix(i, j, n)


def _sig(i, j, n):
    return "s" + _suffix(min(i, j), max(i, j), n)


def _om(i, j, n, prefix="w0"):
    return prefix + _suffix(min(i, j), max(i, j), n)


def _block(prefix: str, rows: Sequence[str], sep: str, close: str) -> str:
    """``prefix`` followed by rows, continuation lines aligned under the first."""
    pad = " " * len(prefix)
    return prefix + (sep + "\n" + pad).join(rows) + close


def _lambda_entries(G: MixedGraph, prefix: str = "l") -> list[list[str]]:
    n = G.n
    return [["1" if i == j else (f"-{_lam(i, j, n, prefix)}" if G.has_directed(i, j) else "0")
             for j in range(n)] for i in range(n)]


def _sigma_rows(G: MixedGraph) -> list[list[str]]:
    n = G.n
    return [[_sig(i, j, n) for j in range(n)] for i in range(n)]


def _omega0_rows(G: MixedGraph) -> list[list[str]]:
    n = G.n
    return [[_om(i, j, n) if i == j or G.has_bidirected(i, j) else "0" for j in range(n)] for i in range(n)]


def _lambda_vars(G: MixedGraph, prefix: str = "l") -> list[str]:
    return [_lam(i, j, G.n, prefix) for i, j in G.sorted_directed()]


def _omega0_vars(G: MixedGraph) -> list[str]:
    return [_om(i, j, G.n) for i in range(G.n) for j in range(i, G.n) if i == j or G.has_bidirected(i, j)]


def _sigma_vars(G: MixedGraph) -> list[str]:
    return [_sig(i, j, G.n) for i in range(G.n) for j in range(i, G.n)]


# -- Singular ------------------------------------------------------------------


def _sing_matrix(name: str, rows: list[list[str]]) -> str:
    n = len(rows)
    return _block(f"matrix {name}[{n}][{n}] = ", [",".join(r) for r in rows], ",", ";")


def _sing_ideal(G: MixedGraph) -> str:
    return ",".join(f"W[{i + 1},{j + 1}]" for i, j in fiber_equations(G))


def _sing_gb(G: MixedGraph) -> str:
    if G.is_acyclic:
        return f"ideal GB = std(ideal({_sing_ideal(G)}));"
    return f"ideal GB = sat(ideal({_sing_ideal(G)}), det(L))[1];"


def singular_identifiability(G: MixedGraph) -> str:
    lv = _lambda_vars(G)
    if not lv:
        return "// no edge coefficients: every fiber is a single point\n"
    params = ",".join(["0"] + _lambda_vars(G, "l0") + _omega0_vars(G))
    lines = [
        'LIB "linalg.lib"; option(redSB);',
        f"ring R = ({params}),({','.join(lv)}),dp;",
        _sing_matrix("L", _lambda_entries(G)),
        _sing_matrix("L0", _lambda_entries(G, "l0")),
        _sing_matrix("W0", _omega0_rows(G)),
        f"matrix W[{G.n}][{G.n}] = transpose(L)*inverse(transpose(L0))*W0*inverse(L0)*L;",
        _sing_gb(G),
        "dim(GB); mult(GB);",
    ]
    return "\n".join(lines) + "\n"


def singular_leading_terms(G: MixedGraph, eliminate: bool = False) -> str:
    lv = _lambda_vars(G)
    sv = _sigma_vars(G)
    order = f"(dp({len(lv)}),dp({len(sv)}))" if lv else "dp"
    lines = [
        'LIB "linalg.lib"; option(redSB);',
        f"ring R = 0,({','.join(lv + sv)}),{order};",
        _sing_matrix("L", _lambda_entries(G)),
        _sing_matrix("S", _sigma_rows(G)),
        "matrix W[%d][%d] = transpose(L)*S*L;" % (G.n, G.n),
    ]
    if not fiber_equations(G):
        lines.append("ideal GB = 0; GB;")
    elif eliminate and lv:
        lines.append(_sing_gb(G))
        lines.append(f"ideal E = eliminate(GB, {'*'.join(lv)}); E;")
    else:
        lines.append(_sing_gb(G) + " GB;")
    return "\n".join(lines) + "\n"


# -- Macaulay2 -----------------------------------------------------------------


def _m2_matrix(name: str, rows: list[list[str]]) -> str:
    return _block(f"{name} = matrix{{", ["{" + ", ".join(r) + "}" for r in rows], ",", "};")


def _m2_ring(G: MixedGraph, elim: bool) -> str:
    n = G.n
    lv = _lambda_vars(G)
    groups = []
    if lv:
        groups.append(",".join(lv))
    for i in range(n):
        groups.append(",".join(_sig(i, j, n) for j in range(i, n)))
    head = "R = QQ["
    body = ", ".join(groups)
    if elim and lv:
        return head + body + ",\n" + " " * len(head) + f"MonomialOrder => Eliminate {len(lv)}];"
    if lv:
        return head + body + ",\n" + " " * len(head) + f"MonomialOrder => {{{len(lv)}, {n * (n + 1) // 2}}}];"
    return head + body + "];"


def _m2_ideal(G: MixedGraph) -> str:
    return "I = ideal{" + ",".join(f"W_({i},{j})" for i, j in fiber_equations(G)) + "};"


def _m2_core(G: MixedGraph, elim: bool) -> list[str]:
    lines = [
        _m2_ring(G, elim),
        _m2_matrix("Lambda", _lambda_entries(G)),
        _m2_matrix("S", _sigma_rows(G)),
        "W = transpose(Lambda)*S*Lambda;",
    ]
    if fiber_equations(G):
        lines.append(_m2_ideal(G))
    else:
        lines.append("I = ideal(0_R);")
    if not G.is_acyclic:
        lines.append("I = saturate(I, det(Lambda));")
    return lines


def m2_vanishing_ideal(G: MixedGraph) -> str:
    lv = _lambda_vars(G)
    lines = _m2_core(G, True)
    target = f"eliminate({{{','.join(lv)}}},I)" if lv else "I"
    lines.append(target)
    n = G.n
    lines += [
        "-- The elimination ideal may carry components where a principal minor",
        "-- of S vanishes. To remove them, saturate by the leading principal minors:",
        f"-- J = {target};",
        f"-- scan(1..{n}, k -> J = saturate(J, det submatrix(S, toList(0..k-1), toList(0..k-1))));",
    ]
    return "\n".join(lines) + "\n"


def m2_leading_terms(G: MixedGraph) -> str:
    lines = _m2_core(G, False)
    lines.append("gens gb I")
    return "\n".join(lines) + "\n"


def m2_identifiability(G: MixedGraph) -> str:
    lv = _lambda_vars(G)
    if not lv:
        return "-- no edge coefficients: every fiber is a single point\n"
    params = _lambda_vars(G, "l0") + _omega0_vars(G)
    lines = [
        f"K = frac(QQ[{','.join(params)}]);",
        f"R = K[{','.join(lv)}];",
        _m2_matrix("L", _lambda_entries(G)),
        _m2_matrix("L0", _lambda_entries(G, "l0")),
        _m2_matrix("W0", _omega0_rows(G)),
        "W = transpose(L)*inverse(transpose(L0))*W0*inverse(L0)*L;",
        "I = ideal{" + ",".join(f"W_({i},{j})" for i, j in fiber_equations(G)) + "};",
    ]
    if not G.is_acyclic:
        lines.append("I = saturate(I, det(L));")
    lines.append("dim I, degree I")
    return "\n".join(lines) + "\n"


def emit_cas_script(G: MixedGraph, task: str = "identifiability", dialect: str = "singular") -> CasScript:
    """Script text for ``task`` in ``dialect``; byte-stable for a given graph."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}; expected one of {', '.join(DIALECTS)}")
    if dialect == "singular":
        text = {
            "identifiability": singular_identifiability,
            "leading-terms": singular_leading_terms,
            "vanishing-ideal": lambda g: singular_leading_terms(g, eliminate=True),
        }[task](G)
    else:
        text = {
            "identifiability": m2_identifiability,
            "leading-terms": m2_leading_terms,
            "vanishing-ideal": m2_vanishing_ideal,
        }[task](G)
    return CasScript(dialect, task, text)


__all__ = ["CasScript", "emit_cas_script", "DIALECTS", "TASKS", "EXTENSIONS"]
