"""Closed-form repetition budgets as functions of the local dimension.

After m samples the generated subgroup has at most d^m elements, so the
chance that the next sample is informative is at least 1 - d^m / d^(n-1).
Multiplying over a full solve attempt (n-1 draws) bounds the single-run
failure probability by

    base(d, n) = (d + 1) / d^2 - d^(-n),

which is exact for prime d and an upper bound otherwise; k independent
attempts fail with probability at most base^k.  Everything here evaluates
that bound and its consequences: required repetition counts, the
single-shot threshold dimension, and the dimension-lift multiplicity.

Ceilings are applied after a 1e-12 downward nudge so exactly-representable
boundary values do not pick up a spurious extra repetition.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

_CEIL_NUDGE = 1e-12


def _checked(d: int, eps: float, n: int | None = None) -> None:
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"need 0 < eps < 1, got {eps}")
    if n is not None and n < 2:
        raise ValueError(f"need n >= 2, got {n}")


def _nudged_ceil(x: float) -> int:
    return math.ceil(x - _CEIL_NUDGE)


def p_fail_single(d: int, n: int) -> float:
    """Upper bound (d+1)/d^2 - d^(-n) on one solve attempt failing."""
    _checked(d, 0.5, n)
    return (d + 1) / d**2 - float(d) ** (-n)


def k_required(d: int, eps: float, n: int | None = None) -> int:
    """Repetitions needed to push the failure bound below eps.

    With the exact base (finite n): ceil(log eps / log base).  Without n,
    the large-n form ceil(-log eps / (2 log d - log(d+1))) is used.
    """
    _checked(d, eps, n)
    if n is None:
        ratio = -math.log(eps) / (2 * math.log(d) - math.log(d + 1))
    else:
        ratio = math.log(eps) / math.log(p_fail_single(d, n))
    return max(1, _nudged_ceil(ratio))


def single_shot_threshold_dim(eps: float) -> int:
    """Smallest d with (d+1)/d^2 <= eps, so that one run already suffices."""
    _checked(2, eps)
    # root of eps*d^2 - d - 1 = 0, then settle the boundary by exact scan
    d = max(2, int((1 + math.sqrt(1 + 4 * eps)) / (2 * eps)) - 2)
    while (d + 1) / d**2 > eps:
        d += 1
    while d > 2 and (d - 1 + 1) / (d - 1) ** 2 <= eps:
        d -= 1
    return d


@dataclass(frozen=True)
class LiftPlan:
    """How far a d-to-one instance must be dimension-lifted to hit eps."""

    multiplier: int  # l
    lifted_dim: int  # d' = l * d
    achieved_bound: float  # (d' + 1) / d'^2


def lift_multiplicity(d: int, eps: float) -> LiftPlan:
    """Smallest integer l with (l d + 1) / (l d)^2 <= eps.

    Equivalent to the quadratic condition eps d^2 l^2 - d l - 1 >= 0,
    i.e. l >= (1 + sqrt(1 + 4 eps)) / (2 eps d).
    """
    _checked(d, eps)
    l = max(1, _nudged_ceil((1 + math.sqrt(1 + 4 * eps)) / (2 * eps * d)))
    while (l * d + 1) / (l * d) ** 2 > eps:
        l += 1
    while l > 1 and ((l - 1) * d + 1) / ((l - 1) * d) ** 2 <= eps:
        l -= 1
    return LiftPlan(multiplier=l, lifted_dim=l * d, achieved_bound=(l * d + 1) / (l * d) ** 2)


@dataclass(frozen=True)
class BudgetReport:
    """Evaluated complexity quantities for one (d, n, eps) query."""

    d: int
    n: int
    eps: float
    base: float
    p_fail_single: float
    k_exact: int
    k_asymptotic: int


def budget_report(d: int, n: int, eps: float) -> BudgetReport:
    base = p_fail_single(d, n)
    return BudgetReport(
        d=d,
        n=n,
        eps=eps,
        base=base,
        p_fail_single=base,
        k_exact=k_required(d, eps, n=n),
        k_asymptotic=k_required(d, eps),
    )


# -- figure and table data -----------------------------------------------------


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


DEFAULT_EPS_GRID = (1e-1, 1e-2, 1e-3)


def figure_data(
    which: str,
    d_values: Sequence[int] | None = None,
    n_values: Sequence[int] | None = None,
    eps_values: Sequence[float] | None = None,
) -> Table:
    """Tabulate the data behind the repetition-count figures and the threshold table.

    fig1:   f(d) = log 3 / (2 log d - log(d+1)), the asymptotic repetition
            count at failure target 1/3, over a d grid.
    fig2:   f(d, n, eps) = log eps / log((d+1)/d^2 - d^(-n)) over (d, n)
            grids for each requested eps.
    table1: per eps, the single-shot threshold dimension and the qubit
            repetition count.
    """
    if which == "fig1":
        if not d_values:
            raise ValueError("fig1 needs a nonempty d grid")
        rows = [
            (d, math.log(3) / (2 * math.log(d) - math.log(d + 1)))
            for d in d_values
        ]
        return Table(("d", "f"), rows)
    if which == "fig2":
        if not d_values or not n_values:
            raise ValueError("fig2 needs nonempty d and n grids")
        eps_values = tuple(eps_values) if eps_values else DEFAULT_EPS_GRID
        rows = []
        for eps in eps_values:
            for d in d_values:
                for n in n_values:
                    rows.append((d, n, eps, math.log(eps) / math.log(p_fail_single(d, n))))
        return Table(("d", "n", "epsilon", "k"), rows)
    if which == "table1":
        eps_values = tuple(eps_values) if eps_values else DEFAULT_EPS_GRID
        rows = [
            (eps, single_shot_threshold_dim(eps), k_required(2, eps))
            for eps in eps_values
        ]
        return Table(("epsilon", "d_single_shot", "k_d2"), rows)
    raise ValueError(f"unknown dataset {which!r}; expected fig1, fig2, or table1")


def gnuplot_script(which: str, csv_path: str) -> str:
    """A minimal gnuplot driver referencing an emitted CSV."""
    if which == "fig1":
        body = (
            f"set datafile separator ','\n"
            f"set xlabel 'd'; set ylabel 'k'\n"
            f"set logscale x\n"
            f"plot '{csv_path}' every ::1 using 1:2 with linespoints title 'repetitions for P_fail <= 1/3'\n"
        )
    elif which == "fig2":
        body = (
            f"set datafile separator ','\n"
            f"set xlabel 'd'; set ylabel 'n'; set zlabel 'k'\n"
            f"splot '{csv_path}' every ::1 using 1:2:4 with points title 'k(d, n)'\n"
        )
    elif which == "table1":
        body = (
            f"set datafile separator ','\n"
            f"set logscale y\n"
            f"plot '{csv_path}' every ::1 using 1:2 with linespoints title 'single-shot d', \\\n"
            f"     '{csv_path}' every ::1 using 1:3 with linespoints title 'k at d=2'\n"
        )
    else:
        raise ValueError(f"unknown dataset {which!r}")
    return body
