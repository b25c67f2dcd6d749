"""Export a LinearProgram in CPLEX LP text format for external cross-checks."""

import re
from pathlib import Path
from typing import List

import numpy as np

from lib.lp_solver import LinearProgram

_TERMS_PER_LINE = 6
_INVALID_CHARS = re.compile(r"[^A-Za-z0-9_.()!\"#$%&/,;?@`'{}|~]")


def _num(value):
    # type: (float) -> str
    text = "%.15g" % value
    return "0" if text == "-0" else text


def _label(lp, j):
    # type: (LinearProgram, int) -> str
    """Variable label: supplied name made LP-safe, or v<index>."""
    name = lp.variable_name(j)
    name = _INVALID_CHARS.sub("_", name)
    if not name or name[0].isdigit() or name[0] == ".":
        name = "v_" + name
    return name


def _expression(lp, indices, values):
    # type: (LinearProgram, np.ndarray, np.ndarray) -> List[str]
    """Linear expression split into lines of at most _TERMS_PER_LINE terms."""
    terms = []
    for k, (j, v) in enumerate(zip(indices, values)):
        sign = "-" if v < 0 else "+"
        if k == 0 and sign == "+":
            terms.append("%s %s" % (_num(abs(v)), _label(lp, int(j))))
        else:
            terms.append("%s %s %s" % (sign, _num(abs(v)), _label(lp, int(j))))
    if not terms:
        terms = ["0 %s" % _label(lp, 0)] if lp.n_vars else ["0"]
    return [" ".join(terms[i:i + _TERMS_PER_LINE]) for i in range(0, len(terms), _TERMS_PER_LINE)]


def format_lp(lp, name="household"):
    # type: (LinearProgram, str) -> str
    """Render lp as LP text: objective, constraints, bounds."""
    lines = ["\\ Problem: %s" % name]
    if lp.objective_constant:
        lines.append("\\ Objective constant (not part of the model): %s" % _num(lp.objective_constant))
    lines.append("Minimize")
    nz = np.flatnonzero(lp.objective)
    expr = _expression(lp, nz, lp.objective[nz])
    lines.append(" obj: " + expr[0])
    lines.extend("   " + cont for cont in expr[1:])

    lines.append("Subject To")
    for prefix, sense, rows in (("e", "=", lp.eq_rows), ("c", "<=", lp.ineq_rows)):
        for i, row in enumerate(rows):
            label = _INVALID_CHARS.sub("_", row.name) if row.name else "%s%d" % (prefix, i)
            expr = _expression(lp, row.indices, row.values)
            lines.append(" %s: %s" % (label, expr[0]))
            lines.extend("   " + cont for cont in expr[1:])
            lines[-1] += " %s %s" % (sense, _num(row.rhs))

    lines.append("Bounds")
    for j in range(lp.n_vars):
        lo, hi = lp.lower_bounds[j], lp.upper_bounds[j]
        label = _label(lp, j)
        if np.isinf(lo) and np.isinf(hi):
            lines.append(" %s free" % label)
        elif lo == hi:
            lines.append(" %s = %s" % (label, _num(lo)))
        else:
            lo_text = "-inf" if np.isinf(lo) else _num(lo)
            hi_text = "+inf" if np.isinf(hi) else _num(hi)
            lines.append(" %s <= %s <= %s" % (lo_text, label, hi_text))
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(lp, path, name="household"):
    # type: (LinearProgram, Path, str) -> Path
    """Write lp to path in LP format; creates parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_lp(lp, name))
    return path
