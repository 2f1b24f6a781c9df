"""Text serialization of :class:`MilpModel` in free MPS and CPLEX LP format.

Both writers are deterministic: variables appear in declaration order and
rows in insertion order, so exported files are byte-stable.
"""
from __future__ import annotations

import math
from pathlib import Path

from .model import BINARY, INTEGER, MilpModel

__all__ = ["FORMATS", "to_mps", "to_lp", "export_model", "write_model"]

FORMATS = ("mps", "lp")
_OBJ = "obj"


def _num(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def to_mps(model: MilpModel) -> str:
    """Free-format MPS text."""
    col_entries = {v: [] for v in model.variables}
    for v, c in model.objective.items():
        col_entries[v].append((_OBJ, c))
    for con in model.constraints:
        for v, c in con.coeffs:
            col_entries[v].append((con.name, c))

    out = [f"NAME {model.name}", "ROWS", f" N {_OBJ}"]
    tag = {"<=": "L", ">=": "G", "=": "E"}
    for con in model.constraints:
        out.append(f" {tag[con.sense]} {con.name}")
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for name, var in model.variables.items():
        is_int = var.kind in (BINARY, INTEGER)
        if is_int and not in_int:
            out.append(f" MARKER{marker} 'MARKER' 'INTORG'")
            marker += 1
            in_int = True
        elif not is_int and in_int:
            out.append(f" MARKER{marker} 'MARKER' 'INTEND'")
            marker += 1
            in_int = False
        entries = col_entries[name]
        if not entries:
            # keep the column declared
            out.append(f" {name} {_OBJ} 0")
        for row, c in entries:
            out.append(f" {name} {row} {_num(c)}")
    if in_int:
        out.append(f" MARKER{marker} 'MARKER' 'INTEND'")
    out.append("RHS")
    for con in model.constraints:
        if con.rhs != 0:
            out.append(f" RHS {con.name} {_num(con.rhs)}")
    out.append("BOUNDS")
    for name, var in model.variables.items():
        if var.kind == BINARY:
            out.append(f" BV BND {name}")
            continue
        if var.lb != 0:
            out.append(f" {'MI' if math.isinf(var.lb) else 'LO'} BND {name}" +
                       ("" if math.isinf(var.lb) else f" {_num(var.lb)}"))
        if not math.isinf(var.ub):
            out.append(f" UP BND {name} {_num(var.ub)}")
        elif var.kind == INTEGER:
            out.append(f" PL BND {name}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _expr(terms) -> str:
    parts = []
    for v, c in terms:
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else f"{_num(mag)} "
        parts.append(f"{sign} {coef}{v}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _wrap(prefix: str, text: str, width: int = 250) -> list[str]:
    # LP readers cap line length; break between terms
    tokens = text.split(" ")
    lines = []
    cur = prefix
    for tok in tokens:
        if len(cur) + len(tok) + 1 > width and cur.strip():
            lines.append(cur)
            cur = "   "
        cur = f"{cur} {tok}" if cur.strip() else f"{cur}{tok}"
    lines.append(cur)
    return lines


def to_lp(model: MilpModel) -> str:
    """CPLEX LP text."""
    out = [f"\\ {model.name}", "Minimize"]
    obj_terms = list(model.objective.items())
    if not obj_terms and model.variables:
        obj_terms = [(next(iter(model.variables)), 0)]
        out.extend(_wrap(f" {_OBJ}:", f"0 {obj_terms[0][0]}"))
    else:
        out.extend(_wrap(f" {_OBJ}:", _expr(obj_terms)))
    out.append("Subject To")
    for con in model.constraints:
        out.extend(_wrap(f" {con.name}:", f"{_expr(con.coeffs)} {con.sense} {_num(con.rhs)}"))
    out.append("Bounds")
    for name, var in model.variables.items():
        if var.kind == BINARY:
            continue
        lo = "-inf" if math.isinf(var.lb) else _num(var.lb)
        if math.isinf(var.ub):
            out.append(f" {name} >= {lo}")
        else:
            out.append(f" {lo} <= {name} <= {_num(var.ub)}")
    ints = model.vars_of_kind(INTEGER)
    if ints:
        out.append("Generals")
        out.extend(_wrap("", " ".join(ints)))
    bins = model.vars_of_kind(BINARY)
    if bins:
        out.append("Binaries")
        out.extend(_wrap("", " ".join(bins)))
    out.append("End")
    return "\n".join(out) + "\n"


def export_model(model: MilpModel, fmt: str = "mps") -> str:
    """Serialize ``model``; ``fmt`` is "mps" or "lp"."""
    if fmt == "mps":
        return to_mps(model)
    if fmt == "lp":
        return to_lp(model)
    raise ValueError(f"unknown model format {fmt!r}; expected one of {FORMATS}")


def write_model(model: MilpModel, path, fmt: str | None = None) -> Path:
    """Write the model, inferring the format from the suffix when ``fmt`` is None."""
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower() or "mps"
    path.write_text(export_model(model, fmt))
    return path

