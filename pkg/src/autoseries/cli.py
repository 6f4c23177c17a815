"""Command line front end: JSON series documents, exact ring operations,
well-ordering verdicts, and the root solvers.

Series travel as JSON {field, a, b, machine}; "-" reads a document from
stdin so subcommands compose in pipes.  All output is deterministic."""

import argparse
import json
import sys
from fractions import Fraction

from .automata import Alphabet, Dfao, to_dot
from .errors import AutoseriesError, MachineError
from .gfq import Fq, PolyFq, RatFun, field_make
from .radix import value_of
from .series import (
    AutoSeries,
    coefficient,
    decimate,
    equals,
    frobenius_series,
    from_rational_function,
    from_terms,
    hadamard,
    is_well_ordered,
    mul,
    series_add,
    truncate,
)
from .solver import (
    DEFAULT_DEPTH,
    DEFAULT_WINDOW,
    artin_schreier_auto,
    artin_schreier_trunc,
    roots_of_polynomial,
    verify,
)
from .valued import INF, TruncSeries, render_trunc

__all__ = ["cli_dispatch", "main"]


# ---------------------------------------------------------------------------
# documents


def _field_doc(field: Fq) -> dict:
    return {"p": field.p, "e": field.e, "modulus": list(field.modulus)}


def _field_from_doc(doc) -> Fq:
    if not isinstance(doc, dict) or not {"p", "e", "modulus"} <= set(doc):
        raise MachineError("field document needs p, e, modulus")
    field = field_make(int(doc["p"]), int(doc["e"]))
    if tuple(doc["modulus"]) != field.modulus:
        raise MachineError(
            f"modulus {doc['modulus']} is not the canonical one "
            f"for F_{field.p}^{field.e}, expected {list(field.modulus)}")
    return field


def _symbol_names(p: int) -> list:
    return [str(d) for d in range(p)] + ["."]


def series_to_doc(x: AutoSeries) -> dict:
    names = _symbol_names(x.field.p)
    states = []
    for q in range(x.machine.n_states):
        row = x.machine.transitions[q]
        states.append({
            "out": x.machine.outputs[q].to_int(),
            "next": {name: row[s] for s, name in enumerate(names)},
        })
    return {
        "field": _field_doc(x.field),
        "a": x.a,
        "b": x.b,
        "machine": {"states": states, "initial": x.machine.initial},
    }


def series_from_doc(doc) -> AutoSeries:
    if not isinstance(doc, dict) or not {"field", "a", "b", "machine"} <= set(doc):
        raise MachineError("series document needs field, a, b, machine")
    field = _field_from_doc(doc["field"])
    a, b = doc["a"], doc["b"]
    if not isinstance(a, int) or a < 1:
        raise MachineError("offset a must be a positive integer")
    if not isinstance(b, int) or b < 0:
        raise MachineError("offset b must be a nonnegative integer")
    machine = doc["machine"]
    if not isinstance(machine, dict) or "states" not in machine:
        raise MachineError("machine document needs states and initial")
    names = _symbol_names(field.p)
    n = len(machine["states"])
    trans, outs = [], []
    for st in machine["states"]:
        nxt = st.get("next", {})
        if set(nxt) != set(names):
            raise MachineError(
                f"state transitions must cover exactly the symbols {names}")
        row = []
        for name in names:
            t = nxt[name]
            if not isinstance(t, int) or not 0 <= t < n:
                raise MachineError(f"transition target {t!r} out of range")
            row.append(t)
        out = st.get("out")
        if not isinstance(out, int) or not 0 <= out < field.q:
            raise MachineError(f"state output {out!r} not a field encoding")
        trans.append(tuple(row))
        outs.append(field.from_int(out))
    initial = machine.get("initial", 0)
    m = Dfao(Alphabet(field.p), trans, initial, outs)
    return AutoSeries(field, a, b, m)


def _read_doc(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _load_series(path: str) -> AutoSeries:
    return series_from_doc(_read_doc(path))


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def _window_json(v):
    return None if v == INF else str(v)


def _depth_json(v):
    return None if v == INF else int(v)


def _trunc_doc(x: TruncSeries) -> dict:
    return {
        "terms": {str(e): c.to_int() for e, c in x.terms},
        "window": _window_json(x.window),
        "depth": _depth_json(x.depth),
        "text": render_trunc(x),
    }


def _roots_doc(field: Fq, roots, window, depth) -> dict:
    return {
        "field": _field_doc(field),
        "window": _window_json(window),
        "depth": _depth_json(depth),
        "roots": [_trunc_doc(r) for r in roots],
    }


# ---------------------------------------------------------------------------
# argument parsing helpers


def _parse_exponent(text: str, p: int) -> Fraction:
    """A rational like -3/4, or a base-p expansion when a point appears.
    Expansions are normalized: leading and trailing zero digits dropped."""
    if "." in text:
        a = Alphabet(p)
        word = list(a.parse(text))
        while word and word[0] == 0:
            word.pop(0)
        while word and word[-1] == 0:
            word.pop()
        return value_of(tuple(word), p)
    return Fraction(text)


def _parse_window_text(text: str):
    parts = text.split(",")
    if len(parts) > 2:
        raise MachineError("window must be E or E,d")
    e = Fraction(parts[0])
    d = int(parts[1]) if len(parts) == 2 else None
    return e, d


def _window_of(ns, default_e=DEFAULT_WINDOW, default_d=DEFAULT_DEPTH):
    if getattr(ns, "window", None):
        e, d = _parse_window_text(ns.window)
        return e, default_d if d is None else d
    return default_e, default_d


def _parse_poly_coeffs(field: Fq, texts) -> list:
    """Each coefficient is num or num/den, comma-separated field encodings,
    constant term first."""
    out = []
    for text in texts:
        num, _, den = text.partition("/")
        npoly = PolyFq.make(field, [int(c) for c in num.split(",")])
        if den:
            dpoly = PolyFq.make(field, [int(c) for c in den.split(",")])
            out.append(RatFun.make(npoly, dpoly))
        else:
            out.append(RatFun.from_poly(npoly))
    return out


def _field_of(ns) -> Fq:
    return field_make(ns.p, ns.e)


def _sort_key(x: TruncSeries):
    return tuple((e, c.to_int()) for e, c in x.terms)


# ---------------------------------------------------------------------------
# handlers; each returns the text to print (or None)


def _cmd_field(ns):
    return _dumps(_field_doc(_field_of(ns)))


def _cmd_coeff(ns):
    x = _load_series(ns.series)
    i = _parse_exponent(ns.index, x.field.p)
    return str(coefficient(x, i).to_int())


def _cmd_add(ns):
    return _dumps(series_to_doc(series_add(_load_series(ns.left),
                                           _load_series(ns.right))))


def _cmd_mul(ns):
    return _dumps(series_to_doc(mul(_load_series(ns.left),
                                    _load_series(ns.right))))


def _cmd_hadamard(ns):
    return _dumps(series_to_doc(hadamard(_load_series(ns.left),
                                         _load_series(ns.right))))


def _cmd_frobenius(ns):
    return _dumps(series_to_doc(frobenius_series(_load_series(ns.series))))


def _cmd_decimate(ns):
    x = _load_series(ns.series)
    return _dumps(series_to_doc(decimate(x, Fraction(ns.a0), Fraction(ns.b0))))


def _cmd_eq(ns):
    same = equals(_load_series(ns.left), _load_series(ns.right))
    return "true" if same else "false"


def _cmd_check_wo(ns):
    verdict = is_well_ordered(_load_series(ns.series))
    if verdict.ok:
        return _dumps({"ok": True})
    w0, s, w, s2, w1 = verdict.witness
    return _dumps({
        "ok": False,
        "witness": {"w0": w0, "s": s, "w": w, "s2": s2, "w1": w1},
        "family": [verdict.family(n) for n in range(3)],
    })


def _cmd_truncate(ns):
    x = _load_series(ns.series)
    if ns.E is not None:
        e = Fraction(ns.E)
        d = DEFAULT_DEPTH if ns.d is None else ns.d
    elif ns.window:
        e, d = _window_of(ns)
    else:
        raise MachineError("truncate needs --E or --window")
    t = truncate(x, e, d)
    # the window is part of the command line, so print the terms bare
    return render_trunc(TruncSeries.make(t.field, t.terms))


def _cmd_rational(ns):
    field = _field_of(ns)
    num = PolyFq.make(field, [int(c) for c in ns.num.split(",")])
    den = PolyFq.make(field, [int(c) for c in ns.den.split(",")])
    x = from_rational_function(field, RatFun.make(num, den))
    return _dumps(series_to_doc(x))


def _cmd_solve_poly(ns):
    field = _field_of(ns)
    window, depth = _window_of(ns)
    P = _parse_poly_coeffs(field, ns.coeff)
    rs = roots_of_polynomial(P, window=window, depth=depth,
                             max_extension=ns.max_extension)
    return _dumps(_roots_doc(rs.field, rs.roots, rs.window, depth))


def _cmd_solve_as(ns):
    window, depth = _window_of(ns)
    b = truncate(_load_series(ns.b), window, depth)
    if ns.a is not None:
        a = truncate(_load_series(ns.a), window, depth)
    else:
        a = TruncSeries.from_const(b.field, b.field.one())
    rs = artin_schreier_trunc(a, b, window=window, depth=depth,
                              max_extension=ns.max_extension)
    return _dumps(_roots_doc(rs.field, rs.roots, rs.window, depth))


def _cmd_solve_chevalley(ns):
    field = _field_of(ns)
    window, depth = _window_of(ns, default_e=Fraction(1))
    if ns.depth is not None:
        depth = ns.depth
    one = PolyFq.make(field, [1])
    x = from_rational_function(field, RatFun.make(one, PolyFq.t(field)))
    y = artin_schreier_auto(x)
    roots = []
    for i in range(field.p):
        shifted = series_add(y, from_terms(field, [(0, field.from_int(i))]))
        roots.append(truncate(shifted, window, depth))
    roots.sort(key=_sort_key)
    return _dumps(_roots_doc(field, roots, window, depth))


def _cmd_verify(ns):
    x = _load_series(ns.series)
    window, depth = _window_of(ns)
    P = _parse_poly_coeffs(x.field, ns.coeff)
    ok = verify(P, x, window=window, depth=depth)
    return "true" if ok else "false"


def _cmd_export_dot(ns):
    x = _load_series(ns.series)
    return to_dot(x.machine, ns.name)


# ---------------------------------------------------------------------------
# parser wiring


def _add_window_flag(sp):
    sp.add_argument("--window", metavar="E[,d]",
                    help="truncation window: exponent bound E, depth d")


def _add_field_flags(sp):
    sp.add_argument("--p", type=int, required=True, help="characteristic")
    sp.add_argument("--e", type=int, default=1, help="extension degree")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autoseries",
        description="Exact arithmetic for automatic Hahn series over F_q(t).")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("field", help="print a canonical field descriptor")
    _add_field_flags(sp)
    sp.set_defaults(func=_cmd_field)

    ser = sub.add_parser("series", help="operations on series documents")
    ssub = ser.add_subparsers(dest="series_command", required=True)

    sp = ssub.add_parser("coeff", help="coefficient at an exponent")
    sp.add_argument("series", nargs="?", default="-")
    sp.add_argument("--i", dest="index", required=True,
                    help="exponent: rational n/d, or base-p expansion with .")
    sp.set_defaults(func=_cmd_coeff)

    for name, fn in [("add", _cmd_add), ("mul", _cmd_mul),
                     ("hadamard", _cmd_hadamard)]:
        sp = ssub.add_parser(name, help=f"{name} of two series")
        sp.add_argument("left")
        sp.add_argument("right")
        sp.set_defaults(func=fn)

    sp = ssub.add_parser("frobenius", help="p-th power")
    sp.add_argument("series", nargs="?", default="-")
    sp.set_defaults(func=_cmd_frobenius)

    sp = ssub.add_parser("decimate", help="coefficients along i -> a0*i + b0")
    sp.add_argument("series", nargs="?", default="-")
    sp.add_argument("--a0", required=True, help="step, a positive rational")
    sp.add_argument("--b0", default="0", help="shift, a rational")
    sp.set_defaults(func=_cmd_decimate)

    sp = ssub.add_parser("eq", help="decide exact equality")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.set_defaults(func=_cmd_eq)

    sp = ssub.add_parser("check-wo", help="well-ordered support verdict")
    sp.add_argument("series", nargs="?", default="-")
    sp.set_defaults(func=_cmd_check_wo)

    sp = ssub.add_parser("truncate", help="print coefficients in a window")
    sp.add_argument("series", nargs="?", default="-")
    sp.add_argument("--E", help="exponent bound")
    sp.add_argument("--d", type=int, help="depth bound")
    _add_window_flag(sp)
    sp.set_defaults(func=_cmd_truncate)

    sp = sub.add_parser("rational", help="series of a rational function")
    _add_field_flags(sp)
    sp.add_argument("--num", required=True,
                    help="numerator coefficients, constant first, commas")
    sp.add_argument("--den", default="1", help="denominator coefficients")
    sp.set_defaults(func=_cmd_rational)

    sol = sub.add_parser("solve", help="root solvers")
    lsub = sol.add_subparsers(dest="solve_command", required=True)

    sp = lsub.add_parser("poly", help="all roots of a monic squarefree polynomial")
    _add_field_flags(sp)
    sp.add_argument("--coeff", action="append", required=True,
                    help="coefficient num[/den] in z-degree order, repeatable")
    sp.add_argument("--max-extension", type=int, default=8)
    _add_window_flag(sp)
    sp.set_defaults(func=_cmd_solve_poly)

    sp = lsub.add_parser("artin-schreier", help="roots of z^p - a z = b")
    sp.add_argument("--b", required=True, metavar="SERIES")
    sp.add_argument("--a", metavar="SERIES", help="defaults to 1")
    sp.add_argument("--max-extension", type=int, default=8)
    _add_window_flag(sp)
    sp.set_defaults(func=_cmd_solve_as)

    sp = lsub.add_parser("chevalley", help="roots of z^p - z = 1/t")
    _add_field_flags(sp)
    sp.add_argument("--depth", type=int, help="digit depth to print")
    _add_window_flag(sp)
    sp.set_defaults(func=_cmd_solve_chevalley)

    sp = sub.add_parser("verify", help="truncated vanishing of P(series)")
    sp.add_argument("series", nargs="?", default="-")
    sp.add_argument("--coeff", action="append", required=True,
                    help="coefficient num[/den] in z-degree order, repeatable")
    _add_window_flag(sp)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("export-dot", help="GraphViz view of the machine")
    sp.add_argument("series", nargs="?", default="-")
    sp.add_argument("--name", default="machine")
    sp.set_defaults(func=_cmd_export_dot)

    return parser


def cli_dispatch(argv) -> int:
    """Run one command; exit code 0 ok, 1 domain error, 2 usage error."""
    parser = build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except SystemExit as e:
        return int(e.code or 0)
    try:
        out = ns.func(ns)
    except AutoseriesError as e:
        msg = {"error": type(e).__name__, "message": str(e)}
        print(json.dumps(msg), file=sys.stderr)
        return 1
    except (OSError, ValueError, ZeroDivisionError) as e:
        msg = {"error": type(e).__name__, "message": str(e)}
        print(json.dumps(msg), file=sys.stderr)
        return 1
    if out is not None:
        print(out)
    return 0


def main(argv=None) -> int:
    return cli_dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
