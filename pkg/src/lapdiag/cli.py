"""``lapdiag`` command line: approx, exact, generate, compare.

Exit codes: 0 success, 2 usage or domain error, 3 numerical failure.

A graph source is either an edge-list file or a generator string
``koch:G``, ``urt:G:F`` or ``psfw:G``.  Files whose node ids are all
non-negative integers keep those ids; otherwise ids are compacted in order
of first appearance.
"""

import argparse
import csv
import io
import json
import logging
import re
import sys
import time

import jsonschema
import numpy as np

from . import __version__
from ._backend import BACKEND
from .errors import DomainError, LapDiagError, NumericalError
from .graph import is_connected, largest_connected_component, parse_edge_list, write_edge_list
from .models import generate, write_labels
from .oracle import dense_cap, error_metrics, exact_pseudoinverse, foster_sum
from .schema import validate
from .sketch import approx_diag

log = logging.getLogger("lapdiag")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_GENERATOR = re.compile(r"^(koch|psfw):(\d+)$|^urt:(\d+):(\d+)$")
_INT = re.compile(r"^\d+$")


class UsageError(LapDiagError):
    pass


def fraction_text(x):
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def load_source(source):
    """Return ``(graph, input descriptor, LabeledGraph or None)``."""
    m = _GENERATOR.match(source)
    if m:
        if m.group(1):
            lg = generate(m.group(1), int(m.group(2)))
        else:
            lg = generate("urt", int(m.group(3)), int(m.group(4)))
        return lg.graph, "generator", lg
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read graph source {source!r}: {exc}") from None
    integer_ids = _all_integer_ids(text)
    return parse_edge_list(text, integer_ids=integer_ids), "file", None


def _all_integer_ids(text):
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith(("#", "%")):
            continue
        tok = s.split()
        if len(tok) < 2 or not (_INT.match(tok[0]) and _INT.match(tok[1])):
            return False
    return True


def _input_block(source, kind, g):
    return {"source": source, "kind": kind, "fingerprint": g.fingerprint(),
            "n": g.node_count, "m": g.edge_count}


def _manifest(command, inp, config, timings):
    return {
        "command": command,
        "input": inp,
        "config": config,
        "timings_ms": {k: round(v * 1000.0, 3) for k, v in timings.items()},
        "tool_version": __version__,
    }


def _connected_or_lcc(g, strict, notices):
    if is_connected(g):
        return g
    if strict:
        raise DomainError("input graph is disconnected (--strict)")
    lcc = largest_connected_component(g)
    notices.append(
        f"input disconnected; using largest connected component "
        f"(N={lcc.node_count}, M={lcc.edge_count} of N={g.node_count}, M={g.edge_count})"
    )
    return lcc


def _closed_form(lg, with_diag):
    if lg is None:
        return None
    kf = lg.closed_form_kirchhoff()
    block = {"family": lg.describe(), "kirchhoff": fraction_text(kf), "kirchhoff_value": float(kf)}
    if with_diag and lg.family != "psfw":
        diag = lg.closed_form_diag()
        block["diag"] = [fraction_text(x) for x in diag]
        block["diag_values"] = [float(x) for x in diag]
    return block


def _emit(doc, columns, args):
    if args.format == "json":
        text = json.dumps(doc, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + json.dumps({k: v for k, v in doc.items() if k not in columns}) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node"] + list(columns))
        for i, row in enumerate(zip(*(doc[c] for c in columns))):
            writer.writerow([i] + [repr(float(x)) for x in row])
        text = buf.getvalue()
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_approx(args):
    t0 = time.perf_counter()
    g, kind, lg = load_source(args.source)
    notices = []
    g = _connected_or_lcc(g, args.strict, notices)
    if g is not getattr(lg, "graph", g):
        lg = None
    t1 = time.perf_counter()
    est = approx_diag(g, args.epsilon, args.seed, threads=args.threads,
                      preconditioner=args.preconditioner)
    t2 = time.perf_counter()
    notices.extend(est.warnings)
    cfg = est.config
    doc = {
        "result": "approx",
        "n": g.node_count,
        "m": g.edge_count,
        "epsilon": cfg.epsilon,
        "k": cfg.k,
        "delta": cfg.delta,
        "seed": cfg.seed,
        "diag": est.values.tolist(),
        "kirchhoff": est.kirchhoff,
        "solve_iterations": est.solve_iterations.tolist(),
        "elapsed_ms": round((t2 - t1) * 1000.0, 3),
        "fingerprint": g.fingerprint(),
        "notices": notices,
    }
    cf = _closed_form(lg, with_diag=False)
    if cf is not None:
        doc["closed_form"] = cf
    config = {"epsilon": cfg.epsilon, "seed": cfg.seed, "threads": args.threads,
              "strict": args.strict, "preconditioner": args.preconditioner, "backend": BACKEND}
    doc["manifest"] = _manifest("approx", _input_block(args.source, kind, g), config,
                                {"load": t1 - t0, "approx": t2 - t1, "total": time.perf_counter() - t0})
    _emit(doc, ["diag"], args)
    return EXIT_OK


def cmd_exact(args):
    t0 = time.perf_counter()
    g, kind, lg = load_source(args.source)
    notices = []
    g = _connected_or_lcc(g, args.strict, notices)
    if g is not getattr(lg, "graph", g):
        lg = None
    cap = args.dense_cap if args.dense_cap is not None else dense_cap()
    t1 = time.perf_counter()
    pinv = exact_pseudoinverse(g, cap)
    diag = np.diag(pinv).copy()
    n = g.node_count
    foster = foster_sum(g, pinv)
    t2 = time.perf_counter()
    doc = {
        "result": "exact",
        "n": n,
        "m": g.edge_count,
        "diag": diag.tolist(),
        "kirchhoff": float(n * diag.sum()),
        "resistance_distances": (n * diag + diag.sum()).tolist(),
        "foster": foster,
        "foster_residual": foster - (n - 1),
        "fingerprint": g.fingerprint(),
        "notices": notices,
    }
    cf = _closed_form(lg, with_diag=True)
    if cf is not None:
        doc["closed_form"] = cf
    config = {"dense_cap": cap, "strict": args.strict}
    doc["manifest"] = _manifest("exact", _input_block(args.source, kind, g), config,
                                {"load": t1 - t0, "exact": t2 - t1, "total": time.perf_counter() - t0})
    _emit(doc, ["diag", "resistance_distances"], args)
    return EXIT_OK


def cmd_generate(args):
    if args.family == "urt" and args.f is None:
        raise UsageError("urt needs --f")
    lg = generate(args.family, args.g, args.f)
    labels_path = args.output + ".labels"
    write_edge_list(lg.graph, args.output)
    write_labels(lg, labels_path)
    summary = {"family": lg.describe(), "n": lg.graph.node_count, "m": lg.graph.edge_count,
               "edges": args.output, "labels": labels_path, "fingerprint": lg.graph.fingerprint()}
    sys.stdout.write(json.dumps(summary) + "\n")
    return EXIT_OK


def _load_result(path, kind):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {kind} result {path!r}: {exc}") from None
    try:
        validate(doc, kind)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"{path}: not a valid {kind} result: {exc.message}") from None
    return doc


def cmd_compare(args):
    exact = _load_result(args.exact, "exact")
    approx = _load_result(args.approx, "approx")
    if exact["fingerprint"] != approx["fingerprint"]:
        raise UsageError(
            f"graph fingerprints differ ({exact['fingerprint']} vs {approx['fingerprint']})"
        )
    report = error_metrics(exact["diag"], approx["diag"], exact["kirchhoff"], approx["kirchhoff"])
    doc = dict(report.as_dict(), fingerprint=exact["fingerprint"])
    if args.format == "csv":
        sys.stdout.write("sigma,sigma_max,rho,n\n")
        sys.stdout.write(f"{report.sigma!r},{report.sigma_max!r},{report.rho!r},{report.n}\n")
    else:
        sys.stdout.write(json.dumps(doc) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _epsilon(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (0.0 < value <= 0.5):
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 0.5], got {value}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="lapdiag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lapdiag {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def output_opts(p):
        p.add_argument("-o", "--output", help="result file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--strict", action="store_true",
                       help="fail on disconnected input instead of using its largest component")

    p = sub.add_parser("approx", help="estimate the L^+ diagonal by random projection")
    p.add_argument("source")
    p.add_argument("-e", "--epsilon", type=_epsilon, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--preconditioner", choices=("tree", "diagonal", "none"), default="tree")
    output_opts(p)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("exact", help="dense L^+ diagonal, resistances and Foster sum")
    p.add_argument("source")
    p.add_argument("--dense-cap", type=_positive_int, default=None,
                   help="maximum N for dense work (default: $LAPDIAG_DENSE_CAP or 20000)")
    output_opts(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("generate", help="write a model network and its label file")
    p.add_argument("family", choices=("koch", "urt", "psfw"))
    p.add_argument("--g", type=int, required=True, help="generation")
    p.add_argument("--f", type=int, default=None, help="children per node (urt)")
    p.add_argument("-o", "--output", required=True, help="edge-list path; labels go to <output>.labels")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("compare", help="error metrics of an approx result against an exact one")
    p.add_argument("exact")
    p.add_argument("approx")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        sys.stderr.write(f"lapdiag {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except NumericalError as exc:
        sys.stderr.write(f"lapdiag {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
