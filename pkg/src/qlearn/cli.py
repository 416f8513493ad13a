"""Command-line experiment harness.

Exit codes: 0 success, 1 usage or parse error, 2 resource cap exceeded,
3 guarantee or suite violation.

CSV column orders are fixed:

* ``class``:  class,size,n,gamma_hat,gamma_witness_subset,gamma_witness_query,vc_dim,vc_witness
* ``bounds``: class,model,bound,value
* ``learn``:  one row per run record, columns in the order of the JSON record
* ``report``: see REPORT_COLUMNS
* ``verify``: suite,passed,checks
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from qlearn.bounds import bound_report
from qlearn.classical import (
    MembershipOracle,
    PacParams,
    ProtocolViolation,
    classical_pac_run,
    empirical_error,
    exact_run_record,
    greedy_exact_learner,
    hard_pac_distribution,
    similarity_oracle_for,
    trial_rng,
)
from qlearn.concepts import (
    CapExceeded,
    ConceptClass,
    Distribution,
    builtin_classes,
    gamma_hat,
    load_class,
    parse_class_spec,
    vc_dimension,
)
from qlearn.learners import build_parity_learner, certify_learner, qex_sampling_learner
from qlearn.quantum import NetworkError, network_from_json
from qlearn.verify import consistency_data, consistency_violations, run_suites

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_VIOLATION = 0, 1, 2, 3

REPORT_COLUMNS = [
    "class", "size", "n", "gamma_hat", "vc_dim",
    "classical_exact_lower", "classical_exact_upper", "greedy_worst_honest",
    "greedy_vs_majority", "greedy_vs_similarity",
    "quantum_exact_lower", "quantum_T",
    "pac_samples", "classical_pac_lower", "quantum_pac_lower",
]


class UsageError(Exception):
    pass


class Violation(Exception):
    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, with_class: bool = True) -> None:
    if with_class:
        p.add_argument("spec", nargs="?", help='inline class spec, e.g. "parity n=3"')
        p.add_argument("--class-file", help="concept-class JSON file")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qlearn", description="Quantum vs classical learning laboratory")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("class", help="summarise a concept class")
    _common(p)

    p = sub.add_parser("learn", help="run a learner over a class")
    _common(p)
    p.add_argument("--task", required=True,
                   choices=("exact-classical", "exact-quantum", "pac-classical", "pac-quantum", "bounds", "verify"))
    p.add_argument("--mode", default="honest", choices=("honest", "adversary", "majority", "similarity"),
                   help="membership oracle for exact-classical")
    p.add_argument("--dist", default="uniform", choices=("uniform", "hard"), help="example distribution for PAC tasks")
    p.add_argument("--network", help="network JSON to certify for exact-quantum")

    p = sub.add_parser("bounds", help="print every bound for a class")
    _common(p)

    p = sub.add_parser("verify", help="run the property suites")
    _common(p, with_class=False)
    p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    p.add_argument("--inject-fault", action="store_true", help="flip one QMQ answer bit (mutation smoke test)")

    p = sub.add_parser("report", help="bound-vs-measured table over the built-in classes")
    _common(p, with_class=False)
    return parser


# ------------------------------------------------------------- helpers ---

def resolve_class(args) -> tuple[str, ConceptClass]:
    if args.class_file:
        path = Path(args.class_file)
        if not path.exists():
            raise UsageError(f"class file {path} does not exist")
        try:
            return path.stem, load_class(path)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"malformed class file {path}: {exc}") from exc
    if not args.spec:
        raise UsageError("give a class spec or --class-file")
    return args.spec, parse_class_spec(args.spec)


def _params(args) -> PacParams:
    return PacParams(args.epsilon, args.delta)


def _csv(rows: list[list], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (list, tuple)):
        return " ".join(map(str, v))
    if v is None:
        return ""
    return v


def render(payload, args, header: list[str] | None = None, rows: list[list] | None = None) -> str:
    if args.format == "csv" and header is not None:
        return _csv([[_cell(v) for v in r] for r in rows], header)
    return json.dumps(payload, indent=2) + "\n"


# ------------------------------------------------------------- commands ---

def class_summary(name: str, cls: ConceptClass) -> dict:
    stats = gamma_hat(cls)
    d, witness = vc_dimension(cls)
    return {
        "class": name,
        "size": len(cls),
        "n": cls.n,
        "gamma_hat": str(stats.gamma_hat),
        "gamma_witness_subset": list(stats.witness_subset),
        "gamma_witness_query": stats.witness_query,
        "vc_dim": d,
        "vc_witness": list(witness),
    }


def cmd_class(args) -> str:
    summary = class_summary(*resolve_class(args))
    return render(summary, args, list(summary), [list(summary.values())])


def cmd_bounds(args) -> str:
    name, cls = resolve_class(args)
    rep = bound_report(cls, _params(args))
    return render({"class": name, **rep.to_json()}, args, ["class", "model", "bound", "value"],
                  [list(r) for r in rep.rows(name)])


def _exact_classical(name: str, cls: ConceptClass, args) -> dict:
    rep = bound_report(cls)
    records = []
    if args.mode == "honest":
        for c in cls:
            h, q = greedy_exact_learner(cls, MembershipOracle.honest(c))
            records.append(exact_run_record(name, c, "honest", q, h, h == c, args.seed))
        lower_ok = max(r["queries"] for r in records) >= rep.classical.exact_lower
    else:
        if args.mode == "similarity":
            oracle = similarity_oracle_for(cls)
            bound = rep.classical.similarity
        else:
            oracle = MembershipOracle.majority_adversary(cls)
            bound = rep.classical.size
        h, q = greedy_exact_learner(cls, oracle)
        target = oracle.universe[oracle.live[0]]
        mode = "adversary_similarity" if args.mode == "similarity" else "adversary_majority"
        records.append(exact_run_record(name, target, mode, q, h, h == target, args.seed))
        lower_ok = oracle.forced >= bound
    max_q = max(r["queries"] for r in records)
    summary = {
        "max_queries": max_q,
        "all_success": all(r["success"] for r in records),
        "classical_lower": rep.classical.exact_lower,
        "classical_upper": rep.classical.upper,
        "lower_bound_respected": bool(lower_ok),
    }
    out = {"task": "exact-classical", "class": name, "seed": args.seed, "records": records, "summary": summary}
    if not (summary["all_success"] and max_q <= rep.classical.upper and lower_ok):
        raise Violation("exact-classical guarantee violated", out)
    return out


def _exact_quantum(name: str, cls: ConceptClass, args) -> dict:
    if args.network:
        with open(args.network) as fh:
            net = network_from_json(json.load(fh), n=cls.n)
    elif cls.kind == "parity":
        net = build_parity_learner(cls.n)
    else:
        raise UsageError("no built-in quantum learner for this class; pass --network")
    cert = certify_learner(net, cls)
    rep = bound_report(cls)
    bounds = {"similarity": rep.quantum.similarity, "size": rep.quantum.size}
    out = {"task": "exact-quantum", "seed": args.seed, **cert.to_json(name, bounds)}
    if not cert.verdict:
        raise Violation("certification failed: min success below 2/3", out)
    if cert.T < rep.quantum.exact_lower:
        raise Violation("certified learner beats a quantum lower bound", out)
    return out


def _pac(name: str, cls: ConceptClass, args, quantum: bool) -> dict:
    params = _params(args)
    d = vc_dimension(cls)[0]
    dist = hard_pac_distribution(cls) if args.dist == "hard" else Distribution.uniform(cls.n)
    records = []
    for ti, target in enumerate(cls):
        wins = 0
        for k in range(args.trials):
            rng = trial_rng(args.seed, k * len(cls) + ti)
            if quantum:
                h = qex_sampling_learner(cls, target, dist, params, rng)
            else:
                h = classical_pac_run(cls, target, dist, params, rng, d)
            wins += empirical_error(h, target, dist) <= params.epsilon
        records.append({"target": target.to_hex(), "class": name, "mode": args.dist,
                        "success_rate": wins / args.trials, "seed": args.seed})
    rate = min(r["success_rate"] for r in records)
    out = {"task": "pac-quantum" if quantum else "pac-classical", "class": name, "seed": args.seed,
           "epsilon": params.epsilon, "delta": params.delta, "records": records,
           "summary": {"min_success_rate": rate, "required": 1 - params.delta,
                       "sample_size": bound_report(cls, params).classical.pac_upper}}
    if rate < 1 - params.delta:
        raise Violation("PAC success rate below 1 - delta", out)
    return out


def cmd_learn(args) -> str:
    if args.task == "bounds":
        return cmd_bounds(args)
    if args.task == "verify":
        return cmd_verify(args)
    name, cls = resolve_class(args)
    if args.task == "exact-classical":
        out = _exact_classical(name, cls, args)
    elif args.task == "exact-quantum":
        out = _exact_quantum(name, cls, args)
    else:
        out = _pac(name, cls, args, quantum=args.task == "pac-quantum")
    records = out.get("records") or []
    if args.format == "csv" and records:
        return render(out, args, list(records[0]), [list(r.values()) for r in records])
    return render(out, args)


def cmd_verify(args) -> str:
    try:
        results = run_suites(getattr(args, "suite", None), inject_fault=getattr(args, "inject_fault", False))
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    payload = {"passed": all(r.passed for r in results), "suites": [r.to_json() for r in results]}
    text = render(payload, args, ["suite", "passed", "checks"], [[r.name, r.passed, r.checks] for r in results])
    if not payload["passed"]:
        raise Violation("verification suite failed", text)
    return text


def cmd_report(args) -> str:
    params = _params(args)
    rows = consistency_data(params)
    classes = builtin_classes()
    table = []
    for r in rows:
        cls = classes[r["class"]]
        full = {"class": r["class"], "size": len(cls), "n": cls.n,
                "gamma_hat": str(gamma_hat(cls).gamma_hat), "vc_dim": vc_dimension(cls)[0], **r}
        table.append({k: full[k] for k in REPORT_COLUMNS})
    bad = consistency_violations(rows)
    payload = {"epsilon": params.epsilon, "delta": params.delta, "rows": table, "violations": bad}
    text = render(payload, args, REPORT_COLUMNS, [list(t.values()) for t in table])
    if bad:
        raise Violation("bound consistency violated", text)
    return text


COMMANDS = {"class": cmd_class, "learn": cmd_learn, "bounds": cmd_bounds, "verify": cmd_verify, "report": cmd_report}


def _emit(text: str, args) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _emit(COMMANDS[args.command](args), args)
        return EXIT_OK
    except CapExceeded as exc:
        print(f"qlearn: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except Violation as exc:
        payload = exc.payload
        _emit(payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n", args)
        print(f"qlearn: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except ProtocolViolation as exc:
        print(f"qlearn: protocol violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (UsageError, ValueError, NetworkError, json.JSONDecodeError) as exc:
        print(f"qlearn: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
