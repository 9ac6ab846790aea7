"""Command-line front end.

One binary, subcommand style; JSON by default, CSV and Graphviz DOT
opt-in.  Exit codes: 0 on success, 1 when a validation check fails,
2 on malformed input or flags.  Every output embeds the parameters it
was produced from.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__, btree, historic, permutations, series, stats

DEFAULT_N = int(os.environ.get("BTREEHIST_DEFAULT_N", "2000"))


def _emit(args, payload: dict) -> None:
    payload = {"version": __version__, **payload}
    if getattr(args, "format", "json") == "csv":
        rows = payload.get("rows")
        if rows is None:
            raise ValueError("this command has no CSV table; use --format json")
        cols = list(rows[0]) if rows else []
        print(",".join(cols))
        for r in rows:
            print(",".join(str(r[c]) for c in cols))
    else:
        print(json.dumps(payload, indent=2, default=str))


def _parse_perm(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ValueError(f"cannot parse permutation {text!r}")


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def cmd_insert(args) -> int:
    pi = _parse_perm(args.perm) if args.perm else _load_json(args.file)["perm"]
    tree, hist, traces = btree.run_permutation(args.m, pi)
    if args.format == "dot":
        print(btree.btree_dot(tree))
        return 0
    _emit(
        args,
        {
            "command": "insert",
            "m": args.m,
            "perm": list(pi),
            "tree": btree.keyed_to_dict(tree),
            "shape": btree.shape_to_dict(btree.shape_of(tree)),
            "history": btree.history_to_dict(hist),
            "splits": sum(t.splits_propagated for t in traces),
            "valid": not btree.validate(tree),
        },
    )
    return 0 if not btree.validate(tree) else 1


def cmd_bijection(args) -> int:
    data = _load_json(args.file)
    if "leaf_choices" in data:
        hist = btree.history_from_dict(data)
        tree = historic.history_to_historic(hist)
        round_trip = historic.historic_to_history(tree) == hist
        if args.format == "dot":
            print(historic.historic_dot(tree))
            return 0 if round_trip else 1
        _emit(
            args,
            {
                "command": "bijection",
                "direction": "history->historic",
                "m": hist.m,
                "historic": historic.historic_to_dict(tree),
                "round_trip_ok": round_trip,
            },
        )
    else:
        tree = historic.historic_from_dict(data)
        ok, why = historic.is_historic(tree)
        if not ok:
            raise ValueError(f"input is not historic: {why}")
        hist = historic.historic_to_history(tree)
        round_trip = historic.history_to_historic(hist) == tree
        _emit(
            args,
            {
                "command": "bijection",
                "direction": "historic->history",
                "m": tree.m,
                "history": btree.history_to_dict(hist),
                "round_trip_ok": round_trip,
            },
        )
    return 0 if round_trip else 1


def cmd_perms(args) -> int:
    data = _load_json(args.file)
    if "parent" in data:
        tree = historic.historic_from_dict(data)
        if not isinstance(tree, historic.HistoricTree):
            raise ValueError("permutation sets need an unreduced historic tree")
        m = tree.m
        hist = historic.historic_to_history(tree)
        final = btree.replay_history(hist)[-1]
        keyed = _keyed_from_shape(final)
        pi1 = permutations.psi_hat(hist)
        pi_iota = permutations.lift(pi1, keyed) if pi1 else ()
        count = permutations.count_perms(tree)
        stream = permutations.enumerate_perms(tree, pi_iota)
    else:
        keyed = btree.keyed_from_dict(data)
        m = keyed.m
        problems = btree.validate(keyed)
        if problems:
            raise ValueError("; ".join(problems))
        count = sum(
            permutations.count_perms(h)
            for h in _histories_of_tree(keyed)
        )
        stream = permutations.underline_pi(keyed)
    if args.m is not None and args.m != m:
        raise ValueError(f"--m {args.m} does not match the file's m={m}")
    if args.count:
        _emit(args, {"command": "perms", "m": m, "count": str(count)})
        return 0
    limit = args.limit
    emitted = 0
    for p in stream:
        print(json.dumps(list(p)))
        emitted += 1
        if limit and emitted >= limit:
            break
    return 0


def _keyed_from_shape(shape: btree.BTreeShape) -> btree.KeyedBTree:
    """Keyed copy of a shape, keys 1..n assigned in in-order order."""
    counter = [0]

    def take(k: int) -> tuple[int, ...]:
        out = []
        for _ in range(k):
            counter[0] += 1
            out.append(counter[0])
        return tuple(out)

    def conv(node) -> btree.KNode:
        if isinstance(node, int):
            return btree.KNode(take(node))
        kids = []
        keys = []
        for i, c in enumerate(node):
            kids.append(conv(c))
            if i < len(node) - 1:
                counter[0] += 1
                keys.append(counter[0])
        return btree.KNode(tuple(keys), tuple(kids))

    return btree.KeyedBTree(shape.m, conv(shape.root))


def _histories_of_tree(keyed: btree.KeyedBTree):
    """Historic trees of every history producing this tree's shape."""
    target = btree.shape_of(keyed)
    n = btree.total_keys(keyed)
    for hist in btree.iter_histories(keyed.m, n):
        if btree.replay_history(hist)[-1] == target:
            yield historic.history_to_historic(hist)


def cmd_enumerate(args) -> int:
    table = series.history_counts(args.m, args.N)
    _emit(
        args,
        {
            "command": "enumerate",
            "m": args.m,
            "N": args.N,
            "rows": series.counts_to_rows(table),
        },
    )
    return 0


def cmd_rho(args) -> int:
    est = series.estimate_rho(args.m, args.N, method=args.method)
    payload = {
        "command": "rho",
        "m": args.m,
        "N": args.N,
        "method": est.method,
        "rho_estimate": est.rho_estimate,
        "rho_inverse_estimate": est.rho_inverse_estimate,
        "polynomial_exponent_estimate": est.polynomial_exponent_estimate,
    }
    if args.report:
        rep = series.conjecture_report(args.m, args.N, rho=est.rho_estimate)
        payload["conjecture"] = {
            "slope_last_decade": rep.slope_last_decade,
            "insufficient_range": rep.insufficient_range,
            "last_ratio": rep.ratios[-1],
        }
    _emit(args, payload)
    return 0


def cmd_stats(args) -> int:
    if args.mc:
        if args.seed is None:
            raise ValueError("--seed is required for Monte Carlo runs")
        sample = stats.monte_carlo_leaves(args.m, args.keys, args.trials, args.seed)
        _emit(
            args,
            {
                "command": "stats",
                "mode": "monte-carlo",
                "m": args.m,
                "keys": args.keys,
                "trials": args.trials,
                "seed": args.seed,
                "mean": sample.mean,
                "variance": sample.variance,
                "skewness": sample.skewness,
                "std_error": sample.std_error,
                "rows": [
                    {"leaves": k, "count": v} for k, v in sample.histogram.items()
                ],
            },
        )
    elif args.keys is not None:
        lm = stats.leaf_moments(args.m, args.keys, with_distribution=True)
        _emit(
            args,
            {
                "command": "stats",
                "mode": "exact-moments",
                "m": args.m,
                "keys": args.keys,
                "mean": str(lm.mean),
                "mean_float": float(lm.mean),
                "variance": str(lm.variance),
                "variance_float": float(lm.variance),
                "rows": [
                    {"leaves": e, "probability": str(p)}
                    for e, p in (lm.distribution or {}).items()
                ],
            },
        )
    else:
        trend = stats.mean_ratio_trend(args.m, args.N)
        limit = stats.kappa(args.m)
        _emit(
            args,
            {
                "command": "stats",
                "mode": "mean-ratio-trend",
                "m": args.m,
                "N": args.N,
                "kappa_over_factorial": str(limit.value),
                "rows": [
                    {"n": n, "ratio": str(r), "ratio_float": float(r)}
                    for n, r in enumerate(trend)
                ],
            },
        )
    return 0


def cmd_selftest(args) -> int:
    failures = 0

    def check(name: str, ok: bool):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures += 1

    for m, nmax in ((1, 6), (2, 5)):
        good = True
        for n in range(1, nmax + 1):
            for hist in btree.iter_histories(m, n):
                t = historic.history_to_historic(hist)
                if historic.historic_to_history(t) != hist:
                    good = False
                if historic.check_correspondence(t):
                    good = False
        check(f"bijection round trip + correspondence, m={m}, n<={nmax}", good)

    import itertools
    from collections import defaultdict

    good = True
    for n in range(1, 6):
        groups = defaultdict(set)
        for p in itertools.permutations(range(1, n + 1)):
            _, hh, _ = btree.run_permutation(1, p)
            groups[hh].add(p)
        for hh, members in groups.items():
            ht = historic.history_to_historic(hh)
            if permutations.count_perms(ht) != len(members):
                good = False
    check("permutation counts match brute force, m=1, n<=5", good)

    table = series.history_counts(1, 9)
    check("count recurrence vs growth oracle, n<=9", not series.check_table(table, 9))

    from math import factorial

    tab = stats.bivariate_counts(1, 40)
    check(
        "weighted totals equal (n+1)!, n<=40",
        all(tab.total(n) == factorial(n + 1) for n in range(41)),
    )
    check(
        "kappa(1..3) = 3/7, 10/37, 105/533",
        [stats.kappa(m).value for m in (1, 2, 3)]
        == [Fraction(3, 7), Fraction(10, 37), Fraction(105, 533)],
    )
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="btreehist",
        description="B-tree insertion histories, bijections and statistics",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("insert", help="run a key permutation through insertion")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--perm", help="comma or space separated permutation of 1..n")
    sp.add_argument("--file", help="JSON file with a 'perm' array")
    sp.add_argument("--format", choices=("json", "dot"), default="json")
    sp.set_defaults(func=cmd_insert)

    sp = sub.add_parser("bijection", help="convert history <-> historic tree")
    sp.add_argument("--file", required=True, help="history or historic-tree JSON")
    sp.add_argument("--format", choices=("json", "dot"), default="json")
    sp.set_defaults(func=cmd_bijection)

    sp = sub.add_parser("perms", help="count or list realising permutations")
    sp.add_argument("--m", type=int, help="cross-checked against the file's m")
    sp.add_argument("--file", required=True, help="keyed-tree or historic-tree JSON")
    sp.add_argument("--count", action="store_true")
    sp.add_argument("--limit", type=int, default=0, help="stop after this many")
    sp.add_argument("--format", choices=("json",), default="json")
    sp.set_defaults(func=cmd_perms)

    sp = sub.add_parser("enumerate", help="exact history counts h_0..h_N")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--N", type=int, default=DEFAULT_N)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("rho", help="estimate the growth constant")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--N", type=int, default=DEFAULT_N)
    sp.add_argument("--method", choices=("aitken", "ratio"), default="aitken")
    sp.add_argument("--report", action="store_true", help="add conjecture ratios")
    sp.add_argument("--format", choices=("json",), default="json")
    sp.set_defaults(func=cmd_rho)

    sp = sub.add_parser("stats", help="leaf-count statistics")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--keys", type=int, help="key count for exact moments or MC")
    sp.add_argument("--N", type=int, default=200, help="trend length without --keys")
    sp.add_argument("--exact", action="store_true", help="exact moments (default)")
    sp.add_argument("--mc", action="store_true", help="Monte Carlo instead of exact")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("selftest", help="quick cross-validation suite")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
