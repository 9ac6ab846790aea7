"""Acceptance suite: one test per criterion, each printing PASS or FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.

Criterion 8 is known to fail at exactly one point: the closed-form mean
3(N+1)/7 first holds at N = 6 keys, but the criterion's range starts at
N = 5, where the exact mean is 13/5.  The test asserts the stated range
anyway; see notes in the repository docs and the boundary tests in
test_stats.py.
"""

import itertools
import math
import time
from collections import defaultdict
from contextlib import contextmanager
from fractions import Fraction

from btreehist import btree as B
from btreehist import historic as H
from btreehist import permutations as P
from btreehist import series as S
from btreehist import stats as ST

WORKED_PERM = (6, 1, 2, 4, 7, 5, 9, 8, 3)


@contextmanager
def criterion(label: str):
    start = time.time()
    try:
        yield
    except BaseException:
        print(f"FAIL  {label}  [{time.time() - start:.1f}s]")
        raise
    print(f"PASS  {label}  [{time.time() - start:.1f}s]")


def test_criterion_01_bijection_exhaustiveness():
    with criterion("1. bijection exhaustive, m=1 n<=8 and m=2 n<=7"):
        start = time.time()
        for m, nmax in ((1, 8), (2, 7)):
            for n in range(1, nmax + 1):
                trees = set()
                count = 0
                for hist in B.iter_histories(m, n):
                    t = H.history_to_historic(hist)
                    assert H.historic_to_history(t) == hist  # exact round trip
                    trees.add(t)
                    count += 1
                assert len(trees) == count  # injective, hence bijective
                expected = (
                    S.brute_force_historic_count(m, n - m) if n >= m else 1
                )
                assert count == expected
        assert time.time() - start < 60


def test_criterion_02_partition_of_sn():
    with criterion("2. permutation sets partition S_n, m=1 n<=8 (+ n=9 spot)"):
        start = time.time()
        for n in range(1, 9):
            groups = defaultdict(set)
            for p in itertools.permutations(range(1, n + 1)):
                _, hist, _ = B.run_permutation(1, p)
                groups[hist].add(p)
            total = 0
            for hist, members in groups.items():
                t = H.history_to_historic(hist)
                final = B.run_permutation(1, sorted(members)[0])[0]
                pi1 = P.psi_hat(hist)
                pi_iota = P.lift(pi1, final) if pi1 else ()
                stream = set(P.enumerate_perms(t, pi_iota))
                assert stream == members
                assert P.count_perms(t) == len(members)
                total += len(members)
            assert total == math.factorial(n)

        # n = 9 spot check on the worked example's tree
        _, hist9, _ = B.run_permutation(1, WORKED_PERM)
        t9 = H.history_to_historic(hist9)
        assert P.count_perms(t9) == 6**4 == 1296
        stream = list(P.enumerate_perms(t9, (2, 6, 8, 4)))
        assert len(stream) == len(set(stream)) == 1296
        for p in stream:
            assert B.run_permutation(1, p)[1] == hist9
        assert sum(P.count_perms(t) for t in H.iter_historic_trees(1, 9)) == math.factorial(9)
        assert time.time() - start < 300


def test_criterion_03_worked_example_end_to_end():
    with criterion("3. worked example: psi, iota, DAG, choice replay"):
        tree, hist, _ = B.run_permutation(1, WORKED_PERM)
        rec = P.psi(WORKED_PERM, 1)
        assert rec.standardized == (1, 3, 4, 2)
        assert P.iota(tree) == (2, 4, 6, 8)  # i -> 2i
        assert P.lift(rec.standardized, tree) == (2, 6, 8, 4)
        dag = P.build_dag(tree, (1, 3, 4, 2))
        labellings = list(P.topological_labellings(dag))
        assert len(labellings) == len(set(labellings)) == 3
        target = H.history_to_historic(hist)
        assert target in labellings
        choices = [
            ("place", 3, (2,)),
            ("order", (1,)),
            ("place", 1, (2,)),
            ("place", 1, (3,)),
            ("order", (3,)),
            ("order", (5,)),
            ("place", 3, (1,)),
            ("order", (7,)),
            ("order", (9,)),
        ]
        assert P.rebuild_with_choices(target, (2, 6, 8, 4), choices) == WORKED_PERM


def test_criterion_04_correspondence():
    with criterion("4. slot/leaf correspondence, every history n<=8, m in {1,2}"):
        for m in (1, 2):
            for n in range(1, 9):
                for hist in B.iter_histories(m, n):
                    t = H.history_to_historic(hist)
                    assert H.check_correspondence(t) == []


def test_criterion_05_history_counts():
    with criterion("5. count recurrence == explicit tree growth, n<=12, m in {1,2,3}"):
        for m in (1, 2, 3):
            table = S.history_counts(m, 12)
            for n in range(13):
                assert table.h[n] == S.brute_force_historic_count(m, n)


def test_criterion_06_growth_constants():
    with criterion("6. growth constants vs published values + flat-ratio slope"):
        start = time.time()
        est1 = S.estimate_rho(1, 5000)
        assert abs(est1.rho_inverse_estimate - 1 / 2.3758705509) < 1e-4
        table1 = {2: 3.7746, 3: 5.1792, 4: 6.5857, 5: 7.9928, 6: 9.3999}
        for m, target in table1.items():
            est = S.estimate_rho(m, 5000)
            assert abs(est.rho_estimate - target) < 2e-3, (m, est.rho_estimate)
        assert time.time() - start < 120
        for m in (1, 2):
            rep = S.conjecture_report(m, 4000)
            assert abs(rep.slope_last_decade) < 0.05


def test_criterion_07_weighted_totals():
    with criterion("7. weighted totals (n+m)! for n<=200 + explicit trees n<=9"):
        for m in (1, 2, 3):
            table = ST.bivariate_counts(m, 200)
            for n in range(201):
                assert table.total(n) == math.factorial(n + m)
        for n in range(10):
            trees = (
                list(H.iter_reduced_trees(1, n))
                if n
                else [H.ReducedHistoricTree(1, (), ())]
            )
            assert sum(ST.tree_weight(t) for t in trees) == math.factorial(n + 1)


def test_criterion_08_exact_moments():
    # Known red at N=5: the exact mean there is 13/5, not 3*6/7; the
    # closed form starts at N=6.  Asserted as stated regardless.
    with criterion("8. closed-form mean (4 < N <= 60) and variance (11 < N <= 60)"):
        violations = []
        for key_count in range(5, 61):
            lm = ST.leaf_moments(1, key_count)
            if lm.mean != Fraction(3, 7) * (key_count + 1):
                violations.append(("mean", key_count, lm.mean))
            if key_count > 11 and lm.variance != Fraction(12, 637) * (key_count + 1):
                violations.append(("variance", key_count, lm.variance))
        assert not violations, f"exact-moment mismatches: {violations}"


def test_criterion_09_kappa_table():
    with criterion("9. kappa(m) equals all ten published rationals exactly"):
        table2 = {
            1: Fraction(3, 7),
            2: Fraction(10, 37),
            3: Fraction(105, 533),
            4: Fraction(252, 1627),
            5: Fraction(2310, 18107),
            6: Fraction(25740, 237371),
            7: Fraction(9009, 95549),
            8: Fraction(136136, 1632341),
            9: Fraction(11639628, 155685007),
            10: Fraction(10581480, 156188887),
        }
        for m, expect in table2.items():
            assert ST.kappa(m).value == expect


def test_criterion_10_m2_mean_trend():
    with criterion("10. m=2 mean/(n+3) within 1e-3 of 10/37 at n=200"):
        trend = ST.mean_ratio_trend(2, 200)
        assert abs(trend[200] - Fraction(10, 37)) < Fraction(1, 1000)


def test_criterion_11_monte_carlo():
    with criterion("11. Monte Carlo mean within 5 SE + skewness below 0.1"):
        start = time.time()
        sample = ST.monte_carlo_leaves(1, 10_000, trials=1_000, seed=20240901)
        target = 3 / 7 * (10_000 + 1)
        assert abs(sample.mean - target) < 5 * sample.std_error
        big = ST.monte_carlo_leaves(1, 10_000, trials=10_000, seed=20240901)
        assert abs(big.skewness) < 0.1
        assert time.time() - start < 300
