from fractions import Fraction

import pytest

from src.errors import BudgetExceeded
from src.enumerator.word_enumerator import digit_prefix
from src.normality_stats.block_census import block_counts
from src.normality_stats.hot_spot import convergence_table, hot_spot_report


def test_block_counts_examples():
    census = block_counts([0, 1, 2, 0, 0], 2)
    assert census.counts == {(0, 1): 1, (1, 2): 1, (2, 0): 1, (0, 0): 1}
    assert block_counts([0, 0, 0], 1).counts == {(0,): 3}
    assert block_counts([0], 2).counts == {}
    with pytest.raises(ValueError):
        block_counts([0, 1], 0)


def test_block_counts_total(gls3):
    prefix = digit_prefix(gls3, 5000)
    for k in (1, 2, 3, 4):
        assert block_counts(prefix, k).total == 5000 - k + 1


def test_hot_spot_base10_first_ten(base10):
    rep = hot_spot_report(base10, 10, 1)
    assert (rep.rows["ratio"] == 1.0).all()
    assert rep.max_ratio == 1.0


def test_hot_spot_gls3_six_digits(gls3):
    rep = hot_spot_report(gls3, 6, 1)
    ratios = dict(zip(rep.rows["word"], rep.rows["ratio"]))
    assert ratios["0"] == pytest.approx(4 / 3)
    assert ratios["1"] == pytest.approx(2 / 3)
    assert ratios["2"] == pytest.approx(2 / 3)
    assert rep.rows.loc[rep.rows["word"] == "0", "count"].item() == 4


def test_hot_spot_single_window(random_systems):
    for sys in random_systems:
        rep = hot_spot_report(sys, 1, 1)
        assert rep.max_ratio == pytest.approx(float(1 / sys.measures[0]))


def test_hot_spot_row_cap(base10):
    config = {"hot_spot_row_cap": 50}
    with pytest.raises(BudgetExceeded):
        hot_spot_report(base10, 1000, 2, config=config)

    rep = hot_spot_report(base10, 1000, 2, config=config, on_budget="top")
    assert len(rep.rows) == 50
    # the 10 single digits outweigh every two-digit word
    assert (rep.rows["k"].iloc[:10] == 1).all()


def test_hot_spot_needs_n_at_least_k(gls3):
    with pytest.raises(ValueError):
        hot_spot_report(gls3, 2, 3)


def test_convergence_table_base10(base10):
    table = convergence_table(base10, [10], 1)
    assert table["max_abs_error"].iloc[0] == 0
    assert table["eps_N"].iloc[0] == "1/10"


def test_convergence_table_base2_against_explicit_prefix(base2):
    # enumeration gives 0, 1, 00, 01, 10, 11, 000, ...
    prefix = [0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0]
    table = convergence_table(base2, [2, 6, 14], 1)
    for N, err in zip(table["N"], table["max_abs_error"]):
        zeros = prefix[:N].count(0)
        expected = max(abs(Fraction(zeros, N) / Fraction(1, 2) - 1),
                       abs(Fraction(N - zeros, N) / Fraction(1, 2) - 1))
        assert err == pytest.approx(float(expected))


def test_convergence_table_census_and_order(gls3):
    table = convergence_table(gls3, [100, 1000, 10_000], 3)
    assert (table["census_total"] == table["N"] - 2).all()
    with pytest.raises(ValueError):
        convergence_table(gls3, [1000, 100], 3)


@pytest.mark.slow
def test_hot_spot_error_shrinks(gls3, base10):
    for sys in (gls3, base10):
        table = convergence_table(sys, [10_000, 100_000, 1_000_000, 10_000_000], 3)
        assert table["max_abs_error"].iloc[-1] < table["max_abs_error"].iloc[0]
        # hot spots stay bounded: no growth past the 10^5 level beyond 10%
        at_1e5 = table.loc[table["N"] == 100_000, "max_ratio"].item()
        assert table["max_ratio"].iloc[-1] <= 1.1 * at_1e5


def test_census_marginalizes_over_next_digit(random_systems):
    for sys in random_systems[:3]:
        prefix = digit_prefix(sys, 3000)
        for k in (1, 2):
            shorter = block_counts(prefix, k)
            longer = block_counts(prefix, k + 1)
            for s, c in shorter.counts.items():
                extended = sum(longer.count(s + (d,)) for d in range(sys.D))
                # only a block sitting at the very end has no next digit
                assert 0 <= c - extended <= 1
