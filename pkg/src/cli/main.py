from __future__ import annotations

import contextlib
import logging
import sys
from fractions import Fraction

import click

from src import __version__
from src.config.run_config import RUN_CONFIG
from src.errors import BudgetExceeded, ChampernowneError
from src.fibred_system.config_io import SCHEMA_HELP, format_rational, load_system, parse_rational
from src.fibred_system.digit_system import parse_word, word_symbols
from src.enumerator.word_enumerator import TIE_BREAKS, WordEnumerator
from src.normality_stats.hot_spot import convergence_table, hot_spot_report
from src.simplex_sums.sums import S_for_string, log_abs, parse_eps_range, sbound_ratio_scan
from src.asymptotics.hyperplane import H_sums, hbound_scan
from src.asymptotics.laplace import (
    concavity_check,
    gradient_check,
    laplace_constant,
    laplace_maximizer,
    taylor_residual,
    taylor_slice,
)
from src.asymptotics.lemmas import gaussian_sum_check
from src.asymptotics.sandwich import sandwich_check
from src.verification.battery import battery_failed, run_battery
from src.cli.context import RunConfig
from src.cli.reports import FORMATS, ReportWriter

logger = logging.getLogger(__name__)

LAPLACE_CHECKS = ("max", "hessian", "taylor", "concavity", "gauss", "sandwich", "hbound", "estimate")


@contextlib.contextmanager
def _usage_errors():
    """Report bad input as a usage error (exit 2) with the config schema."""
    try:
        yield
    except (ChampernowneError, ValueError, FileNotFoundError) as e:
        raise click.UsageError(f"{e}\n\n{SCHEMA_HELP}")


@contextlib.contextmanager
def _open_output(path: str | None):
    if path is None:
        yield click.get_text_stream("stdout")
    else:
        with open(path, "w", newline="") as f:
            yield f


def _system_option(default: str):
    return click.option("--system", "system_source", default=default, show_default=True,
                        help="JSON config path, preset name (base10, base2, gls3) or inline '1/2,1/4,1/4'.")


def _format_option():
    return click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
@click.option("-q", "--quiet", is_flag=True, help="Warnings and errors only.")
@click.version_option(__version__, prog_name="champernowne")
def cli(verbose: bool, quiet: bool):
    """Generalized Champernowne numbers for finite-digit Lüroth series."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="[%(levelname)s] %(message)s", stream=sys.stderr, force=True)


# -----------------------------
# gen
# -----------------------------
@cli.command()
@_system_option("base10")
@click.option("--n", "n_digits", type=int, required=True, help="Number of digits to emit.")
@click.option("--tie-break", type=click.Choice(TIE_BREAKS), default=RUN_CONFIG["tie_break"], show_default=True)
@click.option("--boundaries", type=click.Path(dir_okay=False), default=None,
              help="Write a CSV index of word boundaries (word, offset, length, measure).")
@click.option("--budget", type=int, default=RUN_CONFIG["gen_digit_budget"], show_default=True,
              help="Refuse runs longer than this many digits.")
def gen(system_source: str, n_digits: int, tie_break: str, boundaries: str | None, budget: int):
    """Write the first N digits of x_S to stdout."""
    with _usage_errors():
        system = load_system(system_source)
        if n_digits < 0:
            raise ValueError(f"--n must be non-negative, got {n_digits}")
        if n_digits > budget:
            raise BudgetExceeded(f"--n {n_digits} exceeds the digit budget {budget}")

    run = RunConfig("gen", system, system_source, {"n": n_digits, "tie_break": tie_break})
    err = click.get_text_stream("stderr")
    for key, value in run.metadata().items():
        err.write(f"# {key}: {value}\n")

    sep = "" if all(len(s) == 1 for s in system.symbols) else " "
    out = click.get_text_stream("stdout")
    enum = WordEnumerator(system, tie_break)

    with contextlib.ExitStack() as stack:
        index = None
        if boundaries is not None:
            f = stack.enter_context(open(boundaries, "w", newline=""))
            index = stack.enter_context(ReportWriter(f, "csv", run.metadata()))

        written = 0
        buffer: list[str] = []
        while written < n_digits:
            w, m = enum.pop()
            take = w[:n_digits - written]
            if index is not None:
                index.write_row({"word": enum.emitted_count, "offset": written,
                                 "length": len(w), "measure": format_rational(m)})
            buffer.append((sep if written else "") + word_symbols(system, take, sep=sep))
            written += len(take)
            if len(buffer) >= 4096:
                out.write("".join(buffer))
                buffer.clear()
        out.write("".join(buffer) + "\n")

    logger.info(f"Emitted {enum.emitted_count} words; frontier high-water mark {enum.frontier_high_water}")


# -----------------------------
# stats
# -----------------------------
@cli.command()
@_system_option("base10")
@click.option("--N", "N", type=int, default=100_000, show_default=True, help="Prefix length.")
@click.option("--K", "K", type=int, default=RUN_CONFIG["default_K"], show_default=True, help="Max block length.")
@_format_option()
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--on-budget", type=click.Choice(["error", "top"]), default="error", show_default=True)
@click.option("--table", default=None, help="Comma-separated prefix lengths for a convergence table.")
@click.option("--tie-break", type=click.Choice(TIE_BREAKS), default=RUN_CONFIG["tie_break"], show_default=True)
def stats(system_source, N, K, fmt, output, on_budget, table, tie_break):
    """Block frequencies against cylinder measures (hot-spot ratios)."""
    with _usage_errors():
        system = load_system(system_source)
        params = {"K": K, "on_budget": on_budget, "tie_break": tie_break}
        if table:
            Ns = [int(x) for x in table.split(",") if x.strip()]
            df = convergence_table(system, Ns, K, on_budget=on_budget, tie_break=tie_break)
            params["Ns"] = Ns
        else:
            rep = hot_spot_report(system, N, K, on_budget=on_budget, tie_break=tie_break)
            df = rep.rows
            params.update({"N": N, "max_ratio": rep.max_ratio, "min_ratio": rep.min_ratio})

    run = RunConfig("stats", system, system_source, params, fmt)
    with _open_output(output) as f, ReportWriter(f, fmt, run.metadata()) as writer:
        writer.write_frame(df)


# -----------------------------
# sums
# -----------------------------
@cli.command()
@_system_option("base2")
@click.option("--eps", "eps_values", multiple=True, help="Threshold eps (p/q or 2^-k); repeatable.")
@click.option("--eps-range", default=None, help="Dyadic range such as '2^-8..2^-40'.")
@click.option("--string", "word", default=None, help="Word s (in system symbols) for S(eps; s).")
@click.option("--exact/--float", "exact", default=True, show_default=True,
              help="Exact integer sums, or the log-gamma float path only.")
@_format_option()
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--n-jobs", type=int, default=1, show_default=True)
def sums(system_source, eps_values, eps_range, word, exact, fmt, output, n_jobs):
    """Lattice sums S(eps), S#(eps) over T_eps (or S(eps; s) with --string)."""
    path = "exact" if exact else "float"
    with _usage_errors():
        system = load_system(system_source)
        eps_list = [parse_rational(e) for e in eps_values]
        if eps_range:
            eps_list += parse_eps_range(eps_range)
        if not eps_list:
            raise ValueError("Give at least one --eps or an --eps-range")
        eps_list = sorted(set(eps_list), reverse=True)

        params = {"path": path, "n_eps": len(eps_list)}
        if word is not None:
            s = parse_word(system, word)
            params["string"] = word
            rows = []
            for eps in eps_list:
                res = S_for_string(system, eps, s, path)
                rows.append({"eps": format_rational(eps), "string": word,
                             "S_s": res.value if res.value is not None else res.float_value,
                             "lattice_count": res.lattice_count})
        else:
            rows = sbound_ratio_scan(system, eps_list, path, n_jobs=n_jobs).to_dict(orient="records")

    run = RunConfig("sums", system, system_source, params, fmt)
    with _open_output(output) as f, ReportWriter(f, fmt, run.metadata()) as writer:
        writer.write_rows(rows)


# -----------------------------
# laplace
# -----------------------------
def _laplace_rows(system, eps: Fraction, check: str, seed: int, samples: int | None) -> tuple[list[dict], dict]:
    if check in ("max", "hessian"):
        analysis = laplace_maximizer(system, eps)
        d = analysis.to_dict()
        if check == "max":
            d = {k: d[k] for k in ("eps", "L", "p", "f_at_p", "minus_log_eps")}
            d["fmax_rel_error"] = abs(analysis.f_at_p + analysis.log_eps) / abs(analysis.log_eps)
            d["max_gradient"] = gradient_check(system, eps, samples or RUN_CONFIG["gradient_directions"], seed)
        return [d], {}

    if check == "taylor":
        n = samples or RUN_CONFIG["taylor_samples"]
        extra = {
            "residual_taylor": taylor_residual(system, eps, n, seed, convention="taylor"),
            "residual_literal": taylor_residual(system, eps, n, seed, convention="literal"),
        }
        df = taylor_slice(system, eps)
        extra["max_third_derivative"] = df.attrs["max_third_derivative"]
        return df.to_dict(orient="records"), extra

    if check == "concavity":
        return [concavity_check(system, eps, samples or RUN_CONFIG["concavity_trials"], seed)], {}

    if check == "gauss":
        rows = []
        for Z in (1e4, 1e6):
            for C in (0.5, 1.0, 2.0):
                total, ref, rel = gaussian_sum_check(Z, C)
                rows.append({"Z": Z, "C": C, "sum": total, "reference": ref, "rel_error": rel})
        return rows, {}

    if check in ("sandwich", "hbound"):
        eps_list = [e for e in parse_eps_range("2^-8..2^-200") if e >= eps]
        df = sandwich_check(system, eps_list) if check == "sandwich" else hbound_scan(system, eps_list)
        return df.to_dict(orient="records"), {}

    # estimate
    const = laplace_constant(system)
    h = H_sums(system, eps)
    const["H_sharp_eps"] = h.H_sharp * float(eps)
    const["H_norm"] = h.H * float(eps) / log_abs(eps)
    return [const], {}


@cli.command()
@_system_option("gls3")
@click.option("--eps", default="2^-20", show_default=True)
@click.option("--check", type=click.Choice(LAPLACE_CHECKS), default="max", show_default=True)
@click.option("--seed", type=int, default=RUN_CONFIG["seed"], show_default=True)
@click.option("--samples", type=int, default=None, help="Random samples / directions (check-specific default).")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def laplace(system_source, eps, check, seed, samples, fmt, output):
    """Maximizer, Hessian, Taylor and lemma checks for the hyperplane sums."""
    with _usage_errors():
        system = load_system(system_source)
        eps = parse_rational(eps)
        rows, extra = _laplace_rows(system, eps, check, seed, samples)

    params = {"eps": format_rational(eps), "check": check, "samples": samples, **extra}
    run = RunConfig("laplace", system, system_source, params, fmt, seed)
    with _open_output(output) as f, ReportWriter(f, fmt, run.metadata()) as writer:
        writer.write_rows(rows)


# -----------------------------
# verify
# -----------------------------
@cli.command()
@_system_option("gls3")
@click.option("--seed", type=int, default=RUN_CONFIG["seed"], show_default=True)
@click.option("--quick", is_flag=True, help="Smaller sample sizes and ranges.")
@click.pass_context
def verify(ctx, system_source, seed, quick):
    """Run the invariant battery; exit 1 if any check fails."""
    with _usage_errors():
        system = load_system(system_source)

    results = run_battery(system, seed=seed, quick=quick)
    for r in results.itertuples(index=False):
        status = "SKIP" if r.passed is None else "PASS" if r.passed else "FAIL"
        click.echo(f"{status:4}  {r.check}  observed={r.observed}  expected={r.expected}  {r.detail}".rstrip())

    if battery_failed(results):
        failed = results[results["passed"] == False]  # noqa: E712
        click.echo(f"{len(failed)} check(s) failed: {', '.join(failed['check'])}", err=True)
        ctx.exit(1)
