"""Command-line interface: simulation, coefficients, certificates, campaigns.

Exit codes: 0 success, 1 verification failure, 2 usage/config error,
3 resource-limit error.  JSON outputs carry 17-significant-digit floats and
sorted keys, so identical invocations produce identical bytes; CSV outputs
start with `#`-prefixed metadata lines.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click

from .chains import (
    InarParams,
    SuperpositionConfig,
    binomial_death_chain,
    iid_chain,
    inar_kernel,
    indicator_chain,
    indicator_chain_spec,
    marginal_at,
    poisson_death_chain,
    simulate_chain,
    simulate_inar_direct,
    simulate_inar_superposition,
    write_ensemble_csv,
)
from .errors import (
    InsufficientDataError,
    InvalidParameterError,
    ResourceLimitError,
    SamplingBudgetError,
)
from .harness import McConfig, reports_to_json, run_all
from .mixing import (
    fit_decay_rate,
    gap_for_epsilon,
    get_delta_bound,
    lag_joint,
    rho_star_window,
)
from .dependence import maximal_correlation
from .pmf import SeedSpec
from .serialize import dumps

EXIT_VERIFICATION_FAILURE = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

SIM_CONSTRUCTIONS = (
    "direct",
    "superposition",
    "death-poisson",
    "death-binomial",
    "indicator",
)
CHAIN_CONSTRUCTIONS = (
    "direct",
    "death-poisson",
    "death-binomial",
    "indicator",
    "iid",
)


def _exit_on_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ResourceLimitError, SamplingBudgetError) as exc:
            click.echo(f"resource limit: {exc}", err=True)
            sys.exit(EXIT_RESOURCE)
        except (InvalidParameterError, InsufficientDataError) as exc:
            click.echo(f"invalid parameters: {exc}", err=True)
            sys.exit(EXIT_USAGE)

    return wrapper


def _require(mapping: dict, *names: str) -> list:
    missing = [n for n in names if mapping.get(n) is None]
    if missing:
        raise InvalidParameterError(
            f"missing required option(s): {', '.join('--' + n for n in missing)}"
        )
    return [mapping[n] for n in names]


def _chain_spec(construction: str, opts: dict, tail_budget: float):
    if construction == "direct":
        a, lam = _require(opts, "a", "lam")
        return inar_kernel(InarParams(a=a, lam=lam), tail_budget)
    if construction == "death-poisson":
        lam, a = _require(opts, "lam", "a")
        return poisson_death_chain(lam, a, tail_budget)
    if construction == "death-binomial":
        n, p, a = _require(opts, "n", "p", "a")
        return binomial_death_chain(n, p, a)
    if construction == "indicator":
        p0, a = _require(opts, "p0", "a")
        return indicator_chain_spec(p0, a)
    if construction == "iid":
        (lam,) = _require(opts, "lam")
        return iid_chain(lam, tail_budget)
    raise InvalidParameterError(f"unknown construction {construction!r}")


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")


param_options = [
    click.option("--a", type=float, default=None, help="Thinning/survival parameter in (0,1)."),
    click.option("--lambda", "lam", type=float, default=None, help="Innovation / start mean."),
    click.option("--p0", type=float, default=None, help="Indicator start probability."),
    click.option("--n", type=int, default=None, help="Binomial start size."),
    click.option("--p", type=float, default=None, help="Binomial start success probability."),
]


def _with_params(fn):
    for opt in reversed(param_options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Exact and Monte Carlo laboratory for thinning-based count chains."""


@main.command()
@click.argument("construction", type=click.Choice(SIM_CONSTRUCTIONS))
@_with_params
@click.option("--length", type=int, required=True)
@click.option("--paths", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--stream", type=int, default=0, show_default=True)
@click.option("--tail-budget", type=float, default=1e-12, show_default=True)
@click.option(
    "--out",
    envvar="INARLAB_OUT",
    type=click.Path(file_okay=False),
    default=".",
    show_default=True,
    help="Output directory (env INARLAB_OUT).",
)
@_exit_on_errors
def simulate(construction, a, lam, p0, n, p, length, paths, seed, stream, tail_budget, out):
    """Simulate paths; writes x.csv (plus u.csv/v.csv for decomposed builds)."""
    seed_spec = SeedSpec(seed, stream)
    opts = {"a": a, "lam": lam, "p0": p0, "n": n, "p": p}
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    prefix = outdir / construction

    if construction == "direct":
        av, lv = _require(opts, "a", "lam")
        ens, dec = simulate_inar_direct(InarParams(a=av, lam=lv), length, paths, seed_spec)
    elif construction == "superposition":
        av, lv = _require(opts, "a", "lam")
        params = InarParams(a=av, lam=lv)
        config = SuperpositionConfig.for_budget(params, tail_budget=max(tail_budget, 1e-15))
        ens, dec = simulate_inar_superposition(params, config, length, paths, seed_spec)
    elif construction == "indicator":
        p0v, av = _require(opts, "p0", "a")
        ens, dec = indicator_chain(p0v, av, length, paths, seed_spec), None
    else:
        spec = _chain_spec(construction, opts, tail_budget)
        ens, dec = simulate_chain(spec, length, paths, seed_spec), None

    write_ensemble_csv(ens, f"{prefix}_x.csv")
    written = [f"{prefix}_x.csv"]
    if dec is not None:
        from .chains import PathEnsemble

        for name, mat in (("u", dec.u), ("v", dec.v)):
            part = PathEnsemble(mat, seed_spec, dict(ens.params, component=name))
            write_ensemble_csv(part, f"{prefix}_{name}.csv")
            written.append(f"{prefix}_{name}.csv")
    click.echo("\n".join(str(w) for w in written))


@main.command()
@click.argument("construction", type=click.Choice(CHAIN_CONSTRUCTIONS))
@_with_params
@click.option("--n-max", type=int, default=6, show_default=True)
@click.option("--cap", type=int, default=100, show_default=True)
@click.option("--tail-budget", type=float, default=1e-12, show_default=True)
@click.option("--max-escape", type=float, default=1e-9, show_default=True,
              help="Largest tolerated truncated mass per entry.")
@click.option("--out", default=None, help="Output file; default stdout.")
@_exit_on_errors
def rho(construction, a, lam, p0, n, p, n_max, cap, tail_budget, max_escape, out):
    """Past/future maximal correlation across gaps 1..n-max, plus a decay fit."""
    opts = {"a": a, "lam": lam, "p0": p0, "n": n, "p": p}
    spec = _chain_spec(construction, opts, tail_budget)
    entries = []
    for gap in range(1, n_max + 1):
        joint, escaped = lag_joint(spec, gap, cap)
        if escaped > max_escape:
            raise ResourceLimitError(
                f"cap {cap} leaves truncated mass {escaped:.3e} above "
                f"--max-escape {max_escape:.3e}; raise --cap"
            )
        entries.append({"n": gap, "rho": maximal_correlation(joint), "escaped": escaped})
    try:
        fit = fit_decay_rate([(e["n"], e["rho"]) for e in entries])
        fit_payload = {"rate": fit.rate, "r_squared": fit.r_squared}
    except InsufficientDataError as exc:
        fit_payload = {"error": str(exc)}
    payload = {
        "config": {
            "construction": construction,
            "params": {k: v for k, v in opts.items() if v is not None},
            "n_max": n_max,
            "cap": cap,
            "tail_budget": tail_budget,
        },
        "entries": entries,
        "fit": fit_payload,
    }
    _write_output(dumps(payload), out)


@main.command(name="rho-star")
@click.argument("construction", type=click.Choice(CHAIN_CONSTRUCTIONS))
@_with_params
@click.option("--width", "-W", type=int, required=True, help="Window width (maximum 8).")
@click.option("--gap", "-n", "gap", type=int, required=True, help="Minimum separation.")
@click.option("--cap", type=int, default=30, show_default=True)
@click.option("--tail-budget", type=float, default=1e-12, show_default=True)
@click.option("--out", default=None)
@_exit_on_errors
def rho_star(construction, a, lam, p0, n, p, width, gap, cap, tail_budget, out):
    """Exact interlaced coefficient over a finite window, with attaining pair."""
    opts = {"a": a, "lam": lam, "p0": p0, "n": n, "p": p}
    spec = _chain_spec(construction, opts, tail_budget)
    scan = rho_star_window(spec, width, gap, cap)
    payload = {
        "config": {
            "construction": construction,
            "params": {k: v for k, v in opts.items() if v is not None},
            "width": width,
            "gap": gap,
            "cap": cap,
        },
        "value": scan.value,
        "pair_count": scan.pair_count,
        "vacuous": scan.vacuous,
        "truncation_error": scan.truncation_error,
        "attaining": None
        if scan.best is None
        else {"s": list(scan.best.s), "t": list(scan.best.t)},
    }
    _write_output(dumps(payload), out)


@main.command()
@click.option("--a", type=float, required=True)
@click.option("--epsilon", type=float, required=True)
@click.option("--delta-bound", "bound_name", default="identity", show_default=True)
@click.option("--out", default=None)
@_exit_on_errors
def gap(a, epsilon, bound_name, out):
    """Certified separation gap for a target coefficient level."""
    cert = gap_for_epsilon(a, epsilon, get_delta_bound(bound_name))
    _write_output(dumps(dict(cert.as_dict(), delta_bound=bound_name)), out)


@main.command()
@click.argument("construction", type=click.Choice(CHAIN_CONSTRUCTIONS))
@_with_params
@click.option("--at", type=int, required=True, help="Time index of the marginal.")
@click.option("--tail-budget", type=float, default=1e-12, show_default=True)
@click.option("--out", default=None)
@_exit_on_errors
def marginal(construction, a, lam, p0, n, p, at, tail_budget, out):
    """Exact marginal law at a time index (initial law pushed through the kernel)."""
    opts = {"a": a, "lam": lam, "p0": p0, "n": n, "p": p}
    spec = _chain_spec(construction, opts, tail_budget)
    law = marginal_at(spec, at)
    payload = {
        "config": {
            "construction": construction,
            "params": {k: v for k, v in opts.items() if v is not None},
            "at": at,
            "tail_budget": tail_budget,
        },
        "probs": [float(x) for x in law.probs],
        "tail_mass": law.tail_mass,
        "mean": law.mean(),
    }
    _write_output(dumps(payload), out)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=False), default=None,
              help="JSON config file; flags override its values.")
@click.option("--seed", type=int, default=None)
@click.option("--paths", type=int, default=None)
@click.option("--significance", type=float, default=None)
@click.option("--negative-controls/--no-negative-controls", default=None)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", default=None, help="Report file; default stdout.")
def verify(config_path, seed, paths, significance, negative_controls, threads, out):
    """Run the full verification campaign; exit 0 iff every check passes."""
    fields = {}
    if config_path is not None:
        try:
            raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"malformed config: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        allowed = {
            "n_paths",
            "path_length",
            "root_seed",
            "stream_index",
            "significance",
            "truncation_budget",
            "a_grid",
            "lambda_grid",
            "negative_controls",
        }
        unknown = set(raw) - allowed
        if unknown:
            click.echo(f"malformed config: unknown keys {sorted(unknown)}", err=True)
            sys.exit(EXIT_USAGE)
        fields = dict(raw)
    if seed is not None:
        fields["root_seed"] = seed
    if paths is not None:
        fields["n_paths"] = paths
    if significance is not None:
        fields["significance"] = significance
    if negative_controls is not None:
        fields["negative_controls"] = negative_controls

    root_seed = fields.pop("root_seed", 20170825)
    stream_index = fields.pop("stream_index", 0)
    if "a_grid" in fields:
        fields["a_grid"] = tuple(fields["a_grid"])
    if "lambda_grid" in fields:
        fields["lambda_grid"] = tuple(fields["lambda_grid"])
    try:
        config = McConfig(seed=SeedSpec(root_seed, stream_index), **fields)
    except (InvalidParameterError, TypeError) as exc:
        click.echo(f"malformed config: {exc}", err=True)
        sys.exit(EXIT_USAGE)

    reports = run_all(config, threads=max(1, threads))
    _write_output(reports_to_json(reports, config), out)
    failures = [r for r in reports if not r.passed]
    if failures:
        for r in failures:
            click.echo(f"FAILED: {r.check} [{r.construction}]", err=True)
        sys.exit(EXIT_VERIFICATION_FAILURE)


if __name__ == "__main__":
    main()
