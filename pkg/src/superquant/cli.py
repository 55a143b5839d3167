"""Command line driver: ``superquant verify <suite>`` and ``superquant dump-tables``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for a bad
configuration.  A ``key=value`` config file supplies defaults that explicit
flags override.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
from click.core import ParameterSource

from . import clifford_fine as cf
from . import starproduct as st
from . import supersymplectic as ss
from .grassmann import members_of
from .scalars import as_pair
from .suites import SUITES, TOLERANCES, ConfigError, RunConfig, report_dict, run_suite

# config-file keys accepted, mapped onto click parameter names
_CONFIG_KEYS = {
    "n": "n", "m": "m", "a0": "a0", "alpha": "alpha", "alpha-re": "alpha_re", "alpha-im": "alpha_im",
    "grid": "grid", "extent": "extent", "L": "extent", "json": "json_path", "exact": "exact",
    "parallel": "parallel",
}
_TOL_PARAMS = {f"tol_{k.replace('-', '_')}": k for k in TOLERANCES}


def read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise click.UsageError(f"not a boolean: {text!r}")


def _apply_config(ctx: click.Context, values: dict, config: dict[str, str]) -> dict:
    """Fill every parameter still at its default from the config file."""
    merged = dict(values)
    casts = {"n": int, "m": int, "grid": int, "a0": float, "alpha": complex, "alpha_re": float,
             "alpha_im": float, "extent": float, "json_path": str, "exact": _bool, "parallel": _bool}
    for key, text in config.items():
        if key.startswith("tol-"):
            pname = f"tol_{key[4:].replace('-', '_')}"
            if pname not in _TOL_PARAMS:
                raise click.UsageError(f"unknown tolerance in config file: {key}")
            cast = float
        elif key in _CONFIG_KEYS:
            pname = _CONFIG_KEYS[key]
            cast = casts[pname]
        else:
            raise click.UsageError(f"unknown config key: {key}")
        if ctx.get_parameter_source(pname) in (ParameterSource.COMMANDLINE, ParameterSource.ENVIRONMENT):
            continue
        try:
            merged[pname] = cast(text)
        except ValueError as exc:
            raise click.UsageError(f"bad value for {key}: {text!r}") from exc
    return merged


def build_config(suite: str, v: dict) -> RunConfig:
    alpha = complex(v["alpha"]) if v.get("alpha") is not None else complex(v["alpha_re"], v["alpha_im"])
    tols = {k: v[p] for p, k in _TOL_PARAMS.items() if v.get(p) is not None}
    cfg = RunConfig(suite=suite, m=v["m"], n=v["n"], a0=v["a0"], alpha=alpha, grid=v["grid"],
                    extent=v["extent"], tolerances=tols, json_path=v["json_path"], exact=v["exact"],
                    parallel=v["parallel"])
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc


def common_options(fn):
    opts = [
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                     help="key=value file; explicit flags take precedence"),
        click.option("--n", "n", type=int, default=1, show_default=True, help="odd dimension"),
        click.option("--m", "m", type=int, default=2, show_default=True, help="even dimension"),
        click.option("--a0", type=float, default=1.0, show_default=True, help="a0 = 1/theta"),
        click.option("--alpha", type=complex, default=None, help="alpha as a (complex) number"),
        click.option("--alpha-re", type=float, default=1.0, show_default=True),
        click.option("--alpha-im", type=float, default=0.0, show_default=True),
        click.option("--grid", type=int, default=64, show_default=True, help="grid points per axis"),
        click.option("--extent", "--L", "extent", type=float, default=8.0, show_default=True,
                     help="half-extent of the grid"),
        click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None,
                     help="write the report (or tables) as JSON here"),
        click.option("--exact/--floating", default=True, show_default=True,
                     help="Gaussian-rational or floating backend for the algebraic checks"),
    ]
    for pname, key in _TOL_PARAMS.items():
        opts.append(click.option(f"--tol-{key}", pname, type=float, default=None,
                                 help=f"tolerance override (default {TOLERANCES[key]:g})"))
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Deformation-quantization verification toolkit."""


@main.command()
@click.argument("suite", type=click.Choice(list(SUITES) + ["all"]))
@common_options
@click.option("--parallel/--sequential", default=False, help="run independent suites concurrently")
@click.pass_context
def verify(ctx, suite, config_file, **values):
    """Run a verification suite and report every check."""
    if config_file:
        values = _apply_config(ctx, values, read_config_file(config_file))
    cfg = build_config(suite, values)
    records = run_suite(cfg)
    for r in records:
        line = f"{r.status.upper():5s} {r.name}  measured={r.measured} expected={r.expected} tol={r.tolerance:g}"
        click.echo(line)
        if r.diagnostic and not r.passed:
            click.echo(f"      {r.diagnostic}")
    report = report_dict(cfg, records)
    if cfg.json_path:
        Path(cfg.json_path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    failed = [r for r in records if not r.passed]
    click.echo(f"{len(records) - len(failed)}/{len(records)} checks passed")
    ctx.exit(1 if failed else 0)


# ---------------------------------------------------------------- tables

def _scalar_json(v) -> dict:
    re, im = as_pair(v)
    return {"re": re, "im": im}


def lambda_table_json(n: int, params: st.DeformParams) -> dict:
    lam = st.lambda_closedform(n, params)
    return {"n": n, "entries": [
        {"I": list(members_of(I)), "J": list(members_of(J)), "target": list(members_of(K)), **_scalar_json(v)}
        for I, J, K, v in lam.entries()]}


def factor_set_json(s: cf.FactorSet) -> dict:
    return {"k": s.k, "entries": [
        {"a": list(members_of(a)), "b": list(members_of(b)), **_scalar_json(v)}
        for (a, b), v in sorted(s.sigma.items())]}


def canonical_basis_json(m: int, n: int) -> dict:
    half = m // 2
    E = [[0] * m for _ in range(m)]
    for i in range(half):
        E[i][half + i], E[half + i][i] = 1, -1
    O = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    basis = ss.darboux_basis(ss.GradedForm.from_blocks(E, O))
    col = lambda v: [str(x) for x in v]  # noqa: E731
    return {"m": m, "n": n, "signature": list(basis.signature),
            "even_pairs": [[col(e), col(f)] for e, f in basis.even_pairs],
            "odd_vectors": [col(v) for v in basis.odd_vectors]}


def build_tables(cfg: RunConfig) -> dict:
    params = cfg.deform_params()
    return {
        "lambda": lambda_table_json(cfg.n, params),
        "factor_set_star": factor_set_json(cf.FactorSet(cfg.n, dict(st.lambda_closedform(cfg.n, params).table))),
        "sigma_clifford": factor_set_json(cf.sigma_clifford(cfg.n)),
        "canonical_basis": canonical_basis_json(cfg.m, cfg.n),
    }


@main.command("dump-tables")
@common_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="directory receiving one JSON file per table")
@click.pass_context
def dump_tables(ctx, config_file, out_dir, **values):
    """Write Lambda, factor-set and canonical-basis tables as JSON."""
    if config_file:
        values = _apply_config(ctx, values, read_config_file(config_file))
    values["parallel"] = False
    cfg = build_config("all", values)
    tables = build_tables(cfg)
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, table in tables.items():
            (d / f"{name}_n{cfg.n}.json").write_text(json.dumps(table, indent=2) + "\n")
    text = json.dumps(tables, indent=2)
    if cfg.json_path:
        Path(cfg.json_path).write_text(text + "\n")
    if not out_dir and not cfg.json_path:
        click.echo(text)


if __name__ == "__main__":
    sys.exit(main())
