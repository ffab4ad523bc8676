"""Thin command line client for the compute service.

Each subcommand posts one request, built from an optional JSON config file,
and prints the ResultRecord as JSON or a flat CSV table. By default the
service runs in-process; --server points at a remote instance instead.

Exit codes: 0 ok, 2 rejected input, 3 numerical failure, 4 I/O problem.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import warnings
from pathlib import Path

import click
import httpx

from . import __version__
from .errors import EXIT_CODES, RgopError, exit_code_for
from .returns_io import parse_returns_csv

_SEEDED = {"verify", "simulate", "approx-error"}
_CSV_UNITS = "# units: decimal per period"


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

        from .service import create_app

        return TestClient(
            create_app(),
            base_url="http://rgopkit.local",
            raise_server_exceptions=False,
        )


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = path.read_text()
    except OSError as exc:
        _fail(f"cannot read config {path}: {exc}", EXIT_CODES["io"])
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(f"config {path} is not valid JSON: {exc}", EXIT_CODES["validation"])
    if not isinstance(payload, dict):
        _fail(f"config {path} must hold a JSON object", EXIT_CODES["validation"])
    return payload


def _read_returns(path: Path):
    try:
        return parse_returns_csv(path)
    except RgopError as exc:
        _fail(str(exc), exit_code_for(exc))


def _post(client: httpx.Client, command: str, payload: dict) -> dict:
    try:
        resp = client.post(f"/v1/{command}", json=payload)
    except httpx.HTTPError as exc:
        _fail(f"request failed: {exc}", EXIT_CODES["io"])
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except ValueError:
        body = {}
    message = body.get("message")
    if message is None:
        detail = body.get("detail")
        message = (
            json.dumps(detail)
            if detail is not None
            else (resp.text or f"HTTP {resp.status_code}")
        )
    category = body.get("category")
    if category in EXIT_CODES:
        code = EXIT_CODES[category]
    elif resp.status_code in (400, 422):
        code = EXIT_CODES["validation"]
    else:
        code = EXIT_CODES["numerical"]
    kind = body.get("error")
    _fail(f"{kind}: {message}" if kind else message, code)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    return value


def _flat_row(row: dict, keys, vectors=()) -> dict:
    out = {k: row[k] for k in keys}
    for name in vectors:
        for i, v in enumerate(row.get(name) or [], start=1):
            out[f"{name}_{i}"] = v
    return out


def _rows_growth(out):
    keys = (
        "horizon", "epsilon", "mean", "variance", "rho_bar", "growth_rate",
        "feasibility_margin", "persistent_risk", "compounding_risk", "exact",
    )
    return [_flat_row(out, keys)]


def _rows_verify(out):
    keys = (
        "horizon", "epsilon", "mean", "variance", "rho_bar", "closed_form",
        "exact_closed_form", "sdp", "sdp_gap", "socp", "socp_gap",
        "within_tolerance",
    )
    return [_flat_row(r, keys) for r in out["table"]]


def _rows_optimize(out):
    keys = (
        "horizon", "epsilon", "rho_bar", "growth_rate", "expected_return",
        "variance", "precondition_certified",
    )
    return [_flat_row(out, keys, vectors=("weights",))]


def _rows_frontier(out):
    keys = ("rho_bar", "index", "expected_return", "variance", "growth_rate")
    return [_flat_row(r, keys, vectors=("weights",)) for r in out["table"]]


def _rows_simulate(out):
    keys = (
        "horizon", "rho_bar", "outperformance", "growth_correlated",
        "growth_uncorrelated", "sharpe_median_correlated",
        "sharpe_median_uncorrelated", "sharpe_q1_correlated",
        "sharpe_q3_correlated", "sharpe_q1_uncorrelated",
        "sharpe_q3_uncorrelated",
    )
    vectors = ("weights_correlated", "weights_uncorrelated")
    return [_flat_row(r, keys, vectors) for r in out["table"]]


def _rows_approx_error(out):
    keys = (
        "horizon", "repetitions", "exact_available", "approx_median",
        "rel_error_median", "rel_error_min", "rel_error_max",
    )
    return [_flat_row(r, keys) for r in out["table"]]


def _rows_estimate(out):
    labels = out["labels"]
    rows = []
    for i, label in enumerate(labels):
        row = {"asset": label, "mean": out["mu"][i]}
        for j, other in enumerate(labels):
            row[f"cov_{other}"] = out["sigma"][i][j]
        rows.append(row)
    return rows


_ROWS = {
    "growth": _rows_growth,
    "verify": _rows_verify,
    "optimize": _rows_optimize,
    "frontier": _rows_frontier,
    "simulate": _rows_simulate,
    "approx-error": _rows_approx_error,
    "estimate-moments": _rows_estimate,
}


def _render(command: str, record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, indent=2) + "\n"
    rows = _ROWS[command](record["outputs"])
    buf = io.StringIO()
    buf.write(_CSV_UNITS + "\n")
    if rows:
        writer = csv.DictWriter(
            buf, fieldnames=list(rows[0].keys()), lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _emit(command: str, record: dict, out_dir: Path | None, fmt: str):
    text = _render(command, record, fmt)
    if out_dir is None:
        click.echo(text, nl=False)
        return
    suffix = ".json" if fmt == "json" else ".csv"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / (command + suffix)
        path.write_text(text)
    except OSError as exc:
        _fail(f"cannot write results: {exc}", EXIT_CODES["io"])
    click.echo(str(path))


def _run(command, config_path, seed, out_dir, fmt, server, returns_path=None):
    payload = _load_config(config_path)
    if seed is not None:
        if command not in _SEEDED:
            _fail(
                f"--seed is not used by '{command}'", EXIT_CODES["validation"]
            )
        payload["seed"] = seed
    with _client(server) as client:
        if returns_path is not None:
            matrix, labels = _read_returns(returns_path)
            if command == "estimate-moments":
                payload["returns"] = matrix.tolist()
                payload.setdefault("labels", list(labels))
            else:
                if "moments" in payload:
                    _fail(
                        "config already provides moments; drop --returns or "
                        "the moments block",
                        EXIT_CODES["validation"],
                    )
                est = _post(
                    client,
                    "estimate-moments",
                    {"returns": matrix.tolist(), "labels": list(labels)},
                )
                payload["moments"] = {
                    "mu": est["outputs"]["mu"],
                    "sigma": est["outputs"]["sigma"],
                }
        record = _post(client, command, payload)
    _emit(command, record, out_dir, fmt)


def _common(f):
    for option in reversed(
        [
            click.option(
                "--config",
                "config_path",
                type=click.Path(path_type=Path),
                default=None,
                help="JSON file with the request fields.",
            ),
            click.option(
                "--seed",
                type=click.IntRange(0, 2**64 - 1),
                default=None,
                help="Override the seed from the config.",
            ),
            click.option(
                "--out",
                "out_dir",
                type=click.Path(path_type=Path, file_okay=False),
                default=None,
                help="Directory to write <command>.<format> into.",
            ),
            click.option(
                "--format",
                "fmt",
                type=click.Choice(["json", "csv"]),
                default="json",
                show_default=True,
            ),
            click.option(
                "--server",
                default=None,
                help="Base URL of a running service (default: in-process).",
            ),
        ]
    ):
        f = option(f)
    return f


_RETURNS_OPTION = click.option(
    "--returns",
    "returns_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Returns CSV; moments are estimated from it.",
)


@click.group()
@click.version_option(version=__version__)
def main():
    """Worst-case growth-rate toolkit for serially correlated returns."""


@main.command()
@_common
def growth(config_path, seed, out_dir, fmt, server):
    """Worst-case growth rate for one portfolio."""
    _run("growth", config_path, seed, out_dir, fmt, server)


@main.command()
@_common
def verify(config_path, seed, out_dir, fmt, server):
    """Cross-check the closed form against the conic solvers."""
    _run("verify", config_path, seed, out_dir, fmt, server)


@main.command()
@_common
@_RETURNS_OPTION
def optimize(config_path, seed, out_dir, fmt, server, returns_path):
    """Growth-optimal portfolio under moment ambiguity."""
    _run("optimize", config_path, seed, out_dir, fmt, server, returns_path)


@main.command()
@_common
@_RETURNS_OPTION
def frontier(config_path, seed, out_dir, fmt, server, returns_path):
    """Mean-variance frontier annotated with growth rates."""
    _run("frontier", config_path, seed, out_dir, fmt, server, returns_path)


@main.command()
@_common
@_RETURNS_OPTION
def simulate(config_path, seed, out_dir, fmt, server, returns_path):
    """Monte Carlo comparison of correlation-aware and -ignorant portfolios."""
    _run("simulate", config_path, seed, out_dir, fmt, server, returns_path)


@main.command(name="approx-error")
@_common
def approx_error(config_path, seed, out_dir, fmt, server):
    """Error of the aggregate-correlation shortcut on random profiles."""
    _run("approx-error", config_path, seed, out_dir, fmt, server)


@main.command(name="estimate-moments")
@_common
@_RETURNS_OPTION
def estimate_moments(config_path, seed, out_dir, fmt, server, returns_path):
    """Sample mean vector and covariance matrix from a returns CSV."""
    _run(
        "estimate-moments", config_path, seed, out_dir, fmt, server,
        returns_path,
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
