"""Command-line client for the a2glink service.

Every subcommand talks to the HTTP API.  With --url it targets a running
server (see `a2glink serve`); without it, the service app is mounted
in-process, so single-machine use needs no daemon while exercising the
exact same request path.
"""

from __future__ import annotations

import csv
import os

import click
import httpx
import yaml


def _client(url: str | None):
    if url:
        return httpx.Client(base_url=url, timeout=None)
    from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _check(resp) -> dict:
    if resp.status_code != 200:
        raise click.ClickException(f"service error {resp.status_code}: {resp.text}")
    return resp.json()


@click.group()
def main():
    """Adaptive OFDM pilot patterns for UAV air-to-ground links."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8011, show_default=True, type=int)
def serve(host: str, port: int):
    """Start the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--scenario", "scenario_path", default="default", show_default=True,
              help="'default' or path to a scenario YAML file")
@click.option("--time-scale", default=0.02, show_default=True, type=float,
              help="stage-duration compression factor in (0, 1]")
@click.option("--seeds", default=1, show_default=True, type=int)
@click.option("--base-seed", default=1, show_default=True, type=int)
@click.option("--feedback", type=click.Choice(["explicit", "implicit"]),
              default="explicit", show_default=True)
@click.option("--out", "out_dir", default="results", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--url", default=None, help="service URL (in-process if omitted)")
def run(scenario_path, time_scale, seeds, base_seed, feedback, out_dir, url):
    """Run the flight scenario and write trace/cdf/gains/summary files.

    With --seeds 1, trace.csv lands directly in OUT; with more seeds, each
    run's trace goes to OUT/seed_<seed>/trace.csv and the pooled cdf.csv,
    gains.csv and summary.txt stay at the top level.
    """
    payload = {
        "time_scale": time_scale,
        "seeds": seeds,
        "base_seed": base_seed,
        "feedback": feedback,
    }
    if scenario_path != "default":
        with open(scenario_path) as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict) or "stages" not in doc:
            raise click.ClickException(f"{scenario_path}: scenario file needs a 'stages' list")
        payload["stages"] = doc["stages"]

    with _client(url) as client:
        data = _check(client.post("/scenario/run", json=payload))

    os.makedirs(out_dir, exist_ok=True)
    for run_data in data["runs"]:
        if seeds == 1:
            trace_path = os.path.join(out_dir, "trace.csv")
        else:
            seed_dir = os.path.join(out_dir, f"seed_{run_data['seed']}")
            os.makedirs(seed_dir, exist_ok=True)
            trace_path = os.path.join(seed_dir, "trace.csv")
        with open(trace_path, "w") as fh:
            fh.write(run_data["trace_csv"])
    for name, key in (("cdf.csv", "cdf_csv"), ("gains.csv", "gains_csv"),
                      ("summary.txt", "summary_txt")):
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(data[key])
    click.echo(data["summary_txt"], nl=False)
    click.echo(f"outputs written to {out_dir}/")


@main.command()
@click.option("--url", default=None, help="service URL (in-process if omitted)")
def codebook(url):
    """Print the channel-statistics codebook."""
    with _client(url) as client:
        data = _check(client.get("/codebook"))
    click.echo(data["table"])
    click.echo(f"implicit feedback: {data['implicit_bits']} bits per message")


def _read_trace(path: str) -> tuple[list[float], dict[str, list[float]]]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise click.ClickException(f"{path}: empty trace")
    fixed_cols = [c for c in rows[0] if c.startswith("rate_") and c != "rate_adaptive"]
    adaptive = [float(r["rate_adaptive"]) for r in rows]
    fixed = {c.removeprefix("rate_"): [float(r[c]) for r in rows] for c in fixed_cols}
    return adaptive, fixed


@main.command()
@click.argument("traces", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="also write the table to this CSV file")
@click.option("--url", default=None, help="service URL (in-process if omitted)")
def gains(traces, out_path, url):
    """Recompute the percentile gain table from trace.csv files."""
    adaptive: list[float] = []
    fixed: dict[str, list[float]] = {}
    for path in traces:
        a, f = _read_trace(path)
        adaptive.extend(a)
        for lab, vals in f.items():
            fixed.setdefault(lab, []).extend(vals)
    with _client(url) as client:
        data = _check(client.post("/gains", json={"adaptive": adaptive, "fixed": fixed}))
    click.echo(data["gains_csv"], nl=False)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(data["gains_csv"])


if __name__ == "__main__":
    main()
