"""Admin command line: serve, seed, export, check-log."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import records as rec
from .config import load_config
from .errors import CorruptLog, KnowcapError
from .fixtures import seed_fixture as run_fixture
from .service import build_service


@click.group()
def main():
    """Knowledge-capitalization service operations."""
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")


def _service(config_path: str):
    config = load_config(config_path)
    try:
        return config, build_service(config)
    except CorruptLog as exc:
        click.echo(f"corrupt log: {exc.message}", err=True)
        sys.exit(2)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def serve(config_path: str):
    """Start the HTTP service, replaying the log on startup."""
    import uvicorn

    from .api import create_app

    config, service = _service(config_path)
    static_dir = config.static_dir if config.static_dir and Path(config.static_dir).is_dir() else None
    app = create_app(service, static_dir=static_dir)
    click.echo(f"serving on {config.listen_host}:{config.listen_port} (data: {config.data_directory})")
    try:
        uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
    except OSError as exc:
        click.echo(f"bind failure: {exc}", err=True)
        sys.exit(2)
    finally:
        service.close()


@main.command()
@click.argument("name")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def seed(name: str, config_path: str):
    """Seed a built-in fixture (NAME: neco) into the configured data directory."""
    _, service = _service(config_path)
    try:
        summary = run_fixture(service, name)
    except KnowcapError as exc:
        click.echo(f"error: {exc.code}: {exc.message}", err=True)
        sys.exit(1)
    finally:
        service.close()
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--dp", "dp_id", default=None, help="restrict to one decision problem")
def export(config_path: str, out_path: str, dp_id: str | None):
    """Export the append-only log (optionally problem-scoped) in log order."""
    _, service = _service(config_path)
    try:
        count = service.export_log(out_path, dp_scope=dp_id)
    except KnowcapError as exc:
        click.echo(f"error: {exc.code}: {exc.message}", err=True)
        sys.exit(1)
    finally:
        service.close()
    click.echo(f"{count} records written to {out_path}")


@main.command("check-log")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def check_log(path: str):
    """Verify a log file: record shape, required fields, seq monotonicity."""
    try:
        records = rec.read_log_file(path)
    except CorruptLog as exc:
        click.echo(f"corrupt log: {exc.message}", err=True)
        sys.exit(2)
    click.echo(f"ok: {len(records)} records, last seq {records[-1]['seq'] if records else 0}")


if __name__ == "__main__":
    main()
