"""Operator command line. One subcommand per capability of the library.

Machine output modes (--output json|jsonl) print exactly the payloads the
HTTP service would return, via the shared wire serializers. Exit codes:
0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import alerts as alerts_mod
from . import analytics, wire
from .audit import manifest_from_json, verify_manifest
from .diffs import summarize
from .errors import GridVaultError
from .ingest import ingest_auto
from .model import CellAddress, ValueKind
from .regions import parse_region
from .service import ServiceConfig
from .store import VersionStore
from .discover import discover as discover_scan


class Context:
    def __init__(self, store_root: str, output: str):
        self.store = VersionStore(store_root)
        self.output = output

    def emit(self, payload, text_lines=None) -> None:
        if self.output == "json":
            click.echo(wire.dump_json(payload))
        elif self.output == "jsonl":
            rows = payload if isinstance(payload, list) else [payload]
            for row in rows:
                click.echo(wire.dump_json(row))
        else:
            for line in text_lines if text_lines is not None else [wire.dump_json(payload)]:
                click.echo(line)


@click.group()
@click.option(
    "--store",
    "store_root",
    envvar="GRIDVAULT_STORE",
    default="./data",
    show_default=True,
    help="Store root directory.",
)
@click.option(
    "--output",
    type=click.Choice(["text", "json", "jsonl"]),
    default="text",
    show_default=True,
)
@click.pass_context
def main(ctx: click.Context, store_root: str, output: str) -> None:
    """Spreadsheet version control and change intelligence."""
    ctx.obj = Context(store_root, output)


def _run(ctx: Context, fn) -> None:
    try:
        fn()
    except GridVaultError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@main.command()
@click.pass_obj
def init(ctx: Context) -> None:
    """Initialize the store directory layout."""
    def go():
        ctx.store.init()
        ctx.emit({"initialized": str(ctx.store.root)}, [f"initialized {ctx.store.root}"])
    _run(ctx, go)


@main.command()
@click.option("--workbook", required=True)
@click.option("--file", "file_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--author", required=True)
@click.option("--message", default="")
@click.option("--source", default=None, help="Originating filename (defaults to --file).")
@click.pass_obj
def commit(ctx: Context, workbook: str, file_path: str, author: str, message: str, source: str | None) -> None:
    """Ingest a workbook file (canonical JSON or .xlsx) and commit it."""
    def go():
        data = Path(file_path).read_bytes()
        report = ingest_auto(data)
        record = ctx.store.commit(
            workbook, report.snapshot, author=author, message=message,
            source=source if source is not None else file_path,
        )
        if record.parent:
            parent = ctx.store.snapshot_at(workbook, record.parent)
            changeset = wire.classified_diff(ctx.store, workbook, parent, report.snapshot)
        else:
            changeset = []
        firings = alerts_mod.evaluate_commit(ctx.store, workbook, record)
        payload = wire.commit_response_payload(record, summarize(changeset), firings)
        ctx.emit(payload, [record.commit_id])
    _run(ctx, go)


@main.command()
@click.option("--workbook", required=True)
@click.pass_obj
def log(ctx: Context, workbook: str) -> None:
    """List the commit lineage, oldest first."""
    def go():
        records = ctx.store.log(workbook)
        payload = wire.commits_payload(records)
        lines = [
            f"{r.commit_id[:12]}  {r.timestamp}  {r.author}  {r.message}" for r in records
        ]
        ctx.emit(payload, lines)
    _run(ctx, go)


@main.command()
@click.option("--workbook", required=True)
@click.option("--from", "from_ref", required=True)
@click.option("--to", "to_ref", default="latest", show_default=True)
@click.pass_obj
def diff(ctx: Context, workbook: str, from_ref: str, to_ref: str) -> None:
    """Cell-level diff between two commits, classified by watch policy."""
    def go():
        old = ctx.store.snapshot_at(workbook, from_ref)
        new = ctx.store.snapshot_at(workbook, to_ref)
        changeset = wire.classified_diff(ctx.store, workbook, old, new)
        payload = wire.changeset_payload(changeset)
        lines = [
            f"{r['kind']:24} {r['sheet']}!{r['address'] or '*'}  [{r['policy']}]"
            for r in payload
        ]
        ctx.emit(payload, lines)
    _run(ctx, go)


@main.command()
@click.option("--workbook", required=True)
@click.option("--cell", required=True, help="Cell reference like 'Sheet1!A1'.")
@click.option("--window", default=4, show_default=True)
@click.pass_obj
def history(ctx: Context, workbook: str, cell: str, window: int) -> None:
    """Per-cell value/formula series over the last N commits."""
    def go():
        sheet, _, a1 = cell.rpartition("!")
        address = CellAddress.from_a1(sheet, a1)
        series = ctx.store.cell_history(workbook, address, window)
        payload = wire.history_payload(series)
        lines = []
        for p in series.points:
            shown = p.value.data if p.value.kind is not ValueKind.EMPTY else ""
            flag = "*" if p.changed else " "
            lines.append(f"{p.commit_id[:12]}  {flag} {shown}")
        ctx.emit(payload, lines)
    _run(ctx, go)


@main.group()
def rules() -> None:
    """Manage alert rules."""


@rules.command("add")
@click.option("--workbook", required=True)
@click.option("--file", "file_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--actor", default="cli")
@click.pass_obj
def rules_add(ctx: Context, workbook: str, file_path: str, actor: str) -> None:
    """Add one rule from a JSON document."""
    def go():
        rule = alerts_mod.AlertRule.from_json(json.loads(Path(file_path).read_text("utf-8")))
        ctx.store.log(workbook)
        rule_id = alerts_mod.add_rule(ctx.store, workbook, rule, actor=actor)
        ctx.emit({"rule_id": rule_id}, [rule_id])
    _run(ctx, go)


@rules.command("list")
@click.option("--workbook", required=True)
@click.pass_obj
def rules_list(ctx: Context, workbook: str) -> None:
    def go():
        ctx.store.log(workbook)
        payload = [r.to_json() for r in alerts_mod.list_rules(ctx.store, workbook)]
        ctx.emit(payload, [f"{r['rule_id']}  {r['kind']}  {r['target']}" for r in payload])
    _run(ctx, go)


@main.command()
@click.option("--workbook", required=True)
@click.pass_obj
def alerts(ctx: Context, workbook: str) -> None:
    """List persisted alert firings."""
    def go():
        ctx.store.log(workbook)
        payload = alerts_mod.list_firings(ctx.store, workbook)
        lines = [
            f"{f['rule_id']}  {f['sheet']}!{f['address']}  "
            f"{f['old_value']} -> {f['new_value']}  [{f['pattern']}]"
            for f in payload
        ]
        ctx.emit(payload, lines)
    _run(ctx, go)


@main.command()
@click.option("--workbook", required=True)
@click.option("--region", required=True, help="Region like 'Sheet1!A1:B2'.")
@click.option("--at", "at_ref", default="latest", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_obj
def export(ctx: Context, workbook: str, region: str, at_ref: str, fmt: str) -> None:
    """Dense value table for a region at a commit."""
    def go():
        sheet_region = parse_region(region)
        record = ctx.store.resolve_commit(workbook, at_ref)
        table = ctx.store.export_region(workbook, record.commit_id, sheet_region)
        if fmt == "csv":
            sys.stdout.write(wire.export_csv(table))
            return
        payload = wire.export_payload(sheet_region, record.commit_id, table)
        ctx.emit(payload)
    _run(ctx, go)


@main.command()
@click.option("--workbook", required=True)
@click.option("--commit", "commit_id", required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--actor", default="cli")
@click.pass_obj
def restore(ctx: Context, workbook: str, commit_id: str, out_path: str | None, actor: str) -> None:
    """Write the canonical workbook bytes of a past commit."""
    def go():
        data = ctx.store.restore(workbook, commit_id, actor=actor)
        if out_path:
            Path(out_path).write_bytes(data)
            click.echo(f"restored {len(data)} bytes to {out_path}", err=(ctx.output != "text"))
        else:
            sys.stdout.buffer.write(data)
    _run(ctx, go)


@main.group()
def report() -> None:
    """Analytical reports."""


@report.command("retirement")
@click.option("--workbook", required=True)
@click.option("--window", default=analytics.DEFAULT_RETIREMENT_WINDOW, show_default=True)
@click.pass_obj
def report_retirement(ctx: Context, workbook: str, window: int) -> None:
    """Retirement readiness from formula-history volatility."""
    def go():
        rep = analytics.retirement_report(ctx.store, workbook, window)
        payload = wire.retirement_payload(rep)
        ctx.emit(payload, [f"{rep.verdict.value} (volatility {rep.volatility:.2f} over "
                           f"{rep.commits_considered} transitions)"])
    _run(ctx, go)


@main.command()
@click.option("--workbook", required=True)
@click.option("--manifest-file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--from", "from_ref", default=None, help="Range start (defaults to parent of --to).")
@click.option("--to", "to_ref", default="latest", show_default=True)
@click.option("--actor", default="cli")
@click.pass_obj
def verify(ctx: Context, workbook: str, manifest_file: str, from_ref: str | None, to_ref: str, actor: str) -> None:
    """Verify actual changes in a commit range against an approved manifest."""
    def go():
        from .store import utc_now

        manifest = manifest_from_json(json.loads(Path(manifest_file).read_text("utf-8")))
        to_record = ctx.store.resolve_commit(workbook, to_ref)
        from_id = from_ref or (to_record.parent or to_record.commit_id)
        changeset = wire.union_changeset(ctx.store, workbook, from_id, to_record.commit_id)
        rep = verify_manifest(changeset, manifest, commit_from=from_id, commit_to=to_record.commit_id)
        ctx.store.audit_log(workbook).append(actor, "manifest_verify", manifest.manifest_id, utc_now())
        payload = wire.compliance_payload(rep)
        verdict = "COMPLIANT" if rep.compliant else "NON-COMPLIANT"
        ctx.emit(payload, [
            f"{verdict}: {len(rep.violations)} violations, {len(rep.unfulfilled)} unfulfilled",
        ])
        if not rep.compliant:
            sys.exit(1)
    _run(ctx, go)


@main.command("audit")
@click.option("--workbook", required=True)
@click.option("--actor", default=None)
@click.option("--action", default=None)
@click.pass_obj
def audit_cmd(ctx: Context, workbook: str, actor: str | None, action: str | None) -> None:
    """Query the hash-chained audit trail."""
    def go():
        ctx.store.log(workbook)
        entries = ctx.store.audit_log(workbook).query(actor=actor, action=action)
        payload = wire.audit_payload(entries)
        lines = [f"{e.timestamp}  {e.actor:12}  {e.action:16}  {e.target}" for e in entries]
        ctx.emit(payload, lines)
    _run(ctx, go)


@main.group()
def watch() -> None:
    """Declare input regions whose value-only changes are routine."""


@watch.command("set")
@click.option("--workbook", required=True)
@click.option("--region", "region_texts", multiple=True, required=True)
@click.pass_obj
def watch_set(ctx: Context, workbook: str, region_texts: tuple[str, ...]) -> None:
    def go():
        from .diffs import WatchConfig

        regions = tuple(parse_region(t) for t in region_texts)
        wire.save_watch_config(ctx.store, workbook, WatchConfig(input_regions=regions))
        ctx.emit({"input_regions": [str(r) for r in regions]},
                 [f"watching {len(regions)} region(s)"])
    _run(ctx, go)


@main.command("discover")
@click.option("--root", "root_path", required=True, type=click.Path())
@click.pass_obj
def discover_cmd(ctx: Context, root_path: str) -> None:
    """Inventory spreadsheet files under a directory tree."""
    def go():
        rep = discover_scan(root_path)
        payload = rep.to_json()
        lines = [f"{f.bytes:>12}  {f.modified}  {f.path}" for f in rep.spreadsheet_files]
        lines.append(f"total: {len(rep.spreadsheet_files)} files, {rep.total_bytes} bytes")
        ctx.emit(payload, lines)
    _run(ctx, go)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_obj
def serve(ctx: Context, config_path: str | None, host: str | None, port: int | None) -> None:
    """Run the HTTP API."""
    from .service import run

    config = ServiceConfig.load(config_path)
    config.store_root = str(ctx.store.root)
    if host:
        config.host = host
    if port:
        config.port = port
    run(config)


if __name__ == "__main__":
    main()
