"""HTTP API over the library core, mounted under /api/v1.

Every endpoint is a thin wrapper: payloads come straight from the wire
module's builders, so responses never drift from what the library itself
computes. Optional static bearer-token auth; configuration from a JSON
file overridden by GRIDVAULT_* environment variables.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response

from . import alerts as alerts_mod
from . import analytics, wire
from .audit import manifest_from_json
from .diffs import summarize
from .errors import (
    ConcurrentWriter,
    ConstraintError,
    DuplicateRuleId,
    FormatError,
    GridVaultError,
    MalformedAddress,
    MalformedRegion,
    ManifestInvalid,
    NotFound,
    RuleInvalid,
    StoreCorrupt,
    UnsupportedFeature,
)
from .ingest import ingest_auto
from .model import CellAddress
from .regions import parse_region
from .store import VersionStore

DEFAULT_BODY_LIMIT = 256 * 1024 * 1024  # large operational files are a fact of life


@dataclass
class ServiceConfig:
    store_root: str = "./data"
    token: str | None = None
    body_limit: int = DEFAULT_BODY_LIMIT
    host: str = "127.0.0.1"
    port: int = 8070

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ServiceConfig":
        """Read config file (JSON) if given, then apply env overrides."""
        config = cls()
        if path is not None:
            obj = json.loads(Path(path).read_text("utf-8"))
            for key in ("store_root", "token", "body_limit", "host", "port"):
                if key in obj:
                    setattr(config, key, obj[key])
        env = os.environ
        config.store_root = env.get("GRIDVAULT_STORE", config.store_root)
        config.token = env.get("GRIDVAULT_TOKEN", config.token)
        if "GRIDVAULT_BODY_LIMIT" in env:
            config.body_limit = int(env["GRIDVAULT_BODY_LIMIT"])
        if "GRIDVAULT_HOST" in env:
            config.host = env["GRIDVAULT_HOST"]
        if "GRIDVAULT_PORT" in env:
            config.port = int(env["GRIDVAULT_PORT"])
        return config


_ERROR_MAP: list[tuple[type, int, str]] = [
    (NotFound, 404, "NOT_FOUND"),
    (MalformedRegion, 400, "MALFORMED_REGION"),
    (MalformedAddress, 400, "FORMAT_ERROR"),
    (FormatError, 400, "FORMAT_ERROR"),
    (ConstraintError, 400, "FORMAT_ERROR"),
    (UnsupportedFeature, 400, "UNSUPPORTED_FEATURE"),
    (RuleInvalid, 400, "RULE_INVALID"),
    (DuplicateRuleId, 409, "DUPLICATE_RULE"),
    (ManifestInvalid, 400, "MANIFEST_INVALID"),
    (ConcurrentWriter, 409, "CONFLICT"),
    (StoreCorrupt, 500, "STORE_CORRUPT"),
]


def _error_response(status: int, code: str, detail: str) -> Response:
    body = wire.dump_json({"status": status, "code": code, "detail": detail})
    return Response(content=body, status_code=status, media_type="application/json")


def _json_response(payload, status: int = 200) -> Response:
    return Response(
        content=wire.dump_json(payload), status_code=status, media_type="application/json"
    )


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.load()
    store = VersionStore(config.store_root)
    store.init()

    app = FastAPI(title="gridvault", version="0.1.0")

    @app.middleware("http")
    async def auth_and_errors(request: Request, call_next):
        if config.token is not None and request.url.path.startswith("/api/"):
            header = request.headers.get("authorization", "")
            if header != f"Bearer {config.token}":
                return _error_response(401, "UNAUTHORIZED", "missing or bad bearer token")
        try:
            return await call_next(request)
        except GridVaultError as exc:
            for exc_type, status, code in _ERROR_MAP:
                if isinstance(exc, exc_type):
                    return _error_response(status, code, str(exc))
            return _error_response(500, "INTERNAL", str(exc))

    prefix = "/api/v1"

    @app.post(prefix + "/workbooks/{wid}/commits")
    async def post_commit(
        wid: str,
        request: Request,
        author: str = "unknown",
        message: str = "",
        source: str = "",
    ):
        body = await request.body()
        if len(body) > config.body_limit:
            return _error_response(413, "BODY_TOO_LARGE", f"body exceeds {config.body_limit} bytes")
        report = ingest_auto(body)
        record = store.commit(wid, report.snapshot, author=author, message=message, source=source)
        parent = (
            store.get_snapshot(store.resolve_commit(wid, record.parent).snapshot)
            if record.parent
            else None
        )
        if parent is not None:
            changeset = wire.classified_diff(store, wid, parent, report.snapshot)
        else:
            changeset = []
        firings = alerts_mod.evaluate_commit(store, wid, record)
        payload = wire.commit_response_payload(record, summarize(changeset), firings)
        return _json_response(payload, status=201)

    @app.get(prefix + "/workbooks/{wid}/commits")
    async def get_commits(wid: str):
        return _json_response(wire.commits_payload(store.log(wid)))

    @app.get(prefix + "/workbooks/{wid}/diff")
    async def get_diff(
        wid: str,
        from_ref: str = Query("", alias="from"),
        to: str = Query("latest"),
    ):
        if not from_ref:
            return _error_response(400, "FORMAT_ERROR", "missing 'from' commit")
        old = store.snapshot_at(wid, from_ref)
        new = store.snapshot_at(wid, to)
        changeset = wire.classified_diff(store, wid, old, new)
        return _json_response(wire.changeset_payload(changeset))

    @app.get(prefix + "/workbooks/{wid}/cells/{sheet}/{a1}/history")
    async def get_history(wid: str, sheet: str, a1: str, window: int = 4):
        address = CellAddress.from_a1(sheet, a1)
        series = store.cell_history(wid, address, window)
        return _json_response(wire.history_payload(series))

    @app.post(prefix + "/workbooks/{wid}/rules")
    async def post_rule(wid: str, request: Request, actor: str = "unknown"):
        try:
            obj = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error_response(400, "FORMAT_ERROR", f"bad JSON: {exc}")
        rule = alerts_mod.AlertRule.from_json(obj)
        store.log(wid)  # 404 for unknown workbook
        rule_id = alerts_mod.add_rule(store, wid, rule, actor=actor)
        return _json_response({"rule_id": rule_id}, status=201)

    @app.get(prefix + "/workbooks/{wid}/rules")
    async def get_rules(wid: str):
        store.log(wid)
        return _json_response([r.to_json() for r in alerts_mod.list_rules(store, wid)])

    @app.get(prefix + "/workbooks/{wid}/alerts")
    async def get_alerts(wid: str):
        store.log(wid)
        return _json_response(alerts_mod.list_firings(store, wid))

    @app.post(prefix + "/workbooks/{wid}/restore")
    async def post_restore(wid: str, request: Request):
        try:
            obj = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error_response(400, "FORMAT_ERROR", f"bad JSON: {exc}")
        commit_id = obj.get("commit_id", "")
        actor = obj.get("actor", "unknown")
        data = store.restore(wid, commit_id, actor=actor)
        return Response(content=data, media_type="application/json")

    @app.get(prefix + "/workbooks/{wid}/export")
    async def get_export(wid: str, region: str, at: str = "latest", format: str = "json"):
        sheet_region = parse_region(region)
        record = store.resolve_commit(wid, at)
        table = store.export_region(wid, record.commit_id, sheet_region)
        if format == "csv":
            return Response(content=wire.export_csv(table), media_type="text/csv")
        return _json_response(wire.export_payload(sheet_region, record.commit_id, table))

    @app.get(prefix + "/workbooks/{wid}/reports/retirement")
    async def get_retirement(wid: str, window: int = analytics.DEFAULT_RETIREMENT_WINDOW):
        report = analytics.retirement_report(store, wid, window)
        return _json_response(wire.retirement_payload(report))

    @app.post(prefix + "/workbooks/{wid}/manifests")
    async def post_manifest(wid: str, request: Request, actor: str = "unknown"):
        try:
            obj = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error_response(400, "FORMAT_ERROR", f"bad JSON: {exc}")
        store.log(wid)
        manifest = manifest_from_json(obj)
        wire.add_manifest(store, wid, manifest, actor=actor)
        return _json_response({"manifest_id": manifest.manifest_id}, status=201)

    @app.get(prefix + "/workbooks/{wid}/compliance")
    async def get_compliance(
        wid: str,
        manifest: str,
        from_ref: str = Query("", alias="from"),
        to: str = Query("latest"),
        actor: str = "unknown",
    ):
        to_record = store.resolve_commit(wid, to)
        from_id = from_ref or (to_record.parent or to_record.commit_id)
        report = wire.verify_manifest_range(
            store, wid, manifest, from_id, to_record.commit_id, actor=actor
        )
        return _json_response(wire.compliance_payload(report))

    @app.get(prefix + "/workbooks/{wid}/audit")
    async def get_audit(wid: str, actor: str | None = None, action: str | None = None):
        store.log(wid)
        entries = store.audit_log(wid).query(actor=actor, action=action)
        return _json_response(wire.audit_payload(entries))

    app.state.store = store
    app.state.config = config
    return app


def run(config: ServiceConfig | None = None) -> None:  # pragma: no cover
    import uvicorn

    config = config or ServiceConfig.load()
    uvicorn.run(create_app(config), host=config.host, port=config.port)
