"""CLI flows via click's test runner, plus filesystem discovery."""

import hashlib
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from gridvault import canonicalize, discover
from gridvault.cli import main
from gridvault.errors import PathNotFound

from conftest import one_cell


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def env(tmp_path, runner):
    store_root = tmp_path / "data"
    book = tmp_path / "book.json"
    book.write_bytes(canonicalize(one_cell(40)))
    return runner, store_root, book, tmp_path


def invoke(runner, store_root, args, **kw):
    return runner.invoke(main, ["--store", str(store_root)] + args, **kw)


def write_book(path: Path, value: float) -> None:
    path.write_bytes(canonicalize(one_cell(value)))


class TestBasicFlow:
    def test_init_and_commit(self, env):
        runner, store_root, book, _ = env
        assert invoke(runner, store_root, ["init"]).exit_code == 0
        result = invoke(
            runner, store_root,
            ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"],
        )
        assert result.exit_code == 0
        assert len(result.output.strip()) == 64  # prints commit_id

    def test_log_and_history(self, env):
        runner, store_root, book, tmp = env
        invoke(runner, store_root, ["init"])
        for v in (40, 40, 40, 50):
            write_book(book, v)
            invoke(runner, store_root,
                   ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"])
        log = invoke(runner, store_root, ["--output", "json", "log", "--workbook", "w1"])
        records = json.loads(log.output)
        assert len(records) == 4
        history = invoke(
            runner, store_root,
            ["--output", "json", "history", "--workbook", "w1", "--cell", "S!A1", "--window", "4"],
        )
        points = json.loads(history.output)["points"]
        assert [p["value"]["v"] for p in points] == [40, 40, 40, 50]
        assert [p["changed"] for p in points] == [True, False, False, True]

    def test_diff_jsonl(self, env):
        runner, store_root, book, _ = env
        invoke(runner, store_root, ["init"])
        write_book(book, 40)
        r1 = invoke(runner, store_root,
                    ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"])
        write_book(book, 50)
        r2 = invoke(runner, store_root,
                    ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"])
        c1, c2 = r1.output.strip(), r2.output.strip()
        result = invoke(
            runner, store_root,
            ["--output", "jsonl", "diff", "--workbook", "w1", "--from", c1, "--to", c2],
        )
        lines = result.output.strip().split("\n")
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record["kind"] == "ValueChanged"
        assert record["old"]["value"]["v"] == 40.0

    def test_restore_round_trip(self, env):
        runner, store_root, book, tmp = env
        invoke(runner, store_root, ["init"])
        write_book(book, 40)
        c1 = invoke(runner, store_root,
                    ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"]).output.strip()
        write_book(book, 50)
        invoke(runner, store_root,
               ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"])
        out = tmp / "restored.json"
        result = invoke(runner, store_root,
                        ["restore", "--workbook", "w1", "--commit", c1, "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_bytes() == canonicalize(one_cell(40))

    def test_rules_alerts_and_report(self, env):
        runner, store_root, book, tmp = env
        invoke(runner, store_root, ["init"])
        rule_file = tmp / "rule.json"
        rule_file.write_text(json.dumps(
            {"rule_id": "r1", "target": "S!A1", "kind": "threshold_up", "threshold": 50}
        ))
        write_book(book, 40)
        invoke(runner, store_root,
               ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"])
        assert invoke(runner, store_root,
                      ["rules", "add", "--workbook", "w1", "--file", str(rule_file)]).exit_code == 0
        write_book(book, 50)
        invoke(runner, store_root,
               ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"])
        alerts = json.loads(invoke(runner, store_root,
                                   ["--output", "json", "alerts", "--workbook", "w1"]).output)
        assert len(alerts) == 1
        assert alerts[0]["pattern"] == "Step"
        report = json.loads(invoke(
            runner, store_root,
            ["--output", "json", "report", "retirement", "--workbook", "w1", "--window", "1"],
        ).output)
        assert report["verdict"] == "Ready"

    def test_verify_manifest(self, env):
        runner, store_root, book, tmp = env
        invoke(runner, store_root, ["init"])
        for v in (1, 2):
            write_book(book, v)
            invoke(runner, store_root,
                   ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"])
        manifest = tmp / "manifest.json"
        manifest.write_text(json.dumps({
            "manifest_id": "m1", "approver": "alice", "created": "2026-01-01T00:00:00Z",
            "applies_to": "w1", "required": ["S!A1"], "allowed": ["S!A1:A1"],
        }))
        result = invoke(runner, store_root,
                        ["verify", "--workbook", "w1", "--manifest-file", str(manifest)])
        assert result.exit_code == 0
        assert "COMPLIANT" in result.output


class TestExitCodes:
    def test_domain_error_is_one(self, env):
        runner, store_root, _, _ = env
        invoke(runner, store_root, ["init"])
        result = invoke(runner, store_root, ["log", "--workbook", "ghost"])
        assert result.exit_code == 1
        assert "error:" in result.output  # CliRunner mixes stderr in

    def test_usage_error_is_two(self, env):
        runner, store_root, _, _ = env
        assert invoke(runner, store_root, ["frobnicate"]).exit_code == 2
        assert invoke(runner, store_root, ["commit"]).exit_code == 2

    def test_machine_output_is_pure_json(self, env):
        runner, store_root, book, _ = env
        invoke(runner, store_root, ["init"])
        result = invoke(
            runner, store_root,
            ["--output", "json", "commit", "--workbook", "w1",
             "--file", str(book), "--author", "ada"],
        )
        json.loads(result.output)  # a single parseable document


class TestDiscover:
    def make_tree(self, root: Path):
        (root / "sub").mkdir(parents=True)
        (root / "a.csv").write_text("1,2\n")
        (root / "b.xls").write_bytes(b"\xd0\xcf\x11\xe0old")
        (root / "sub" / "c.xlsx").write_bytes(b"PK\x03\x04zipzip")
        (root / "notes.txt").write_text("not a spreadsheet")
        (root / "fake.xlsx").write_bytes(b"not a zip")  # skipped: bad signature

    def test_inventory(self, tmp_path):
        self.make_tree(tmp_path / "tree")
        report = discover(tmp_path / "tree")
        paths = [Path(f.path).name for f in report.spreadsheet_files]
        assert paths == ["a.csv", "b.xls", "c.xlsx"]
        assert report.total_bytes == sum(f.bytes for f in report.spreadsheet_files)
        assert report.histogram["<1MB"] == 3
        assert any("fake.xlsx" in w for w in report.warnings)

    def test_empty_directory(self, tmp_path):
        report = discover(tmp_path)
        assert report.spreadsheet_files == []
        assert report.total_bytes == 0

    def test_missing_root(self, tmp_path):
        with pytest.raises(PathNotFound):
            discover(tmp_path / "nope")

    def test_read_only(self, tmp_path):
        self.make_tree(tmp_path / "tree")

        def tree_digest():
            digest = hashlib.sha256()
            for p in sorted((tmp_path / "tree").rglob("*")):
                if p.is_file():
                    digest.update(p.name.encode() + p.read_bytes())
            return digest.hexdigest()

        before = tree_digest()
        discover(tmp_path / "tree")
        assert tree_digest() == before

    def test_large_tree_exact_count(self, tmp_path):
        root = tmp_path / "many"
        for i in range(40):
            d = root / f"d{i:02}"
            d.mkdir(parents=True)
            for j in range(25):
                (d / f"f{j:02}.csv").write_text("1\n")
        report = discover(root)
        # independent count via filesystem walk
        expected = sum(1 for _ in root.rglob("*.csv"))
        assert len(report.spreadsheet_files) == expected == 1000

    def test_cli_discover(self, tmp_path):
        runner = CliRunner()
        self.make_tree(tmp_path / "tree")
        result = runner.invoke(
            main, ["--output", "json", "discover", "--root", str(tmp_path / "tree")]
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["file_count"] == 3


class TestCliServiceParity:
    def test_log_output_equals_endpoint_payload(self, env):
        from fastapi.testclient import TestClient

        from gridvault.service import ServiceConfig, create_app

        runner, store_root, book, _ = env
        invoke(runner, store_root, ["init"])
        invoke(runner, store_root,
               ["commit", "--workbook", "w1", "--file", str(book), "--author", "ada"])
        cli_out = invoke(runner, store_root,
                         ["--output", "json", "log", "--workbook", "w1"]).output.strip()
        with TestClient(create_app(ServiceConfig(store_root=str(store_root)))) as client:
            api_out = client.get("/api/v1/workbooks/w1/commits").content.decode()
        assert cli_out == api_out
