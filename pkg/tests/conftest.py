"""Shared fixtures: snapshot builders, random generators, xlsx fixture."""

from __future__ import annotations

import io
import random
import zipfile

import pytest

from gridvault import Cell, CellValue, VersionStore, WorkbookSnapshot
from gridvault.model import ERROR_LITERALS


def num(x) -> Cell:
    return Cell(value=CellValue.number(x))


def txt(s) -> Cell:
    return Cell(value=CellValue.text(s))


def formula_cell(x, f) -> Cell:
    return Cell(value=CellValue.number(x), formula=f)


def snap(sheets: dict[str, dict[tuple[int, int], Cell]]) -> WorkbookSnapshot:
    return WorkbookSnapshot(sheets=sheets)


def one_cell(value: float, sheet: str = "S", row: int = 1, col: int = 1) -> WorkbookSnapshot:
    return snap({sheet: {(row, col): num(value)}})


def random_cell(rng: random.Random) -> Cell:
    kind = rng.randrange(6)
    if kind == 0:
        value = CellValue.number(rng.uniform(-1e6, 1e6))
    elif kind == 1:
        value = CellValue.number(float(rng.randrange(-100, 100)))
    elif kind == 2:
        value = CellValue.text("".join(rng.choices("abc \"\\é", k=rng.randrange(6))))
    elif kind == 3:
        value = CellValue.boolean(rng.random() < 0.5)
    elif kind == 4:
        value = CellValue.error(rng.choice(ERROR_LITERALS))
    else:
        return Cell(value=CellValue.number(float(rng.randrange(100))),
                    formula=f"=A{rng.randrange(1, 9)}*{rng.randrange(9)}")
    return Cell(value=value)


def random_snapshot(rng: random.Random, max_sheets: int = 3, max_dim: int = 20) -> WorkbookSnapshot:
    sheets = {}
    for i in range(rng.randrange(max_sheets + 1)):
        name = f"Sheet{i + 1}"
        cells = {}
        for _ in range(rng.randrange(1, max_dim)):
            pos = (rng.randrange(1, max_dim + 1), rng.randrange(1, max_dim + 1))
            cells[pos] = random_cell(rng)
        sheets[name] = cells
    return WorkbookSnapshot(sheets=sheets)


def mutate_snapshot(rng: random.Random, base: WorkbookSnapshot, edits: int = 4) -> WorkbookSnapshot:
    """A nearby snapshot: some cells changed, added, removed."""
    sheets = {name: dict(cells) for name, cells in base.sheets.items()}
    for _ in range(edits):
        op = rng.randrange(3)
        if op == 0 and sheets:  # change or remove in an existing sheet
            name = rng.choice(sorted(sheets))
            if sheets[name] and rng.random() < 0.7:
                pos = rng.choice(sorted(sheets[name]))
                if rng.random() < 0.5:
                    sheets[name][pos] = random_cell(rng)
                else:
                    del sheets[name][pos]
            else:
                sheets[name][(rng.randrange(1, 21), rng.randrange(1, 21))] = random_cell(rng)
        elif op == 1:
            name = f"Sheet{rng.randrange(1, 5)}"
            cells = sheets.setdefault(name, {})
            cells[(rng.randrange(1, 21), rng.randrange(1, 21))] = random_cell(rng)
        elif op == 2 and len(sheets) > 1 and rng.random() < 0.3:
            del sheets[rng.choice(sorted(sheets))]
    for name in [n for n, cells in sheets.items() if not cells and n not in base.sheets]:
        del sheets[name]
    return WorkbookSnapshot(sheets=sheets)


@pytest.fixture
def store(tmp_path) -> VersionStore:
    s = VersionStore(tmp_path / "data")
    s.init()
    return s


# --- hand-built minimal .xlsx fixture -------------------------------------
# XML below was written by hand against the SpreadsheetML part structure
# and is independent of the ingest implementation.

_CONTENT_TYPES = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">
<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>
<Default Extension="xml" ContentType="application/xml"/>
<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>
<Override PartName="/xl/worksheets/sheet1.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>
<Override PartName="/xl/sharedStrings.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml"/>
</Types>"""

_ROOT_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>
</Relationships>"""

_WORKBOOK_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" Target="worksheets/sheet1.xml"/>
<Relationship Id="rId2" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/sharedStrings" Target="sharedStrings.xml"/>
</Relationships>"""


def build_xlsx(
    sheet_name: str = "sheet1",
    rows_xml: str = "",
    shared_strings: tuple[str, ...] = (),
) -> bytes:
    workbook = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" '
        'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">'
        f'<sheets><sheet name="{sheet_name}" sheetId="1" r:id="rId1"/></sheets></workbook>'
    )
    sst = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<sst xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" '
        f'count="{len(shared_strings)}" uniqueCount="{len(shared_strings)}">'
        + "".join(f"<si><t>{s}</t></si>" for s in shared_strings)
        + "</sst>"
    )
    sheet = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">'
        f"<sheetData>{rows_xml}</sheetData></worksheet>"
    )
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("[Content_Types].xml", _CONTENT_TYPES)
        zf.writestr("_rels/.rels", _ROOT_RELS)
        zf.writestr("xl/workbook.xml", workbook)
        zf.writestr("xl/_rels/workbook.xml.rels", _WORKBOOK_RELS)
        zf.writestr("xl/sharedStrings.xml", sst)
        zf.writestr("xl/worksheets/sheet1.xml", sheet)
    return buf.getvalue()
