"""Benchmark dataset registry: download, convert, and cache as canonical CSV.

Each entry knows its source URL, task, expected shape, and a converter
from the raw archive layout to numeric rows with the label last.
Fetching is idempotent: an existing ``<name>.csv`` is never re-downloaded.

Spreadsheet sources: .xlsx files are read with a small built-in reader
(they are zipped XML), .xls files need the optional ``xlrd`` dependency
(install the ``fetch`` extra).
"""

from __future__ import annotations

import io
import re
import urllib.request
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable
from xml.etree import ElementTree

from .datasets import Dataset, load_csv

_UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

Rows = list[list[float]]


@dataclass(frozen=True)
class DatasetSpec:
    """Registry entry for one benchmark dataset."""

    name: str
    url: str
    task: str
    n_rows: int
    n_features: int
    converter: Callable[[bytes], Rows]


def _text_lines(raw: bytes) -> list[str]:
    return [ln for ln in raw.decode("utf-8", errors="replace").splitlines()
            if ln.strip() != ""]


def _convert_asn(raw: bytes) -> Rows:
    """Airfoil self-noise: whitespace-separated, 5 features + scaled sound
    pressure level."""
    rows = []
    for ln in _text_lines(raw):
        parts = ln.split()
        if len(parts) != 6:
            raise ValueError(f"expected 6 whitespace-separated fields, got {len(parts)}")
        rows.append([float(p) for p in parts])
    return rows


def _convert_bcw(raw: bytes) -> Rows:
    """Breast cancer (original): drop the sample id, drop rows with missing
    cells, map class 2/4 to 0/1."""
    rows = []
    for ln in _text_lines(raw):
        parts = ln.split(",")
        if len(parts) != 11:
            raise ValueError(f"expected 11 fields, got {len(parts)}")
        if "?" in parts:
            continue
        label = {"2": 0.0, "4": 1.0}.get(parts[-1].strip())
        if label is None:
            raise ValueError(f"unexpected class value {parts[-1]!r}")
        rows.append([float(p) for p in parts[1:-1]] + [label])
    return rows


def _convert_heart(raw: bytes) -> Rows:
    """Statlog heart: whitespace-separated, class 1/2 mapped to 0/1."""
    rows = []
    for ln in _text_lines(raw):
        parts = ln.split()
        if len(parts) != 14:
            raise ValueError(f"expected 14 fields, got {len(parts)}")
        label = {"1": 0.0, "2": 1.0}.get(parts[-1].strip())
        if label is None:
            raise ValueError(f"unexpected class value {parts[-1]!r}")
        rows.append([float(p) for p in parts[:-1]] + [label])
    return rows


def _convert_iono(raw: bytes) -> Rows:
    """Ionosphere: 34 numeric features, g/b mapped to 1/0."""
    rows = []
    for ln in _text_lines(raw):
        parts = ln.split(",")
        if len(parts) != 35:
            raise ValueError(f"expected 35 fields, got {len(parts)}")
        label = {"g": 1.0, "b": 0.0}.get(parts[-1].strip())
        if label is None:
            raise ValueError(f"unexpected class value {parts[-1]!r}")
        rows.append([float(p) for p in parts[:-1]] + [label])
    return rows


def _convert_parks(raw: bytes) -> Rows:
    """Parkinsons: drop the recording name, move the status column to the
    end as the label."""
    lines = _text_lines(raw)
    header = [h.strip() for h in lines[0].split(",")]
    if "name" not in header or "status" not in header:
        raise ValueError("expected 'name' and 'status' columns in the header")
    name_col = header.index("name")
    status_col = header.index("status")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ValueError(
                f"expected {len(header)} fields, got {len(parts)}"
            )
        label = float(parts[status_col])
        if label not in (0.0, 1.0):
            raise ValueError(f"unexpected status value {parts[status_col]!r}")
        feats = [float(p) for k, p in enumerate(parts)
                 if k not in (name_col, status_col)]
        rows.append(feats + [label])
    return rows


def _convert_sonar(raw: bytes) -> Rows:
    """Sonar: 60 numeric features, R/M mapped to 0/1."""
    rows = []
    for ln in _text_lines(raw):
        parts = ln.split(",")
        if len(parts) != 61:
            raise ValueError(f"expected 61 fields, got {len(parts)}")
        label = {"R": 0.0, "M": 1.0}.get(parts[-1].strip())
        if label is None:
            raise ValueError(f"unexpected class value {parts[-1]!r}")
        rows.append([float(p) for p in parts[:-1]] + [label])
    return rows


def _column_index(cell_ref: str) -> int:
    """Spreadsheet column letters to a 0-based index ('A' -> 0, 'AA' -> 26)."""
    letters = re.match(r"[A-Z]+", cell_ref)
    if not letters:
        raise ValueError(f"bad cell reference {cell_ref!r}")
    idx = 0
    for ch in letters.group(0):
        idx = idx * 26 + (ord(ch) - ord("A") + 1)
    return idx - 1


def read_xlsx_rows(raw: bytes) -> list[list[str]]:
    """Extract the first worksheet of an .xlsx file as rows of cell strings.

    Handles inline numbers and shared strings, which covers plain data
    sheets; empty cells become empty strings.
    """
    with zipfile.ZipFile(io.BytesIO(raw)) as zf:
        shared: list[str] = []
        if "xl/sharedStrings.xml" in zf.namelist():
            root = ElementTree.fromstring(zf.read("xl/sharedStrings.xml"))
            for si in root:
                shared.append("".join(t.text or "" for t in si.iter()
                                      if t.tag.endswith("}t")))
        sheet_names = sorted(
            n for n in zf.namelist()
            if re.fullmatch(r"xl/worksheets/sheet\d+\.xml", n)
        )
        if not sheet_names:
            raise ValueError("no worksheets found")
        root = ElementTree.fromstring(zf.read(sheet_names[0]))
    rows: list[list[str]] = []
    for row_el in root.iter():
        if not row_el.tag.endswith("}row"):
            continue
        cells: dict[int, str] = {}
        for c in row_el:
            if not c.tag.endswith("}c"):
                continue
            ref = c.get("r", "")
            col = _column_index(ref) if ref else len(cells)
            value = ""
            for v in c:
                if v.tag.endswith("}v"):
                    value = v.text or ""
                elif v.tag.endswith("}is"):
                    value = "".join(t.text or "" for t in v.iter()
                                    if t.tag.endswith("}t"))
            if c.get("t") == "s" and value != "":
                value = shared[int(value)]
            cells[col] = value
        if cells:
            width = max(cells) + 1
            rows.append([cells.get(k, "") for k in range(width)])
    return rows


def _rows_by_headers(
    table: list[list[str]], feature_headers: list[str], label_header: str
) -> Rows:
    """Select named columns from a header + data table of cell strings."""
    header_row = None
    for i, row in enumerate(table):
        stripped = [c.strip() for c in row]
        if all(h in stripped for h in feature_headers + [label_header]):
            header_row = i
            positions = [stripped.index(h) for h in feature_headers]
            label_pos = stripped.index(label_header)
            break
    if header_row is None:
        raise ValueError(
            f"no header row containing {feature_headers + [label_header]}"
        )
    rows = []
    for row in table[header_row + 1:]:
        cells = [c.strip() for c in row]
        if all(cells[p] == "" for p in positions if p < len(cells)):
            continue  # blank padding row
        try:
            rows.append([float(cells[p]) for p in positions]
                        + [float(cells[label_pos])])
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad data row {cells!r}") from exc
    return rows


_ENB_FEATURES = [f"X{i}" for i in range(1, 9)]


def _convert_enc(raw: bytes) -> Rows:
    """Energy efficiency, cooling load (Y2) as the target."""
    return _rows_by_headers(read_xlsx_rows(raw), _ENB_FEATURES, "Y2")


def _convert_enh(raw: bytes) -> Rows:
    """Energy efficiency, heating load (Y1) as the target."""
    return _rows_by_headers(read_xlsx_rows(raw), _ENB_FEATURES, "Y1")


def read_xls_rows(raw: bytes) -> list[list[str]]:
    """Extract the first worksheet of a legacy .xls file as cell strings.

    Needs the optional ``xlrd`` dependency (the ``fetch`` extra)."""
    try:
        import xlrd
    except ImportError as exc:
        raise ImportError(
            "reading .xls files needs the optional dependency xlrd; "
            "install the package with the [fetch] extra"
        ) from exc
    book = xlrd.open_workbook(file_contents=raw)
    sheet = book.sheet_by_index(0)
    rows = []
    for r in range(sheet.nrows):
        rows.append([str(sheet.cell_value(r, c)).strip()
                     for c in range(sheet.ncols)])
    return rows


def _convert_ccs(raw: bytes) -> Rows:
    """Concrete compressive strength: 8 numeric features + strength, from
    the distributed .xls sheet."""
    table = read_xls_rows(raw)
    return _numeric_tail_rows(table, n_cols=9)


def _numeric_tail_rows(table: list[list[str]], n_cols: int) -> Rows:
    """Keep the maximal trailing block of fully numeric rows of n_cols."""
    rows = []
    for row in table:
        cells = [c for c in row if c != ""]
        if len(cells) != n_cols:
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            rows = []  # header or junk resets the block
    return rows


REGISTRY: dict[str, DatasetSpec] = {
    spec.name: spec
    for spec in [
        DatasetSpec("asn", f"{_UCI}/00291/airfoil_self_noise.dat",
                    "regression", 1503, 5, _convert_asn),
        DatasetSpec("ccs", f"{_UCI}/concrete/compressive/Concrete_Data.xls",
                    "regression", 1030, 8, _convert_ccs),
        DatasetSpec("enc", f"{_UCI}/00242/ENB2012_data.xlsx",
                    "regression", 768, 8, _convert_enc),
        DatasetSpec("enh", f"{_UCI}/00242/ENB2012_data.xlsx",
                    "regression", 768, 8, _convert_enh),
        DatasetSpec("bcw", f"{_UCI}/breast-cancer-wisconsin/breast-cancer-wisconsin.data",
                    "classification", 683, 9, _convert_bcw),
        DatasetSpec("heart", f"{_UCI}/statlog/heart/heart.dat",
                    "classification", 270, 13, _convert_heart),
        DatasetSpec("iono", f"{_UCI}/ionosphere/ionosphere.data",
                    "classification", 351, 34, _convert_iono),
        DatasetSpec("parks", f"{_UCI}/parkinsons/parkinsons.data",
                    "classification", 195, 22, _convert_parks),
        DatasetSpec("sonar", f"{_UCI}/undocumented/connectionist-bench/sonar/sonar.all-data",
                    "classification", 208, 60, _convert_sonar),
    ]
}


def dataset_names() -> list[str]:
    return sorted(REGISTRY)


def _download(url: str, timeout: float = 60.0) -> bytes:
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read()


def convert_raw(name: str, raw: bytes) -> Rows:
    """Run a registry converter and verify the expected shape."""
    spec = REGISTRY[name]
    rows = spec.converter(raw)
    if len(rows) != spec.n_rows or any(len(r) != spec.n_features + 1 for r in rows):
        got_cols = len(rows[0]) if rows else 0
        raise ValueError(
            f"{name}: converted to {len(rows)} x {got_cols} values, expected "
            f"{spec.n_rows} x {spec.n_features + 1}"
        )
    return rows


def fetch_dataset(
    name: str, dest_dir: str | Path, url: str | None = None
) -> Path:
    """Ensure ``<dest_dir>/<name>.csv`` exists, downloading and converting
    the raw source when needed.  Returns the CSV path."""
    if name not in REGISTRY:
        raise ValueError(
            f"unknown dataset {name!r}; known: {', '.join(dataset_names())}"
        )
    dest_dir = Path(dest_dir)
    dest = dest_dir / f"{name}.csv"
    if dest.exists():
        return dest
    spec = REGISTRY[name]
    raw = _download(url if url is not None else spec.url)
    rows = convert_raw(name, raw)
    dest_dir.mkdir(parents=True, exist_ok=True)
    tmp = dest.with_suffix(".csv.part")
    with open(tmp, "w") as fh:
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")
    tmp.replace(dest)
    return dest


def load_named(name: str, data_dir: str | Path) -> Dataset:
    """Load a registry dataset from its cached CSV; never downloads."""
    if name not in REGISTRY:
        raise ValueError(
            f"unknown dataset {name!r}; known: {', '.join(dataset_names())}"
        )
    path = Path(data_dir) / f"{name}.csv"
    if not path.exists():
        raise FileNotFoundError(
            f"{path} not found; fetch it first (gpbag fetch --name {name})"
        )
    return load_csv(path, task=REGISTRY[name].task, name=name)
