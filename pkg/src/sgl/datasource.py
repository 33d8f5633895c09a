"""Tabular data backend: embedded SQL engine, CSV ingestion, schema lookup.

Backed by sqlite3. A base-10 `log` scalar is registered so subqueries can
transform values the same way the scale stage does. Ingestion takes an
exclusive lock; queries share the connection under the same lock, so readers
always observe a complete catalog.
"""

from __future__ import annotations

import csv
import io
import math
import os
import re
import sqlite3
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .ast import DataSource, Subquery, TableRef
from .diagnostics import Diagnostic, SglError

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"[+-]?[0-9]+\Z")

_READONLY_OPS = {
    sqlite3.SQLITE_SELECT,
    sqlite3.SQLITE_READ,
    sqlite3.SQLITE_FUNCTION,
    sqlite3.SQLITE_RECURSIVE,
}


@dataclass(frozen=True)
class TableSchema:
    """Column names and types (int | float | text) of a table or query result."""

    name: str
    columns: tuple[tuple[str, str], ...]

    @property
    def column_names_lower(self) -> frozenset[str]:
        return frozenset(name.lower() for name, _ in self.columns)

    def column_type(self, name: str) -> str | None:
        lowered = name.lower()
        for col, col_type in self.columns:
            if col.lower() == lowered:
                return col_type
        return None

    def describe(self) -> str:
        return f"table '{self.name}'" if self.name else "the subquery result"

    def to_dict(self) -> dict:
        return {"name": self.name, "columns": [{"name": n, "type": t} for n, t in self.columns]}


@dataclass
class ColumnTable:
    """Columnar result set; None marks a null cell."""

    names: list[str]
    types: list[str]
    columns: list[list]

    @property
    def row_count(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    def column(self, name: str) -> list:
        lowered = name.lower()
        for i, n in enumerate(self.names):
            if n.lower() == lowered:
                return self.columns[i]
        raise KeyError(name)


def _quote_ident(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def _affinity_type(declared: str | None) -> str:
    decl = (declared or "").upper()
    if "INT" in decl:
        return "int"
    if any(k in decl for k in ("CHAR", "CLOB", "TEXT")):
        return "text"
    if any(k in decl for k in ("REAL", "FLOA", "DOUB", "NUM", "DEC")):
        return "float"
    return "text"


def _infer_column_type(values: Iterable[str]) -> str:
    saw_value = False
    all_int = True
    for v in values:
        if v == "":
            continue
        saw_value = True
        if all_int and not _INT_RE.match(v.strip()):
            all_int = False
        if not all_int:
            try:
                f = float(v)
            except ValueError:
                return "text"
            if math.isnan(f) or math.isinf(f):
                return "text"
    if not saw_value:
        return "text"
    return "int" if all_int else "float"


def _convert(value: str, col_type: str):
    if value == "":
        return None
    if col_type == "int":
        return int(value.strip())
    if col_type == "float":
        return float(value)
    return value


def _sql_log10(value):
    if value is None:
        return None
    try:
        v = float(value)
    except (TypeError, ValueError):
        return None
    if v <= 0:
        return None
    return math.log10(v)


class Database:
    """Catalog of tables plus query execution for SGL data sources."""

    def __init__(self, path: str | None = None):
        if path is None:
            path = os.environ.get("SGL_DB_PATH") or ":memory:"
        self.path = path
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.create_function("log", 1, _sql_log10, deterministic=True)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- ingestion -----------------------------------------------------------

    def load_csv(self, source: str | Path | IO[str], table: str, replace: bool = True) -> TableSchema:
        """Create or replace `table` from RFC-4180 CSV with a header row."""
        if not _IDENT_RE.match(table):
            raise SglError(Diagnostic("NameCollision", f"table name {table!r} must be a plain identifier"))
        if isinstance(source, (str, Path)):
            with open(source, "r", encoding="utf-8", newline="") as fh:
                return self._load_csv_stream(fh, table, replace)
        return self._load_csv_stream(source, table, replace)

    def _load_csv_stream(self, stream: IO[str], table: str, replace: bool) -> TableSchema:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise SglError(Diagnostic("EmptyFile", "CSV input has no header row")) from None
        if not header or all(h.strip() == "" for h in header):
            raise SglError(Diagnostic("EmptyFile", "CSV header row is empty"))
        names = [h.strip() for h in header]
        lowered = [n.lower() for n in names]
        if len(set(lowered)) != len(lowered):
            dupe = next(n for n in lowered if lowered.count(n) > 1)
            raise SglError(Diagnostic("DuplicateColumn", f"CSV header repeats column '{dupe}'"))

        rows: list[list[str]] = []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names):
                raise SglError(Diagnostic(
                    "RaggedRow",
                    f"row {rownum} has {len(row)} fields, expected {len(names)}",
                    line=rownum,
                ))
            rows.append(row)

        types = [_infer_column_type(r[i] for r in rows) for i in range(len(names))]
        converted = [[_convert(cell, types[i]) for i, cell in enumerate(row)] for row in rows]

        sql_types = {"int": "INTEGER", "float": "REAL", "text": "TEXT"}
        col_defs = ", ".join(f"{_quote_ident(n)} {sql_types[t]}" for n, t in zip(names, types))
        with self._lock:
            exists = self._table_exists(table)
            if exists and not replace:
                raise SglError(Diagnostic("NameCollision", f"table '{table}' already exists"))
            with self._conn:
                if exists:
                    self._conn.execute(f"drop table {_quote_ident(table)}")
                self._conn.execute(f"create table {_quote_ident(table)} ({col_defs})")
                if converted:
                    placeholders = ", ".join("?" for _ in names)
                    self._conn.executemany(
                        f"insert into {_quote_ident(table)} values ({placeholders})", converted,
                    )
        return TableSchema(table, tuple(zip(names, types)))

    # -- catalog ---------------------------------------------------------------

    def _table_exists(self, name: str) -> bool:
        row = self._conn.execute(
            "select 1 from sqlite_master where type = 'table' and lower(name) = lower(?)", (name,),
        ).fetchone()
        return row is not None

    def table_names(self) -> list[str]:
        with self._lock:
            rows = self._conn.execute(
                "select name from sqlite_master where type = 'table' "
                "and name not like 'sqlite_%' order by name",
            ).fetchall()
        return [r[0] for r in rows]

    def tables(self) -> list[TableSchema]:
        with self._lock:
            return [self._table_schema(name) for name in self.table_names()]

    def _table_schema(self, name: str) -> TableSchema:
        info = self._conn.execute(f"pragma table_info({_quote_ident(name)})").fetchall()
        return TableSchema(name, tuple((row[1], _affinity_type(row[2])) for row in info))

    # -- queries ----------------------------------------------------------------

    def _no_table_error(self, source: TableRef) -> SglError:
        return SglError(Diagnostic(
            "E_NO_TABLE", f"table '{source.name}' does not exist",
            source.pos.line, source.pos.col, len(source.name),
        ))

    def _sql_error(self, source: Subquery, exc: Exception) -> SglError:
        return SglError(Diagnostic(
            "E_SQL", f"subquery failed: {exc}", source.pos.line, source.pos.col,
        ))

    def _authorize_readonly(self, action, *args):
        if action in _READONLY_OPS:
            return sqlite3.SQLITE_OK
        return sqlite3.SQLITE_DENY

    @staticmethod
    def _authorize_all(action, *args):
        return sqlite3.SQLITE_OK

    def _execute_subquery(self, source: Subquery, sql: str) -> sqlite3.Cursor:
        head = source.sql.lstrip().split(None, 1)
        first = head[0].lower() if head else ""
        if first not in ("select", "with", "values"):
            raise self._sql_error(source, ValueError("only SELECT statements are allowed"))
        self._conn.set_authorizer(self._authorize_readonly)
        try:
            return self._conn.execute(sql)
        except sqlite3.Error as exc:
            raise self._sql_error(source, exc) from None
        finally:
            # clearing with None is unreliable before Python 3.11
            self._conn.set_authorizer(self._authorize_all)

    def schema_of(self, source: DataSource) -> TableSchema:
        """Column names/types without materializing rows into Python."""
        with self._lock:
            if isinstance(source, TableRef):
                if not self._table_exists(source.name):
                    raise self._no_table_error(source)
                return self._table_schema(source.name)
            cursor = self._execute_subquery(source, source.sql)
            names = [d[0] for d in cursor.description]
            self._check_unique(names, source)
            if not names:
                raise self._sql_error(source, ValueError("subquery returns no columns"))
            probes = ", ".join(
                "max(case when typeof({c}) in ('text', 'blob') then 2 "
                "when typeof({c}) = 'real' then 1 "
                "when typeof({c}) = 'integer' then 0 else -1 end)".format(c=_quote_ident(n))
                for n in names
            )
            row = self._execute_subquery(source, f"select {probes} from ({source.sql})").fetchone()
            ranks = row if row is not None else [None] * len(names)
            rank_types = {0: "int", 1: "float", 2: "text"}
            types = tuple(rank_types.get(r, "text") for r in ranks)
            return TableSchema("", tuple(zip(names, types)))

    def _check_unique(self, names: list[str], source: Subquery) -> None:
        lowered = [n.lower() for n in names]
        if len(set(lowered)) != len(lowered):
            dupe = next(n for n in lowered if lowered.count(n) > 1)
            raise self._sql_error(source, ValueError(f"result repeats column name '{dupe}'"))

    def fetch(self, source: DataSource) -> ColumnTable:
        """Materialize a data source; TableRef becomes SELECT * of the table."""
        with self._lock:
            if isinstance(source, TableRef):
                if not self._table_exists(source.name):
                    raise self._no_table_error(source)
                schema = self._table_schema(source.name)
                cursor = self._conn.execute(f"select * from {_quote_ident(source.name)}")
                rows = cursor.fetchall()
                names = [n for n, _ in schema.columns]
                types = [t for _, t in schema.columns]
            else:
                cursor = self._execute_subquery(source, source.sql)
                rows = cursor.fetchall()
                names = [d[0] for d in cursor.description]
                self._check_unique(names, source)
                types = [_realized_type(rows, i) for i in range(len(names))]
        columns: list[list] = [[row[i] for row in rows] for i in range(len(names))]
        return ColumnTable(names, types, columns)


def _realized_type(rows: list, index: int) -> str:
    saw_float = saw_int = False
    for row in rows:
        v = row[index]
        if v is None:
            continue
        if isinstance(v, str) or isinstance(v, (bytes, bytearray)):
            return "text"
        if isinstance(v, bool) or isinstance(v, int):
            saw_int = True
        elif isinstance(v, float):
            saw_float = True
    if saw_float:
        return "float"
    if saw_int:
        return "int"
    return "text"


def csv_from_text(text: str) -> IO[str]:
    """Wrap raw CSV text for load_csv (HTTP upload path)."""
    return io.StringIO(text)
