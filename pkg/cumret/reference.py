"""Bundled published r_bar/CAGR tables, used as side-by-side comparison baselines."""

from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, model_validator

from .errors import ArgumentError, FixtureIntegrityError
from .hashutil import hash_string, verify_hash
from .logging_setup import get_logger

logger = get_logger("reference")

TableName = Literal["r_bar", "cagr", "cmv"]
REFERENCE_RULES = [
    "SMA", "EMA", "MOM", "KD", "MACD", "RSI", "PSY", "CCI", "MA", "BIAS", "ROC", "DMI", "RND",
]


class ReferenceTables(BaseModel):
    """Mean trade return and CAGR per (rule, index), plus the market CAGR row."""

    indices: list[str]
    r_bar: dict[str, dict[str, float]]
    cagr: dict[str, dict[str, float]]
    cmv: dict[str, float]
    checksum: str

    @model_validator(mode="after")
    def validate_complete(self):
        """Every (rule, index) cell must be present."""
        missing = []
        for table_name in ("r_bar", "cagr"):
            table = getattr(self, table_name)
            for rule in REFERENCE_RULES:
                for index in self.indices:
                    if index not in table.get(rule, {}):
                        missing.append(f"{table_name}/{rule}/{index}")
        missing += [f"cmv/{index}" for index in self.indices if index not in self.cmv]
        if missing:
            raise ValueError(f"reference tables incomplete: {', '.join(missing)}")
        return self

    def canonical_lines(self) -> list[str]:
        lines = []
        for table_name in ("r_bar", "cagr"):
            for rule, row in getattr(self, table_name).items():
                lines += [f"{table_name},{rule},{index},{value:.4f}" for index, value in row.items()]
        lines += [f"cmv,CMV,{index},{value:.4f}" for index, value in self.cmv.items()]
        return sorted(lines)

    def canonical_text(self) -> str:
        return "\n".join(self.canonical_lines()) + "\n"

    def compute_checksum(self) -> str:
        return hash_string(self.canonical_text())

    def lookup(self, table: str, rule: str, index: str) -> float:
        """Published value of one cell; ("cagr", "CMV", index) reads the CMV row.

        Raises:
            ArgumentError: unknown table, rule or index.
        """
        rule_key = rule.upper()
        if table == "cmv" or (table == "cagr" and rule_key == "CMV"):
            if rule_key != "CMV":
                raise ArgumentError(f"cmv table has only the CMV row, got {rule!r}")
            if index not in self.cmv:
                raise ArgumentError(f"unknown index {index!r}; expected one of {self.indices}")
            return self.cmv[index]
        if table not in ("r_bar", "cagr"):
            raise ArgumentError(f"unknown table {table!r}; expected r_bar, cagr or cmv")
        rows = getattr(self, table)
        if rule_key not in rows:
            raise ArgumentError(f"unknown rule {rule!r} in table {table}")
        if index not in rows[rule_key]:
            raise ArgumentError(f"unknown index {index!r}; expected one of {self.indices}")
        return rows[rule_key][index]

    def rows(self, table: str) -> list[dict]:
        """One row per rule (plus CMV for cagr) in fixture order."""
        if table == "cmv":
            return [{"rule": "CMV", **self.cmv}]
        if table not in ("r_bar", "cagr"):
            raise ArgumentError(f"unknown table {table!r}; expected r_bar, cagr or cmv")
        rows = [{"rule": rule, **values} for rule, values in getattr(self, table).items()]
        if table == "cagr":
            rows.insert(0, {"rule": "CMV", **self.cmv})
        return rows


def _default_fixture() -> str:
    return resources.files("cumret").joinpath("data/reference_tables.yaml").read_text(
        encoding="utf-8"
    )


def parse_reference_tables(text: str) -> ReferenceTables:
    return ReferenceTables(**yaml.safe_load(text))


def verify_checksum(tables: ReferenceTables) -> None:
    """Raises FixtureIntegrityError when the cells do not match the embedded checksum."""
    if not verify_hash(tables.canonical_text(), tables.checksum):
        raise FixtureIntegrityError(
            f"reference tables checksum mismatch: expected {tables.checksum}, "
            f"got {tables.compute_checksum()}"
        )


@lru_cache(maxsize=1)
def _bundled() -> ReferenceTables:
    tables = parse_reference_tables(_default_fixture())
    verify_checksum(tables)
    logger.debug("Loaded bundled reference tables")
    return tables


def load_reference_tables(path: Optional[Path] = None) -> ReferenceTables:
    """Load and integrity-check reference tables (bundled fixture by default)."""
    if path is None:
        return _bundled()
    tables = parse_reference_tables(Path(path).read_text(encoding="utf-8"))
    verify_checksum(tables)
    return tables


def lookup_reference(table: TableName, rule: str, index: str) -> float:
    """Published value for (table, rule, index), e.g. ("r_bar", "KD", "DJIA") -> 0.0939."""
    return load_reference_tables().lookup(table, rule, index)
