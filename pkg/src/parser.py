import csv
import logging
from fractions import Fraction
from pathlib import Path
from typing import Union

from .schemas import GoldenRow, as_fraction

logger = logging.getLogger("symstoch.parser")


def parse_int_list(text: str) -> tuple[int, ...]:
    """Parse '8,8,8' (commas or whitespace) into integers."""
    parts = text.replace(",", " ").split()
    if not parts:
        raise ValueError("empty list")
    return tuple(int(p) for p in parts)


def parse_rational_list(text: str) -> tuple[Fraction, ...]:
    """Parse '1/2,0.25,1' into exact rationals."""
    parts = text.replace(",", " ").split()
    if not parts:
        raise ValueError("empty list")
    return tuple(as_fraction(p) for p in parts)


def _optional_int(value: str | None) -> int | None:
    return int(value) if value not in (None, "") else None


def load_golden_rows(path: Union[str, Path]) -> list[GoldenRow]:
    """Load a reference table; a single value in the t column means every row sums to it."""
    logger.debug("Loading golden table from %s", path)
    try:
        with open(path, encoding="utf-8", newline="") as f:
            records = list(csv.DictReader(f))
    except Exception as exc:
        logger.error("Failed to read golden table: %s", exc)
        raise

    rows = []
    for record in records:
        n = int(record["n"])
        t = parse_int_list(record["t"])
        if len(t) == 1:
            t = t * n
        rows.append(
            GoldenRow(
                n=n,
                t=t,
                exact_sci=record["exact_sci"],
                estimate_sci=record["estimate_sci"],
                ratio=float(record["ratio"]),
                lam=float(record["lam"]) if record.get("lam") else None,
                y2=_optional_int(record.get("y2")),
                y3=_optional_int(record.get("y3")),
                y4=_optional_int(record.get("y4")),
            )
        )
    logger.info("Loaded %d golden rows from %s", len(rows), Path(path).name)
    return rows
