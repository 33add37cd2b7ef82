from fractions import Fraction

import pytest

from src.config import DATA_DIR
from src.parser import load_golden_rows, parse_int_list, parse_rational_list


def test_load_golden_rows(tmp_path):
    """Test loading a golden table from a temporary file."""
    content = "n,t,exact_sci,y2,y3,y4,estimate_sci,ratio\n3,4 3 3,1.00E0,2,0,2,9.99E-1,0.999\n"
    file = tmp_path / "table.csv"
    file.write_text(content)

    rows = load_golden_rows(file)
    assert len(rows) == 1
    assert rows[0].t == (4, 3, 3)
    assert rows[0].row_sums.x == 10
    assert rows[0].y4 == 2
    assert rows[0].lam is None


def test_scalar_row_sum_expands(tmp_path):
    """A single t value means every row sums to it."""
    content = "n,t,lam,exact_sci,estimate_sci,ratio\n6,6,1.20,3.69E4,3.34E4,0.906\n"
    file = tmp_path / "table.csv"
    file.write_text(content)

    rows = load_golden_rows(file)
    assert rows[0].t == (6,) * 6
    assert rows[0].lam == 1.2
    assert rows[0].y2 is None


def test_shipped_tables():
    """Both reference tables load with their full row counts."""
    table1 = load_golden_rows(DATA_DIR / "table1.csv")
    table2 = load_golden_rows(DATA_DIR / "table2.csv")
    assert len(table1) == 15
    assert all(r.n == 7 and sum(r.t) == 56 for r in table1)
    assert table1[-1].t == (4, 6, 7, 7, 8, 10, 14)
    assert len(table2) == 13
    assert [r.n for r in table2] == list(range(6, 19))
    assert table2[-1].estimate_sci == "1.97E58"


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_golden_rows(tmp_path / "missing.csv")


def test_load_empty_table(tmp_path):
    """Test loading a table with a header only."""
    file = tmp_path / "empty.csv"
    file.write_text("n,t,exact_sci,estimate_sci,ratio\n")
    assert load_golden_rows(file) == []


def test_parse_lists():
    assert parse_int_list("8,8, 9") == (8, 8, 9)
    assert parse_int_list("4 6 7") == (4, 6, 7)
    assert parse_rational_list("1/2,0.25,1") == (Fraction(1, 2), Fraction(1, 4), Fraction(1))
    with pytest.raises(ValueError):
        parse_int_list(" ")
    with pytest.raises(ValueError):
        parse_int_list("1,x")
