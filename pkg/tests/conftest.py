import pytest

from pocause import TableSchema, Variable, load_table


@pytest.fixture
def scalar_schema() -> TableSchema:
    return TableSchema(
        (
            Variable("y", "outcome", position=0),
            Variable("x", "treatment"),
            Variable("c", "covariate"),
        )
    )


@pytest.fixture
def write_csv(tmp_path):
    """Write semicolon-delimited text to a temp file and return its path."""

    def _write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def small_table(scalar_schema, write_csv):
    """Sixteen rows, two treatments, two covariate values, outcomes by hand.

    Within each (x, c) cell the outcomes are 1, 2, 3, 4 so every empirical
    CDF value is a quarter multiple.
    """
    lines = ["y;x;c"]
    for x in (0, 1):
        for c in (0, 1):
            for y in (1, 2, 3, 4):
                lines.append(f"{y};{x};{c}")
    path = write_csv("\n".join(lines) + "\n")
    return load_table(path, scalar_schema)
