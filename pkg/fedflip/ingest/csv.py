"""Pixel CSV codec.

Format: UTF-8, comma separated, header ``pixel0000,...,pixel0783,label``,
one image per row. Rows holding raw greyscale (any value above 1.0) are
divided by 255; already-scaled files are taken as is.
"""

import re
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from fedflip.errors import (
    HeaderError,
    LabelRangeError,
    MalformedRowError,
    MissingFileError,
    NonNumericCellError,
)
from fedflip.ingest.dataset import CLASS_NAMES, IMAGE_PIXELS, LabeledDataset
from fedflip.utils.logging import get_logger

logger = get_logger(__name__)

LABEL_COLUMN = "label"
_PARSER_LINE = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


def pixel_columns(n_features: int = IMAGE_PIXELS) -> List[str]:
    return [f"pixel{i:04d}" for i in range(n_features)]


def load_csv(path: Union[str, Path], n_features: int = IMAGE_PIXELS) -> LabeledDataset:
    """Read a pixel CSV into a dataset; row order is preserved."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(str(path))

    expected_columns = pixel_columns(n_features) + [LABEL_COLUMN]
    try:
        frame = pd.read_csv(
            path, dtype=str, index_col=False, encoding="utf-8", keep_default_na=False, na_filter=False
        )
    except pd.errors.EmptyDataError:
        raise HeaderError(f"{path} is empty", path=str(path))
    except pd.errors.ParserError as e:
        match = _PARSER_LINE.search(str(e))
        if match:
            expected, line, saw = (int(g) for g in match.groups())
            # pandas counts file lines including the header
            raise MalformedRowError(row=line - 1, expected=expected, actual=saw) from e
        raise MalformedRowError(row=-1, expected=len(expected_columns)) from e

    columns = list(frame.columns)
    if columns != expected_columns:
        _raise_header_mismatch(path, columns, expected_columns)

    # short rows are padded with empty fields; tokens like "nan" stay text
    cells = frame.to_numpy(dtype=object)
    missing = pd.isna(cells) | (np.char.strip(cells.astype(str)) == "")
    if missing.any():
        row = int(np.argwhere(missing)[0][0])
        raise MalformedRowError(
            row=row + 1,
            expected=len(expected_columns),
            actual=int((~missing[row]).sum()),
        )

    pixel_frame = frame[expected_columns[:-1]]
    numeric = pixel_frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad = np.isnan(numeric)
    if bad.any():
        row, col = (int(i) for i in np.argwhere(bad)[0])
        raise NonNumericCellError(row=row + 1, column=expected_columns[col],
                                  value=pixel_frame.iat[row, col])

    labels = _parse_labels(frame[LABEL_COLUMN])

    if numeric.size and numeric.max() > 1.0:
        logger.info(f"{path.name}: raw greyscale detected, scaling by 1/255")
        numeric = numeric / 255.0

    dataset = LabeledDataset(numeric, labels, CLASS_NAMES)
    logger.info(f"Loaded {len(dataset)} rows from {path}")
    return dataset


def _parse_labels(column: pd.Series) -> np.ndarray:
    values = pd.to_numeric(column, errors="coerce").to_numpy(dtype=np.float64)
    num_classes = len(CLASS_NAMES)
    for row, (raw, value) in enumerate(zip(column, values), start=1):
        if np.isnan(value):
            raise NonNumericCellError(row=row, column=LABEL_COLUMN, value=raw)
        if value != int(value) or not 0 <= value < num_classes:
            raise LabelRangeError(row=row, label=raw, num_classes=num_classes)
    return values.astype(np.int64)


def _raise_header_mismatch(path: Path, columns: List[str], expected: List[str]) -> None:
    if LABEL_COLUMN not in columns:
        raise HeaderError(f"{path}: no '{LABEL_COLUMN}' column", path=str(path))
    if len(columns) != len(expected):
        raise HeaderError(
            f"{path}: expected {len(expected) - 1} pixel columns, found {len(columns) - 1}",
            path=str(path),
        )
    for position, (found, wanted) in enumerate(zip(columns, expected)):
        if found != wanted:
            raise HeaderError(
                f"{path}: column {position} is '{found}', expected '{wanted}'",
                path=str(path),
            )


def save_csv(data: LabeledDataset, path: Union[str, Path]) -> Path:
    """Write ``data`` in the format :func:`load_csv` reads."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    frame = pd.DataFrame(data.features, columns=pixel_columns(data.n_features))
    frame[LABEL_COLUMN] = data.labels
    frame.to_csv(path, index=False, float_format="%.12f", encoding="utf-8", lineterminator="\n")
    logger.info(f"Wrote {len(data)} rows to {path}")
    return path
