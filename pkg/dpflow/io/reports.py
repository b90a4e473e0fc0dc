"""CSV and text report files."""

import logging
import os
from typing import Iterable

import pandas as pd

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def frame_to_csv(frame: pd.DataFrame) -> str:
    """CSV text with full double precision and '\\n' line endings."""
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def write_csv(path: str, frame: pd.DataFrame) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(frame_to_csv(frame))
    logger.debug(f"wrote {path} ({len(frame)} rows)")
    return path


def write_text(path: str, lines: Iterable[str]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    text = "".join(line if line.endswith("\n") else line + "\n" for line in lines)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return path
