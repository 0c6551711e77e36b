import logging
import os
import tempfile
from pathlib import Path
from typing import Union

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write through a temp file in the target directory, then rename over path"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"Wrote {path}")
    return path


def frame_to_csv_text(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_frame_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    return atomic_write_text(path, frame_to_csv_text(frame))


def read_frame_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path)


def model_to_json_text(model: BaseModel) -> str:
    return model.model_dump_json(indent=2) + "\n"


def write_json_model(model: BaseModel, path: PathLike) -> Path:
    return atomic_write_text(path, model_to_json_text(model))
