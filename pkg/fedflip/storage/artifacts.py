"""Atomic artifact writing with rollback."""

import os
import shutil
import tempfile
from pathlib import Path
from typing import List

import pandas as pd

from fedflip.core.nn import ModelParams, save_params
from fedflip.utils.logging import get_logger

logger = get_logger(__name__)


class ArtifactWriter:
    """Writes run outputs under ``root``; each file appears via an atomic rename.

    Everything written through one writer can be removed again with
    :meth:`rollback`, so a failed invocation leaves no partial outputs.
    """

    def __init__(self, root: Path):
        self.root = root
        self._created_dirs: List[Path] = []
        self._written: List[Path] = []

    @property
    def written(self) -> List[Path]:
        return list(self._written)

    def _ensure_dir(self, directory: Path) -> None:
        missing = []
        current = directory
        while not current.exists():
            missing.append(current)
            current = current.parent
        directory.mkdir(parents=True, exist_ok=True)
        # remember outermost-first so rollback can remove innermost-first
        self._created_dirs.extend(reversed(missing))

    def _target(self, relative: str) -> Path:
        path = self.root / relative
        self._ensure_dir(path.parent)
        return path

    def _commit(self, tmp_path: Path, path: Path) -> Path:
        os.replace(tmp_path, path)
        self._written.append(path)
        logger.debug(f"Wrote {path}")
        return path

    def write_text(self, relative: str, text: str) -> Path:
        path = self._target(relative)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except Exception:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        return self._commit(Path(tmp_name), path)

    def write_frame(self, relative: str, frame: pd.DataFrame) -> Path:
        """CSV without index; floats at full repr precision."""
        return self.write_text(relative, frame.to_csv(index=False, lineterminator="\n"))

    def write_params(self, relative: str, params: ModelParams) -> Path:
        directory = self.root / relative
        self._ensure_dir(directory.parent)
        staging = Path(tempfile.mkdtemp(dir=directory.parent, prefix=f".{directory.name}."))
        try:
            save_params(params, staging)
            if directory.exists():
                shutil.rmtree(directory)
            os.replace(staging, directory)
        except Exception:
            shutil.rmtree(staging, ignore_errors=True)
            raise
        self._written.append(directory)
        return directory

    def rollback(self) -> None:
        """Delete everything this writer produced."""
        for path in reversed(self._written):
            if path.is_dir():
                shutil.rmtree(path, ignore_errors=True)
            else:
                path.unlink(missing_ok=True)
        for directory in reversed(self._created_dirs):
            try:
                directory.rmdir()
            except OSError:
                pass
        if self._written:
            logger.info(f"Removed {len(self._written)} partial artifact(s) under {self.root}")
        self._written.clear()
        self._created_dirs.clear()
