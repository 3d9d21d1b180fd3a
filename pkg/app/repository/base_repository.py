import logging
from pathlib import Path
from typing import Union

from app.core.exceptions import StorageError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class FileFormatError(StorageError):
    """A file exists but does not follow its documented format."""

    def __init__(self, path: PathLike, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class BaseRepository:
    """Text-file persistence shared by the format repositories."""

    def read_text(self, path: PathLike) -> str:
        path = Path(path)
        try:
            return path.read_text(encoding="utf-8")
        except OSError as e:
            raise StorageError(f"Cannot read {path}: {e.strerror or e}")

    def write_text(self, path: PathLike, text: str) -> Path:
        path = Path(path)
        try:
            if path.parent and not path.parent.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8", newline="\n")
        except OSError as e:
            raise StorageError(f"Cannot write {path}: {e.strerror or e}")
        logger.debug(f"Wrote {path}")
        return path
