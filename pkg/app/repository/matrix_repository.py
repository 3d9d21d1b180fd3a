from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import StorageError
from app.repository.base_repository import BaseRepository, FileFormatError, PathLike


class MatrixRepository(BaseRepository):
    """MTX text files.

    Header `MTX <rows> <cols> <real|complex>`, then one matrix row per line with
    space-separated entries; complex entries are written as `re:im`.
    """

    def __init__(self, digits: Optional[int] = None):
        self.digits = digits

    def _format(self) -> str:
        return f"%.{self.digits or settings.MATRIX_DIGITS}g"

    def dumps(self, M: np.ndarray) -> str:
        M = np.asarray(M)
        if M.ndim != 2:
            raise StorageError(f"only 2-D matrices can be stored, got {M.ndim} dimension(s)")
        fmt = self._format()
        complex_kind = np.iscomplexobj(M)
        lines = [f"MTX {M.shape[0]} {M.shape[1]} {'complex' if complex_kind else 'real'}"]
        for row in M:
            if complex_kind:
                lines.append(" ".join(f"{fmt % v.real}:{fmt % v.imag}" for v in row))
            else:
                lines.append(" ".join(fmt % v for v in row))
        return "\n".join(lines) + "\n"

    def loads(self, text: str, source: PathLike = "<matrix>") -> np.ndarray:
        lines = text.splitlines()
        while lines and not lines[-1].strip():
            lines.pop()
        if not lines:
            raise FileFormatError(source, 1, "empty matrix file")
        header = lines[0].split()
        if len(header) != 4 or header[0] != "MTX":
            raise FileFormatError(source, 1, "expected header 'MTX <rows> <cols> <real|complex>'")
        try:
            rows, cols = int(header[1]), int(header[2])
        except ValueError:
            raise FileFormatError(source, 1, f"bad dimensions '{header[1]} {header[2]}'")
        if rows < 1 or cols < 1:
            raise FileFormatError(source, 1, f"dimensions must be positive, got {rows}x{cols}")
        kind = header[3]
        if kind not in ("real", "complex"):
            raise FileFormatError(source, 1, f"unknown kind '{kind}'")
        if len(lines) - 1 != rows:
            raise FileFormatError(source, len(lines), f"expected {rows} rows, found {len(lines) - 1}")

        M = np.empty((rows, cols), dtype=complex if kind == "complex" else float)
        for i, line in enumerate(lines[1:]):
            number = i + 2
            tokens = line.split()
            if len(tokens) != cols:
                raise FileFormatError(source, number, f"expected {cols} entries, found {len(tokens)}")
            try:
                if kind == "complex":
                    for j, token in enumerate(tokens):
                        re, im = token.split(":")
                        M[i, j] = complex(float(re), float(im))
                else:
                    M[i] = [float(token) for token in tokens]
            except ValueError:
                raise FileFormatError(source, number, "unparsable entry")
        return M

    def write(self, path: PathLike, M: np.ndarray):
        return self.write_text(path, self.dumps(M))

    def read(self, path: PathLike) -> np.ndarray:
        return self.loads(self.read_text(path), source=path)


matrix_repository = MatrixRepository()
