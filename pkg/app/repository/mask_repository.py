import numpy as np
from pydantic import ValidationError

from app.repository.base_repository import BaseRepository, FileFormatError, PathLike
from app.schemas.mask_schema import SampleMask


class MaskRepository(BaseRepository):
    """MSK text files: header `MSK <rows> <cols> <count> <seed>`, then sorted 0-based `i j` lines."""

    def dumps(self, mask: SampleMask) -> str:
        lines = [f"MSK {mask.rows} {mask.cols} {mask.count} {mask.seed}"]
        lines.extend(f"{i} {j}" for i, j in mask.indices)
        return "\n".join(lines) + "\n"

    def loads(self, text: str, source: PathLike = "<mask>") -> SampleMask:
        lines = text.splitlines()
        while lines and not lines[-1].strip():
            lines.pop()
        if not lines:
            raise FileFormatError(source, 1, "empty mask file")
        header = lines[0].split()
        if len(header) != 5 or header[0] != "MSK":
            raise FileFormatError(source, 1, "expected header 'MSK <rows> <cols> <count> <seed>'")
        try:
            rows, cols, count, seed = (int(token) for token in header[1:])
        except ValueError:
            raise FileFormatError(source, 1, "header fields must be integers")
        if len(lines) - 1 != count:
            raise FileFormatError(source, len(lines), f"header announces {count} indices, found {len(lines) - 1}")

        flat = np.empty(count, dtype=np.int64)
        previous = -1
        for k, line in enumerate(lines[1:]):
            number = k + 2
            tokens = line.split()
            try:
                i, j = (int(token) for token in tokens)
            except ValueError:
                raise FileFormatError(source, number, "expected 'i j'")
            if not (0 <= i < rows and 0 <= j < cols):
                raise FileFormatError(source, number, f"index ({i}, {j}) is outside the {rows}x{cols} host")
            position = i * cols + j
            if position <= previous:
                raise FileFormatError(source, number, "indices must be distinct and sorted lexicographically")
            flat[k] = previous = position
        try:
            return SampleMask(rows=rows, cols=cols, flat=flat, seed=seed)
        except ValidationError as e:
            raise FileFormatError(source, 1, e.errors()[0]["msg"])

    def write(self, path: PathLike, mask: SampleMask):
        return self.write_text(path, self.dumps(mask))

    def read(self, path: PathLike) -> SampleMask:
        return self.loads(self.read_text(path), source=path)


mask_repository = MaskRepository()
