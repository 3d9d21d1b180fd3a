import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

MAX_SEED = 2**64 - 1


class SampleMask(BaseModel):
    """The observed index set Ω of a rows×cols host matrix.

    Indices are kept as sorted, distinct row-major positions `i * cols + j`,
    which is also the lexicographic order of the (i, j) pairs.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rows: int = Field(gt=0)
    cols: int = Field(gt=0)
    flat: np.ndarray
    seed: int = Field(default=0, ge=0, le=MAX_SEED)

    @field_validator("flat", mode="before")
    def as_index_array(cls, v):
        arr = np.array(v, dtype=np.int64).ravel()
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_indices(self):
        if self.flat.size < 1:
            raise ValueError("a mask must contain at least one index")
        if self.flat[0] < 0 or self.flat[-1] >= self.rows * self.cols:
            raise ValueError(f"mask indices must lie inside the {self.rows}x{self.cols} host")
        if self.flat.size > 1 and not np.all(np.diff(self.flat) > 0):
            raise ValueError("mask indices must be sorted and distinct")
        return self

    @property
    def count(self) -> int:
        return int(self.flat.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def indices(self) -> np.ndarray:
        """(count, 2) array of 0-based (i, j) pairs in lexicographic order."""
        i, j = np.divmod(self.flat, self.cols)
        return np.column_stack([i, j])

    @property
    def fraction(self) -> float:
        return self.count / (self.rows * self.cols)

    def as_bool(self) -> np.ndarray:
        selected = np.zeros(self.rows * self.cols, dtype=bool)
        selected[self.flat] = True
        return selected.reshape(self.rows, self.cols)

    def __eq__(self, other):
        if not isinstance(other, SampleMask):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.seed == other.seed
            and np.array_equal(self.flat, other.flat)
        )
