import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator


class SvdFactorization(BaseModel):
    """Thin SVD A = U · diag(singular_values) · V^H with V stored as n×k."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @field_validator("U", "singular_values", "V", mode="after")
    def freeze_array(cls, v):
        v = np.asarray(v)
        v.setflags(write=False)
        return v
