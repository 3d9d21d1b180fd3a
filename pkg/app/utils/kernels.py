"""Compiled inner loops shared by the sampling and spectral services."""
import numba
import numpy as np


@numba.njit(cache=True)
def partial_fisher_yates(targets, size):
    """Applies the swaps k <-> targets[k] to 0..size-1 and returns the first len(targets) slots."""
    positions = np.arange(size, dtype=np.int64)
    count = targets.shape[0]
    for k in range(count):
        j = targets[k]
        tmp = positions[k]
        positions[k] = positions[j]
        positions[j] = tmp
    return positions[:count].copy()


@numba.njit(cache=True)
def strict_local_maxima(values, floor):
    """Cells strictly greater than all of their (up to 8) neighbours and >= floor."""
    rows, cols = values.shape
    found = np.empty((rows * cols, 2), dtype=np.int64)
    n = 0
    for i in range(rows):
        for j in range(cols):
            v = values[i, j]
            if v < floor:
                continue
            is_max = True
            for di in range(-1, 2):
                ii = i + di
                if ii < 0 or ii >= rows:
                    continue
                for dj in range(-1, 2):
                    jj = j + dj
                    if (di == 0 and dj == 0) or jj < 0 or jj >= cols:
                        continue
                    if values[ii, jj] >= v:
                        is_max = False
                        break
                if not is_max:
                    break
            if is_max:
                found[n, 0] = i
                found[n, 1] = j
                n += 1
    return found[:n].copy()
