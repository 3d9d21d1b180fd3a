from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError

from app.modules.completion.service import (
    CompletionInputError,
    NonFiniteIterateError,
    SvtDivergenceError,
    default_params,
    residual,
    svt_complete,
)
from app.modules.sampling.service import full_mask, generate_uniform_mask, project
from app.schemas.mask_schema import SampleMask
from app.schemas.svt_schema import SvtParams


def covering_mask(rows, cols, fraction):
    """First seed whose mask observes every row and every column."""
    for seed in range(1000):
        mask = generate_uniform_mask(rows, cols, fraction, seed)
        hit = mask.as_bool()
        if hit.any(axis=1).all() and hit.any(axis=0).all():
            return mask
    raise AssertionError("no covering mask found")


@pytest.mark.parametrize(
    "rows, cols, tau", [(201, 201, 1005.0), (100, 100, 500.0), (50, 200, 1000.0)]
)
def test_default_params(rows, cols, tau):
    params = default_params(rows, cols, 10)
    assert params.tau == tau
    assert params.delta == 1.2
    assert params.epsilon == 1e-4
    assert params.max_iterations == 5000


def test_default_params_rejects_empty_counts():
    with pytest.raises(CompletionInputError):
        default_params(10, 10, 0)


def test_residual_examples():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    mask = full_mask(2, 2)
    assert residual(M, M, mask) == 0.0
    assert residual(np.zeros((2, 2)), M, mask) == pytest.approx(1.0)
    assert residual(2 * M, M, mask) == pytest.approx(1.0)


def test_residual_only_looks_at_mask():
    M = np.array([[1.0, 0.0], [0.0, 1.0]])
    mask = SampleMask(rows=2, cols=2, flat=[0, 3])
    X = M + np.array([[0.0, 9.0], [9.0, 0.0]])
    assert residual(X, M, mask) == 0.0


def test_residual_rejects_zero_data():
    with pytest.raises(CompletionInputError):
        residual(np.ones((2, 2)), np.zeros((2, 2)), full_mask(2, 2))


def test_recovers_rank_one_matrix_from_half_the_entries():
    u = np.linspace(1.0, 2.0, 10)
    v = np.linspace(2.0, 1.0, 10)
    M = np.outer(u, v)
    mask = covering_mask(10, 10, 0.5)

    result = svt_complete(project(M, mask), mask, SvtParams(tau=50.0, store_history=True))

    assert result.converged
    assert result.final_residual < 1e-4
    assert np.linalg.norm(result.completed - M) / np.linalg.norm(M) < 1e-3
    assert result.final_rank <= 3
    history = result.residual_history
    assert len(history) == result.iterations
    assert history[-1] * 10 <= history[0]


def test_full_mask_converges(low_rank_matrix):
    mask = full_mask(*low_rank_matrix.shape)
    result = svt_complete(low_rank_matrix, mask, SvtParams(tau=100.0))
    assert result.converged
    assert residual(result.completed, low_rank_matrix, mask) < 1e-4


def test_history_is_not_stored_by_default(low_rank_matrix):
    result = svt_complete(low_rank_matrix, full_mask(20, 20), SvtParams(tau=100.0))
    assert result.residual_history is None


def test_iteration_cap_is_reported(low_rank_matrix):
    mask = generate_uniform_mask(20, 20, 0.5, 4)
    result = svt_complete(project(low_rank_matrix, mask), mask, SvtParams(tau=100.0, max_iterations=3))
    assert result.iterations == 3
    assert not result.converged


def test_completion_is_deterministic(low_rank_matrix):
    mask = generate_uniform_mask(20, 20, 0.6, 11)
    observed = project(low_rank_matrix, mask)
    a = svt_complete(observed, mask, SvtParams(tau=100.0))
    b = svt_complete(observed, mask, SvtParams(tau=100.0))
    assert np.array_equal(a.completed, b.completed)
    assert a.iterations == b.iterations


def test_rejects_data_outside_mask(low_rank_matrix):
    mask = generate_uniform_mask(20, 20, 0.5, 1)
    with pytest.raises(CompletionInputError):
        svt_complete(low_rank_matrix, mask, SvtParams(tau=100.0))


def test_rejects_complex_data():
    M = np.ones((3, 3), dtype=complex) * (1 + 1j)
    with pytest.raises(CompletionInputError):
        svt_complete(M, full_mask(3, 3), SvtParams(tau=10.0))


def test_rejects_zero_data():
    with pytest.raises(CompletionInputError):
        svt_complete(np.zeros((3, 3)), full_mask(3, 3), SvtParams(tau=10.0))


def test_rejects_shape_mismatch():
    with pytest.raises(CompletionInputError):
        svt_complete(np.ones((3, 3)), full_mask(3, 4), SvtParams(tau=10.0))


def test_large_step_requires_opt_in():
    with pytest.raises(ValidationError):
        SvtParams(tau=1.0, delta=2.5)
    assert SvtParams(tau=1.0, delta=2.5, allow_divergent_step=True).delta == 2.5


def test_divergent_step_raises(rng):
    M = rng.standard_normal((6, 6))
    params = SvtParams(tau=1e-3, delta=3.0, allow_divergent_step=True, kick_start=False)
    with pytest.raises(SvtDivergenceError) as e:
        svt_complete(M, full_mask(6, 6), params)
    assert e.value.iteration > 1


def test_non_finite_iterate_raises(low_rank_matrix):
    poisoned = np.full((20, 20), np.nan)
    with patch("app.modules.completion.service.shrink_with_rank", return_value=(poisoned, 1)):
        with pytest.raises(NonFiniteIterateError) as e:
            svt_complete(low_rank_matrix, full_mask(20, 20), SvtParams(tau=100.0))
    assert e.value.iteration == 1
