import numpy as np
import pandas as pd
import pytest

from app.core.exceptions import StorageError
from app.modules.sampling.service import generate_uniform_mask
from app.repository.base_repository import FileFormatError
from app.repository.mask_repository import mask_repository
from app.repository.matrix_repository import MatrixRepository, matrix_repository
from app.repository.report_repository import report_repository, sibling
from app.schemas.mask_schema import SampleMask
from app.schemas.spin_schema import EseemGrid
from app.schemas.sweep_schema import RepeatOutcome


# --- MTX ---

def test_real_matrix_round_trip_is_exact(tmp_path, rng):
    M = rng.standard_normal((5, 7)) * 1e-3
    path = matrix_repository.write(tmp_path / "m.mtx", M)
    assert np.array_equal(matrix_repository.read(path), M)


def test_complex_matrix_round_trip_is_exact(tmp_path, rng):
    M = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    path = matrix_repository.write(tmp_path / "c.mtx", M)
    back = matrix_repository.read(path)
    assert back.dtype == complex
    assert np.array_equal(back, M)


def test_matrix_header():
    text = matrix_repository.dumps(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert text.splitlines()[0] == "MTX 2 2 real"
    assert text.splitlines()[1] == "1 2"


def test_reduced_digits():
    text = MatrixRepository(digits=3).dumps(np.array([[1 / 3]]))
    assert text.splitlines()[1] == "0.333"


@pytest.mark.parametrize("shape", [(4,), (2, 2, 2)])
def test_only_matrices_are_stored(shape):
    with pytest.raises(StorageError) as e:
        matrix_repository.dumps(np.zeros(shape))
    assert "2-D" in e.value.detail


def test_write_creates_parent_directories(tmp_path):
    path = matrix_repository.write(tmp_path / "a" / "b" / "m.mtx", np.eye(2))
    assert path.exists()


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("MTX 2 2\n1 2\n3 4\n", 1),
        ("MTX 2 2 quaternion\n1 2\n3 4\n", 1),
        ("MTX 2 x real\n1 2\n3 4\n", 1),
        ("MTX 3 2 real\n1 2\n3 4\n", 3),
        ("MTX 2 2 real\n1 2\n3\n", 3),
        ("MTX 2 2 real\n1 abc\n3 4\n", 2),
        ("MTX 1 1 complex\n1\n", 2),
    ],
)
def test_malformed_matrix_reports_line(text, line):
    with pytest.raises(FileFormatError) as e:
        matrix_repository.loads(text, source="bad.mtx")
    assert e.value.line == line
    assert e.value.detail.startswith(f"bad.mtx:{line}:")


def test_missing_matrix_file(tmp_path):
    with pytest.raises(StorageError):
        matrix_repository.read(tmp_path / "missing.mtx")


# --- MSK ---

def test_mask_round_trip(tmp_path):
    mask = generate_uniform_mask(20, 30, 0.25, 2**64 - 1)
    path = mask_repository.write(tmp_path / "m.msk", mask)
    assert mask_repository.read(path) == mask


def test_mask_text_layout():
    mask = SampleMask(rows=2, cols=3, flat=[1, 5], seed=9)
    assert mask_repository.dumps(mask) == "MSK 2 3 2 9\n0 1\n1 2\n"


@pytest.mark.parametrize(
    "text, line",
    [
        ("MSK 2 2\n", 1),
        ("MSK 2 2 2 0\n0 0\n", 2),
        ("MSK 2 2 2 0\n0 1\n0 0\n", 3),
        ("MSK 2 2 2 0\n0 1\n0 1\n", 3),
        ("MSK 2 2 1 0\n2 0\n", 2),
        ("MSK 2 2 1 0\n0\n", 2),
    ],
)
def test_malformed_mask_reports_line(text, line):
    with pytest.raises(FileFormatError) as e:
        mask_repository.loads(text)
    assert e.value.line == line


# --- reports ---

def test_sibling_names():
    assert sibling("out/run.csv", ".summary.csv").name == "run.summary.csv"
    assert sibling("out/m.mtx", ".grid.json").name == "m.mtx.grid.json"


def test_grid_round_trip(tmp_path):
    grid = EseemGrid(n1=11, n2=13, dt1=8e-8, dt2=4e-8, t1_start=1e-7)
    path = report_repository.write_grid(tmp_path / "g.json", grid)
    assert report_repository.read_grid(path) == grid


def test_invalid_grid_file(tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"n1": 1}')
    with pytest.raises(StorageError):
        report_repository.read_grid(path)


def test_outcomes_frame_keeps_full_seed(tmp_path):
    outcomes = [
        RepeatOutcome(fraction=0.1, tau=100.0, repeat=0, seed=2**64 - 1, fidelity_time=0.9,
                      fidelity_freq=0.8, iterations=12, converged=True, final_rank=4),
        RepeatOutcome(fraction=0.1, tau=100.0, repeat=1, seed=3, error="SVT diverged"),
    ]
    frame = report_repository.outcomes_frame(outcomes)
    assert list(frame.columns)[:4] == ["fraction", "tau", "repeat", "seed"]
    path = report_repository.write_frame(tmp_path / "o.csv", frame)
    text = path.read_text()
    assert "18446744073709551615" in text
    assert "SVT diverged" in text


def test_frames_are_written_identically(tmp_path):
    frame = pd.DataFrame({"a": [0.1, 1 / 3], "b": [1, 2]})
    first = report_repository.write_frame(tmp_path / "1.csv", frame).read_bytes()
    second = report_repository.write_frame(tmp_path / "2.csv", frame).read_bytes()
    assert first == second
    assert b"\r" not in first
    assert report_repository.read_frame(tmp_path / "1.csv")["a"].tolist() == pytest.approx([0.1, 1 / 3], rel=1e-15)


def test_read_frame_of_missing_file(tmp_path):
    with pytest.raises(StorageError):
        report_repository.read_frame(tmp_path / "missing.csv")
