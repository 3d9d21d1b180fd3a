"""NV spin Hamiltonians and the four-pulse 2D ESEEM experiment.

Product basis order: electron S=1 (m_s = +1, 0, -1) x 14N (m_I = +1, 0, -1)
[x 13C (m_I = +1/2, -1/2)]. All energies are angular frequencies (rad/s).
"""
import logging
import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import scipy.constants
import scipy.linalg
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict
from scipy.optimize import linear_sum_assignment

from app.core.config import settings
from app.core.exceptions import ConfigError, NumericalError
from app.schemas.config_schema import RunConfig
from app.schemas.spin_schema import EseemGrid, EseemSignal, SpinSystem, SyntheticPeak

logger = logging.getLogger(__name__)

GAUSS = 1e-4  # tesla
BOHR_MAGNETON = scipy.constants.physical_constants["Bohr magneton"][0]
HBAR = scipy.constants.hbar
GAMMA_13C = 2 * math.pi * 10.7084e6  # rad s^-1 T^-1
GAMMA_14N = 2 * math.pi * 3.0766e6

MANIFOLDS = (1, 0, -1)
DEGENERACY_TOLERANCE = 1e-10
# weight of the nuclear Iz tie-breaker inside degenerate clusters; must stay well below 1
TIE_BREAK = 1e-3
COUPLING_FLOOR = 1e-6
IMAGINARY_TOLERANCE = 1e-10


class SpinSimulationError(NumericalError):
    pass


class SyntheticSignalError(ConfigError):
    pass


def spin_matrices(j: float):
    """(Sx, Sy, Sz) for spin j in the basis m = j, j-1, ..., -j."""
    m = np.arange(j, -j - 1, -1)
    plus = np.zeros((m.size, m.size), dtype=complex)
    for a in range(1, m.size):
        plus[a - 1, a] = math.sqrt(j * (j + 1) - m[a] * (m[a] + 1))
    minus = plus.conj().T
    return (plus + minus) / 2, (plus - minus) / 2j, np.diag(m).astype(complex)


def electron_gyromagnetic_ratio(g: float) -> float:
    return g * BOHR_MAGNETON / HBAR


def _embed(op: np.ndarray, slot: int, dims: Sequence[int]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for k, d in enumerate(dims):
        out = np.kron(out, op if k == slot else np.eye(d))
    return out


def _nuclei(system: SpinSystem):
    nuclei = [(1.0, system.A_14N, GAMMA_14N)]
    if system.carbon is not None:
        nuclei.append((0.5, system.carbon.A_13C, GAMMA_13C))
    return nuclei


def build_hamiltonian(system: SpinSystem) -> np.ndarray:
    """H = D Sz^2 + gamma_e B.S + S.A_14N.I [+ S.A_13C.I] with optional nuclear Zeeman and quadrupole terms."""
    nuclei = _nuclei(system)
    dims = [3] + [int(2 * j + 1) for j, _, _ in nuclei]
    S = [_embed(op, 0, dims) for op in spin_matrices(1.0)]
    field = system.B * GAUSS

    H = system.D * (S[2] @ S[2])
    gamma_e = electron_gyromagnetic_ratio(system.g)
    for a in range(3):
        H = H + gamma_e * field[a] * S[a]

    for slot, (j, tensor, gamma_n) in enumerate(nuclei, start=1):
        I = [_embed(op, slot, dims) for op in spin_matrices(j)]
        for a in range(3):
            for b in range(3):
                if tensor[a, b] != 0:
                    H = H + tensor[a, b] * (S[a] @ I[b])
        if system.nuclear_zeeman:
            for a in range(3):
                H = H - gamma_n * field[a] * I[a]
        if slot == 1 and system.quadrupole != 0:
            H = H + system.quadrupole * (I[2] @ I[2] - (j * (j + 1) / 3) * np.eye(H.shape[0]))
    return H


def synthetic_low_rank_signal(peaks: List[SyntheticPeak], grid: EseemGrid) -> np.ndarray:
    """M(i, j) = sum_k a_k cos(2 pi nu1_k t1_i + phi_k) cos(2 pi nu2_k t2_j)."""
    if not peaks:
        raise SyntheticSignalError("a synthetic signal needs at least one peak")
    for peak in peaks:
        if abs(peak.nu1) >= grid.nyquist1 or abs(peak.nu2) >= grid.nyquist2:
            raise SyntheticSignalError(
                f"peak ({peak.nu1:g} Hz, {peak.nu2:g} Hz) is outside the Nyquist band "
                f"({grid.nyquist1:g} Hz, {grid.nyquist2:g} Hz)"
            )
    t1, t2 = grid.t1, grid.t2
    M = np.zeros(grid.shape)
    for peak in peaks:
        if peak.amplitude == 0:
            continue
        M += peak.amplitude * np.outer(
            np.cos(2 * math.pi * peak.nu1 * t1 + peak.phase),
            np.cos(2 * math.pi * peak.nu2 * t2),
        )
    return M


class DressedStates(NamedTuple):
    """Secular nuclear eigenstates of each electron manifold, in a rotating frame."""
    energies: dict            # m_s -> rad/s, each manifold centred on its own mean
    nuclear: dict             # m_s -> (n_nuc, n_nuc) normalised nuclear parts as columns
    overlap: np.ndarray       # unitary <n^(-1)_k' | n^(0)_k>
    carrier: float            # mean(E_-1) - mean(E_0)
    n_nuc: int


def _electron_basis(system: SpinSystem) -> np.ndarray:
    """Columns are the electron eigenstates for m_s = +1, 0, -1."""
    Sx, Sy, Sz = spin_matrices(1.0)
    field = system.B * GAUSS * electron_gyromagnetic_ratio(system.g)
    H_e = system.D * (Sz @ Sz) + field[0] * Sx + field[1] * Sy + field[2] * Sz
    if not np.any(H_e - np.diag(np.diag(H_e))):
        return np.eye(3, dtype=complex)
    _, vectors = scipy.linalg.eigh(H_e)
    weights = np.abs(vectors) ** 2  # [m_s, eigenvector]
    rows, cols = linear_sum_assignment(-weights)
    basis = np.empty((3, 3), dtype=complex)
    basis[:, rows] = vectors[:, cols]
    return basis


def _resolve_degeneracies(E, V, label_operator):
    scale = max(1.0, float(np.max(np.abs(E))))
    start = 0
    while start < E.size:
        stop = start + 1
        while stop < E.size and E[stop] - E[stop - 1] <= DEGENERACY_TOLERANCE * scale:
            stop += 1
        if stop - start > 1:
            block = V[:, start:stop]
            _, rotation = scipy.linalg.eigh(block.conj().T @ label_operator @ block)
            V[:, start:stop] = block @ rotation
        start = stop
    return V


def _nuclear_iz(system: SpinSystem) -> np.ndarray:
    dims = [int(2 * j + 1) for j, _, _ in _nuclei(system)]
    return sum(_embed(spin_matrices(j)[2], slot, dims) for slot, (j, _, _) in enumerate(_nuclei(system)))


def manifold_hamiltonian(system: SpinSystem, ms: int, H: Optional[np.ndarray] = None) -> np.ndarray:
    """Secular nuclear Hamiltonian <m_s| H |m_s> for one electron eigenstate.

    Matrix elements of H between different electron manifolds are dropped.
    """
    H = build_hamiltonian(system) if H is None else H
    n_nuc = H.shape[0] // 3
    k = MANIFOLDS.index(ms)
    lift = np.kron(_electron_basis(system)[:, [k]], np.eye(n_nuc))
    block = lift.conj().T @ H @ lift
    return (block + block.conj().T) / 2


def dressed_states(system: SpinSystem) -> DressedStates:
    H = build_hamiltonian(system)
    n_nuc = H.shape[0] // 3
    nuclear_iz = _nuclear_iz(system)

    energies, nuclear = {}, {}
    for ms in MANIFOLDS:
        block = manifold_hamiltonian(system, ms, H)
        diagonal = np.diag(block).real
        if not np.any(block - np.diag(np.diag(block))):
            order = np.argsort(diagonal, kind="stable")
            E, V = diagonal[order], np.eye(n_nuc, dtype=complex)[:, order]
        else:
            E, V = scipy.linalg.eigh(block)
            V = V.astype(complex)
        nuclear[ms] = _resolve_degeneracies(E, V, nuclear_iz)
        energies[ms] = E

    overlap = nuclear[-1].conj().T @ nuclear[0]
    carrier = float(np.mean(energies[-1]) - np.mean(energies[0]))
    centred = {ms: e - np.mean(e) for ms, e in energies.items()}
    return DressedStates(energies=centred, nuclear=nuclear, overlap=overlap, carrier=carrier, n_nuc=n_nuc)


def _active_pairs(overlap: np.ndarray):
    """Intra-manifold state pairs that share a pulse partner, i.e. can modulate the echo."""
    magnitude = np.abs(overlap)
    zero = magnitude.T @ magnitude      # pairs (a, b) of the 0 manifold
    minus = magnitude @ magnitude.T     # pairs of the -1 manifold
    return zero > COUPLING_FLOOR, minus > COUPLING_FLOOR


def nuclear_frequencies(system: SpinSystem, states: Optional[DressedStates] = None) -> np.ndarray:
    """Distinct nuclear transition frequencies (Hz) that can appear in the echo modulation."""
    states = states or dressed_states(system)
    active_zero, active_minus = _active_pairs(states.overlap)
    found = []
    for ms, active in ((0, active_zero), (-1, active_minus)):
        e = states.energies[ms]
        rows, cols = np.nonzero(np.triu(active, k=1))
        found.extend(np.abs(e[rows] - e[cols]) / (2 * math.pi))
    found = np.array(sorted(f for f in found if f > 0))
    if found.size == 0:
        return found
    keep = np.concatenate([[True], np.diff(found) > 1e-6 * max(1.0, found[-1])])
    return found[keep]


def _pulse(states: DressedStates) -> np.ndarray:
    """Ideal pi/2 pulse on the {0, -1} pair in the dressed basis [0 states, -1 states]."""
    n = states.n_nuc
    c = s = 1 / math.sqrt(2)
    M = states.overlap
    A = np.zeros((2 * n, 2 * n), dtype=complex)
    A[:n, :n] = c * np.eye(n)
    A[n:, n:] = c * np.eye(n)
    A[:n, n:] = -1j * s * M.conj().T
    A[n:, :n] = -1j * s * M
    return A


def _coherence_masks(n: int, pathway: int):
    """Selection masks after pulses 1, 2 and 3 for coherence orders (pathway, 0, -pathway)."""
    q = np.concatenate([np.full(n, 0.5), np.full(n, -0.5)])
    order = q[:, None] - q[None, :]
    return order == pathway, order == 0, order == -pathway


class _SequenceModel:
    """Per-row evaluation of the signal as sum_cd F[c, d] exp(-i (e_c - e_d) tau2)."""

    def __init__(self, states: DressedStates, select_pathway: bool):
        n = states.n_nuc
        self.e = np.concatenate([states.energies[0], states.energies[-1]])
        self.delta = self.e[:, None] - self.e[None, :]
        self.A = _pulse(states)
        readout = np.diag(np.concatenate([np.ones(n), np.zeros(n)]))
        rho0 = readout / n
        self.after_first = self.A @ rho0 @ self.A.conj().T
        self.observable = self.A.conj().T @ readout @ self.A
        if select_pathway:
            self.pathways = [_coherence_masks(n, +1), _coherence_masks(n, -1)]
        else:
            everything = np.ones((2 * n, 2 * n), dtype=bool)
            self.pathways = [(everything, everything, everything)]

    def weights(self, tau1: float) -> np.ndarray:
        """F for one tau1, summed over the selected pathways."""
        A, Ah = self.A, self.A.conj().T
        phase = np.exp(-1j * self.delta * tau1)
        F = np.zeros_like(self.delta, dtype=complex)
        for first, second, third in self.pathways:
            rho = np.where(first, self.after_first, 0) * phase
            R = np.where(second, A @ rho @ Ah, 0)
            backward = self.observable * np.conj(phase)
            W = Ah @ np.where(third.T, backward, 0) @ A
            F += W.T * R
        return F

    def row(self, tau1: float, tau2: np.ndarray) -> np.ndarray:
        kernel = np.exp(-1j * np.outer(tau2, self.delta.ravel()))
        return kernel @ self.weights(tau1).ravel()


def _rows(model: _SequenceModel, tau1: np.ndarray, tau2: np.ndarray) -> np.ndarray:
    return np.stack([model.row(t, tau2) for t in tau1])


def eseem_signal(
    system: SpinSystem,
    grid: EseemGrid,
    select_pathway: bool = True,
    jobs: Optional[int] = None,
) -> EseemSignal:
    """Population of m_s=0 after pi/2 - tau1 - pi/2 - tau2 - pi/2 - tau1 - pi/2, mean removed.

    The electron starts in m_s=0 with the nuclei maximally mixed. With
    `select_pathway` only the stimulated-echo coherence pathway and its
    conjugate are kept, the same signal the phase cycle of
    `propagate_sequence` records.
    """
    states = dressed_states(system)
    model = _SequenceModel(states, select_pathway)
    tau1, tau2 = grid.t1, grid.t2

    jobs = jobs or settings.SWEEP_JOBS
    if jobs > 1:
        blocks = np.array_split(np.arange(grid.n1), jobs)
        parts = Parallel(n_jobs=jobs, backend=settings.JOBLIB_BACKEND)(
            delayed(_rows)(model, tau1[block], tau2) for block in blocks if block.size
        )
        raw = np.concatenate(parts, axis=0)
    else:
        raw = _rows(model, tau1, tau2)

    residue = float(np.max(np.abs(raw.imag)))
    if residue > IMAGINARY_TOLERANCE * max(1.0, float(np.max(np.abs(raw.real)))):
        raise SpinSimulationError(f"simulated populations have an imaginary residue of {residue:.3e}")
    values = raw.real - raw.real.mean()

    frequencies = nuclear_frequencies(system, states)
    warnings = []
    if frequencies.size:
        highest = float(frequencies[-1])
        for axis, nyquist in (("t1", grid.nyquist1), ("t2", grid.nyquist2)):
            if highest > nyquist:
                message = (
                    f"nuclear frequency {highest / 1e6:.4g} MHz exceeds the {axis} Nyquist "
                    f"band of {nyquist / 1e6:.4g} MHz; the spectrum will alias"
                )
                logger.warning(message)
                warnings.append(message)
    logger.info(
        f"Simulated {grid.n1}x{grid.n2} ESEEM grid, dimension {system.dimension}, "
        f"{frequencies.size} nuclear frequencies"
    )
    return EseemSignal(values=values, grid=grid, warnings=warnings, nuclear_frequencies_hz=frequencies)


class PropagationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    signal: float
    trace: float
    imaginary_residue: float


def _full_pulse(states: DressedStates) -> np.ndarray:
    n = states.n_nuc
    A = np.eye(3 * n, dtype=complex)
    A[n:, n:] = _pulse(states)
    return A


PHASES = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


def _phase_cycle(select_pathway: bool):
    """(phi1, phi2, phi3, receiver weight) for every scan; pulse 4 is always at phase 0."""
    if not select_pathway:
        return [(0.0, 0.0, 0.0, 1.0)]
    scans = len(PHASES) ** 3
    return [
        (phi1, phi2, phi3, 2 * math.cos(phi1 - phi2 - phi3) / scans)
        for phi1 in PHASES for phi2 in PHASES for phi3 in PHASES
    ]


def propagate_sequence(system: SpinSystem, tau1: float, tau2: float, select_pathway: bool = True) -> PropagationResult:
    """One grid point with the full density matrix in the dressed basis [+1, 0, -1].

    Every scan is a unitary propagation. With `select_pathway` the scans of a
    64-step cycle over the phases of pulses 1-3 are combined with receiver
    weights 2 cos(phi1 - phi2 - phi3), which keeps the stimulated-echo
    pathway and its conjugate. `trace` is the mean trace over the scans.
    """
    states = dressed_states(system)
    n = states.n_nuc
    e = np.concatenate([states.energies[1], states.energies[0], states.energies[-1]])
    q = np.concatenate([np.zeros(n), np.full(n, 0.5), np.full(n, -0.5)])
    A = _full_pulse(states)
    readout = np.diag(np.concatenate([np.zeros(n), np.ones(n), np.zeros(n)]))

    def evolve(rho, t):
        u = np.exp(-1j * e * t)
        return u[:, None] * rho * u.conj()[None, :]

    def pulse(rho, phi):
        u = np.exp(-1j * phi * q)
        rotated = u[:, None] * A * u.conj()[None, :]
        return rotated @ rho @ rotated.conj().T

    scans = _phase_cycle(select_pathway)
    total_signal = 0j
    trace = 0j
    for phi1, phi2, phi3, weight in scans:
        rho = pulse(readout / n, phi1)
        rho = evolve(rho, tau1)
        rho = pulse(rho, phi2)
        rho = evolve(rho, tau2)
        rho = pulse(rho, phi3)
        rho = evolve(rho, tau1)
        rho = pulse(rho, 0.0)
        total_signal += weight * np.trace(readout @ rho)
        trace += np.trace(rho)

    return PropagationResult(
        signal=float(total_signal.real),
        trace=float(trace.real) / len(scans),
        imaginary_residue=float(abs(total_signal.imag)),
    )


def scale_to_rms(signal: EseemSignal, rms: float) -> EseemSignal:
    """Rescale a mean-subtracted signal so its RMS is `rms` detector counts."""
    current = float(np.sqrt(np.mean(signal.values ** 2)))
    if current == 0.0:
        raise SpinSimulationError("cannot rescale a signal without modulation")
    return signal.model_copy(update={"values": signal.values * (rms / current)})


def simulate_run(config: RunConfig, jobs: Optional[int] = None) -> EseemSignal:
    """Ground-truth matrix for a run configuration, ESEEM or synthetic."""
    if config.simulation.model == "synthetic":
        values = synthetic_low_rank_signal(config.synthetic.peaks, config.grid)
        signal = EseemSignal(values=values, grid=config.grid)
    else:
        system = config.spin.to_spin_system()
        signal = eseem_signal(system, config.grid, select_pathway=config.simulation.select_pathway, jobs=jobs)
    if config.simulation.signal_rms is not None:
        signal = scale_to_rms(signal, config.simulation.signal_rms)
        logger.info(f"Rescaled the simulated signal to an RMS of {config.simulation.signal_rms:g} counts")
    return signal
