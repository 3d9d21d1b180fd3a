"""Seed derivation for masks and noise.

Every random stream is a PCG64 generator whose seed is derived from explicit
integers, never from shared state, so repeats can run in any order or process.

    mask seed (f, r)  = first uint64 word of SeedSequence(base_seed, spawn_key=(f, r))
    noise stream      = PCG64(SeedSequence(mask_seed, spawn_key=(1,)))
"""
import numpy as np

NOISE_STREAM = 1


def mask_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_mask_seed(base_seed: int, fraction_index: int, repeat: int) -> int:
    sequence = np.random.SeedSequence(int(base_seed), spawn_key=(int(fraction_index), int(repeat)))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def noise_rng(mask_seed: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(int(mask_seed), spawn_key=(NOISE_STREAM,))
    return np.random.Generator(np.random.PCG64(sequence))
