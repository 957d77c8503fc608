"""Named, independent random substreams derived from one run seed."""

import hashlib

import numpy as np
import numpy.typing as npt

SEED_MASK = 2**64 - 1

FloatArray = npt.NDArray[np.float64]


def label_words(label: str) -> list[int]:
    # stable across processes, unlike hash()
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


class RngStream:
    def __init__(self, seed: int, label: str) -> None:
        if not 0 <= seed <= SEED_MASK:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.label = label
        sequence = np.random.SeedSequence(
            entropy=[seed & 0xFFFFFFFF, seed >> 32, *label_words(label)]
        )
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def child(self, suffix: str) -> "RngStream":
        return RngStream(self.seed, f"{self.label}/{suffix}")

    def random(self) -> float:
        return float(self.generator.random())

    def uniform_array(self, size: int) -> FloatArray:
        return self.generator.random(size)

    def exponential_array(self, scale: float, size: int) -> FloatArray:
        return self.generator.exponential(scale, size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, label={self.label!r})"
