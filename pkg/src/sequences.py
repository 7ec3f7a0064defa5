"""IID and randomized extensible low-discrepancy point generation.

Points are addressed by 1-based index ranges so that any range of any
sequence can be regenerated independently (and concurrently) from its `SequenceSpec`
alone. Low-discrepancy coordinates are built as 32-bit integers and mapped to
the centre of their cell when randomized, which keeps them inside (0, 1).
"""

import logging
import warnings
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cache
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from exceptions import CapacityError, InvalidArgumentError, InvalidSpecError

LATTICE_VECTOR_PATH = Path(__file__).parent / "data" / "lattice_vector.txt"

BITS = 32
SCALE = float(2**BITS)
MAX_LD_POINTS = 2**BITS
# IID rows come from independent generators keyed by (seed, chunk)
IID_CHUNK = 1024
IID_BITS = 52


class SequenceKind(StrEnum):
    IID = "iid"
    LATTICE = "lattice"
    NET = "net"

    @property
    def is_low_discrepancy(self) -> bool:
        return self is not SequenceKind.IID


class Randomization(StrEnum):
    SHIFT = "shift"
    SCRAMBLE = "scramble"
    NONE = "none"


@cache
def lattice_vector() -> np.ndarray:
    """Generating vector shipped in ``data/lattice_vector.txt``."""
    lines = LATTICE_VECTOR_PATH.read_text().splitlines()
    values = [int(line) for line in (raw.strip() for raw in lines) if line and not line.startswith("#")]
    return np.array(values, dtype=np.uint64)


@dataclass(frozen=True)
class SequenceSpec:
    kind: SequenceKind
    dimension: int
    seed: int = 7
    randomization: Randomization | None = None

    def __post_init__(self):
        kind = SequenceKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.dimension < 1:
            raise InvalidSpecError(f"Sequence dimension must be at least 1, got {self.dimension}")
        if kind is SequenceKind.LATTICE and self.dimension > len(lattice_vector()):
            raise InvalidSpecError(
                f"Lattice supports at most {len(lattice_vector())} dimensions, got {self.dimension}"
            )
        object.__setattr__(self, "seed", int(self.seed) % 2**64)
        randomization = Randomization(self.randomization) if self.randomization else Randomization.SHIFT
        if kind is SequenceKind.LATTICE and randomization is Randomization.SCRAMBLE:
            raise InvalidSpecError("Lattices are randomized by a shift; scrambling applies to digital nets only")
        object.__setattr__(self, "randomization", randomization)

    @property
    def randomized(self) -> bool:
        return self.kind is SequenceKind.IID or self.randomization is not Randomization.NONE

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed))


@dataclass(frozen=True)
class PointBlock:
    """Points at 1-based indices ``n_start..n_end`` of a sequence."""

    n_start: int
    n_end: int
    values: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.n_end - self.n_start + 1


def gen(spec: SequenceSpec, n_start: int, n_end: int) -> PointBlock:
    """Return the points of ``spec`` at 1-based indices ``n_start..n_end``."""
    if n_start < 1 or n_end < n_start:
        raise InvalidArgumentError(f"Invalid index range [{n_start}, {n_end}]")
    if spec.kind.is_low_discrepancy and n_end > MAX_LD_POINTS:
        raise CapacityError(f"{spec.kind} sequences support at most 2^{BITS} points, requested index {n_end}")
    start, count = n_start - 1, n_end - n_start + 1
    if spec.kind is SequenceKind.IID:
        values = _iid(spec, start, count)
    elif spec.kind is SequenceKind.LATTICE:
        values = _lattice(spec, start, count)
    else:
        values = _net(spec, start, count)
    return PointBlock(n_start=n_start, n_end=n_end, values=values)


def replicate(spec: SequenceSpec, replications: int) -> list[SequenceSpec]:
    """Independently randomized copies of a low-discrepancy spec."""
    if replications < 2:
        raise InvalidArgumentError(f"At least 2 replications are required, got {replications}")
    if not spec.kind.is_low_discrepancy:
        raise InvalidArgumentError("Replications apply to low-discrepancy sequences only")
    if spec.randomization is Randomization.NONE:
        raise InvalidArgumentError("Replications need randomized copies, got randomization 'none'")
    specs = []
    for r in range(replications):
        seed = int(np.random.SeedSequence([spec.seed, r]).generate_state(1, dtype=np.uint64)[0])
        specs.append(SequenceSpec(spec.kind, spec.dimension, seed=seed, randomization=spec.randomization))
    logging.debug(f"Derived {replications} {spec.kind} randomizations from seed {spec.seed}")
    return specs


def radical_inverse_bits(index: np.ndarray) -> np.ndarray:
    """Reverse the lowest 32 bits of each index (base-2 radical inverse scaled by 2^32)."""
    v = np.asarray(index, dtype=np.uint64)
    v = ((v >> 1) & 0x55555555) | ((v & 0x55555555) << 1)
    v = ((v >> 2) & 0x33333333) | ((v & 0x33333333) << 2)
    v = ((v >> 4) & 0x0F0F0F0F) | ((v & 0x0F0F0F0F) << 4)
    v = ((v >> 8) & 0x00FF00FF) | ((v & 0x00FF00FF) << 8)
    v = ((v >> 16) & 0xFFFF) | ((v & 0xFFFF) << 16)
    return v & 0xFFFFFFFF


def _iid(spec: SequenceSpec, start: int, count: int) -> np.ndarray:
    first, last = start // IID_CHUNK, (start + count - 1) // IID_CHUNK
    chunks = []
    for chunk in range(first, last + 1):
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, chunk]))
        chunks.append(rng.integers(0, 2**IID_BITS, size=(IID_CHUNK, spec.dimension), dtype=np.uint64))
    offset = start - first * IID_CHUNK
    ints = np.concatenate(chunks)[offset : offset + count]
    return (ints.astype(float) + 0.5) / 2.0**IID_BITS


def _lattice(spec: SequenceSpec, start: int, count: int) -> np.ndarray:
    z = lattice_vector()[: spec.dimension]
    index = np.arange(start, start + count, dtype=np.uint64)
    ints = (radical_inverse_bits(index)[:, None] * z[None, :]) % np.uint64(MAX_LD_POINTS)
    if spec.randomization is Randomization.NONE:
        return ints.astype(float) / SCALE
    shift = spec.rng().integers(0, MAX_LD_POINTS, size=spec.dimension, dtype=np.uint64)
    return (((ints + shift) % np.uint64(MAX_LD_POINTS)).astype(float) + 0.5) / SCALE


def _net(spec: SequenceSpec, start: int, count: int) -> np.ndarray:
    rng = spec.rng()
    scramble = spec.randomization is Randomization.SCRAMBLE
    engine = qmc.Sobol(d=spec.dimension, scramble=scramble, bits=BITS, rng=rng if scramble else None)
    with warnings.catch_warnings():
        # balance warnings for non power-of-two blocks do not apply to extensible use
        warnings.simplefilter("ignore", UserWarning)
        if start:
            engine.fast_forward(start)
        ints = np.rint(engine.random(count) * SCALE).astype(np.uint64)
    if spec.randomization is Randomization.NONE:
        return ints.astype(float) / SCALE
    if spec.randomization is Randomization.SHIFT:
        ints ^= rng.integers(0, MAX_LD_POINTS, size=spec.dimension, dtype=np.uint64)
    return (ints.astype(float) + 0.5) / SCALE
