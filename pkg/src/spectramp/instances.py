"""Test Hamiltonians: spin-chain transfer, parity/OR composition, and random
sparse instances with controllable norm ratios.

Dense matrices are the source of truth; sparse oracles are derived views.
The composed-function families evolve computational basis states so that a
projective output-register measurement computes the classical function,
which makes them natural scaling instances for sparse simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from spectramp.blockenc import SparseOracle

__all__ = ["Instance", "h_spin", "h_parity", "h_or", "h_parity_or", "random_sparse"]


@dataclass
class Instance:
    H: np.ndarray
    d: int
    family: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=complex)
        herm = np.max(np.abs(self.H - self.H.conj().T))
        if herm > 1e-12 * max(1.0, float(np.max(np.abs(self.H)))):
            raise ValueError(f"instance matrix is not Hermitian ({herm:.3e})")
        self.meta.setdefault("max_norm", float(np.max(np.abs(self.H))))
        self.meta.setdefault("one_norm", float(np.max(np.sum(np.abs(self.H), axis=1))))
        self.meta.setdefault("spectral_norm", float(np.linalg.norm(self.H, 2)))
        self.meta.setdefault("family", self.family)

    @property
    def n(self) -> int:
        return self.H.shape[0]

    def oracle(self) -> SparseOracle:
        return SparseOracle(self.H, self.d)

    def oracle_agrees(self) -> bool:
        orc = self.oracle()
        for j in range(self.n):
            support = set(orc.row_support(j))
            for k in range(self.n):
                v = orc.value(j, k)
                if v != self.H[j, k]:
                    return False
                if self.H[j, k] != 0 and k not in support:
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "d": self.d,
            "meta": {k: v for k, v in self.meta.items() if isinstance(v, (int, float, str))},
            "oracle": self.oracle().to_json(),
        }


def h_spin(n_sites: int) -> Instance:
    """Tridiagonal chain with couplings sqrt(j (N - j + 1))/N on N+1 levels;
    evolution for time pi N / 2 transfers |0> to |N> exactly."""
    if n_sites < 1:
        raise ValueError("need at least one coupling")
    dim = n_sites + 1
    h = np.zeros((dim, dim))
    for j in range(1, dim):
        h[j - 1, j] = h[j, j - 1] = math.sqrt(j * (n_sites - j + 1)) / n_sites
    return Instance(h, d=2, family="spin_chain", meta={"n_sites": n_sites,
                                                       "transfer_time": math.pi * n_sites / 2.0})


def _complete_graph(s: int) -> np.ndarray:
    return np.ones((s, s))


def _uniform(s: int) -> np.ndarray:
    return np.full(s, 1.0 / math.sqrt(s))


def _not_block(bit: int) -> np.ndarray:
    """Two-level block computing NOT gated by the bit: identity action on the
    output register when the bit is 0, bit-flip when it is 1."""
    return np.array([[1 - bit, bit], [bit, 1 - bit]], dtype=float)


def h_parity(x: str | list[int], s: int) -> Instance:
    """Chain (x) clique (x) output Hamiltonian computing the parity of x.

    Evolution for time pi n / (2 s) on |0>_chain |u>_clique |0>_out walks the
    chain end to end, flipping the output bit once per set input bit.
    """
    bits = [int(b) for b in x]
    n = len(bits)
    if s < 1:
        raise ValueError("clique size must be positive")
    dim_chain = n + 1
    h = np.zeros((dim_chain * s * 2, dim_chain * s * 2))
    clique = _complete_graph(s)
    for j in range(n):
        coupling = math.sqrt((j + 1) * (n - j)) / n
        hop = np.zeros((dim_chain, dim_chain))
        hop[j + 1, j] = coupling
        term = np.kron(np.kron(hop, clique), _not_block(bits[j]))
        h += term + term.conj().T
    meta = {"bits": "".join(map(str, bits)), "s": s, "run_time": math.pi * n / (2.0 * s)}
    return Instance(h, d=2 * s, family="parity", meta=meta)


def parity_output_probability(inst: Instance) -> tuple[int, float]:
    """Evolve the designated start state and read the output register.

    Returns (most probable output bit, its probability)."""
    import scipy.linalg

    s = inst.meta["s"]
    n = len(inst.meta["bits"]) if "bits" in inst.meta else inst.meta["rows"]
    dim_chain = n + 1
    rest = inst.n // (dim_chain * 2)  # clique (and OR registers if present)
    start = np.zeros(inst.n, dtype=complex)
    # |0>_chain (x) uniform over the middle registers (x) |0>_out
    mid = np.zeros(rest)
    if inst.family == "parity":
        mid[: s] = _uniform(s)
    else:
        m = inst.meta["m"]
        mid = np.kron(_uniform(s), _uniform(m))
    block = np.kron(mid, np.array([1.0, 0.0]))
    start[: 2 * rest] = block  # chain site 0 is the leading block
    t = inst.meta["run_time"]
    final = scipy.linalg.expm(-1j * inst.H * t) @ start
    # probability of output bit 1: sum over odd output indices
    probs = np.abs(final) ** 2
    p1 = float(np.sum(probs[1::2]))
    p0 = float(np.sum(probs[0::2]))
    return (1, p1) if p1 >= p0 else (0, p0)


def h_or(x: str | list[int]) -> Instance:
    """Block Hamiltonian computing OR of x (promised at most one set bit)
    exactly on the output (x) uniform state: H |j>|u> = |j xor OR(x)>|u>."""
    bits = [int(b) for b in x]
    m = len(bits)
    if sum(bits) > 1:
        raise ValueError("promise violated: at most one bit may be set")
    c0 = np.zeros((m, m))
    for r in range(m):
        for c in range(m):
            c0[r, c] = bits[(c - r) % m]  # rows are cyclic shifts
    c1 = np.ones((m, m)) / m - (c0 + c0.T) / 2.0
    h = np.block([[c1, c0], [c0.T, c1]])
    return Instance(h, d=2 * m, family="or", meta={"bits": "".join(map(str, bits)), "m": m})


def _or_block(bits: list[int]) -> np.ndarray:
    m = len(bits)
    c0 = np.zeros((m, m))
    for r in range(m):
        for c in range(m):
            c0[r, c] = bits[(c - r) % m]
    c1 = np.ones((m, m)) / m - (c0 + c0.T) / 2.0
    return np.block([[c1, c0], [c0.T, c1]])


def h_parity_or(rows: list[str] | list[list[int]], s: int) -> Instance:
    """Chain (x) clique (x) (output (x) OR-register) Hamiltonian computing
    the parity of per-row ORs (each row promised to have at most one set
    bit); evolution time pi n / (2 s)."""
    bit_rows = [[int(b) for b in r] for r in rows]
    n = len(bit_rows)
    m = len(bit_rows[0])
    for r in bit_rows:
        if len(r) != m:
            raise ValueError("rows must share a length")
        if sum(r) > 1:
            raise ValueError("promise violated: at most one set bit per row")
    dim_chain = n + 1
    dim = dim_chain * s * 2 * m
    h = np.zeros((dim, dim))
    clique = _complete_graph(s)
    for j in range(n):
        coupling = math.sqrt((j + 1) * (n - j)) / n
        hop = np.zeros((dim_chain, dim_chain))
        hop[j + 1, j] = coupling
        term = np.kron(np.kron(hop, clique), _or_block(bit_rows[j]))
        h += term + term.conj().T
    d = 2 * s * m  # OR blocks contribute 2m, the clique a factor s
    meta = {
        "rows": n,
        "m": m,
        "s": s,
        "run_time": math.pi * n / (2.0 * s),
        "bits": ["".join(map(str, r)) for r in bit_rows],
    }
    return Instance(h, d=d, family="parity_or", meta=meta)


def parity_or_output(inst: Instance) -> tuple[int, float]:
    """Evolve |0, u, u, 0> and measure the output register (exact state)."""
    import scipy.linalg

    s = inst.meta["s"]
    m = inst.meta["m"]
    n = inst.meta["rows"]
    dim_chain = n + 1
    start = np.zeros(inst.n, dtype=complex)
    block = np.kron(_uniform(s), np.kron(np.array([1.0, 0.0]), _uniform(m)))
    start[: len(block)] = block  # chain site 0
    final = scipy.linalg.expm(-1j * inst.H * inst.meta["run_time"]) @ start
    probs = np.abs(final) ** 2
    # output register: within each (chain, clique) block the layout is
    # (output bit) x (or register)
    view = probs.reshape(dim_chain * s, 2, m)
    p1 = float(np.sum(view[:, 1, :]))
    p0 = float(np.sum(view[:, 0, :]))
    return (1, p1) if p1 >= p0 else (0, p0)


def random_sparse(n: int, d: int, target_ratio: float, seed: int) -> Instance:
    """Hermitian d-sparse instance with one-norm / (d max-norm) near the
    target; deterministic under the seed.

    Each row holds one principal entry of unit magnitude plus d-1 entries of
    magnitude mu = (d r - 1)/(d - 1), which realizes the requested ratio up
    to pattern collisions (the measured value is stored in the metadata).
    """
    if d > 1 and not 1.0 / d < target_ratio <= 1.0 + 1e-12:
        raise ValueError(f"ratio must lie in (1/{d}, 1]")
    rng = np.random.default_rng(seed)
    if d == 1:  # diagonal: the ratio is forced to 1
        vals = rng.uniform(0.5, 1.0, n) * rng.choice([-1.0, 1.0], n)
        h = np.diag(vals)
        return Instance(h, d=1, family="random_sparse",
                        meta={"target_ratio": 1.0, "seed": seed})
    mu = (d * target_ratio - 1.0) / (d - 1.0)
    h = np.zeros((n, n), dtype=complex)
    counts = np.zeros(n, dtype=int)

    def place(j, k, mag):
        phase = np.exp(1j * rng.uniform(0, 2 * math.pi)) if j != k else 1.0
        h[j, k] = mag * phase
        h[k, j] = np.conj(h[j, k])

    # principal entries: a random involution (pairing rows, some diagonal)
    perm = rng.permutation(n)
    paired = set()
    for idx in range(0, n - 1, 2):
        j, k = perm[idx], perm[idx + 1]
        place(j, k, 1.0)
        counts[j] += 1
        counts[k] += 1
        paired.update((j, k))
    for j in range(n):
        if j not in paired:
            place(j, j, 1.0)
            counts[j] += 1
    # secondary entries of magnitude mu until rows fill up to d
    attempts = 0
    while attempts < 40 * n * d:
        attempts += 1
        j, k = rng.integers(0, n, 2)
        if j == k or h[j, k] != 0 or counts[j] >= d or counts[k] >= d:
            continue
        if mu > 0:
            place(j, k, mu)
        counts[j] += 1
        counts[k] += 1
    inst = Instance(h, d=d, family="random_sparse",
                    meta={"target_ratio": target_ratio, "seed": seed})
    inst.meta["measured_ratio"] = inst.meta["one_norm"] / (d * inst.meta["max_norm"])
    return inst
