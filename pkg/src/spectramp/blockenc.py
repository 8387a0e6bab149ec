"""Standard-form (block) encodings of Hamiltonians as explicit unitaries.

A matrix H is encoded with normalization alpha >= ||H|| by a unitary U on
ancilla (x) system whenever the top-left ancilla block satisfies
(<0| (x) I) U (|0> (x) I) = H / alpha.  Register ordering is ancilla (x)
system with the ancilla index major, so that block is literally U[:n, :n].

Constructors cover dense Hermitian matrices (a two-block dilation), linear
combinations of unitaries, sparse value/index oracles (state-overlap
factors), and controlled exponentials e^{-iH}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "BlockEncoding",
    "SparseOracle",
    "OverlapFactors",
    "UnitaryChain",
    "extract_block",
    "encode_dense",
    "encode_lcu",
    "lcu_of_encodings",
    "build_overlap_factors",
    "encode_from_exponential",
    "complete_isometry",
]

_UNITARY_TOL = 1e-10


class UnitaryChain:
    """A unitary given as an ordered product of structured factors.

    Factors apply right-to-left (the first factor in ``factors`` acts first).
    Kinds:
      ("dense", M)                   full matrix
      ("diag", vector)               diagonal unitary
      ("perm", index_array)          basis permutation
      ("embed", M, left, right)      I_left (x) M (x) I_right
      ("had2",)                      Hadamard on a leading qubit register
      ("swap2",)                     swap the two halves
      ("blockdiag", top, bottom)     block-diagonal; blocks are matrices or
                                     UnitaryChain instances on dim/2
      ("rot2", v1, v2, rots)         identity plus two-by-two rotations on
                                     the (v1_k, v2_k) frame pairs
    Used where materializing the full product is wasteful; ``to_dense`` is
    still available at desk scale.
    """

    def __init__(self, dim: int, factors: list[tuple]):
        self.dim = dim
        self.factors = factors

    def apply(self, x: np.ndarray) -> np.ndarray:
        y = np.asarray(x, dtype=complex)
        squeeze = y.ndim == 1
        if squeeze:
            y = y[:, None]
        for f in self.factors:
            y = self._apply_one(f, y)
        return y[:, 0] if squeeze else y

    def _apply_one(self, f: tuple, y: np.ndarray) -> np.ndarray:
        kind = f[0]
        if kind == "dense":
            return f[1] @ y
        if kind == "diag":
            return f[1][:, None] * y
        if kind == "perm":
            return y[f[1], :]
        if kind == "embed":
            _, m, left, right = f
            k = m.shape[0]
            cols = y.shape[1]
            z = y.reshape(left, k, right * cols)
            z = np.einsum("ij,ajb->aib", m, z)
            return z.reshape(left * k * right, cols)
        if kind == "had2":
            half = y.shape[0] // 2
            s = 1.0 / math.sqrt(2.0)
            top = s * (y[:half] + y[half:])
            bot = s * (y[:half] - y[half:])
            return np.vstack([top, bot])
        if kind == "swap2":
            half = y.shape[0] // 2
            return np.vstack([y[half:], y[:half]])
        if kind == "blockdiag":
            half = y.shape[0] // 2
            return np.vstack([_apply_op(f[1], y[:half]), _apply_op(f[2], y[half:])])
        if kind == "rot2":
            _, v1, v2, rots = f
            c1 = v1.conj().T @ y
            c2 = v2.conj().T @ y
            out = y.copy()
            out += v1 @ ((rots[:, 0, 0] - 1.0)[:, None] * c1 + rots[:, 0, 1][:, None] * c2)
            out += v2 @ (rots[:, 1, 0][:, None] * c1 + (rots[:, 1, 1] - 1.0)[:, None] * c2)
            return out
        raise ValueError(f"unknown factor kind {kind!r}")

    def to_dense(self) -> np.ndarray:
        if self.dim > 8192:
            raise ValueError(f"refusing to materialize a {self.dim}-dim chain")
        return self.apply(np.eye(self.dim, dtype=complex))

    def factor_unitarity_residual(self) -> float:
        worst = 0.0
        for f in self.factors:
            kind = f[0]
            if kind in ("dense", "embed"):
                m = f[1]
                worst = max(worst, float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))))
            elif kind == "diag":
                worst = max(worst, float(np.max(np.abs(np.abs(f[1]) - 1.0))))
            elif kind == "perm":
                if len(np.unique(f[1])) != len(f[1]):
                    worst = max(worst, 1.0)
            elif kind == "blockdiag":
                for sub in f[1:]:
                    if isinstance(sub, UnitaryChain):
                        worst = max(worst, sub.factor_unitarity_residual())
                    else:
                        worst = max(
                            worst,
                            float(np.max(np.abs(sub.conj().T @ sub - np.eye(sub.shape[0])))),
                        )
            elif kind == "rot2":
                _, v1, v2, rots = f
                gram = np.einsum("mji,mjk->mik", rots.conj(), rots)
                worst = max(worst, float(np.max(np.abs(gram - np.eye(2)))))
                worst = max(worst, float(np.max(np.abs(v1.conj().T @ v1 - np.eye(v1.shape[1])))))
                worst = max(worst, float(np.max(np.abs(v2.conj().T @ v2 - np.eye(v2.shape[1])))))
                worst = max(worst, float(np.max(np.abs(v1.conj().T @ v2))))
        return worst


def _apply_op(op, y: np.ndarray) -> np.ndarray:
    if isinstance(op, UnitaryChain):
        return op.apply(y)
    return op @ y


@dataclass
class BlockEncoding:
    """Unitary U on ancilla (x) system with (<0| (x) I) U (|0> (x) I) = H/alpha."""

    U: np.ndarray | UnitaryChain
    d: int
    n: int
    alpha: float
    hermitian_flag: bool = False
    check: bool = True

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("normalization must be positive")
        dim = self.U.dim if isinstance(self.U, UnitaryChain) else self.U.shape[0]
        if dim != self.d * self.n:
            raise ValueError(f"unitary dimension {dim} != d*n = {self.d * self.n}")
        if self.check:
            resid = self.unitarity_residual()
            if resid > _UNITARY_TOL:
                raise ValueError(f"encoding unitary fails U^dag U = I by {resid:.3e}")
            blk = self.block
            if self.hermitian_flag and np.max(np.abs(blk - blk.conj().T)) > _UNITARY_TOL:
                raise ValueError("block is not Hermitian but hermitian_flag is set")
            nrm = np.linalg.norm(blk, 2)
            if nrm > 1.0 + _UNITARY_TOL:
                raise ValueError(f"extracted block has norm {nrm:.12f} > 1")

    def unitarity_residual(self) -> float:
        if isinstance(self.U, UnitaryChain):
            return self.U.factor_unitarity_residual()
        return float(np.max(np.abs(self.U.conj().T @ self.U - np.eye(self.d * self.n))))

    @property
    def block(self) -> np.ndarray:
        """(<0|_a (x) I) U (|0>_a (x) I); multiply by alpha to recover H."""
        if isinstance(self.U, UnitaryChain):
            e0 = np.zeros((self.U.dim, self.n), dtype=complex)
            e0[: self.n, :] = np.eye(self.n)
            return self.U.apply(e0)[: self.n, :]
        return np.array(self.U[: self.n, : self.n])

    @property
    def operator(self) -> np.ndarray:
        """alpha times the block: the encoded matrix itself."""
        return self.alpha * self.block

    def dense_unitary(self) -> np.ndarray:
        return self.U.to_dense() if isinstance(self.U, UnitaryChain) else self.U


def extract_block(enc: BlockEncoding) -> np.ndarray:
    return enc.block


# ---------------------------------------------------------------------------
# constructors


def encode_dense(h: np.ndarray, alpha: float) -> BlockEncoding:
    """Two-block unitary dilation [[H/a, S], [S, -H/a]], S = sqrt(I - (H/a)^2)."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(1.0, np.linalg.norm(h)):
        raise ValueError("encode_dense requires a Hermitian matrix")
    evals, vecs = np.linalg.eigh(h)
    norm = float(np.max(np.abs(evals)))
    if alpha < norm * (1.0 - 1e-12):
        raise ValueError(f"alpha = {alpha} is below the spectral norm {norm:.12e}")
    lam = np.clip(evals / alpha, -1.0, 1.0)
    s = vecs @ np.diag(np.sqrt(1.0 - lam * lam)) @ vecs.conj().T
    hn = vecs @ np.diag(lam) @ vecs.conj().T
    u = np.block([[hn, s], [s, -hn]])
    return BlockEncoding(u, d=2, n=n, alpha=float(alpha), hermitian_flag=True)


def _prepare_unitary(weights: np.ndarray) -> np.ndarray:
    """Any unitary whose first column is the given unit vector (Householder)."""
    v = np.asarray(weights, dtype=complex)
    d = len(v)
    e0 = np.zeros(d, dtype=complex)
    e0[0] = 1.0
    w = v - e0
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return np.eye(d, dtype=complex)
    w = w / nw
    return np.eye(d, dtype=complex) - 2.0 * np.outer(w, w.conj())


def encode_lcu(alphas: Sequence[float], unitaries: Sequence[np.ndarray]) -> BlockEncoding:
    """Encode sum_j alpha_j U_j / alpha via prepare-select-unprepare."""
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas < 0):
        raise ValueError("weights must be nonnegative")
    total = float(np.sum(alphas))
    if total <= 0:
        raise ValueError("weights must not all vanish")
    d = len(alphas)
    n = unitaries[0].shape[0]
    for u in unitaries:
        if np.max(np.abs(u.conj().T @ u - np.eye(n))) > 1e-10:
            raise ValueError("encode_lcu requires unitary inputs")
    g = _prepare_unitary(np.sqrt(alphas / total))
    sel = scipy.linalg.block_diag(*[np.asarray(u, dtype=complex) for u in unitaries])
    u_full = np.kron(g.conj().T, np.eye(n)) @ sel @ np.kron(g, np.eye(n))
    blk = sum(a * np.asarray(u) for a, u in zip(alphas, unitaries)) / total
    herm = bool(np.max(np.abs(blk - blk.conj().T)) <= 1e-10)
    return BlockEncoding(u_full, d=d, n=n, alpha=total, hermitian_flag=herm)


def lcu_of_encodings(alphas: Sequence[float], encs: Sequence[BlockEncoding]) -> BlockEncoding:
    """Combine block encodings sum_j alpha_j H_j with a select register.

    All inputs must share the system dimension; ancillas are padded to a
    common dimension first.
    """
    alphas = np.asarray(alphas, dtype=float)
    total = float(np.sum(alphas))
    n = encs[0].n
    dmax = max(e.d for e in encs)
    mats = []
    for e in encs:
        u = e.dense_unitary()
        if e.d < dmax:  # pad ancilla with identity on the extra block
            pad = np.eye(dmax * n, dtype=complex)
            pad[: e.d * n, : e.d * n] = u
            u = pad
        mats.append(u)
    g = _prepare_unitary(np.sqrt(alphas / total))
    sel = scipy.linalg.block_diag(*mats)
    u_full = np.kron(g.conj().T, np.eye(dmax * n)) @ sel @ np.kron(g, np.eye(dmax * n))
    herm = all(e.hermitian_flag for e in encs)
    return BlockEncoding(u_full, d=len(encs) * dmax, n=n, alpha=total, hermitian_flag=herm)


# ---------------------------------------------------------------------------
# sparse oracles and overlap factors


class SparseOracle:
    """Value oracle H_jk and column-index oracle f(j, l) for a d-sparse matrix.

    The dense reference is the source of truth; the oracle is a derived view.
    Rows with fewer than d structural nonzeros are padded with distinct dummy
    columns carrying value zero, so prepared states keep unit norm.
    """

    def __init__(self, h: np.ndarray, d: int, norms: dict | None = None):
        h = np.asarray(h, dtype=complex)
        if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
            raise ValueError("sparse oracle requires a Hermitian matrix")
        self.h = h
        self.n = h.shape[0]
        self.d = int(d)
        if self.d < 1 or self.d > self.n:
            raise ValueError("sparsity must lie in [1, n]")
        self._cols: list[list[int]] = []
        for j in range(self.n):
            nz = [k for k in range(self.n) if abs(h[j, k]) > 0.0]
            if len(nz) > self.d:
                raise ValueError(f"row {j} has {len(nz)} nonzeros > declared sparsity {self.d}")
            pad = [k for k in range(self.n) if k not in nz][: self.d - len(nz)]
            self._cols.append(nz + pad)
        default = {
            "max": float(np.max(np.abs(h))),
            "one": float(np.max(np.sum(np.abs(h), axis=1))),
            "spectral": float(np.linalg.norm(h, 2)),
        }
        self.norms = dict(default if norms is None else {**default, **norms})

    def value(self, j: int, k: int) -> complex:
        return complex(self.h[j, k])

    def col(self, j: int, l: int) -> int:
        return self._cols[j][l]

    def row_support(self, j: int) -> list[int]:
        return list(self._cols[j])

    def hermitian_consistency(self, rng=None, samples: int = 64) -> float:
        rng = rng or np.random.default_rng(0)
        worst = 0.0
        for _ in range(samples):
            j, k = rng.integers(0, self.n, 2)
            worst = max(worst, abs(self.value(j, k) - np.conj(self.value(k, j))))
        return worst

    def to_json(self) -> dict:
        entries = []
        for j in range(self.n):
            for k in range(self.n):
                v = self.h[j, k]
                if v != 0:
                    entries.append([int(j), int(k), float(v.real), float(v.imag)])
        return {"n": self.n, "d": self.d, "entries": entries}

    @staticmethod
    def from_json(obj: dict) -> "SparseOracle":
        h = np.zeros((obj["n"], obj["n"]), dtype=complex)
        for j, k, re, im in obj["entries"]:
            h[int(j), int(k)] = re + 1j * im
        return SparseOracle(h, int(obj["d"]))


@dataclass
class OverlapFactors:
    """Signal unitary factored as U_row^dag U_mix U_col.

    Registers are ordered (flag a2 of dimension 3) (x) (column a1 of
    dimension n) (x) (system of dimension n).  U_mix swaps system and a1 and
    acts as identity on the flag.
    """

    u_row: np.ndarray
    u_col: np.ndarray
    u_mix: np.ndarray
    n: int
    d: int
    alpha: float
    lambda_beta: float
    lambda_gamma: float
    sigma_row: np.ndarray  # absolute row sums; the exact-amplitude path uses them

    def encoding(self, check: bool = True) -> BlockEncoding:
        u = self.u_row.conj().T @ self.u_mix @ self.u_col
        return BlockEncoding(u, d=3 * self.n, n=self.n, alpha=self.alpha,
                             hermitian_flag=True, check=check)


def complete_isometry(columns: np.ndarray, col_indices: Sequence[int], dim: int) -> np.ndarray:
    """Unitary whose designated columns equal the given orthonormal vectors.

    Any orthonormal completion of the column space is valid; only the
    designated columns are contractual.
    """
    v = np.asarray(columns, dtype=complex)
    gram = v.conj().T @ v
    if np.max(np.abs(gram - np.eye(v.shape[1]))) > 1e-9:
        raise ValueError("designated columns are not orthonormal")
    comp = scipy.linalg.null_space(v.conj().T)
    u = np.zeros((dim, dim), dtype=complex)
    rest = [j for j in range(dim) if j not in set(col_indices)]
    u[:, list(col_indices)] = v
    u[:, rest] = comp
    return u


def _swap_registers(n: int) -> np.ndarray:
    """Permutation exchanging two n-dimensional registers."""
    s = np.zeros((n * n, n * n))
    for a in range(n):
        for b in range(n):
            s[b * n + a, a * n + b] = 1.0
    return s


def build_overlap_factors(oracle: SparseOracle) -> OverlapFactors:
    """State-overlap factorization of a d-sparse Hamiltonian.

    Column states carry amplitudes sqrt(H_jp / max-norm)/sqrt(d) on the good
    flag; the row side uses the conjugate convention (diagonal entries taken
    unconjugated) so the reconstructed block equals H/(d Lambda_max) exactly,
    including complex off-diagonals and negative diagonals.
    """
    n, d = oracle.n, oracle.d
    lam_max = oracle.norms["max"]
    if lam_max <= 0:
        raise ValueError("zero matrix cannot be factored")
    for j in range(n):
        for p in oracle.row_support(j):
            if abs(oracle.value(j, p)) > lam_max * (1 + 1e-12):
                raise ValueError(
                    f"max-norm bound too small: |H[{j},{p}]| = {abs(oracle.value(j, p)):.6e}"
                )
    dim = 3 * n * n  # flag (3) x column (n) x system (n)

    def flat(a2: int, a1: int, s: int) -> int:
        return (a2 * n + a1) * n + s

    cols_c = np.zeros((dim, n), dtype=complex)
    cols_r = np.zeros((dim, n), dtype=complex)
    inv_sqrt_d = 1.0 / math.sqrt(d)
    for j in range(n):
        for p in oracle.row_support(j):
            v = oracle.value(j, p)
            good = np.conj(np.sqrt(v / lam_max)) * inv_sqrt_d
            bad = math.sqrt(max(1.0 - abs(v) / lam_max, 0.0)) * inv_sqrt_d
            cols_c[flat(0, p, j), j] += good
            cols_c[flat(1, p, j), j] += bad
            # row side matches off the diagonal; the unconjugated diagonal
            # root fixes the sign of negative diagonal entries
            goodr = np.sqrt(v / lam_max) * inv_sqrt_d if p == j else good
            cols_r[flat(0, p, j), j] += goodr
            cols_r[flat(2, p, j), j] += bad
    idx = [flat(0, 0, j) for j in range(n)]
    u_col = complete_isometry(cols_c, idx, dim)
    u_row = complete_isometry(cols_r, idx, dim)
    u_mix = np.kron(np.eye(3), _swap_registers(n))
    sigma = np.sum(np.abs(oracle.h), axis=1)
    lam_slow = float(np.max(sigma) / (d * lam_max))
    return OverlapFactors(
        u_row=u_row,
        u_col=u_col,
        u_mix=u_mix,
        n=n,
        d=d,
        alpha=d * lam_max,
        lambda_beta=lam_slow,
        lambda_gamma=lam_slow,
        sigma_row=sigma,
    )


# ---------------------------------------------------------------------------
# standard form from controlled exponentials


def encode_from_exponential(
    v: np.ndarray,
    eps: float,
    h_reference: np.ndarray | None = None,
    meter=None,
):
    """Standard-form encoding of H from oracle access to V = e^{-iH}, ||H|| <= 1/2.

    One query pair to controlled-V gives a d=2 encoding of sin(H) in the
    e^{i sigma_x pi/4}|0> basis (absorbed into the signal unitary); applying
    the bounded arcsine polynomial through flexible signal processing then
    recovers H itself with error eps and ancilla dimension 4.

    Returns (encoding, report) with the polynomial degree and V-query count.
    """
    from spectramp.chebpoly import arcsin_poly
    from spectramp.qubitization import flexible_qsp_apply
    from spectramp.reports import QueryMeter, SimReport

    v = np.asarray(v, dtype=complex)
    n = v.shape[0]
    if np.max(np.abs(v.conj().T @ v - np.eye(n))) > 1e-10:
        raise ValueError("input must be unitary")
    if h_reference is not None:
        if np.linalg.norm(h_reference, 2) > 0.5 + 1e-9:
            raise ValueError("reference norm exceeds 1/2; the arcsine window needs ||H|| <= 1/2")
    # U1 = U0^dag (sigma_x (x) I) U0 = |1><0| e^{iH} + |0><1| e^{-iH}
    u1 = np.zeros((2 * n, 2 * n), dtype=complex)
    u1[n:, :n] = v.conj().T
    u1[:n, n:] = v
    g = (np.eye(2) + 1j * np.array([[0.0, 1.0], [1.0, 0.0]])) / math.sqrt(2.0)
    u1 = np.kron(g.conj().T, np.eye(n)) @ u1 @ np.kron(g, np.eye(n))
    enc_sin = BlockEncoding(u1, d=2, n=n, alpha=1.0, hermitian_flag=True)

    meter = meter if meter is not None else QueryMeter()
    poly = arcsin_poly(0.9 * eps)
    enc_lin = flexible_qsp_apply(enc_sin, poly, reuse_ancilla=True, meter=meter,
                                 check_conditions=False)
    meter.add("V_queries", 2 * poly.degree)  # each qubiterate uses U0 and U0^dag
    err = float("nan")
    if h_reference is not None:
        err = float(np.linalg.norm(enc_lin.operator - h_reference, 2))
    report = SimReport(
        queries=2 * poly.degree,
        degrees=[poly.degree],
        error_measured=err,
        eps_requested=eps,
        alpha=1.0,
        query_breakdown=dict(meter.counts),
    )
    return enc_lin, report
