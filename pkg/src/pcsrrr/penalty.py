"""Per-group quadratic penalties built from each design block's spectrum.

For a group block X_k with thin SVD X_k = L S R^T, the penalty matrix is

    A_k = R diag(s_1^2 - s_1^2, s_1^2 - s_2^2, ..., s_1^2 - s_m^2) R^T,

a positive semidefinite form that charges nothing along the block's leading
principal direction and increasingly more along trailing ones.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .model import AllZeroBlock, DataPair, GroupPartition

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class GroupSpectrum:
    """Thin right singular vectors and positive singular values of one block."""

    right_vectors: np.ndarray   # p_k x m_k, orthonormal columns
    singular_values: np.ndarray  # length m_k, descending, strictly positive

    def __post_init__(self):
        s = np.asarray(self.singular_values, dtype=float)
        v = np.asarray(self.right_vectors, dtype=float)
        object.__setattr__(self, "singular_values", s)
        object.__setattr__(self, "right_vectors", v)
        if s.ndim != 1 or s.size < 1 or v.ndim != 2 or v.shape[1] != s.size:
            raise AllZeroBlock("spectrum is empty or inconsistently shaped")
        if s[-1] <= 0 or np.any(np.diff(s) > 0):
            raise AllZeroBlock("singular values must be positive and non-increasing")

    @property
    def m(self) -> int:
        """Numerical rank of the block."""
        return self.singular_values.size


@dataclass(frozen=True)
class PenaltySet:
    """One penalty matrix per group plus the spectra they were built from.

    ``diagonal`` holds the A_k diagonal entries mapped back to the original
    predictor order, so row updates can read them without regrouping.
    ``spectra`` may be empty for synthetic sets (e.g. plain ridge penalties).
    """

    matrices: tuple
    spectra: tuple
    diagonal: np.ndarray


def group_svd(x_block: np.ndarray, rank_tolerance: float = DEFAULT_RANK_TOL) -> GroupSpectrum:
    """Thin SVD of one group block, truncated at the numerical rank.

    Keeps singular values above ``rank_tolerance`` times the largest one.
    Raises AllZeroBlock when nothing survives (identically zero block, or a
    tolerance so large it filters everything).
    """
    x_block = np.asarray(x_block, dtype=float)
    if x_block.ndim != 2 or x_block.shape[1] < 1:
        raise AllZeroBlock(f"block must be a 2-d matrix, got shape {x_block.shape}")
    _, s, vt = np.linalg.svd(x_block, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        raise AllZeroBlock("design block is identically zero")
    m = int(np.sum(s > rank_tolerance * s[0]))
    if m == 0:
        raise AllZeroBlock("rank tolerance filtered out every singular value")
    return GroupSpectrum(vt[:m].T.copy(), s[:m].copy())


def build_penalty(spectrum: GroupSpectrum) -> np.ndarray:
    """The p_k x p_k penalty matrix from one group spectrum.

    The inner diagonal holds the squared-singular-value gaps; its first entry
    is exactly zero, so the leading right singular vector spans the null
    space by construction.
    """
    s2 = spectrum.singular_values ** 2
    gaps = s2[0] - s2
    R = spectrum.right_vectors
    A = (R * gaps) @ R.T
    return 0.5 * (A + A.T)


def build_penalty_set(data: DataPair, groups: GroupPartition,
                      rank_tolerance: float = DEFAULT_RANK_TOL) -> PenaltySet:
    """Penalty matrices for every group of the design matrix."""
    matrices = []
    spectra = []
    diagonal = np.zeros(data.p)
    for k in range(groups.K):
        idx = groups.indices[k]
        try:
            spec = group_svd(data.X[:, idx], rank_tolerance)
        except AllZeroBlock as err:
            raise AllZeroBlock(f"group {k}: {err}") from None
        A = build_penalty(spec)
        matrices.append(A)
        spectra.append(spec)
        diagonal[idx] = np.diag(A)
    return PenaltySet(tuple(matrices), tuple(spectra), diagonal)
