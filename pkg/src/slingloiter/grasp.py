"""Grasp matrix, pseudo-inverse and nullspace bases for a cable-suspended load.

Cable forces are world-frame vectors applied by the cables to the load. The
wrench is ``[force (world); torque (body)]``, so the torque block for cable i
is ``S(b_i) @ R.T``.
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry, DegenerateGeometryWarning, TooFewCables
from .geometry import EPS_GEOM, is_rotation, skew, unit_between

RCOND = 1e-12  # relative singular-value cutoff for rank decisions
COLLINEAR_TOL = 1e-6  # m, distance below which anchors count as collinear


@dataclass(frozen=True)
class LoadModel:
    mass: float
    inertia: np.ndarray
    anchors: np.ndarray
    linear_friction: float = 0.0
    angular_friction: float = 0.0

    def __post_init__(self):
        inertia = np.array(self.inertia, dtype=float)
        anchors = np.atleast_2d(np.array(self.anchors, dtype=float))
        if inertia.shape == (3,):
            inertia = np.diag(inertia)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "anchors", anchors)
        if not self.mass > 0:
            raise ValueError("load mass must be positive")
        if inertia.shape != (3, 3) or not np.allclose(inertia, inertia.T, atol=1e-12):
            raise ValueError("inertia must be a symmetric 3x3 matrix")
        if np.linalg.eigvalsh(inertia).min() <= 0:
            raise ValueError("inertia must be positive definite")
        if anchors.ndim != 2 or anchors.shape[1] != 3 or anchors.shape[0] < 1:
            raise ValueError("anchors must be an (n, 3) array with n >= 1")
        for i, j in itertools.combinations(range(len(anchors)), 2):
            if np.linalg.norm(anchors[i] - anchors[j]) <= EPS_GEOM:
                raise ValueError(f"anchors {i} and {j} coincide")
        if self.linear_friction < 0 or self.angular_friction < 0:
            raise ValueError("friction coefficients must be non-negative")

    @property
    def n(self):
        return self.anchors.shape[0]


def build_grasp(load, attitude):
    """Return the 6 x 3n grasp matrix at the given load attitude."""
    R = np.asarray(attitude, dtype=float)
    n = load.n
    G = np.zeros((6, 3 * n))
    for i in range(n):
        G[:3, 3 * i : 3 * i + 3] = np.eye(3)
        G[3:, 3 * i : 3 * i + 3] = skew(load.anchors[i]) @ R.T
    return G


def _svd_rank(s, rcond=RCOND):
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > s[0] * rcond))


def matrix_rank(A, rcond=RCOND):
    return _svd_rank(np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False), rcond)


def pseudo_inverse(G, rcond=RCOND):
    """Moore-Penrose pseudo-inverse via SVD with cutoff ``sigma_max * rcond``."""
    G = np.asarray(G, dtype=float)
    U, s, Vt = np.linalg.svd(G, full_matrices=False)
    r = _svd_rank(s, rcond)
    return (Vt[:r].T / s[:r]) @ U[:, :r].T


def nullspace_orthonormal(G, rcond=RCOND):
    """Orthonormal basis of null(G) and its dimension."""
    G = np.asarray(G, dtype=float)
    _, s, Vt = np.linalg.svd(G, full_matrices=True)
    r = _svd_rank(s, rcond)
    basis = Vt[r:].T.copy()
    return basis, basis.shape[1]


def pairwise_nullspace(load, attitude, pairs):
    """Columns of equal and opposite unit forces along anchor-connecting lines.

    ``pairs`` holds zero-based index pairs. Column k has ``R @ b_ij`` in block i
    and ``-R @ b_ij`` in block j, with ``b_ij`` the unit vector from anchor j to
    anchor i.
    """
    R = np.asarray(attitude, dtype=float)
    n = load.n
    N = np.zeros((3 * n, len(pairs)))
    for k, (i, j) in enumerate(pairs):
        d = R @ unit_between(load.anchors[i], load.anchors[j])
        N[3 * i : 3 * i + 3, k] = d
        N[3 * j : 3 * j + 3, k] = -d
    return N


def all_pairs(n):
    """Every unordered pair in lexicographic order (zero-based)."""
    return list(itertools.combinations(range(n), 2))


def _cycle_to_pairs(cycle):
    n = len(cycle)
    return [tuple(sorted((cycle[k], cycle[(k + 1) % n]))) for k in range(n)]


def hamiltonian_pairs(n, seed=0):
    """Pick one Hamiltonian cycle of the complete graph on n cables.

    Returns n zero-based pairs ordered along the cycle, so every cable appears
    in exactly two pairs. ``seed=0`` is the identity cycle 0-1-...-(n-1), which
    for n = 3 yields the ordering (0,1), (1,2), (0,2). Other seeds draw a
    random cycle reproducibly.
    """
    if n < 3:
        raise TooFewCables(f"a Hamiltonian cycle needs at least 3 cables, got {n}")
    if seed == 0:
        cycle = list(range(n))
    else:
        rest = np.random.default_rng(seed).permutation(np.arange(1, n)).tolist()
        # fix the traversal direction so each undirected cycle has one form
        if rest[0] > rest[-1]:
            rest.reverse()
        cycle = [0] + rest
    return _cycle_to_pairs(cycle)


def count_hamiltonian_cycles(n):
    if n < 3:
        raise TooFewCables(f"a Hamiltonian cycle needs at least 3 cables, got {n}")
    return math.factorial(n - 1) // 2


def default_pairs(n, seed=0):
    """Pair set used to parameterize internal forces for n cables."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    return hamiltonian_pairs(n, seed)


def anchors_collinear(anchors, tol=COLLINEAR_TOL):
    """True when every anchor lies within ``tol`` of one line."""
    anchors = np.atleast_2d(anchors)
    if len(anchors) < 3:
        return True
    centered = anchors - anchors.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    # residual distance scale off the principal line
    return bool(np.sqrt(np.sum(s[1:] ** 2) / len(anchors)) <= tol)


@dataclass(frozen=True)
class GraspSystem:
    """Grasp data frozen at a static equilibrium pose."""

    load: LoadModel
    attitude: np.ndarray
    position: np.ndarray
    pairs: list
    G: np.ndarray = field(repr=False)
    G_pinv: np.ndarray = field(repr=False)
    N_pair: np.ndarray = field(repr=False)
    N_ortho: np.ndarray = field(repr=False)
    nullity: int = 0
    rank: int = 0
    pair_rank: int = 0

    @classmethod
    def at_equilibrium(cls, load, attitude=None, position=None, pairs=None, seed=0):
        R = np.eye(3) if attitude is None else np.asarray(attitude, dtype=float)
        if not is_rotation(R):
            raise ValueError("attitude is not a rotation matrix")
        p = np.zeros(3) if position is None else np.asarray(position, dtype=float)
        n = load.n
        if pairs is None:
            pairs = default_pairs(n, seed)
        pairs = [tuple(int(x) for x in pr) for pr in pairs]
        _check_pairs(pairs, n)
        if n >= 3 and anchors_collinear(load.anchors):
            warnings.warn(
                "anchors are (nearly) collinear; the load behaves like the 2-cable case",
                DegenerateGeometryWarning,
                stacklevel=2,
            )
        G = build_grasp(load, R)
        N_ortho, m = nullspace_orthonormal(G)
        N_pair = pairwise_nullspace(load, R, pairs)
        return cls(
            load=load,
            attitude=R,
            position=p,
            pairs=pairs,
            G=G,
            G_pinv=pseudo_inverse(G),
            N_pair=N_pair,
            N_ortho=N_ortho,
            nullity=m,
            rank=3 * n - m,
            pair_rank=matrix_rank(N_pair) if N_pair.size else 0,
        )

    @property
    def n(self):
        return self.load.n

    def basis(self, kind="pair"):
        if kind == "pair":
            return self.N_pair
        if kind == "ortho":
            return self.N_ortho
        raise ValueError(f"unknown basis kind {kind!r}")

    def planes(self):
        """Per-cable pair of world-frame directions spanning its internal-force plane.

        Only defined when every cable is touched by exactly two selected pairs.
        """
        out = []
        for i in range(self.n):
            cols = [k for k, pr in enumerate(self.pairs) if i in pr]
            if len(cols) != 2:
                raise DegenerateGeometry(
                    f"cable {i} is driven by {len(cols)} internal forces, expected 2"
                )
            blk = self.N_pair[3 * i : 3 * i + 3]
            out.append((blk[:, cols[0]].copy(), blk[:, cols[1]].copy()))
        return out


def _check_pairs(pairs, n):
    seen = set()
    for i, j in pairs:
        if not (0 <= i < j < n):
            raise ValueError(f"invalid pair ({i}, {j}) for {n} cables")
        if (i, j) in seen:
            raise ValueError(f"duplicate pair ({i}, {j})")
        seen.add((i, j))
