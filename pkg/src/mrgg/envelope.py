"""Envelope recovery from the scaled adjacency spectrum.

The operator spectrum of the connection kernel consists of one eigenvalue per
harmonic degree k, repeated with multiplicity dim_k. The estimator groups the
empirical eigenvalues into clusters of exactly those sizes using repeated
complete-linkage trees, scores candidate resolutions by a thresholded
intra-class variance, and picks the resolution by a penalty-calibration
(slope) heuristic on the dimension-vs-penalty path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.cluster.hierarchy import linkage, to_tree

from .dynamics import Graph
from .harmonics import EnvelopeSpectrum, cumulative_dim, harmonic_dims, reconstruct_envelope
from .spectral import MAGNITUDE_DESC, Spectrum, scaled_adjacency, sym_eigen

__all__ = [
    "DendrogramNode",
    "complete_linkage_tree",
    "ClusterAssignment",
    "size_constrained_clustering",
    "intra_class_variance",
    "resolution_path",
    "select_resolution",
    "EnvelopeEstimate",
    "estimate_envelope",
    "default_kappa_grid",
]


@dataclass(eq=False)
class DendrogramNode:
    """Node of a complete-linkage merge tree over scalar values.

    ``members`` lists the leaf indices beneath the node; ``size`` counts the
    members still active (the clustering loop deactivates leaves as clusters
    are carved out without rebuilding the tree mid-pass).
    """

    members: np.ndarray
    height: float
    children: tuple = ()
    depth: int = 0
    size: int = 0
    parent: Optional["DendrogramNode"] = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return not self.children


def complete_linkage_tree(values) -> DendrogramNode:
    """Binary merge tree of the given reals under the complete linkage rule.

    At every step the two active clusters with the smallest maximal pairwise
    distance merge; merge heights are monotone from leaves to root. Leaf
    ``members`` hold indices into ``values``.
    """
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if values.size == 0:
        raise ValueError("need at least one value")
    if values.size == 1:
        return DendrogramNode(members=np.array([0]), height=0.0, size=1)
    merges = to_tree(linkage(values[:, None], method="complete"))
    return _convert(merges)


def _convert(root_sp) -> DendrogramNode:
    # iterative post-order build; dendrograms over clustered data can be deep
    done: dict[int, DendrogramNode] = {}
    stack = [root_sp]
    while stack:
        nd = stack[-1]
        if nd.is_leaf():
            done[nd.id] = DendrogramNode(members=np.array([nd.id]), height=0.0, size=1)
            stack.pop()
            continue
        left_sp, right_sp = nd.get_left(), nd.get_right()
        if left_sp.id in done and right_sp.id in done:
            left, right = done[left_sp.id], done[right_sp.id]
            out = DendrogramNode(
                members=np.concatenate([left.members, right.members]),
                height=float(nd.dist),
                children=(left, right),
                size=left.size + right.size,
            )
            left.parent = out
            right.parent = out
            done[nd.id] = out
            stack.pop()
        else:
            if right_sp.id not in done:
                stack.append(right_sp)
            if left_sp.id not in done:
                stack.append(left_sp)
    root = done[root_sp.id]
    root.depth = 0
    queue = [root]
    while queue:
        nd = queue.pop()
        for child in nd.children:
            child.depth = nd.depth + 1
            queue.append(child)
    return root


def _collect(root: DendrogramNode) -> tuple[list[DendrogramNode], list[DendrogramNode]]:
    """All nodes in breadth-first order plus the leaves indexed by leaf id."""
    nodes = []
    queue = [root]
    while queue:
        node = queue.pop()
        nodes.append(node)
        queue.extend(node.children)
    leaves = [None] * root.members.size
    for node in nodes:
        if node.is_leaf:
            leaves[int(node.members[0])] = node
    return nodes, leaves


@dataclass(frozen=True)
class ClusterAssignment:
    """Eigenvalue clusters of sizes dim_0..dim_R plus the unclustered tail."""

    clusters: tuple  # clusters[k] = values assigned to harmonic degree k
    leftover: np.ndarray  # remaining eigenvalues, magnitude-descending
    resolution: int
    dims: tuple

    def means(self) -> np.ndarray:
        return np.array([float(np.mean(c)) for c in self.clusters])


def size_constrained_clustering(spec: Spectrum, d: int, R: int) -> ClusterAssignment:
    """Partition the leading eigenvalues into clusters of the harmonic multiplicities.

    The pool is the cumulative_dim(R, d) largest-magnitude eigenvalues. A
    complete-linkage tree over the signed values of the not-yet-clustered pool
    is searched twice per round: first for a node of exactly the wanted size
    as close to the root as possible, then for the node whose size exceeds the
    wanted size by the least, keeping its largest-magnitude members. Rounds
    repeat on the shrunken pool until every multiplicity is filled; a round
    that cannot place anything triggers a rebuild, bounded by R+1 rebuilds.
    """
    dims = harmonic_dims(R, d)
    tilde = sum(dims)
    values = np.asarray(spec.values, dtype=float)
    if tilde > values.size:
        raise ValueError(
            f"resolution {R} needs {tilde} eigenvalues but the spectrum has {values.size}"
        )
    order = np.lexsort((-values, -np.abs(values)))
    pool = values[order[:tilde]]
    leftover = values[order[tilde:]]
    magnitudes = np.abs(pool)

    alive = np.ones(tilde, dtype=bool)
    found: dict[int, np.ndarray] = {}
    remaining = list(dims)
    restarts = 0
    while remaining:
        active = np.flatnonzero(alive)
        root = complete_linkage_tree(pool[active])
        nodes, leaves = _collect(root)

        def live_pool_indices(node: DendrogramNode) -> np.ndarray:
            local = node.members
            idx = active[local]
            return idx[alive[idx]]

        def carve(node: DendrogramNode, keep: np.ndarray) -> None:
            # keep: pool indices to save; deactivate them in this tree
            for pool_idx in keep:
                alive[pool_idx] = False
            kept = set(int(i) for i in keep)
            for local in node.members:
                if int(active[local]) in kept:
                    walk = leaves[int(local)]
                    while walk is not None:
                        walk.size -= 1
                        walk = walk.parent

        def selection_key(node: DendrogramNode):
            mean_mag = float(np.mean(magnitudes[live_pool_indices(node)]))
            return (node.depth, -node.height, -mean_mag)

        for want in list(remaining):
            candidates = [nd for nd in nodes if nd.size == want]
            if not candidates:
                continue
            best = min(candidates, key=selection_key)
            keep = live_pool_indices(best)
            carve(best, keep)
            found[want] = pool[keep]
            remaining.remove(want)

        if not remaining:
            break

        placed_any = False
        for want in list(remaining):
            candidates = [nd for nd in nodes if nd.size > want]
            if not candidates:
                break  # rebuild the tree over what is left
            best = min(candidates, key=lambda nd: (nd.size - want,) + selection_key(nd))
            live = live_pool_indices(best)
            keep = live[np.argsort(-magnitudes[live], kind="stable")[:want]]
            carve(best, keep)
            found[want] = pool[keep]
            remaining.remove(want)
            placed_any = True

        if remaining and not placed_any:
            restarts += 1
            if restarts > R + 1:
                raise RuntimeError(
                    f"size-constrained clustering failed to place sizes {remaining} "
                    f"after {restarts} rebuilds"
                )

    clusters = tuple(np.sort(found[want])[::-1] for want in dims)
    return ClusterAssignment(clusters=clusters, leftover=leftover, resolution=R, dims=tuple(dims))


def intra_class_variance(assign: ClusterAssignment, n: int) -> float:
    """Within-cluster variance plus squared unclustered eigenvalues, divided by ``n``."""
    if n < 1:
        raise ValueError("node count must be positive")
    total = 0.0
    for cluster in assign.clusters:
        total += float(np.sum((cluster - np.mean(cluster)) ** 2))
    total += float(np.sum(assign.leftover**2))
    return total / n


def default_kappa_grid() -> np.ndarray:
    """81 log-spaced penalty constants between 1e-5 and 1e-1."""
    return np.logspace(-5.0, -1.0, 81)


def resolution_path(
    variance_table: np.ndarray,
    dim_totals: np.ndarray,
    n: int,
    kappa_grid: np.ndarray,
) -> tuple[np.ndarray, float, int]:
    """Penalized resolution choice along a grid of penalty constants.

    For each kappa the selected resolution minimizes
    ``variance_table[R] + kappa * dim_totals[R] / n`` (smallest R on ties).
    The calibration constant kappa0 is the grid point at which the selected
    cumulative dimension drops the most between consecutive grid points, and
    the final resolution re-runs the minimization at 2 * kappa0.

    Returns (selected resolution per grid point, kappa0, final resolution).
    """
    variance_table = np.asarray(variance_table, dtype=float)
    dim_totals = np.asarray(dim_totals, dtype=float)
    kappa_grid = np.asarray(kappa_grid, dtype=float)
    if kappa_grid.size < 2 or np.any(np.diff(kappa_grid) <= 0):
        raise ValueError("kappa grid must be sorted ascending with at least 2 points")
    crit = variance_table[None, :] + np.outer(kappa_grid, dim_totals / n)
    r_of_kappa = np.argmin(crit, axis=1)
    tilde_path = dim_totals[r_of_kappa]
    drops = tilde_path[:-1] - tilde_path[1:]
    if np.all(drops == 0):
        warnings.warn(
            "resolution path is constant over the penalty grid; "
            "using the smallest grid point for calibration",
            stacklevel=2,
        )
        kappa0 = float(kappa_grid[0])
    else:
        kappa0 = float(kappa_grid[int(np.argmax(drops)) + 1])
    r_hat = int(np.argmin(variance_table + 2.0 * kappa0 * dim_totals / n))
    return r_of_kappa, kappa0, r_hat


def select_resolution(
    spec: Spectrum, d: int, n: int, kappa_grid=None
) -> tuple[int, float, np.ndarray]:
    """Cluster at every feasible resolution and pick one by the slope heuristic.

    Feasible resolutions are R = 0..R_max with cumulative_dim(R_max, d) <= n.
    Returns (selected resolution, calibrated penalty constant, the per-R
    intra-class variance table).
    """
    if kappa_grid is None:
        kappa_grid = default_kappa_grid()
    r_max = 0
    while cumulative_dim(r_max + 1, d) <= n:
        r_max += 1
    variance_table = np.empty(r_max + 1)
    for r in range(r_max + 1):
        assign = size_constrained_clustering(spec, d, r)
        variance_table[r] = intra_class_variance(assign, n)
    dim_totals = np.array([cumulative_dim(r, d) for r in range(r_max + 1)], dtype=float)
    _, kappa0, r_hat = resolution_path(variance_table, dim_totals, n, kappa_grid)
    return r_hat, kappa0, variance_table


@dataclass(frozen=True)
class EnvelopeEstimate:
    """Estimated kernel eigenvalues with the resolution-selection diagnostics."""

    p_hat: np.ndarray
    d: int
    kappa0: float
    variance_table: np.ndarray

    @property
    def resolution(self) -> int:
        return self.p_hat.size - 1

    def spectrum(self) -> EnvelopeSpectrum:
        return EnvelopeSpectrum(coefficients=self.p_hat, d=self.d)

    def evaluate(self, grid, clip: bool = True) -> np.ndarray:
        """Reconstructed envelope values on ``grid``; clamped into [0, 1] by default."""
        return reconstruct_envelope(self.spectrum(), grid, clip=clip)

    def to_doc(self) -> dict:
        return {
            "d": int(self.d),
            "R_hat": int(self.resolution),
            "kappa0": float(self.kappa0),
            "p_hat": [float(v) for v in self.p_hat],
            "intra_class_variance": [float(v) for v in self.variance_table],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "EnvelopeEstimate":
        return cls(
            p_hat=np.asarray(doc["p_hat"], dtype=float),
            d=int(doc["d"]),
            kappa0=float(doc["kappa0"]),
            variance_table=np.asarray(doc["intra_class_variance"], dtype=float),
        )


def estimate_envelope(g: Graph, d: int, zeta: float = 1.0, kappa_grid=None) -> EnvelopeEstimate:
    """Full envelope pipeline on one graph.

    Eigenvalues of adjacency/n are rescaled by 1/zeta (identity in the dense
    regime), the resolution is chosen by the slope heuristic, and the cluster
    means at that resolution become the estimated eigenvalues.
    """
    spec = sym_eigen(scaled_adjacency(g), want_vectors=False, order=MAGNITUDE_DESC)
    spec = Spectrum(values=spec.values / zeta, vectors=None, order=spec.order)
    r_hat, kappa0, variance_table = select_resolution(spec, d, g.n, kappa_grid)
    assign = size_constrained_clustering(spec, d, r_hat)
    return EnvelopeEstimate(
        p_hat=assign.means(), d=d, kappa0=kappa0, variance_table=variance_table
    )
