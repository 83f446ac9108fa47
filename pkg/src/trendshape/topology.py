"""Topological pipeline: delay embedding, Vietoris-Rips filtrations,
persistent homology in dimensions 0 and 1, barcodes, persistence landscapes,
and landscape feature matrices.

Embeddings consume raw (unstandardized) values: rescaling would distort the
geometry the filtration measures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ._reduction import count_triangles, fill_coboundary, fill_triangles, reduce_columns
from .dataset import Dataset, TimeSeries
from .errors import EmbeddingError, EmptyInput, InvalidFiltration


class TdaStrategy(enum.Enum):
    """Which homology degrees feed the landscape features."""

    H1_ONLY = "H1_ONLY"
    H0_H1_FILTERED = "H0_H1_FILTERED"


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    source_keyword: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError(f"points must be 2-d, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def delay_embed(x: TimeSeries, d: int = 6, tau: int = 3) -> PointCloud:
    """Point i = (x_i, x_{i+tau}, ..., x_{i+(d-1)tau}); count = length - (d-1)tau."""
    if d < 1 or tau < 1:
        raise ValueError(f"need d >= 1 and tau >= 1, got d={d}, tau={tau}")
    n = len(x) - (d - 1) * tau
    if n <= 0:
        raise EmbeddingError(
            f"series {x.keyword!r} of length {len(x)} too short for d={d}, tau={tau}"
        )
    idx = np.arange(n)[:, None] + tau * np.arange(d)[None, :]
    return PointCloud(points=x.values[idx], source_keyword=x.keyword)


def enclosing_radius(cloud: PointCloud) -> float:
    """min over points of the max distance to all others.

    Past this radius every vertex is within one ball of some point, so all H0
    classes except one have died; capping here bounds the simplex count
    without losing finite features below the cap.
    """
    if len(cloud) == 0:
        raise EmptyInput("empty point cloud")
    if len(cloud) == 1:
        return 0.0
    dm = squareform(pdist(cloud.points))
    return float(dm.max(axis=1).min())


def cloud_diameter(cloud: PointCloud) -> float:
    if len(cloud) == 0:
        raise EmptyInput("empty point cloud")
    if len(cloud) == 1:
        return 0.0
    return float(pdist(cloud.points).max())


@dataclass(frozen=True, eq=False)
class Filtration:
    """A Vietoris-Rips filtration up to dimension 2.

    Edges and triangles are stored per dimension, each already in filtration
    order (diameter, then lexicographic vertices); interleaving the dimensions
    by (diameter, dimension, vertices) yields the global order exposed by
    :attr:`simplices`. Faces always precede cofaces in that order because a
    face has no larger diameter and strictly smaller dimension.
    """

    n_vertices: int
    edges: np.ndarray
    edge_diameters: np.ndarray
    triangles: np.ndarray
    triangle_diameters: np.ndarray
    max_dimension: int
    max_radius: float

    @cached_property
    def simplices(self) -> tuple[tuple[tuple[int, ...], float], ...]:
        items: list[tuple[tuple[int, ...], float]] = [
            ((v,), 0.0) for v in range(self.n_vertices)
        ]
        items += [
            (tuple(int(v) for v in e), float(d))
            for e, d in zip(self.edges, self.edge_diameters)
        ]
        items += [
            (tuple(int(v) for v in t), float(d))
            for t, d in zip(self.triangles, self.triangle_diameters)
        ]
        items.sort(key=lambda s: (s[1], len(s[0]), s[0]))
        return tuple(items)


def rips_filtration(
    cloud: PointCloud, max_dimension: int = 2, max_radius: float | None = None
) -> Filtration:
    """Build the Rips filtration: vertices at 0, edges at their length,
    higher simplices at the max of their edge lengths.

    ``max_radius=None`` applies the enclosing-radius cap. Dimensions above 2
    are never enumerated (only H0/H1 are consumed downstream).
    """
    n = len(cloud)
    if n == 0:
        raise EmptyInput("empty point cloud")
    if max_dimension not in (1, 2):
        raise ValueError(f"max_dimension must be 1 or 2, got {max_dimension}")
    if max_radius is None:
        r = enclosing_radius(cloud)
        max_radius = r if r > 0.0 else 1.0
    if max_radius <= 0.0:
        raise ValueError(f"max_radius must be positive, got {max_radius}")

    if n == 1:
        dm = np.zeros((1, 1))
    else:
        dm = squareform(pdist(cloud.points))
    iu, ju = np.triu_indices(n, k=1)
    dd = dm[iu, ju]
    keep = dd <= max_radius
    ei, ej, ed = iu[keep], ju[keep], dd[keep]
    order = np.lexsort((ej, ei, ed))
    edges = np.column_stack([ei, ej])[order].astype(np.int64)
    edge_diam = ed[order]

    tris = np.empty((0, 3), dtype=np.int64)
    tri_diam = np.empty(0)
    if max_dimension >= 2 and len(edges) > 0:
        adj = (dm <= max_radius) & ~np.eye(n, dtype=bool)
        counts = count_triangles(adj, ei.astype(np.int64), ej.astype(np.int64))
        total = int(counts.sum())
        if total:
            offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
            tris = np.empty((total, 3), dtype=np.int64)
            tri_diam = np.empty(total)
            fill_triangles(adj, dm, ei.astype(np.int64), ej.astype(np.int64),
                           offsets, tris, tri_diam)
            t_order = np.lexsort((tris[:, 2], tris[:, 1], tris[:, 0], tri_diam))
            tris = tris[t_order]
            tri_diam = tri_diam[t_order]

    return Filtration(
        n_vertices=n,
        edges=edges,
        edge_diameters=edge_diam,
        triangles=tris,
        triangle_diameters=tri_diam,
        max_dimension=max_dimension,
        max_radius=float(max_radius),
    )


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """(birth, death) pairs for one homology degree.

    Zero-persistence pairs are dropped at assembly; ``essential_births`` holds
    classes alive at ``max_radius``.
    """

    dimension: int
    pairs: np.ndarray
    essential_births: np.ndarray
    max_radius: float

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=float).reshape(-1, 2)
        ess = np.asarray(self.essential_births, dtype=float)
        pairs.setflags(write=False)
        ess.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "essential_births", ess)

    @property
    def essential(self) -> int:
        return int(self.essential_births.size)

    @property
    def persistences(self) -> np.ndarray:
        return self.pairs[:, 1] - self.pairs[:, 0]


def _edge_lookup(edges: np.ndarray, n: int):
    """Vectorized (i, j) -> filtration-index lookup for sorted-pair queries."""
    keys = edges[:, 0] * n + edges[:, 1]
    order = np.argsort(keys)
    sorted_keys = keys[order]

    def lookup(qi: np.ndarray, qj: np.ndarray) -> np.ndarray:
        qkeys = np.asarray(qi) * n + np.asarray(qj)
        idx = np.full(qkeys.shape, -1, dtype=np.int64)
        if len(sorted_keys) == 0:
            return idx
        pos = np.searchsorted(sorted_keys, qkeys)
        inside = pos < len(sorted_keys)
        found = inside.copy()
        found[inside] = sorted_keys[pos[inside]] == qkeys[inside]
        idx[found] = order[pos[found]]
        return idx

    return lookup


def _validate_filtration(f: Filtration, lookup) -> None:
    n = f.n_vertices
    if len(f.edges):
        if np.any(f.edges[:, 0] >= f.edges[:, 1]):
            raise InvalidFiltration("edge vertices must be strictly ascending")
        if np.any((f.edges < 0) | (f.edges >= n)):
            raise InvalidFiltration("edge vertex out of range")
        if np.any(np.diff(f.edge_diameters) < 0):
            raise InvalidFiltration("edge diameters not sorted")
    if len(f.triangles):
        t = f.triangles
        if np.any((t[:, 0] >= t[:, 1]) | (t[:, 1] >= t[:, 2])):
            raise InvalidFiltration("triangle vertices must be strictly ascending")
        if np.any(np.diff(f.triangle_diameters) < 0):
            raise InvalidFiltration("triangle diameters not sorted")
        for a, b in ((0, 1), (0, 2), (1, 2)):
            e_idx = lookup(t[:, a], t[:, b])
            if np.any(e_idx < 0):
                raise InvalidFiltration("triangle has a missing edge face")
            if np.any(f.edge_diameters[e_idx] > f.triangle_diameters):
                raise InvalidFiltration("face appears after its coface")


def _apparent_pivots(rows: np.ndarray, n_rows: int, skip: np.ndarray | None = None) -> np.ndarray:
    """Order-based apparent pairs: column j claims its maximal facet row r
    when j is the first column containing r. Such (r, j) are persistence
    pairs of the refined filtration and cost no column operations."""
    n_cols = rows.shape[0]
    idx = np.arange(n_cols, dtype=np.int64)
    first_cofacet = np.full(n_rows, n_cols, dtype=np.int64)
    for c in range(rows.shape[1]):
        np.minimum.at(first_cofacet, rows[:, c], idx)
    max_facet = rows[:, -1]
    apparent = first_cofacet[max_facet] == idx
    if skip is not None:
        apparent &= skip == 0
    return np.where(apparent, max_facet, -1).astype(np.int64)


def persistent_homology(f: Filtration) -> list[PersistenceDiagram]:
    """Diagrams for dimensions 0..max_dimension-1 over the field with two
    elements, with the twist/clearing and apparent-pairs optimizations.

    H0 comes from the literal boundary reduction (edge columns over vertex
    rows, filtration order). The dimension-1 pairing is computed on the
    anti-transposed matrix (edge columns listing cofacet triangles, both in
    reverse order): its pivot pairs coincide with the boundary reduction's by
    duality, but almost every column claims its pivot without any additions,
    where the straight boundary direction would zero-reduce ~97% of triangle
    columns through long cascades. Edges already paired with vertices are
    cleared from the dual pass.
    """
    n = f.n_vertices
    lookup = _edge_lookup(f.edges, n)
    _validate_filtration(f, lookup)
    n_edges = len(f.edges)
    n_tri = len(f.triangles)

    # H0: vertices all born at 0; negative edges kill components
    edge_pivot = np.full(n_edges, -1, dtype=np.int64)
    if n_edges:
        offsets = np.arange(n_edges + 1, dtype=np.int64) * 2
        edge_pivot = reduce_columns(
            f.edges.ravel().astype(np.int64),
            offsets,
            np.int64(n),
            np.zeros(n_edges, np.uint8),
            _apparent_pivots(f.edges, n),
        )
    negative = edge_pivot >= 0

    h0_deaths = f.edge_diameters[negative]
    h0_pairs = np.column_stack([np.zeros(h0_deaths.size), h0_deaths])
    h0_pairs = h0_pairs[h0_pairs[:, 1] > h0_pairs[:, 0]]
    h0_pairs = h0_pairs[np.lexsort((h0_pairs[:, 1], h0_pairs[:, 0]))]
    h0_essential = np.zeros(n - int(negative.sum()))
    diagrams = [
        PersistenceDiagram(
            dimension=0,
            pairs=h0_pairs,
            essential_births=h0_essential,
            max_radius=f.max_radius,
        )
    ]
    if f.max_dimension < 2:
        return diagrams

    # H1 via the dual reduction
    if n_tri and n_edges:
        rows = np.stack(
            [
                lookup(f.triangles[:, 0], f.triangles[:, 1]),
                lookup(f.triangles[:, 0], f.triangles[:, 2]),
                lookup(f.triangles[:, 1], f.triangles[:, 2]),
            ],
            axis=1,
        )
        rows = np.sort(rows, axis=1)
        max_facet = rows[:, 2]
        min_cofacet = np.full(n_edges, n_tri, dtype=np.int64)
        tri_ids = np.arange(n_tri, dtype=np.int64)
        for c in range(3):
            np.minimum.at(min_cofacet, rows[:, c], tri_ids)

        # apparent pair: e is the maximal facet of its own minimal cofacet
        edge_ids = np.arange(n_edges)
        has_cofacet = min_cofacet < n_tri
        apparent = has_cofacet.copy()
        apparent[has_cofacet] = (
            max_facet[min_cofacet[has_cofacet]] == edge_ids[has_cofacet]
        )
        apparent &= ~negative
        pre_dual = np.where(apparent, n_tri - 1 - min_cofacet, -1)

        counts = np.bincount(rows.ravel(), minlength=n_edges)
        col_offsets = np.concatenate([[0], np.cumsum(counts[::-1])]).astype(np.int64)
        col_rows = np.empty(3 * n_tri, dtype=np.int64)
        fill_coboundary(rows, n_edges, col_offsets, col_rows)

        dual_pivot = reduce_columns(
            col_rows,
            col_offsets,
            np.int64(n_tri),
            negative[::-1].astype(np.uint8),
            pre_dual[::-1].astype(np.int64),
        )

        claimed = dual_pivot >= 0
        killed_edges = n_edges - 1 - np.nonzero(claimed)[0]
        killing_tris = n_tri - 1 - dual_pivot[claimed]
        births = f.edge_diameters[killed_edges]
        deaths = f.triangle_diameters[killing_tris]
        h1_pairs = np.column_stack([births, deaths])
        h1_pairs = h1_pairs[h1_pairs[:, 1] > h1_pairs[:, 0]]
        h1_pairs = h1_pairs[np.lexsort((h1_pairs[:, 1], h1_pairs[:, 0]))]
        ess_edges = n_edges - 1 - np.nonzero(~claimed & ~negative[::-1])[0]
        h1_essential = np.sort(f.edge_diameters[ess_edges])
    else:
        h1_pairs = np.empty((0, 2))
        h1_essential = np.sort(f.edge_diameters[~negative]) if n_edges else np.empty(0)

    diagrams.append(
        PersistenceDiagram(
            dimension=1,
            pairs=h1_pairs,
            essential_births=h1_essential,
            max_radius=f.max_radius,
        )
    )
    return diagrams


@dataclass(frozen=True)
class Bar:
    birth: float
    death: float
    open: bool


def barcode(pd: PersistenceDiagram) -> tuple[Bar, ...]:
    """Intervals sorted by descending persistence; essential classes are
    truncated at max_radius and flagged open."""
    bars = [Bar(float(b), float(d), False) for b, d in pd.pairs]
    bars += [Bar(float(b), pd.max_radius, True) for b in pd.essential_births]
    bars.sort(key=lambda b: (-(b.death - b.birth), b.birth, b.open))
    return tuple(bars)


@dataclass(frozen=True, eq=False)
class PersistenceLandscape:
    """lambda_k sampled on a uniform grid; row k-1 holds level k."""

    grid: np.ndarray
    values: np.ndarray

    @property
    def k_max(self) -> int:
        return self.values.shape[0]


def landscape(
    pd: PersistenceDiagram, k_max: int = 5, grid_size: int = 100, *, t_max: float
) -> PersistenceLandscape:
    """Tent functions f_i(t) = max(0, min(t - b_i, d_i - t)); level k is the
    k-th largest tent at each grid point (0 where fewer than k features).

    Essential classes carry no finite lifespan and are excluded.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if grid_size < 2:
        raise ValueError(f"grid_size must be >= 2, got {grid_size}")
    if t_max <= 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    grid = np.linspace(0.0, t_max, grid_size)
    values = np.zeros((k_max, grid_size))
    if len(pd.pairs):
        b = pd.pairs[:, 0][:, None]
        d = pd.pairs[:, 1][:, None]
        tents = np.clip(np.minimum(grid[None, :] - b, d - grid[None, :]), 0.0, None)
        top = min(k_max, tents.shape[0])
        tents.sort(axis=0)
        values[:top] = tents[::-1][:top]
    return PersistenceLandscape(grid=grid, values=values)


@dataclass(frozen=True)
class TdaParams:
    """Knobs for the per-series embed -> rips -> persistence -> landscape run."""

    embed_dim: int = 6
    embed_tau: int = 3
    max_dimension: int = 2
    max_radius_rule: str = "enclosing"
    k_max: int = 5
    grid_size: int = 100
    persistence_floor: float = 0.10


@dataclass(frozen=True, eq=False)
class TdaFeatureMatrix:
    keywords: tuple[str, ...]
    rows: np.ndarray
    strategy: TdaStrategy
    t_max: float
    k_max: int
    grid_size: int


def compute_diagrams(d: Dataset, params: TdaParams = TdaParams()) -> list[list[PersistenceDiagram]]:
    """Embed, filter, and reduce every series; one diagram list per series."""
    if params.max_radius_rule not in ("enclosing", "diameter"):
        raise ValueError(f"unknown max_radius_rule {params.max_radius_rule!r}")
    out = []
    for s in d.series:
        cloud = delay_embed(s, d=params.embed_dim, tau=params.embed_tau)
        radius = None
        if params.max_radius_rule == "diameter":
            dia = cloud_diameter(cloud)
            radius = dia if dia > 0.0 else 1.0
        filt = rips_filtration(cloud, max_dimension=params.max_dimension, max_radius=radius)
        out.append(persistent_homology(filt))
    return out


def filter_by_persistence(pd: PersistenceDiagram, floor: float) -> PersistenceDiagram:
    """Drop pairs with persistence below floor * (max persistence in pd)."""
    if len(pd.pairs) == 0 or floor <= 0.0:
        return pd
    threshold = floor * float(pd.persistences.max())
    return replace(pd, pairs=pd.pairs[pd.persistences >= threshold])


def _global_t_max(diagram_groups: list[list[PersistenceDiagram]]) -> float:
    deaths = [
        float(pd.pairs[:, 1].max())
        for group in diagram_groups
        for pd in group
        if len(pd.pairs)
    ]
    if deaths:
        return max(deaths)
    radii = [pd.max_radius for group in diagram_groups for pd in group]
    return max(radii) if radii else 1.0


def matrix_from_diagrams(
    keywords: tuple[str, ...],
    diagrams: list[list[PersistenceDiagram]],
    strategy: TdaStrategy,
    params: TdaParams = TdaParams(),
) -> TdaFeatureMatrix:
    """Vectorize diagrams into aligned landscape rows.

    One global t_max (the max death across the dataset) keeps every row on
    the same grid so rows are comparable coordinates.
    """
    if any(len(group) < 2 for group in diagrams):
        raise ValueError("landscape features need diagrams up to dimension 1")

    if strategy is TdaStrategy.H1_ONLY:
        h1 = [[group[1]] for group in diagrams]
        t_max = _global_t_max(h1)
        rows = [
            landscape(group[1], params.k_max, params.grid_size, t_max=t_max).values.ravel()
            for group in diagrams
        ]
    elif strategy is TdaStrategy.H0_H1_FILTERED:
        filtered = [
            [
                filter_by_persistence(group[0], params.persistence_floor),
                filter_by_persistence(group[1], params.persistence_floor),
            ]
            for group in diagrams
        ]
        t_max = _global_t_max(filtered)
        rows = [
            np.concatenate(
                [
                    landscape(g, params.k_max, params.grid_size, t_max=t_max).values.ravel()
                    for g in pair
                ]
            )
            for pair in filtered
        ]
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    return TdaFeatureMatrix(
        keywords=tuple(keywords),
        rows=np.vstack(rows),
        strategy=strategy,
        t_max=t_max,
        k_max=params.k_max,
        grid_size=params.grid_size,
    )


def feature_matrix(
    d: Dataset, strategy: TdaStrategy, params: TdaParams = TdaParams()
) -> TdaFeatureMatrix:
    """Full per-series TDA pipeline ending in one landscape row per keyword."""
    return matrix_from_diagrams(d.keywords, compute_diagrams(d, params), strategy, params)
