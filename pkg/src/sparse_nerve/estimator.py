"""Scikit-learn style front end."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .balls import SparseParams
from .greedy import greedy_permutation
from .metric import MetricKind, PointCloud
from .neighbors import STRICT, construct_edges
from .persistence import compute_barcode
from .simplices import Flavor, build_filtration


class SparseNerve(BaseEstimator, TransformerMixin):
    """Sparse filtration and its barcode for a point cloud.

    Parameters
    ----------
    epsilon : float, default=0.5
        Sparsity; the barcode is a ``(1 + epsilon)``-approximation.
    metric : {"l2", "l1", "linf"}, default="l2"
    flavor : {"rips", "cech"}, default="rips"
    max_dim : int, default=2
        Largest simplex dimension built.
    mode : {"strict", "paper"}, default="strict"
        Edge birth rule; see :func:`sparse_nerve.neighbors.edge_birth_time`.
    seed : int, default=0
        Index of the first point of the greedy permutation.
    allow_large_epsilon : bool, default=False

    Attributes
    ----------
    params_ : SparseParams
    edges_ : SparseGraph
        Edges between greedy ranks.
    filtration_ : FilteredComplex
        Vertices are original row indices.
    barcode_ : Barcode
    n_features_in_ : int

    Examples
    --------
    >>> import numpy as np
    >>> from sparse_nerve import SparseNerve
    >>> X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    >>> SparseNerve(epsilon=0.5).fit(X).barcode_.in_dim(0)[-1]
    (0.0, inf)
    """

    def __init__(self, epsilon=0.5, metric="l2", flavor="rips", max_dim=2, mode=STRICT,
                 seed=0, allow_large_epsilon=False):
        self.epsilon = epsilon
        self.metric = metric
        self.flavor = flavor
        self.max_dim = max_dim
        self.mode = mode
        self.seed = seed
        self.allow_large_epsilon = allow_large_epsilon

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=1)
        if int(self.max_dim) < 0:
            raise ValueError("max_dim must be non-negative")
        cloud = PointCloud(X, MetricKind.parse(self.metric))
        self.params_ = SparseParams(self.epsilon, cloud, greedy_permutation(cloud, self.seed),
                                    self.allow_large_epsilon)
        self.edges_ = construct_edges(self.params_, self.mode)
        self.filtration_ = build_filtration(self.params_, int(self.max_dim), Flavor.parse(self.flavor),
                                            self.mode, graph=self.edges_)
        self.barcode_ = compute_barcode(self.filtration_)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """The fitted barcode as an array of ``(dim, birth, death)`` rows.

        The barcode describes the fitted cloud, so ``X`` is only checked for
        a matching number of features.
        """
        check_is_fitted(self, "barcode_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.barcode_.to_array()
