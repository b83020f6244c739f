"""PCA, X-means clustering and decision-tree classification."""

from .cluster import (ClusterModel, KMeansResult, adjusted_rand_index, bic_score, kmeans,
                      lloyd, xmeans)
from .pca import PcaModel, Standardizer, pca_fit, pca_inverse, pca_transform
from .tree import (TreeModel, entropy_impurity, gini_impurity, tree_fit, tree_predict,
                   tree_predict_proba)
from .validation import (Classifier, CvReport, fit_classifier, format_pm, grid_search,
                         stratified_kfold)

__all__ = [
    "ClusterModel", "KMeansResult", "adjusted_rand_index", "bic_score", "kmeans", "lloyd",
    "xmeans", "PcaModel", "Standardizer", "pca_fit", "pca_inverse", "pca_transform",
    "TreeModel", "entropy_impurity", "gini_impurity", "tree_fit", "tree_predict",
    "tree_predict_proba", "Classifier", "CvReport", "fit_classifier", "format_pm",
    "grid_search", "stratified_kfold",
]
