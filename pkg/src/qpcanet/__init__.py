"""Quaternion PCA network (QPCANet) and PCANet baselines for colour images."""

__version__ = "0.1.0"

from .classifier import LinearModel, evaluate_accuracy, predict, train_linear_svm
from .errors import (
    DataError,
    ModelFormatError,
    NotHermitianError,
    NotTrainedError,
    NumericalError,
    QpcaNetError,
    QuaternionDomainError,
    ShapeError,
)
from .filters import QpcaFilterBank, RealFilterBank, covariance, learn_pca_filters, learn_qpca_filters
from .io import load_model, save_model
from .kernels import BACKEND
from .linalg import HermEigResult, hermitian_eig
from .network import NetworkConfig, NetworkModel, StageConfig, extract_features, forward, train_model
from .quaternion import Quaternion

__all__ = [
    "BACKEND",
    "DataError",
    "HermEigResult",
    "LinearModel",
    "ModelFormatError",
    "NetworkConfig",
    "NetworkModel",
    "NotHermitianError",
    "NotTrainedError",
    "NumericalError",
    "QpcaFilterBank",
    "QpcaNetError",
    "Quaternion",
    "QuaternionDomainError",
    "RealFilterBank",
    "ShapeError",
    "StageConfig",
    "covariance",
    "evaluate_accuracy",
    "extract_features",
    "forward",
    "hermitian_eig",
    "learn_pca_filters",
    "learn_qpca_filters",
    "load_model",
    "predict",
    "save_model",
    "train_linear_svm",
    "train_model",
]
