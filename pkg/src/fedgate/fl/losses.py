"""Loss functions, predictions, and analytic gradients.

Two kinds are supported, both reduced as the mean over samples so the
learning rate stays independent of partition size:

* squared_error:  loss = mean((Xw - y)^2),      grad = (2/m) X^T (Xw - y)
* logistic:       loss = mean(softplus(z) - yz), grad = (1/m) X^T (sigma(z) - y)
  with z = Xw and labels in {0, 1}.

When the spec enables a bias term, the final model coordinate is the
intercept and the design matrix is augmented with a ones column.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .config import LossSpec
from .model import ModelParameters


def design_matrix(features: np.ndarray, loss: LossSpec) -> np.ndarray:
    """Feature matrix as seen by the model (ones column appended for bias)."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != loss.feature_dim:
        raise ValidationError(
            f"feature matrix has shape {x.shape}, expected (*, {loss.feature_dim})"
        )
    if loss.bias:
        x = np.hstack([x, np.ones((x.shape[0], 1))])
    return x


def raw_scores(model: ModelParameters, features: np.ndarray, loss: LossSpec) -> np.ndarray:
    """Linear scores z = Xw for each sample."""
    if model.dimension != loss.parameter_dim:
        raise ValidationError(
            f"model dimension {model.dimension} does not match parameter dimension "
            f"{loss.parameter_dim}"
        )
    return design_matrix(features, loss) @ model.weights


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict(model: ModelParameters, features: np.ndarray, loss: LossSpec) -> np.ndarray:
    """Model outputs: linear scores for squared_error, probabilities for logistic."""
    z = raw_scores(model, features, loss)
    return _sigmoid(z) if loss.kind == "logistic" else z


def mean_loss(
    model: ModelParameters, features: np.ndarray, labels: np.ndarray, loss: LossSpec
) -> float:
    """Mean-over-samples loss on one dataset."""
    z = raw_scores(model, features, loss)
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != (z.shape[0],):
        raise ValidationError(f"labels shape {y.shape} does not match {z.shape[0]} samples")
    if loss.kind == "squared_error":
        return float(np.mean((z - y) ** 2))
    # softplus(z) - y*z == -y*log(p) - (1-y)*log(1-p), evaluated stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def gradient(
    model: ModelParameters, features: np.ndarray, labels: np.ndarray, loss: LossSpec
) -> np.ndarray:
    """Analytic gradient of the mean loss with respect to the model vector."""
    x = design_matrix(features, loss)
    z = x @ model.weights
    y = np.asarray(labels, dtype=np.float64)
    m = x.shape[0]
    if loss.kind == "squared_error":
        return (2.0 / m) * (x.T @ (z - y))
    return (1.0 / m) * (x.T @ (_sigmoid(z) - y))
