"""Local client training and federation-wide loss/accuracy evaluation."""

from __future__ import annotations

import numpy as np

from ..errors import FedGateError, ValidationError
from .config import FederationConfig, LossSpec
from .data import DatasetPartition
from .losses import gradient, mean_loss, predict
from .model import ModelParameters

# A job is aborted once any weight magnitude passes this bound.
DIVERGENCE_LIMIT = 1e6


class TrainingDivergedError(FedGateError):
    """Local training produced non-finite or unbounded weights."""

    def __init__(self, client_id: str, detail: str):
        self.client_id = client_id
        super().__init__(f"training diverged on client {client_id!r}: {detail}")


def local_train(
    model: ModelParameters,
    partition: DatasetPartition,
    config: FederationConfig,
    round_seed: int,
) -> ModelParameters:
    """Run E epochs of gradient descent on the partition's mean loss.

    Deterministic in (model, partition, config, round_seed); the input
    model is never modified. The round seed only feeds minibatch
    shuffling, so full-batch runs ignore it.
    """
    if model.dimension != config.loss.parameter_dim:
        raise ValidationError(
            f"model dimension {model.dimension} does not match loss parameter "
            f"dimension {config.loss.parameter_dim}"
        )
    weights = model.weights.copy()
    eta = config.learning_rate
    rng = (
        np.random.default_rng([round_seed & 0xFFFFFFFFFFFFFFFF])
        if config.batch_mode == "minibatch"
        else None
    )

    for _ in range(config.local_epochs):
        if config.batch_mode == "full":
            batches = [(partition.features, partition.labels)]
        else:
            order = rng.permutation(partition.size)
            size = config.batch_size
            batches = [
                (partition.features[order[i : i + size]], partition.labels[order[i : i + size]])
                for i in range(0, partition.size, size)
            ]
        for x, y in batches:
            grad = gradient(ModelParameters(weights), x, y, config.loss)
            if not np.all(np.isfinite(grad)):
                raise TrainingDivergedError(partition.client_id, "non-finite gradient")
            weights = weights - eta * grad
        if not np.all(np.isfinite(weights)):
            raise TrainingDivergedError(partition.client_id, "non-finite weights")
        if np.max(np.abs(weights)) > DIVERGENCE_LIMIT:
            raise TrainingDivergedError(
                partition.client_id, f"weight magnitude exceeded {DIVERGENCE_LIMIT:g}"
            )
    return ModelParameters(weights)


def global_loss(
    model: ModelParameters, partitions: list[DatasetPartition], loss: LossSpec
) -> float:
    """Sample-size-weighted mean loss over the pooled data.

    Equals (1/|D|) * sum_i |D_i| * local_loss(model, D_i).
    """
    if not partitions:
        raise ValidationError("global_loss requires at least one partition")
    total = sum(p.size for p in partitions)
    acc = 0.0
    for p in partitions:
        acc += p.size * mean_loss(model, p.features, p.labels, loss)
    return acc / total


def training_accuracy(
    model: ModelParameters, partitions: list[DatasetPartition], loss: LossSpec
) -> float:
    """Fraction of pooled samples the model gets right.

    Logistic: thresholded probability matches the {0,1} label.
    Squared error: prediction within 0.5 of the label.
    """
    correct = 0
    total = 0
    for p in partitions:
        outputs = predict(model, p.features, loss)
        if loss.kind == "logistic":
            hits = (outputs >= 0.5) == (p.labels >= 0.5)
        else:
            hits = np.abs(outputs - p.labels) <= 0.5
        correct += int(np.sum(hits))
        total += p.size
    return correct / total
