"""FedAvg orchestration and the matched centralized-SGD baseline.

Each round the aggregator broadcasts the global parameters, every client
runs local momentum-SGD on its shard and the aggregator replaces the global
model by the shard-size-weighted mean of the returned models.

Client training within a round may run on a thread pool. Per-client seeds
are derived from (seed, round, client_id) and models are always folded in
ascending client_id order, so any worker count yields bit-identical results.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Sequence

import numpy as np

from fedflip.config import HyperParams, settings
from fedflip.core.adversary import AttackSpec, flip_dataset, flip_labels
from fedflip.core.nn import (
    Batch,
    ModelParams,
    OptimizerState,
    backward,
    forward,
    init_params,
    loss,
    predict,
    sgd_step,
)
from fedflip.errors import AggregationError, AttackConfigError, ShapeMismatchError
from fedflip.eval.metrics import ClassificationReport, confusion, report
from fedflip.ingest.dataset import ClientShard, LabeledDataset
from fedflip.ingest.partition import batches
from fedflip.utils.logging import get_logger
from fedflip.utils.seeding import derive_seed

logger = get_logger(__name__)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    global_loss: float
    global_accuracy: float


@dataclass(frozen=True, eq=False)
class RunResult:
    final_params: ModelParams
    history: List[RoundRecord]
    report: ClassificationReport
    initial: RoundRecord = field(default=RoundRecord(0, float("nan"), float("nan")))

    @property
    def accuracy(self) -> float:
        return self.report.accuracy

    @property
    def final_loss(self) -> float:
        return self.history[-1].global_loss


def epoch_seed(round_seed: int, epoch: int) -> int:
    return derive_seed(round_seed, "epoch", epoch)


def client_round_seed(seed: int, round_index: int, client_id: int) -> int:
    return derive_seed(seed, "round", round_index, "client", client_id)


def local_train(
    global_params: ModelParams, shard: ClientShard, hp: HyperParams, round_seed: int
) -> ModelParams:
    """E epochs of mini-batch momentum SGD from a copy of the global model.

    Velocity starts at zero every round; only parameters leave the client.
    """
    params = global_params
    state = OptimizerState.zeros_like(params, hp.learning_rate, hp.momentum)
    last_loss = float("nan")
    for epoch in range(hp.local_epochs):
        for batch in batches(shard, hp.batch_size, epoch_seed(round_seed, epoch)):
            last_loss, grads = backward(params, batch)
            params, state = sgd_step(params, grads, state)
    logger.debug(f"Client {shard.client_id}: last batch loss {last_loss:.4f}")
    return params


def fed_average(
    locals_: Sequence[ModelParams],
    weights: Sequence[float],
    client_ids: Optional[Sequence[int]] = None,
) -> ModelParams:
    """Weighted per-coordinate mean, folded left in ascending client_id order."""
    if not locals_:
        raise AggregationError("no local models to average")
    if len(weights) != len(locals_):
        raise AggregationError(f"{len(locals_)} models but {len(weights)} weights")
    if client_ids is None:
        client_ids = range(len(locals_))
    elif len(client_ids) != len(locals_):
        raise AggregationError(f"{len(locals_)} models but {len(client_ids)} client ids")

    weights = [float(w) for w in weights]
    if any(w < 0 for w in weights):
        raise AggregationError(f"weights must be non-negative, got {weights}")
    # fsum is exactly rounded, hence independent of the input order
    total = math.fsum(weights)
    if total <= 0:
        raise AggregationError("aggregation weights sum to zero")

    first = locals_[0]
    for model in locals_[1:]:
        if model.shapes != first.shapes:
            raise ShapeMismatchError("local model shape", first.shapes, model.shapes)

    order = sorted(range(len(locals_)), key=lambda i: client_ids[i])
    normalized = {i: weights[i] / total for i in order}
    averaged = [normalized[order[0]] * a for a in locals_[order[0]].arrays()]
    for i in order[1:]:
        averaged = [acc + normalized[i] * a for acc, a in zip(averaged, locals_[i].arrays())]
    return ModelParams.from_arrays(averaged)


def evaluate(params: ModelParams, test: LabeledDataset) -> RoundRecord:
    """Global loss and accuracy on the test set (round filled in by caller)."""
    probs = forward(params, Batch(test.features, test.labels))
    accuracy = float(np.mean(np.argmax(probs, axis=1) == test.labels))
    return RoundRecord(0, loss(probs, test.labels), accuracy)


def _final_report(params: ModelParams, test: LabeledDataset, names: Sequence[str]) -> ClassificationReport:
    preds = predict(params, test.features)
    return report(confusion(preds, test.labels, test.num_classes), list(names))


def _record(round_index: int, params: ModelParams, test: LabeledDataset) -> RoundRecord:
    result = evaluate(params, test)
    return RoundRecord(round_index, result.global_loss, result.global_accuracy)


def _starting_params(hp: HyperParams, seed: int, initial: Optional[ModelParams]) -> ModelParams:
    if initial is None:
        return init_params(hp.mlp_config(), seed)
    expected = [((fan_in, fan_out), (fan_out,)) for fan_in, fan_out in hp.mlp_config().layer_shapes]
    if initial.shapes != expected:
        raise ShapeMismatchError("initial parameters", expected, initial.shapes)
    return initial


def _train_client(
    global_params: ModelParams, hp: HyperParams, seed: int, round_index: int, shard: ClientShard
) -> ModelParams:
    return local_train(
        global_params, shard, hp, client_round_seed(seed, round_index, shard.client_id)
    )


def run_federated(
    train_shards: Sequence[ClientShard],
    test: LabeledDataset,
    hp: HyperParams,
    attack: Optional[AttackSpec] = None,
    seed: int = 0,
    *,
    initial: Optional[ModelParams] = None,
    workers: Optional[int] = None,
    class_names: Optional[Sequence[str]] = None,
) -> RunResult:
    """R rounds of FedAvg over all clients, optionally with one poisoned shard."""
    shards = list(train_shards)
    if len(shards) != hp.n_clients:
        raise ShapeMismatchError("client shard count", hp.n_clients, len(shards))

    if attack is not None:
        if attack.malicious_client >= len(shards):
            raise AttackConfigError(
                f"malicious_client {attack.malicious_client} is not one of {len(shards)} clients",
                malicious_client=attack.malicious_client,
                n_clients=len(shards),
            )
        target = attack.malicious_client
        shards[target], _ = flip_labels(shards[target], attack, hp.num_classes)

    workers = max(1, workers if workers is not None else settings.threads)
    shard_sizes = [float(len(s)) for s in shards]
    client_ids = [s.client_id for s in shards]

    params = _starting_params(hp, seed, initial)
    initial_record = _record(0, params, test)
    logger.info(
        f"Federated run: {len(shards)} clients, {hp.comm_rounds} rounds, "
        f"{workers} worker(s), initial loss {initial_record.global_loss:.4f}"
    )

    history: List[RoundRecord] = []
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for round_index in range(1, hp.comm_rounds + 1):
            train_client = partial(_train_client, params, hp, seed, round_index)
            if executor is not None:
                local_models = list(executor.map(train_client, shards))
            else:
                local_models = [train_client(shard) for shard in shards]

            params = fed_average(local_models, shard_sizes, client_ids)
            record = _record(round_index, params, test)
            history.append(record)
            logger.info(
                f"Round {round_index}/{hp.comm_rounds}: loss {record.global_loss:.4f}, "
                f"accuracy {record.global_accuracy:.4f}"
            )
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    names = class_names if class_names is not None else test.class_names
    return RunResult(params, history, _final_report(params, test, names), initial_record)


def run_centralized(
    train: LabeledDataset,
    test: LabeledDataset,
    hp: HyperParams,
    attack: Optional[AttackSpec] = None,
    seed: int = 0,
    *,
    initial: Optional[ModelParams] = None,
    class_names: Optional[Sequence[str]] = None,
) -> RunResult:
    """Plain SGD on the pooled data with batch size batch_size * n_clients.

    One round is one pass over the pooled set, so each step sees as many
    samples as one FedAvg round sees across all clients.
    """
    if attack is not None:
        train, flipped = flip_dataset(train, attack, hp.num_classes)
        logger.info(f"Centralized: flipped {len(flipped)} of {len(train)} labels")

    central_hp = hp.model_copy(update={"batch_size": hp.batch_size * hp.n_clients})
    pooled = ClientShard(0, train)

    params = _starting_params(hp, seed, initial)
    initial_record = _record(0, params, test)
    logger.info(
        f"Centralized run: batch {central_hp.batch_size}, {hp.comm_rounds} rounds, "
        f"initial loss {initial_record.global_loss:.4f}"
    )

    history: List[RoundRecord] = []
    for round_index in range(1, hp.comm_rounds + 1):
        params = local_train(params, pooled, central_hp, client_round_seed(seed, round_index, 0))
        record = _record(round_index, params, test)
        history.append(record)
        logger.info(
            f"Round {round_index}/{hp.comm_rounds}: loss {record.global_loss:.4f}, "
            f"accuracy {record.global_accuracy:.4f}"
        )

    names = class_names if class_names is not None else test.class_names
    return RunResult(params, history, _final_report(params, test, names), initial_record)
