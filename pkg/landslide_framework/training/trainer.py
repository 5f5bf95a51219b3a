"""The epoch loop: balanced sampling, augmentation, forward/backward, Adam"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import TrainConfig
from ..data.dihedral import DihedralTransform
from ..data.pairs import TilePair, dihedral_augment
from ..exceptions import ClassBalanceError, NumericalAbortError
from ..model.network import Network
from ..models import ConfusionCounts, MetricsRecord
from ..seeding import derive_rng
from ..state import TrainingState
from ..tensor import AdamState, ComputationTape, adam_step, backward, bce_loss
from ..utils.hooks import TrainingContext, TrainingHooks
from .metrics import balanced_accuracy

EVAL_BATCH = 16


def _require_both_classes(pairs: Sequence[TilePair]) -> None:
    labels = {p.label for p in pairs}
    if labels != {0, 1}:
        missing = "positive" if 1 not in labels else "negative"
        raise ClassBalanceError(f"training set has no {missing} pairs")


def _draw(items: Sequence[TilePair], count: int, rng: np.random.Generator) -> List[TilePair]:
    """Every item once in shuffled order, then extra draws with replacement up to count"""
    index = rng.permutation(len(items))
    if count > len(items):
        index = np.concatenate([index, rng.integers(0, len(items), size=count - len(items))])
    return [items[i] for i in index[:count]]


def epoch_samples(
    pairs: Sequence[TilePair],
    rng: np.random.Generator,
    augment: bool,
) -> List[Tuple[TilePair, DihedralTransform]]:
    """One epoch of (pair, transform) samples with balanced classes.

    A site holding both classes contributes equal positive and negative
    counts, its minority class oversampled up to the majority. Single-class
    sites contribute every pair once, and the smaller class among them is
    oversampled until the pooled counts match.
    """
    by_site: Dict[str, Tuple[List[TilePair], List[TilePair]]] = {}
    for pair in pairs:
        by_site.setdefault(pair.source_site, ([], []))[pair.label].append(pair)

    chosen: List[TilePair] = []
    loose: Tuple[List[TilePair], List[TilePair]] = ([], [])
    for site in sorted(by_site):
        negatives, positives = by_site[site]
        if positives and negatives:
            count = max(len(positives), len(negatives))
            chosen += _draw(positives, count, rng) + _draw(negatives, count, rng)
        else:
            loose[1 if positives else 0].extend(positives or negatives)

    chosen += loose[0] + loose[1]
    gap = len(loose[0]) - len(loose[1])
    if gap:
        short = 1 if gap > 0 else 0
        source = loose[short] or [p for p in pairs if p.label == short]
        chosen += _draw(source, abs(gap), rng)

    order = rng.permutation(len(chosen))
    transforms = rng.integers(0, 8, size=len(chosen)) if augment else np.zeros(len(chosen), dtype=int)
    return [(chosen[i], DihedralTransform(int(t))) for i, t in zip(order, transforms)]


def stack_batch(samples: Sequence[Tuple[TilePair, DihedralTransform]]) -> Tuple[np.ndarray, np.ndarray]:
    inputs = np.stack([dihedral_augment(pair, t).to_input() for pair, t in samples])
    labels = np.array([pair.label for pair, _ in samples], dtype=np.float64)
    return inputs, labels


def evaluate(net: Network, pairs: Sequence[TilePair], threshold: float = 0.5, batch_size: int = EVAL_BATCH) -> ConfusionCounts:
    """Tally predictions with the threshold rule; weights are not touched"""
    counts = ConfusionCounts()
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start:start + batch_size]
        probabilities = net.forward(np.stack([p.to_input() for p in chunk])).data
        for pair, probability in zip(chunk, probabilities):
            counts.add(int(probability >= threshold), pair.label)
    return counts


def train(
    net: Network,
    train_pairs: Sequence[TilePair],
    eval_pairs: Sequence[TilePair],
    cfg: TrainConfig,
    hooks: Optional[TrainingHooks] = None,
    fold: Optional[int] = None,
    context: Optional[TrainingContext] = None,
) -> Tuple[Network, List[MetricsRecord]]:
    """Train in place for cfg.epochs epochs and return one record per epoch.

    The training pairs must hold both classes. Evaluation pairs may be
    empty or single-class; their balanced accuracy is recorded only when
    both classes are present.
    """
    _require_both_classes(train_pairs)
    adam = AdamState.for_parameters(net.parameters, **cfg.adam_hyperparameters())
    state = TrainingState(fold=fold)
    context = context or TrainingContext(run_id="train", fold=fold, epochs=cfg.epochs)
    stream = ("fold", fold) if fold is not None else ("train",)

    for epoch in range(1, cfg.epochs + 1):
        state.begin_epoch(epoch)
        rng = derive_rng(cfg.master_seed, *stream, "epoch", epoch)
        samples = epoch_samples(train_pairs, rng, cfg.augment)
        train_counts = ConfusionCounts()
        loss_total = 0.0

        for batch, start in enumerate(range(0, len(samples), cfg.batch_size), start=1):
            state.batch = batch
            inputs, labels = stack_batch(samples[start:start + cfg.batch_size])
            with ComputationTape() as tape:
                probabilities = net.forward(inputs)
                loss = bce_loss(probabilities, labels)
            if not np.isfinite(loss.value):
                raise NumericalAbortError(epoch, batch, fold)
            backward(loss, tape, net.parameters)
            adam_step(net.parameters, None, adam)
            if not net.all_finite():
                raise NumericalAbortError(epoch, batch, fold)

            loss_total += loss.value * len(labels)
            for probability, label in zip(probabilities.data, labels):
                train_counts.add(int(probability >= cfg.threshold), int(label))

        eval_score = None
        if {p.label for p in eval_pairs} == {0, 1}:
            eval_score = balanced_accuracy(evaluate(net, eval_pairs, cfg.threshold))
        record = MetricsRecord(
            epoch=epoch,
            train_loss=loss_total / len(samples),
            train_balanced_accuracy=balanced_accuracy(train_counts),
            eval_balanced_accuracy=eval_score,
        )
        state.add_record(record)
        if hooks:
            hooks.on_epoch_end(context, record)

    return net, state.records
