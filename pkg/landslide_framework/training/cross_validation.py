"""Grouped k-fold cross-validation.

Folds are dealt by site, every fold trains a fresh network seeded from the
master seed and the fold index, and the split is checked for leakage and
class coverage before any training starts.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional

from ..config import TrainConfig
from ..data.pairs import TilePair
from ..exceptions import ClassBalanceError
from ..model.network import NetworkConfig, build_network
from ..models import CrossValidationResult, FoldResult, LogLevel
from ..seeding import derive_seed
from ..utils.hooks import TrainingContext, TrainingHooks
from ..utils.training_hooks import worker_training_hooks
from ..utils.validation import check_grouping
from .folds import FoldAssignment, kfold_split
from .metrics import balanced_accuracy
from .trainer import evaluate, train

SitePairs = Dict[str, List[TilePair]]


@dataclass
class FoldPlan:
    fold: int
    train_sites: List[str]
    eval_sites: List[str]
    train_pairs: List[TilePair]
    eval_pairs: List[TilePair]


def site_strata(sites: SitePairs) -> Dict[str, int]:
    """1 for sites contributing any positive pair, else 0"""
    return {site: int(any(p.label == 1 for p in pairs)) for site, pairs in sites.items()}


def plan_folds(sites: SitePairs, assignment: FoldAssignment) -> List[FoldPlan]:
    plans = []
    for fold in range(assignment.k):
        eval_sites = assignment.fold_sites(fold)
        train_sites = assignment.training_sites(fold)
        plan = FoldPlan(
            fold=fold,
            train_sites=train_sites,
            eval_sites=eval_sites,
            train_pairs=[p for s in train_sites for p in sites[s]],
            eval_pairs=[p for s in eval_sites for p in sites[s]],
        )
        for role, pairs, members in (
            ("evaluation", plan.eval_pairs, eval_sites),
            ("training", plan.train_pairs, train_sites),
        ):
            labels = {p.label for p in pairs}
            if labels != {0, 1}:
                raise ClassBalanceError(
                    f"fold {fold} {role} set is single-class (labels {sorted(labels)}, sites {', '.join(members)})"
                )
        check_grouping(plan.train_pairs, plan.eval_pairs)
        plans.append(plan)
    return plans


def fold_network_config(network_config: NetworkConfig, master_seed: int, fold: int) -> NetworkConfig:
    seed = derive_seed(master_seed, "fold", fold, "init") & 0x7FFFFFFF
    return network_config.model_copy(update={"init_seed": seed})


def run_fold(
    plan: FoldPlan,
    cfg: TrainConfig,
    network_config: NetworkConfig,
    hooks: Optional[TrainingHooks] = None,
    run_id: str = "cv",
) -> FoldResult:
    context = TrainingContext(
        run_id=run_id, fold=plan.fold, train_sites=plan.train_sites,
        eval_sites=plan.eval_sites, epochs=cfg.epochs,
    )
    if hooks:
        hooks.on_fold_start(context)
    try:
        net = build_network(fold_network_config(network_config, cfg.master_seed, plan.fold))
        net, records = train(net, plan.train_pairs, plan.eval_pairs, cfg, hooks=hooks, fold=plan.fold, context=context)
        counts = evaluate(net, plan.eval_pairs, cfg.threshold)
        score = balanced_accuracy(counts)
        history = [r.eval_balanced_accuracy for r in records if r.eval_balanced_accuracy is not None]
        result = FoldResult(
            fold=plan.fold,
            train_sites=plan.train_sites,
            eval_sites=plan.eval_sites,
            balanced_accuracy=score,
            best_balanced_accuracy=max([score] + history),
            counts=counts,
            records=records,
        )
    except Exception as e:
        if hooks:
            hooks.on_fold_end(context, None, error=e)
        raise
    if hooks:
        hooks.on_fold_end(context, result)
    return result


def _run_fold_in_worker(plan: FoldPlan, cfg: TrainConfig, network_config: NetworkConfig, run_id: str, level: LogLevel) -> FoldResult:
    return run_fold(plan, cfg, network_config, hooks=worker_training_hooks(run_id, level), run_id=run_id)


def cross_validate(
    sites: SitePairs,
    cfg: TrainConfig,
    network_config: Optional[NetworkConfig] = None,
    hooks: Optional[TrainingHooks] = None,
    jobs: int = 1,
    run_id: str = "cv",
    log_level: LogLevel = LogLevel.INFO,
) -> CrossValidationResult:
    """Train and score one network per fold; results come back in fold order"""
    network_config = network_config or NetworkConfig(tile_size=cfg.tile_size)
    assignment = kfold_split(sorted(sites), cfg.folds, cfg.master_seed, strata=site_strata(sites))
    plans = plan_folds(sites, assignment)

    if jobs <= 1 or len(plans) == 1:
        results = [run_fold(plan, cfg, network_config, hooks, run_id) for plan in plans]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(plans))) as pool:
            futures = [
                pool.submit(_run_fold_in_worker, plan, cfg, network_config, run_id, log_level)
                for plan in plans
            ]
            results = [future.result() for future in futures]
    return CrossValidationResult(folds=results)

