"""Training loop: Adam, per-epoch passes over the subsampled set, early
stopping on the epoch-mean total loss."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..config import TrainConfig
from ..losses import LossFlags, total_loss
from ..net.checkpoint import save_checkpoint
from ..net.model import CorrelationNet
from ..types import HeatmapConfig, SamicError
from .episodes import build_episode, episode_tensors, sample_episode

log = logging.getLogger(__name__)


class DivergenceError(SamicError, RuntimeError):
    """Training produced a non-finite loss."""


@dataclass
class TrainResult:
    best_loss: float
    best_epoch: int
    epochs_run: int
    checkpoint_path: Path | None
    log_path: Path | None
    history: list[float] = field(default_factory=list)


def apply_determinism(seed: int) -> None:
    torch.manual_seed(seed)
    np.random.seed(seed % 2**32)
    torch.use_deterministic_algorithms(True)
    torch.set_num_threads(1)


def train(model: CorrelationNet, grouped_items: dict[str, list],
          config: TrainConfig = TrainConfig(),
          heatmap_config: HeatmapConfig = HeatmapConfig(),
          flags: LossFlags = LossFlags(),
          out_dir: str | Path | None = None) -> TrainResult:
    """Minimize the summed saliency losses over sampled episodes.

    One epoch is one shuffled pass where every subsampled item serves as the
    target of exactly one episode (context drawn from the same class).
    Emits a JSON-lines log (per-step breakdowns plus epoch summaries) and
    the best checkpoint when `out_dir` is given.
    """
    if config.deterministic:
        apply_determinism(config.seed)
    rng = np.random.default_rng(config.seed)
    input_size = model.config.input_size
    optimizer = torch.optim.Adam(model.trainable_parameters(), lr=config.lr,
                                 betas=(0.9, 0.999), eps=1e-8)

    out_dir = Path(out_dir) if out_dir else None
    log_fh = None
    ckpt_path = log_path = None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        log_path = out_dir / "training_log.jsonl"
        ckpt_path = out_dir / "model.samic-ckpt"
        log_fh = open(log_path, "w")

    eligible = {name: items for name, items in grouped_items.items()
                if len(items) >= 2}
    for name in sorted(set(grouped_items) - set(eligible)):
        log.warning("class %s has fewer than two items; skipped", name)
    flat_items = [it for name in sorted(eligible) for it in eligible[name]]
    if not flat_items:
        raise ValueError("no class has two or more training items")

    best_loss = float("inf")
    best_epoch = -1
    best_state = None
    history = []
    step = 0
    epoch = 0
    try:
        for epoch in range(1, config.max_epochs + 1):
            order = rng.permutation(len(flat_items))
            epoch_losses = []
            for start in range(0, len(order), config.batch_size):
                batch_idx = order[start:start + config.batch_size]
                optimizer.zero_grad()
                batch_total = 0.0
                agg = {"kld": 0.0, "cc": 0.0, "nss": 0.0, "total": 0.0}
                for i in batch_idx:
                    target = flat_items[i]
                    peers = [x for x in eligible[target.class_id] if x is not target]
                    context = peers[int(rng.integers(len(peers)))]
                    ep = build_episode(context, target, input_size, heatmap_config)
                    ci, chm, ti, gt = episode_tensors(ep, input_size, heatmap_config)
                    pred = model(ci, chm, ti)[0]
                    loss, breakdown = total_loss(gt[0], pred, flags)
                    (loss / len(batch_idx)).backward()
                    for k in agg:
                        agg[k] += getattr(breakdown, k) / len(batch_idx)
                    batch_total += breakdown.total / len(batch_idx)
                if not np.isfinite(batch_total):
                    _diagnostic_snapshot(model, out_dir, epoch, step, batch_total)
                    raise DivergenceError(
                        f"non-finite loss {batch_total} at epoch {epoch} step {step}")
                optimizer.step()
                step += 1
                epoch_losses.append(batch_total)
                if log_fh:
                    record = dict(step=step, epoch=epoch, **agg)
                    log_fh.write(json.dumps(record) + "\n")

            epoch_mean = float(np.mean(epoch_losses))
            history.append(epoch_mean)
            if log_fh:
                log_fh.write(json.dumps(
                    {"epoch_summary": epoch, "mean_total": epoch_mean}) + "\n")
                log_fh.flush()
            if epoch_mean < best_loss - config.min_improvement:
                best_loss = epoch_mean
                best_epoch = epoch
                best_state = {k: v.detach().clone()
                              for k, v in model.state_dict().items()}
            elif epoch - best_epoch >= config.patience:
                log.info("early stop at epoch %d (best %d)", epoch, best_epoch)
                break
    finally:
        if log_fh:
            log_fh.close()

    if best_state is not None:
        model.load_state_dict(best_state)
    if ckpt_path:
        save_checkpoint(model, ckpt_path)
    return TrainResult(best_loss=best_loss, best_epoch=best_epoch,
                       epochs_run=epoch, checkpoint_path=ckpt_path,
                       log_path=log_path, history=history)


def _diagnostic_snapshot(model, out_dir, epoch, step, loss_value):
    if not out_dir:
        return
    snap = Path(out_dir) / "divergence-snapshot"
    snap.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, snap / "model.samic-ckpt")
    (snap / "diagnostic.json").write_text(json.dumps(
        {"epoch": epoch, "step": step, "loss": str(loss_value)}))
