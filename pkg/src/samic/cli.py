"""Command-line entry point for the pipeline.

Every subcommand is a thin shell over the library modules and writes its
artifacts plus a machine-readable run manifest into the --out directory.
Exit codes: 0 success, 2 usage error, 1 runtime failure.
"""

from __future__ import annotations

import hashlib
import json
import platform
import sys
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import NetConfig, TrainConfig, load_configs
from .heatmap import encode_prompts, extract_peaks
from .heatmap_io import load_png, load_raw, save_png
from .types import HeatmapConfig, PointPrompt, PromptSet, SamicError


def _versions() -> dict:
    import torch
    return {
        "samic": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "torch": torch.__version__,
    }


def _write_manifest(out: Path, subcommand: str, inputs: dict, config: dict) -> None:
    canon = json.dumps(config, sort_keys=True, default=str)
    manifest = {
        "subcommand": subcommand,
        "inputs": inputs,
        "config": config,
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "versions": _versions(),
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "run_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str))


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(h), int(w)
    except ValueError:
        raise click.BadParameter(f"expected WxH, got '{text}'")


def _parse_point(text: str) -> PointPrompt:
    try:
        x, y = text.split(",")
        return PointPrompt(float(x), float(y))
    except ValueError:
        raise click.BadParameter(f"expected x,y, got '{text}'")


def _load_heatmap(path: Path):
    if path.suffix == ".png":
        return load_png(path)
    return load_raw(path)


def _load_prompt_file(path: Path) -> PromptSet:
    data = json.loads(Path(path).read_text())
    groups = [[PointPrompt(float(x), float(y)) for x, y in inst]
              for inst in data["instances"]]
    return PromptSet(groups, image_id=data.get("image"))


def _load_image(path: Path) -> np.ndarray:
    from PIL import Image
    return np.asarray(Image.open(path).convert("RGB"))


def _dataset_from_options(data, synthetic, image_size, seed):
    if data is not None:
        from .evaluation.manifest import load_split_manifest
        index = load_split_manifest(data)
        train = index.by_split("train")
        test = index.by_split("test") or train
        return train, test
    from .synthetic import generate_dataset, items_by_class
    items = generate_dataset(n_images=synthetic, image_size=image_size, seed=seed)
    return items_by_class(items, "train"), items_by_class(items, "test")


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Few-shot prompt-engineering pipeline: heatmap codec, training,
    prediction, evaluation, and the annotation service."""


@main.command()
@click.option("--points", "points", multiple=True, required=True,
              help="Prompt coordinate as x,y; repeatable.")
@click.option("--size", default="224x224", help="Output size WxH.")
@click.option("--sigma", default=0.02, show_default=True)
@click.option("--out", "out", type=click.Path(path_type=Path), required=True)
def encode(points, size, sigma, out):
    """Render point prompts to a heatmap PNG."""
    h, w = _parse_size(size)
    cfg = HeatmapConfig(sigma=sigma)
    parsed = [_parse_point(p) for p in points]
    hm = encode_prompts(parsed, h, w, cfg)
    out.mkdir(parents=True, exist_ok=True)
    save_png(hm, out / "heatmap.png")
    _write_manifest(out, "encode",
                    {"points": [[p.x, p.y] for p in parsed], "size": [h, w]},
                    {"sigma": sigma})
    click.echo(str(out / "heatmap.png"))


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Heatmap PNG or raw grid.")
@click.option("--tau", default=0.5, show_default=True)
@click.option("--connectivity", default=8, type=click.Choice(["4", "8"]))
@click.option("--out", "out", type=click.Path(path_type=Path), default=None)
def peaks(in_path, tau, connectivity, out):
    """Extract peak points from a stored heatmap; prints JSON."""
    cfg = HeatmapConfig(tau=tau, connectivity=int(connectivity))
    result = extract_peaks(_load_heatmap(in_path), cfg)
    payload = {"points": [[p.x, p.y] for p in result.points],
               "fallback": result.fallback}
    click.echo(json.dumps(payload, indent=2))
    if out:
        out.mkdir(parents=True, exist_ok=True)
        (out / "peaks.json").write_text(json.dumps(payload, indent=2))
        _write_manifest(out, "peaks", {"in": str(in_path)},
                        {"tau": tau, "connectivity": int(connectivity)})


def _config_overrides(seed, deterministic, epochs):
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if deterministic is not None:
        overrides["deterministic"] = deterministic
    if epochs is not None:
        overrides["max_epochs"] = epochs
    return overrides


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="TOML or JSON file with [net]/[train] sections.")
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=None,
              help="Dataset manifest directory; omit to use synthetic data.")
@click.option("--synthetic", default=200, show_default=True,
              help="Synthetic image count when --data is absent.")
@click.option("--image-size", default=128, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--deterministic/--no-deterministic", default=None)
@click.option("--losses", default="kld,cc,nss", show_default=True,
              help="Comma-separated subset of kld,cc,nss.")
@click.option("--out", "out", type=click.Path(path_type=Path), required=True)
def train(config_path, data, synthetic, image_size, seed, epochs,
          deterministic, losses, out):
    """Train the correlation network and save the best checkpoint."""
    from .losses import LossFlags
    from .net.model import CorrelationNet
    from .training import subsample_training_set, train as run_train

    net_cfg, train_cfg = load_configs(
        config_path, **_config_overrides(seed, deterministic, epochs))
    enabled = {k.strip() for k in losses.split(",") if k.strip()}
    flags = LossFlags(kld="kld" in enabled, cc="cc" in enabled,
                      nss="nss" in enabled)
    train_items, _ = _dataset_from_options(data, synthetic, image_size,
                                           train_cfg.seed)
    subset = subsample_training_set(train_items, train_cfg.subsample_fraction,
                                    train_cfg.seed)
    model = CorrelationNet(net_cfg)
    result = run_train(model, subset, train_cfg, flags=flags, out_dir=out)
    _write_manifest(out, "train",
                    {"data": str(data) if data else f"synthetic:{synthetic}",
                     "losses": sorted(enabled)},
                    {"net": asdict(net_cfg), "train": asdict(train_cfg)})
    click.echo(json.dumps({"best_loss": result.best_loss,
                           "best_epoch": result.best_epoch,
                           "epochs_run": result.epochs_run,
                           "checkpoint": str(result.checkpoint_path)}, indent=2))


@main.command()
@click.option("--checkpoint", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--context", type=click.Path(exists=True, path_type=Path),
              required=True, help="Context image file.")
@click.option("--prompts", type=click.Path(exists=True, path_type=Path),
              required=True, help="Context prompt JSON (instances schema).")
@click.option("--target", type=click.Path(exists=True, path_type=Path),
              required=True, help="Target image file.")
@click.option("--out", "out", type=click.Path(path_type=Path), required=True)
def predict(checkpoint, context, prompts, target, out):
    """Predict a target heatmap from one annotated context image."""
    from .net.checkpoint import load_checkpoint
    from .net.model import predict_heatmap

    model = load_checkpoint(checkpoint)
    hm = predict_heatmap(model, _load_image(context), _load_prompt_file(prompts),
                         _load_image(target))
    result = extract_peaks(hm)
    out.mkdir(parents=True, exist_ok=True)
    save_png(hm, out / "heatmap.png")
    payload = {"points": [[p.x, p.y] for p in result.points],
               "fallback": result.fallback}
    (out / "peaks.json").write_text(json.dumps(payload, indent=2))
    _write_manifest(out, "predict",
                    {"checkpoint": str(checkpoint), "context": str(context),
                     "prompts": str(prompts), "target": str(target)}, {})
    click.echo(json.dumps(payload, indent=2))


@main.command(name="eval")
@click.option("--checkpoint", type=click.Path(exists=True, path_type=Path),
              default=None, help="Trained checkpoint; omit for the oracle path.")
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--synthetic", default=200, show_default=True)
@click.option("--image-size", default=128, show_default=True)
@click.option("--shots", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--backend", "backend_name", default="mock", show_default=True)
@click.option("--out", "out", type=click.Path(path_type=Path), required=True)
def eval_cmd(checkpoint, data, synthetic, image_size, shots, seed,
             backend_name, out):
    """K-shot evaluation: predict heatmaps, segment from peaks, report mIoU."""
    from .segmenter.registry import get_backend
    from .training import evaluate_kshot, model_predictor, oracle_predictor

    train_items, test_items = _dataset_from_options(data, synthetic,
                                                    image_size, seed)
    if checkpoint:
        from .net.checkpoint import load_checkpoint
        model = load_checkpoint(checkpoint)
        predictor = model_predictor(model)
        input_size = model.config.input_size
    else:
        input_size = (image_size, image_size)
        predictor = oracle_predictor(input_size)
    backend = get_backend(backend_name)
    report = evaluate_kshot(predictor, train_items, test_items, backend,
                            shots=shots, input_size=input_size, seed=seed)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"mean_iou": report.mean_iou,
               "per_class_iou": report.per_class_iou,
               "fallback_count": report.fallback_count,
               "items_evaluated": report.items_evaluated}
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    _write_manifest(out, "eval",
                    {"checkpoint": str(checkpoint) if checkpoint else "oracle",
                     "data": str(data) if data else f"synthetic:{synthetic}"},
                    {"shots": shots, "seed": seed, "backend": backend_name})
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@main.command()
@click.option("--root", type=click.Path(path_type=Path), default=Path("annotations"),
              show_default=True, help="Annotation storage directory.")
@click.option("--backend", "backend_name", default="mock", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8008, show_default=True)
def serve(root, backend_name, host, port):
    """Run the annotation service until interrupted."""
    import uvicorn

    from .annotation import AnnotationService, create_app
    from .segmenter.registry import get_backend

    service = AnnotationService(get_backend(backend_name), root)
    app = create_app(service)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--root", type=click.Path(exists=True, path_type=Path), required=True,
              help="Annotation storage directory.")
@click.option("--session", "session_id", required=True)
@click.option("--backend", "backend_name", default="mock", show_default=True)
@click.option("--out", "out", type=click.Path(path_type=Path), required=True)
def export(root, session_id, backend_name, out):
    """Export a committed annotation session as a training dataset."""
    from .annotation import AnnotationService
    from .segmenter.registry import get_backend

    service = AnnotationService(get_backend(backend_name), root)
    path = service.export_dataset(session_id, out)
    _write_manifest(out, "export", {"root": str(root), "session": session_id}, {})
    click.echo(str(path))


def run(argv: list[str] | None = None) -> int:
    """Programmatic entry returning the exit status instead of raising."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (SamicError, OSError, RuntimeError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(run())
