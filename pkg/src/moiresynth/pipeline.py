"""Batch orchestration: pattern filtering, dataset synthesis and evaluation.

Every work item owns an RNG stream derived from ``(seed, item index)``, and
results are written in item order. Worker count therefore never changes
what is produced.
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import item_rng
from .blending import blend_mib, multiply_only_params, sample_blend_params
from .config import save_config
from .corpus import colorfulness, list_images, random_crop_rect, select_patch, sharpness
from .imaging import crop, load_image, resize, save_image
from .metrics import composite_loss, hellinger_color_distance, psnr, rgbuv_histogram, ssim, tv_loss
from .tone import apply_tone_matrix

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
PATCH_SIDECAR_NAME = "patches.jsonl"


class CorpusError(RuntimeError):
    """An input corpus is missing or empty."""


class PatternRejectedError(RuntimeError):
    """No drawn pattern passed selection for an item."""


@dataclass
class BatchResult:
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (index, message)

    @property
    def partial(self):
        return bool(self.failures)


def json_value(v):
    """Manifest encoding: non-finite floats become strings ("inf", "-inf", "nan")."""
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [json_value(x) for x in v]
    if isinstance(v, np.generic):
        return json_value(v.item())
    return v


def dump_jsonl(records, path):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(json_value(rec), sort_keys=True, allow_nan=False))
            fh.write("\n")


def _run_items(func, n_items, workers, initializer, initargs):
    """Apply ``func(index)`` to every item, returning ``(index, ok, payload)`` in order."""
    if workers <= 1 or n_items <= 1:
        initializer(*initargs)
        return [func(i) for i in range(n_items)]
    chunk = max(1, n_items // (workers * 4))
    with ProcessPoolExecutor(
        max_workers=workers, initializer=initializer, initargs=initargs
    ) as pool:
        return list(pool.map(func, range(n_items), chunksize=chunk))


# -- pattern filtering -------------------------------------------------------

_FILTER_CTX = {}


def _init_filter(paths, selection, seed, output_dir):
    _FILTER_CTX.update(paths=paths, selection=selection, seed=seed, output_dir=Path(output_dir))


def _filter_one(index):
    ctx = _FILTER_CTX
    path = ctx["paths"][index]
    try:
        frame = load_image(path)
        patch = select_patch(frame, ctx["selection"], item_rng(ctx["seed"], index), source_path=path)
        if patch is None:
            return index, True, None
        name = f"{index:06d}_{Path(path).stem}.png"
        save_image(ctx["output_dir"] / name, patch.image)
        rec = {"index": index, "seed_stream": [ctx["seed"], index], "output_path": name}
        rec.update(patch.provenance())
        return index, True, rec
    except Exception as exc:  # noqa: BLE001 - per-item failures are collected
        return index, False, f"{path}: {exc}"


def filter_patterns(input_dir, output_dir, selection, seed, workers=1):
    """Run patch selection on every frame in ``input_dir``.

    Accepted patches are written as PNG next to a JSON-lines sidecar
    (``patches.jsonl``) holding their scores and crop provenance.
    """
    paths = [str(p) for p in list_images(input_dir)]
    if not paths:
        raise CorpusError(f"no images in {input_dir}")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = BatchResult()
    rejected = 0
    for index, ok, payload in _run_items(
        _filter_one, len(paths), workers, _init_filter, (paths, selection, seed, str(out))
    ):
        if not ok:
            logger.error("frame %d failed: %s", index, payload)
            result.failures.append((index, payload))
        elif payload is None:
            rejected += 1
        else:
            result.records.append(payload)
    logger.info(
        "accepted %d, rejected %d, failed %d of %d frames",
        len(result.records), rejected, len(result.failures), len(paths),
    )
    dump_jsonl(result.records, out / PATCH_SIDECAR_NAME)
    return result


# -- synthesis ---------------------------------------------------------------

_SYNTH_CTX = {}


def load_tone_matrix(path):
    """Read an externally produced tone matrix from ``.npy`` or an image file."""
    if str(path).endswith(".npy"):
        return np.load(path).astype(np.float64)
    return load_image(path)


def reference_histogram(reference_dir, hist_cfg):
    """Average histogram of a reference pool; still sums to one."""
    paths = list_images(reference_dir)
    if not paths:
        raise CorpusError(f"no reference images in {reference_dir}")
    return np.mean([rgbuv_histogram(load_image(p), hist_cfg) for p in paths], axis=0)


def _init_synth(cfg, clean_paths, pattern_paths, ref_hist, tone_matrix):
    _SYNTH_CTX.update(
        cfg=cfg,
        clean_paths=clean_paths,
        pattern_paths=pattern_paths,
        ref_hist=ref_hist,
        tone_matrix=tone_matrix,
    )


def _clean_crop(clean, cw, ch, rng):
    h, w = clean.shape[:2]
    if w < cw or h < ch:
        return resize(clean, cw, ch), "resized-full-frame"
    rect = random_crop_rect(rng, w, h, cw, ch)
    return crop(clean, rect), rect.as_dict()


def _draw_pattern(cfg, pattern_paths, rng):
    for draw in range(cfg.max_pattern_draws):
        p_index = int(rng.integers(len(pattern_paths)))
        path = pattern_paths[p_index]
        frame = load_image(path)
        if not cfg.pattern_selection:
            return path, frame, None
        patch = select_patch(frame, cfg.selection, rng, source_path=path)
        if patch is not None:
            return path, patch.image, patch
        logger.debug("pattern %s rejected (draw %d)", path, draw)
    raise PatternRejectedError(
        f"no pattern passed selection in {cfg.max_pattern_draws} draws"
    )


def synthesize_item(index):
    """Produce output image ``index``; returns its manifest record."""
    ctx = _SYNTH_CTX
    cfg = ctx["cfg"]
    rng = item_rng(cfg.seed, index)
    clean_paths = ctx["clean_paths"]
    clean_path = clean_paths[index % len(clean_paths)]
    cw, ch = cfg.clean_crop

    clean, clean_rect = _clean_crop(load_image(clean_path), cw, ch, rng)
    pattern_path, pattern_img, patch = _draw_pattern(cfg, ctx["pattern_paths"], rng)
    ph, pw = pattern_img.shape[:2]
    if cfg.pattern_resize == "random-crop" and pw >= cw and ph >= ch:
        pattern_img = crop(pattern_img, random_crop_rect(rng, pw, ph, cw, ch))
    else:
        pattern_img = resize(pattern_img, cw, ch)

    params = multiply_only_params() if cfg.multiply_only else sample_blend_params(rng, cfg.blend)
    out = blend_mib(pattern_img, clean, params)
    if ctx["tone_matrix"] is not None:
        tm = ctx["tone_matrix"]
        if tm.shape[:2] != out.shape[:2]:
            tm = resize(tm, cw, ch)
        out = apply_tone_matrix(out, tm)

    rel_path = f"images/{index:06d}.png"
    save_image(Path(cfg.output_dir) / rel_path, out)

    if patch is not None:
        pattern_info = patch.provenance()
    else:
        pattern_info = {
            "source_path": pattern_path,
            "scale_tier": None,
            "crop": None,
            "attempt": None,
            "sharpness": sharpness(pattern_img),
            "colorfulness": colorfulness(pattern_img),
        }

    metrics = {}
    if "brightness" in cfg.metrics:
        metrics["brightness"] = float(out.mean())
    if "tv" in cfg.metrics:
        metrics["tv"] = tv_loss(out)
    if "psnr" in cfg.metrics:
        metrics["psnr"] = psnr(out, clean)
    if "ssim" in cfg.metrics:
        metrics["ssim"] = ssim(out, clean)
    if "color_distance" in cfg.metrics:
        d = hellinger_color_distance(rgbuv_histogram(out, cfg.histogram), ctx["ref_hist"])
        metrics["color_distance"] = d
        metrics["loss"] = composite_loss(None, d, tv_loss(out), cfg.loss_weights)
        metrics["perceptual_supplied"] = False

    return {
        "index": index,
        "seed_stream": [cfg.seed, index],
        "clean_path": str(clean_path),
        "clean_crop": clean_rect,
        "pattern_path": str(pattern_path),
        "pattern": pattern_info,
        "output_path": rel_path,
        "multiply_only": cfg.multiply_only,
        "tone_matrix": cfg.tone_matrix,
        "blend": params.as_dict(),
        "metrics": metrics,
    }


def _synth_one(index):
    try:
        return index, True, synthesize_item(index)
    except Exception as exc:  # noqa: BLE001 - per-item failures are collected
        return index, False, f"{type(exc).__name__}: {exc}"


def synthesize(cfg):
    """Generate a synthetic moire dataset into ``cfg.output_dir``.

    Writes ``images/NNNNNN.png``, ``manifest.jsonl`` (one record per
    successful item, ordered by index) and ``config.json``. Record output
    paths are relative to the output directory.

    Raises
    ------
    CorpusError
        If the clean or pattern corpus is missing or empty.
    """
    for name in ("clean_dir", "pattern_dir"):
        if getattr(cfg, name) is None:
            raise CorpusError(f"{name} is not configured")
    clean_paths = [str(p) for p in list_images(cfg.clean_dir)]
    pattern_paths = [str(p) for p in list_images(cfg.pattern_dir)]
    if not clean_paths:
        raise CorpusError(f"no clean images in {cfg.clean_dir}")
    if not pattern_paths:
        raise CorpusError(f"no pattern images in {cfg.pattern_dir}")

    ref_hist = None
    if "color_distance" in cfg.metrics:
        ref_hist = reference_histogram(cfg.reference_dir, cfg.histogram)
    tone_matrix = load_tone_matrix(cfg.tone_matrix) if cfg.tone_matrix else None

    out = Path(cfg.output_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    save_config(cfg, out / "config.json")

    n_items = cfg.num_samples or len(clean_paths)
    result = BatchResult()
    results = _run_items(
        _synth_one,
        n_items,
        cfg.workers,
        _init_synth,
        (cfg, clean_paths, pattern_paths, ref_hist, tone_matrix),
    )
    for index, ok, payload in results:
        if ok:
            result.records.append(payload)
        else:
            logger.error("item %d failed: %s", index, payload)
            result.failures.append((index, payload))
    dump_jsonl(result.records, out / MANIFEST_NAME)
    logger.info("synthesized %d of %d items", len(result.records), n_items)
    return result


# -- evaluation --------------------------------------------------------------


def evaluate(pred_dir, ref_dir):
    """PSNR and SSIM for every prediction with a same-named reference.

    Returns
    -------
    rows : list of dict
        One per matched pair. Averages come from :func:`evaluation_means`.
    missing : list of str
        Prediction file names with no reference, or that failed to decode.
    """
    refs = {p.name: p for p in list_images(ref_dir)}
    rows, missing = [], []
    for pred in list_images(pred_dir):
        ref = refs.get(pred.name)
        if ref is None:
            missing.append(pred.name)
            continue
        try:
            a, b = load_image(pred), load_image(ref)
            rows.append({"name": pred.name, "psnr": psnr(a, b), "ssim": ssim(a, b)})
        except Exception as exc:  # noqa: BLE001
            logger.error("cannot evaluate %s: %s", pred.name, exc)
            missing.append(pred.name)
    return rows, missing


def evaluation_means(rows):
    if not rows:
        return {"psnr": math.nan, "ssim": math.nan}
    return {
        "psnr": float(np.mean([r["psnr"] for r in rows])),
        "ssim": float(np.mean([r["ssim"] for r in rows])),
    }
