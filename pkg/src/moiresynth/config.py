"""Pipeline configuration: JSON file + environment overrides -> PipelineConfig.

Every key can be overridden from the environment. Nested keys use a double
underscore, e.g. ``MOIRESYNTH_SEED=7`` or
``MOIRESYNTH_SELECTION__SHARPNESS_THRESHOLD=10``. Values are parsed as JSON
when possible and taken as plain strings otherwise.
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .blending import BlendConfig
from .corpus import SelectionConfig
from .metrics import HistogramConfig, LossWeights

ENV_PREFIX = "MOIRESYNTH_"
METRIC_NAMES = ("brightness", "tv", "psnr", "ssim", "color_distance")
RESIZE_POLICIES = ("resize", "random-crop")
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


_SECTIONS = {
    "selection": SelectionConfig,
    "blend": BlendConfig,
    "histogram": HistogramConfig,
    "loss_weights": LossWeights,
}


@dataclass(frozen=True)
class PipelineConfig:
    pattern_dir: str = None
    clean_dir: str = None
    output_dir: str = "moire_out"
    reference_dir: str = None
    tone_matrix: str = None
    seed: int = 0
    workers: int = 1
    num_samples: int = None
    clean_crop: tuple = (384, 384)
    pattern_resize: str = "resize"
    pattern_selection: bool = True
    max_pattern_draws: int = 5
    multiply_only: bool = False
    metrics: tuple = ("brightness", "tv", "psnr", "ssim")
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    blend: BlendConfig = field(default_factory=BlendConfig)
    histogram: HistogramConfig = field(default_factory=HistogramConfig)
    loss_weights: LossWeights = field(default_factory=LossWeights)

    def to_dict(self):
        d = asdict(self)
        d["clean_crop"] = list(self.clean_crop)
        d["metrics"] = list(self.metrics)
        d["selection"]["tier_split"] = list(self.selection.tier_split)
        d["selection"]["tier_sizes"] = [list(s) for s in self.selection.tier_sizes]
        d["blend"]["omega_m_range"] = list(self.blend.omega_m_range)
        d["histogram"]["u_range"] = list(self.histogram.u_range)
        return d


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _validate_top(d, check_paths):
    errors = []
    seed = d["seed"]
    if not _is_int(seed) or not 0 <= seed <= MAX_SEED:
        errors.append(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    if not _is_int(d["workers"]) or d["workers"] < 1:
        errors.append(f"workers must be a positive integer, got {d['workers']!r}")
    n = d["num_samples"]
    if n is not None and (not _is_int(n) or n < 1):
        errors.append(f"num_samples must be a positive integer or null, got {n!r}")
    crop = d["clean_crop"]
    if len(crop) != 2 or not all(_is_int(v) and v >= 1 for v in crop):
        errors.append(f"clean_crop must be two positive integers, got {crop!r}")
    if d["pattern_resize"] not in RESIZE_POLICIES:
        errors.append(f"pattern_resize must be one of {RESIZE_POLICIES}, got {d['pattern_resize']!r}")
    if not _is_int(d["max_pattern_draws"]) or d["max_pattern_draws"] < 1:
        errors.append(f"max_pattern_draws must be >= 1, got {d['max_pattern_draws']!r}")
    for name in ("pattern_selection", "multiply_only"):
        if not isinstance(d[name], bool):
            errors.append(f"{name} must be a boolean, got {d[name]!r}")
    unknown = [m for m in d["metrics"] if m not in METRIC_NAMES]
    if unknown:
        errors.append(f"unknown metrics {unknown}; choose from {METRIC_NAMES}")
    if "color_distance" in d["metrics"] and d["reference_dir"] is None:
        errors.append("metric color_distance requires reference_dir")
    if check_paths:
        for name in ("pattern_dir", "clean_dir", "reference_dir"):
            if d[name] is not None and not Path(d[name]).is_dir():
                errors.append(f"{name} {d[name]!r} is not a directory")
        if d["tone_matrix"] is not None and not Path(d["tone_matrix"]).is_file():
            errors.append(f"tone_matrix {d['tone_matrix']!r} does not exist")
    return errors


def config_from_dict(raw, check_paths=True):
    """Build a validated config, filling defaults for omitted keys.

    Raises
    ------
    ConfigError
        Listing every unknown key and invalid value found.
    """
    if not isinstance(raw, dict):
        raise ConfigError([f"config must be a JSON object, got {type(raw).__name__}"])
    errors = []
    top_names = {f.name for f in fields(PipelineConfig)}
    for key in raw:
        if key not in top_names:
            errors.append(f"unknown key {key!r}")
    defaults = PipelineConfig().to_dict()
    merged = {k: raw.get(k, defaults[k]) for k in top_names if k not in _SECTIONS}
    for key in ("clean_crop", "metrics"):
        if isinstance(merged[key], list):
            merged[key] = tuple(merged[key])

    sections = {}
    for name, cls in _SECTIONS.items():
        sub = raw.get(name, {})
        if not isinstance(sub, dict):
            errors.append(f"{name} must be an object, got {sub!r}")
            continue
        allowed = {f.name for f in fields(cls)}
        bad = [k for k in sub if k not in allowed]
        errors.extend(f"unknown key {name}.{k!r}" for k in bad)
        try:
            sections[name] = cls(**{k: v for k, v in sub.items() if k in allowed})
        except (TypeError, ValueError) as exc:
            errors.append(f"{name}: {exc}")

    try:
        errors.extend(_validate_top(merged, check_paths))
    except TypeError as exc:
        errors.append(str(exc))
    if errors:
        raise ConfigError(errors)
    return PipelineConfig(**merged, **sections)


def _parse_env_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_env_overrides(raw, environ=None):
    """Return a copy of ``raw`` with ``MOIRESYNTH_*`` variables applied."""
    environ = os.environ if environ is None else environ
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    for var, text in sorted(environ.items()):
        if not var.startswith(ENV_PREFIX):
            continue
        path = var[len(ENV_PREFIX):].lower().split("__")
        value = _parse_env_value(text)
        if len(path) == 1:
            out[path[0]] = value
        elif len(path) == 2:
            section = out.setdefault(path[0], {})
            if not isinstance(section, dict):
                raise ConfigError([f"{var}: {path[0]} is not a section"])
            section[path[1]] = value
        else:
            raise ConfigError([f"{var}: keys nest at most one level"])
    return out


def load_config(path=None, environ=None, check_paths=True):
    """Read a JSON config file (or start from defaults when ``path`` is None)."""
    raw = {}
    if path is not None:
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"{path}: not valid JSON ({exc})"]) from exc
    if isinstance(raw, dict):
        raw = apply_env_overrides(raw, environ)
    return config_from_dict(raw, check_paths=check_paths)


def save_config(cfg, path):
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
