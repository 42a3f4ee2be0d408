"""Run configuration: a strict JSON document merged with CLI flags.

Sections: corpus, model, decode, paths. Unknown sections or keys are
rejected; defaults are the published hyperparameters (hidden 128, batch
32, dropout 0.2, clip 5, lr 0.001, beam 8, alpha 0.2).
"""

from __future__ import annotations

import json
from pathlib import Path


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, dict] = {
    "corpus": {
        "test_fraction": 0.2,
        "dev_fraction_of_rest": 0.1,
        "seed": 0,
        "min_count": 1,
    },
    "model": {
        "hidden_size": 128,
        "layers": 2,
        "batch_size": 32,
        "dropout": 0.2,
        "grad_clip": 5.0,
        "lr": 0.001,
        "max_epochs": 100,
        "patience": 5,
        "seed": 0,
    },
    "decode": {
        "beam": 8,
        "alpha": 0.2,
        "max_len": None,
        "lexicon_mode": "context_backoff_global",
        "renormalize": "softmax",
        "repetition_fix": True,
        "repetition_trigger": "output",
    },
    "paths": {
        "lexicon": None,
        "phrase_table": None,
        "checkpoint": None,
        "output": None,
    },
}


def load_config_file(path) -> dict[str, dict]:
    """Validate a JSON config file and return only what it sets."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("%s: invalid JSON (%s)" % (path, exc)) from exc
    if not isinstance(doc, dict):
        raise ConfigError("%s: top level must be a JSON object" % path)
    unknown_sections = set(doc) - set(DEFAULTS)
    if unknown_sections:
        raise ConfigError(
            "%s: unknown config sections: %s" % (path, sorted(unknown_sections))
        )
    for section, values in doc.items():
        if not isinstance(values, dict):
            raise ConfigError("%s: section %r must be an object" % (path, section))
        unknown = set(values) - set(DEFAULTS[section])
        if unknown:
            raise ConfigError(
                "%s: unknown keys in section %r: %s" % (path, section, sorted(unknown))
            )
    return doc


def load_run_config(path=None) -> dict[str, dict]:
    """Defaults overlaid with a JSON config file, strictly validated."""
    merged = {section: dict(values) for section, values in DEFAULTS.items()}
    if path is None:
        return merged
    for section, values in load_config_file(path).items():
        merged[section].update(values)
    return merged


def resolve(flag_value, config: dict[str, dict], section: str, key: str):
    """Flag wins over config file, which wins over the default."""
    if flag_value is not None:
        return flag_value
    return config[section][key]


def write_effective_config(config: dict, out_dir, command: str) -> Path:
    """Echo the effective configuration for provenance (deterministic)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / ("%s.config.json" % command)
    path.write_text(
        json.dumps(config, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path
