"""INI-style configuration for the command-line runner.

Example::

    [experiment]
    seed = 0
    test_fraction = 0.2
    noise_offset = 0.01
    noise_all = false

    [sampler]
    count = 200
    open_prob = 0.05
    short_prob = 0.05
    zero_volt_prob = 0.05
    r = 0.5:50:0.5
    e = 1:20:0.5

    [sampler.2a]          ; overrides [sampler] for class 2a only
    xl = 0.5:40:0.5

    [train]
    learning_rate = 0.25
    cycles = 800
    shuffle_each_cycle = true

    [sweep]
    cap = 100000

Keys left out fall back to the per-class defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import replace

from .data import ElementRange, default_sampler
from .experiments import ExperimentConfig
from .mlp import TrainConfig

__all__ = ["load_config", "experiment_config", "sweep_cap"]

_RANGE_KEYS = ("r", "xl", "xc", "e")


def load_config(path=None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        with open(path) as fh:
            parser.read_file(fh)
        known = {"experiment", "sampler", "train", "sweep"}
        for section in parser.sections():
            if section.split(".", 1)[0] not in known:
                raise ValueError(f"{path}: unknown section [{section}]")
    return parser


def _sampler_options(parser, class_id):
    merged = {}
    for section in ("sampler", f"sampler.{class_id}"):
        if parser.has_section(section):
            merged.update(parser.items(section, raw=True))
    return merged


def experiment_config(class_id: str, seed: int | None = None, parser=None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from defaults plus config overrides."""
    parser = parser or load_config()
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    if seed is None:
        seed = int(exp.get("seed", 0))

    sampler = default_sampler(class_id, seed=seed)
    opts = _sampler_options(parser, class_id)
    ranges = dict(sampler.ranges)
    kw = {}
    for key, value in opts.items():
        if key in _RANGE_KEYS:
            ranges[key] = ElementRange.parse(value)
        elif key == "count":
            kw["count"] = int(value)
        elif key in ("open_prob", "short_prob", "zero_volt_prob"):
            kw[key] = float(value)
        else:
            raise ValueError(f"unknown sampler key {key!r}")
    sampler = replace(sampler, ranges=ranges, **kw)

    train = TrainConfig(seed=seed)
    if parser.has_section("train"):
        sec = parser["train"]
        cycles = sec.get("cycles", "").strip()
        train = TrainConfig(
            learning_rate=sec.getfloat("learning_rate", train.learning_rate),
            cycles=int(cycles) if cycles else None,
            seed=seed,
            shuffle_each_cycle=sec.getboolean("shuffle_each_cycle", True),
        )

    getf = (lambda k, d: float(exp.get(k, d)))
    noise_all = str(exp.get("noise_all", "false")).strip().lower() in ("1", "true", "yes", "on")
    return ExperimentConfig(
        sampler=sampler,
        train=train,
        test_fraction=getf("test_fraction", 0.2),
        seed=seed,
        noise_offset=getf("noise_offset", 0.0),
        noise_all=noise_all,
    )


def sweep_cap(parser=None, default: int = 100_000) -> int:
    parser = parser or load_config()
    if parser.has_section("sweep"):
        return parser["sweep"].getint("cap", default)
    return default
