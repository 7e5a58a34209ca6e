"""Experiment configuration: YAML file, defaults, and dotted-key overrides.

A config is a nested mapping validated against the DEFAULTS tree; unknown
keys are rejected with the list of valid ones, so typos fail fast instead of
silently running the default. CLI --set options address keys by dotted path.
"""

from __future__ import annotations

import copy

import yaml

from .corruption import CorruptionSpec
from .kernels import KernelSpec

__all__ = ["ExperimentConfig"]

# the full key tree; values are the defaults echoed into every report
DEFAULTS = {
    "dataset": {
        "kind": "circles",        # circles | blobs | subspaces | csv | idx
        "path": None,             # csv: data file; idx: images file
        "labels_path": None,      # idx only
        "label_column": -1,       # csv only
        "n_per_class": 100,       # synthetic kinds
        "noise": 0.05,            # circles
        "radii": [1.0, 5.0],      # circles
        "centers": None,          # blobs; list of center coordinates
        "spread": 1.0,            # blobs
        "num_subspaces": 3,       # subspaces
        "subspace_dim": 1,        # subspaces
        "ambient_dim": 6,         # subspaces
        "data_seed": 0,           # synthetic generation seed
        "per_class": None,        # subsample_per_class cap, None = keep all
        "subsample_seed": 0,
        "first_k": None,          # keep only the first k classes
    },
    "kernel": {
        "kind": "gaussian",
        "bandwidth": "auto",      # positive number, or auto = mean pairwise distance
        "diag_guard": 1e-8,
    },
    "lambda": 0.1,
    "eta": 5,
    "threshold": {
        "mode": "magnitude",      # magnitude | signed
    },
    "num_clusters": None,         # None = the dataset's class count
    "embedding": {
        "skip_zero_eigs": False,  # True reproduces the strict "smallest nonzero" reading
    },
    "kmeans": {
        "restarts": 500,
        "max_iters": 100,
        "tol": 1e-9,
    },
    "corruption": {
        "kind": "none",           # none | gaussian_snr | salt_pepper
        "snr_db": None,
        "ratio": None,
        "value_range": None,      # (low, high) clip bounds; None = the data's own range
        "seed": None,             # None = derive a fresh stream per run
    },
    "metrics": {
        "nmi_norm": "sqrt",       # sqrt | max | min
    },
    "runs": 10,
    "seed": 0,                    # master seed; everything else derives from it
    "output": "out",
    "sweep": None,                # grids over lambda / eta / snr_db / ratio / kernel_kind
    "figures": True,
    "dump_matrices": False,
}

SWEEP_KEYS = ("lambda", "eta", "snr_db", "ratio", "kernel_kind")


def _merge(defaults: dict, overrides: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in overrides.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise KeyError(
                f"unknown config key {where!r}; valid keys here: {sorted(defaults)}"
            )
        if isinstance(defaults[key], dict) and defaults[key]:
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ValueError(f"config key {where!r} must be a mapping")
            out[key] = _merge(defaults[key], value, where)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _parse_scalar(text: str):
    return yaml.safe_load(text)


class ExperimentConfig:
    """Validated experiment settings; construct via from_file or from_dict."""

    def __init__(self, data: dict | None = None):
        merged = _merge(DEFAULTS, data or {})

        self.dataset = merged["dataset"]
        self.kernel = KernelSpec(
            kind=merged["kernel"]["kind"],
            bandwidth=merged["kernel"]["bandwidth"],
            diag_guard=float(merged["kernel"]["diag_guard"]),
        )
        self.lam = float(merged["lambda"])
        self.eta = int(merged["eta"])
        self.threshold_mode = merged["threshold"]["mode"]
        if self.threshold_mode not in ("magnitude", "signed"):
            raise ValueError(f"threshold.mode must be magnitude or signed, got {self.threshold_mode!r}")
        self.num_clusters = merged["num_clusters"]
        if self.num_clusters is not None:
            self.num_clusters = int(self.num_clusters)
        self.skip_zero_eigs = bool(merged["embedding"]["skip_zero_eigs"])
        self.kmeans = {
            "restarts": int(merged["kmeans"]["restarts"]),
            "max_iters": int(merged["kmeans"]["max_iters"]),
            "tol": float(merged["kmeans"]["tol"]),
        }
        self.corruption = merged["corruption"]
        if self.corruption["value_range"] is not None:
            self.corruption["value_range"] = tuple(
                float(v) for v in self.corruption["value_range"]
            )
        if self.corruption["kind"] != "none":
            # constructing a spec runs its validation; range and seed are
            # placeholders here, both get resolved per run
            self.corruption_spec(seed=0, data_range=(0.0, 1.0))
        self.nmi_norm = merged["metrics"]["nmi_norm"]
        if self.nmi_norm not in ("sqrt", "max", "min"):
            raise ValueError(f"metrics.nmi_norm must be sqrt, max, or min, got {self.nmi_norm!r}")
        self.runs = int(merged["runs"])
        if self.runs < 1:
            raise ValueError(f"runs must be positive, got {self.runs}")
        self.seed = int(merged["seed"])
        self.output = merged["output"]
        self.sweep = merged["sweep"]
        if self.sweep is not None:
            if not isinstance(self.sweep, dict) or not self.sweep:
                raise ValueError("sweep must be a non-empty mapping of grids")
            for key, grid in self.sweep.items():
                if key not in SWEEP_KEYS:
                    raise KeyError(f"unknown sweep key {key!r}; valid: {SWEEP_KEYS}")
                if not isinstance(grid, (list, tuple)) or len(grid) == 0:
                    raise ValueError(f"sweep.{key} must be a non-empty list")
        self.figures = bool(merged["figures"])
        self.dump_matrices = bool(merged["dump_matrices"])
        self._echo = merged

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a mapping at the top level")
        return cls(data)

    def corruption_spec(self, seed: int, data_range=None) -> CorruptionSpec:
        """CorruptionSpec for one run.

        `seed` is ignored when the config pins one; `data_range` fills in for
        an unset corruption.value_range (the runner passes the clean data's
        min/max, so synthetic coordinates are not clipped into pixel bounds).
        """
        c = self.corruption
        vrange = c["value_range"]
        if vrange is None:
            if data_range is None:
                raise ValueError("corruption.value_range is unset and no data range was given")
            vrange = tuple(float(v) for v in data_range)
        return CorruptionSpec(
            kind=c["kind"],
            snr_db=None if c["snr_db"] is None else float(c["snr_db"]),
            ratio=None if c["ratio"] is None else float(c["ratio"]),
            value_range=vrange,
            seed=int(seed if c["seed"] is None else c["seed"]),
        )

    def to_dict(self) -> dict:
        """Canonical nested dict (the echo embedded in every report)."""
        echo = copy.deepcopy(self._echo)
        if echo["corruption"]["value_range"] is not None:
            echo["corruption"]["value_range"] = list(echo["corruption"]["value_range"])
        return echo

    def with_overrides(self, assignments) -> "ExperimentConfig":
        """Apply 'dotted.key=value' strings on top of this config."""
        data = self.to_dict()
        for item in assignments:
            if "=" not in item:
                raise ValueError(f"override {item!r} must look like key.path=value")
            dotted, text = item.split("=", 1)
            keys = dotted.strip().split(".")
            node = data
            for key in keys[:-1]:
                if not isinstance(node.get(key), dict):
                    node[key] = {}
                node = node[key]
            node[keys[-1]] = _parse_scalar(text)
        return ExperimentConfig(data)

    def describe_keys(self) -> str:
        """Flat `a.b.c = default` listing of every config key, for --help."""
        lines = []

        def walk(node: dict, prefix: str):
            for key, value in node.items():
                dotted = f"{prefix}.{key}" if prefix else key
                if isinstance(value, dict) and value:
                    walk(value, dotted)
                else:
                    lines.append(f"  {dotted} = {value!r}")

        walk(DEFAULTS, "")
        return "\n".join(lines)
