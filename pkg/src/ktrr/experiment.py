"""The clustering pipeline and the experiment runner around it.

A run is: corrupt (optionally) -> kernel -> coefficients -> threshold ->
affinity -> Laplacian -> embedding -> k-means -> metrics against truth.
run_experiment repeats that over seeded runs and an optional parameter grid,
aggregates mean/std per grid point, and emit_report writes JSON + CSV
atomically. Wall-clock t1 covers graph construction only (kernel through
affinity); t2 is the whole run.

Seeds: every run draws its corruption and k-means streams from the master
seed keyed by (run index, stream tag), so adding runs or grid points never
changes the earlier ones.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
import tempfile
import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy

from .config import SWEEP_KEYS, ExperimentConfig
from .corruption import CorruptionSpec, apply_corruption
from .dataio import Dataset, first_k_classes, load_csv, load_idx, subsample_per_class
from .graph import build_affinity, normalized_laplacian, spectral_embedding
from .kernels import compute_kernel_matrix
from .kmeans import KMeansParams, Labeling, kmeans
from .metrics import accuracy, ari, fscore, nmi
from .solver import RegressionParams, fit_ktrr, hard_threshold
from .synth import make_blobs, make_circles, make_subspaces

__all__ = [
    "PipelineError",
    "RunReport",
    "cluster_pipeline",
    "emit_report",
    "load_dataset",
    "run_experiment",
]

# fixed tags keep the per-run streams distinct and stable across versions
_STREAM_TAGS = {"corruption": 1, "kmeans": 2}

METRIC_NAMES = ("ac", "nmi", "ari", "fscore")

CSV_COLUMNS = (
    "grid_index", "lambda", "eta", "kernel_kind", "snr_db", "ratio",
    "run_index", "ac", "nmi", "ari", "fscore", "t1_seconds", "t2_seconds",
    "ac_mean", "ac_std", "nmi_mean", "nmi_std", "ari_mean", "ari_std",
    "fscore_mean", "fscore_std",
)


class PipelineError(RuntimeError):
    """A pipeline step failed; ``step`` names which one."""

    def __init__(self, step: str, cause: BaseException):
        self.step = step
        super().__init__(f"step {step}: {cause}")


def derive_seed(master: int, run_index: int, stream: str) -> int:
    """Independent 64-bit seed for one run's stream, stable in (master, run, stream)."""
    ss = np.random.SeedSequence(
        entropy=int(master), spawn_key=(int(run_index), _STREAM_TAGS[stream])
    )
    return int(ss.generate_state(1, np.uint64)[0])


def _library_version() -> str:
    try:
        from importlib.metadata import version

        return version("ktrr")
    except Exception:
        return "unknown"


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    """Materialize cfg.dataset: synthetic generators or file loaders, then
    optional per-class subsampling and first-k-classes restriction."""
    d = cfg.dataset
    kind = d["kind"]
    try:
        if kind == "circles":
            ds = make_circles(
                n_per_class=int(d["n_per_class"]),
                radii=tuple(float(r) for r in d["radii"]),
                noise=float(d["noise"]),
                seed=int(d["data_seed"]),
            )
        elif kind == "blobs":
            if d["centers"] is None:
                raise ValueError("dataset.centers is required for kind=blobs")
            ds = make_blobs(
                centers=d["centers"],
                n_per_class=int(d["n_per_class"]),
                spread=float(d["spread"]),
                seed=int(d["data_seed"]),
            )
        elif kind == "subspaces":
            ds = make_subspaces(
                num_subspaces=int(d["num_subspaces"]),
                subspace_dim=int(d["subspace_dim"]),
                ambient_dim=int(d["ambient_dim"]),
                n_per_class=int(d["n_per_class"]),
                seed=int(d["data_seed"]),
            )
        elif kind == "csv":
            if d["path"] is None:
                raise ValueError("dataset.path is required for kind=csv")
            ds = load_csv(d["path"], label_column=int(d["label_column"]))
        elif kind == "idx":
            if d["path"] is None or d["labels_path"] is None:
                raise ValueError("dataset.path and dataset.labels_path are required for kind=idx")
            ds = load_idx(d["path"], d["labels_path"])
        else:
            raise ValueError(f"unknown dataset.kind {kind!r}")

        if d["first_k"] is not None:
            ds = first_k_classes(ds, int(d["first_k"]))
        if d["per_class"] is not None:
            ds = subsample_per_class(ds, int(d["per_class"]), seed=int(d["subsample_seed"]))
    except PipelineError:
        raise
    except Exception as err:
        raise PipelineError("dataset", err) from err
    return ds


def _pipeline_full(X, cfg: ExperimentConfig, num_clusters: int, kmeans_seed: int,
                   lam=None, eta=None, kernel=None):
    """One clustering pass; returns (Labeling, info dict with timings and flags)."""
    lam = cfg.lam if lam is None else lam
    eta = cfg.eta if eta is None else eta
    kernel = cfg.kernel if kernel is None else kernel
    info = {}

    t0 = time.perf_counter()
    step = "kernel"
    try:
        K = compute_kernel_matrix(X, kernel)
        step = "solver"
        C = fit_ktrr(K, RegressionParams(lam=lam, eta=eta))
        step = "threshold"
        C = hard_threshold(C, eta, mode=cfg.threshold_mode)
        step = "affinity"
        W = build_affinity(C)
        info["t1_seconds"] = time.perf_counter() - t0
        info["factorization"] = C.factorization
        info["isolated_vertices"] = int(W.isolated_vertices().size)
        step = "laplacian"
        L = normalized_laplacian(W)
        step = "embedding"
        emb = spectral_embedding(L, num_clusters, skip_zero_eigs=cfg.skip_zero_eigs)
        info["zero_eigs"] = emb.zero_eig_count
        info["zero_embedding_rows"] = len(emb.zero_rows)
        step = "kmeans"
        labeling = kmeans(
            emb.Y,
            KMeansParams(
                k=num_clusters,
                restarts=cfg.kmeans["restarts"],
                max_iters=cfg.kmeans["max_iters"],
                tol=cfg.kmeans["tol"],
                seed=kmeans_seed,
            ),
        )
    except PipelineError:
        raise
    except Exception as err:
        raise PipelineError(step, err) from err
    info["t2_seconds"] = time.perf_counter() - t0
    info["affinity"] = W
    info["embedding"] = emb
    return labeling, info


def cluster_pipeline(X, cfg: ExperimentConfig, kmeans_seed: int | None = None) -> Labeling:
    """Cluster the columns of X under cfg; corruption is the runner's job, not
    this function's. cfg.num_clusters must be set (there is no truth here to
    infer it from)."""
    if cfg.num_clusters is None:
        raise ValueError("cfg.num_clusters must be set for cluster_pipeline")
    if kmeans_seed is None:
        kmeans_seed = derive_seed(cfg.seed, 0, "kmeans")
    labeling, _ = _pipeline_full(np.asarray(X, dtype=float), cfg, cfg.num_clusters, kmeans_seed)
    return labeling


@dataclass
class RunReport:
    """Everything one experiment produced, ready for serialization.

    ``grid`` holds one entry per parameter point: its effective parameters,
    the per-run records, and the mean/std aggregate. ``matrices`` (affinity
    and embedding of the first run, kept only when dumping was requested)
    never goes into the JSON.
    """

    config: dict
    grid: list
    metadata: dict
    created: str
    matrices: dict | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "created": self.created,
            "config": self.config,
            "metadata": self.metadata,
            "grid": self.grid,
        }


def _build_grid(sweep) -> list:
    if not sweep:
        return [{}]
    keys = [k for k in SWEEP_KEYS if k in sweep]
    combos = itertools.product(*(sweep[k] for k in keys))
    return [dict(zip(keys, combo)) for combo in combos]


def _effective_corruption(
    cfg: ExperimentConfig, point: dict, seed: int, data_range
) -> CorruptionSpec:
    base = cfg.corruption
    kind = base["kind"]
    if ("snr_db" in point or "ratio" in point) and kind == "none":
        raise ValueError(
            "sweeping snr_db or ratio requires corruption.kind to be set accordingly"
        )
    vrange = base["value_range"] if base["value_range"] is not None else data_range
    return CorruptionSpec(
        kind=kind,
        snr_db=point.get("snr_db", base["snr_db"]),
        ratio=point.get("ratio", base["ratio"]),
        value_range=tuple(float(v) for v in vrange),
        seed=int(seed if base["seed"] is None else base["seed"]),
    )


def _aggregate(runs: list) -> dict:
    agg = {}
    for name in METRIC_NAMES:
        vals = np.array([r[name] for r in runs if "failed" not in r], dtype=float)
        if vals.size == 0:
            agg[f"{name}_mean"] = None
            agg[f"{name}_std"] = None
        else:
            agg[f"{name}_mean"] = float(vals.mean())
            agg[f"{name}_std"] = float(vals.std())  # population std; stays 0 for runs=1
    ok = [r for r in runs if "failed" not in r]
    agg["t1_mean_seconds"] = float(np.mean([r["t1_seconds"] for r in ok])) if ok else None
    agg["t2_mean_seconds"] = float(np.mean([r["t2_seconds"] for r in ok])) if ok else None
    agg["runs_completed"] = len(ok)
    return agg


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Execute the configured runs over the (possibly single-point) grid."""
    if cfg.sweep and cfg.corruption["kind"] == "none":
        if "snr_db" in cfg.sweep or "ratio" in cfg.sweep:
            raise ValueError(
                "sweeping snr_db or ratio requires corruption.kind to be set accordingly"
            )
    ds = load_dataset(cfg)
    num_clusters = cfg.num_clusters if cfg.num_clusters is not None else ds.num_classes
    data_range = (float(ds.X.min()), float(ds.X.max()))
    grid_points = _build_grid(cfg.sweep)

    grid = []
    matrices = None
    for gi, point in enumerate(grid_points):
        lam = float(point.get("lambda", cfg.lam))
        eta = int(point.get("eta", cfg.eta))
        kernel = (
            replace(cfg.kernel, kind=point["kernel_kind"])
            if "kernel_kind" in point
            else cfg.kernel
        )
        corruption_active = cfg.corruption["kind"] != "none"

        runs = []
        for r in range(cfg.runs):
            record = {"run_index": r}
            try:
                if corruption_active:
                    cseed = derive_seed(cfg.seed, r, "corruption")
                    spec = _effective_corruption(cfg, point, cseed, data_range)
                    record["corruption_seed"] = spec.seed
                    try:
                        Xr, cinfo = apply_corruption(ds.X, spec)
                    except PipelineError:
                        raise
                    except Exception as err:
                        raise PipelineError("corruption", err) from err
                    record.update(cinfo)
                else:
                    Xr = ds.X
                kseed = derive_seed(cfg.seed, r, "kmeans")
                record["kmeans_seed"] = kseed
                labeling, info = _pipeline_full(
                    Xr, cfg, num_clusters, kseed, lam=lam, eta=eta, kernel=kernel
                )
            except PipelineError as err:
                record["failed"] = str(err)
                record["step"] = err.step
                runs.append(record)
                continue

            W = info.pop("affinity")
            emb = info.pop("embedding")
            if cfg.dump_matrices and matrices is None:
                matrices = {"affinity": W.values, "embedding": emb.Y}
            record["ac"] = accuracy(labeling, ds.truth)
            record["nmi"] = nmi(labeling, ds.truth, norm=cfg.nmi_norm)
            record["ari"] = ari(labeling, ds.truth)
            record["fscore"] = fscore(labeling, ds.truth)
            record["inertia"] = labeling.inertia
            record.update(info)
            runs.append(record)

        params = {
            "lambda": lam,
            "eta": eta,
            "kernel_kind": kernel.kind,
            "snr_db": point.get("snr_db", cfg.corruption["snr_db"]) if corruption_active else None,
            "ratio": point.get("ratio", cfg.corruption["ratio"]) if corruption_active else None,
        }
        grid.append({"grid_index": gi, "params": params, "runs": runs, "aggregate": _aggregate(runs)})

    metadata = {
        "library_version": _library_version(),
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "dataset": {
            "n": ds.n,
            "m": int(ds.X.shape[0]),
            "num_classes": ds.num_classes,
            "source": ds.meta.get("source"),
        },
        "num_clusters": num_clusters,
        # deliberate interpretation choices, echoed so reports are self-describing
        "threshold_mode": cfg.threshold_mode,
        "skip_zero_eigs": cfg.skip_zero_eigs,
        "nmi_norm": cfg.nmi_norm,
        "corruption_clipping": "outputs clipped to value_range; per-run clipped_entries recorded",
        "failures": sum(1 for g in grid for rr in g["runs"] if "failed" in rr),
    }
    created = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    return RunReport(config=cfg.to_dict(), grid=grid, metadata=metadata,
                     created=created, matrices=matrices)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)  # mkstemp creates 0600; match normal open()
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(report: RunReport) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for entry in report.grid:
        params = entry["params"]
        agg = entry["aggregate"]
        for run in entry["runs"]:
            row = [
                entry["grid_index"], params["lambda"], params["eta"], params["kernel_kind"],
                "" if params["snr_db"] is None else params["snr_db"],
                "" if params["ratio"] is None else params["ratio"],
                run["run_index"],
            ]
            if "failed" in run:
                row += ["", "", "", "", "", ""]
            else:
                row += [
                    repr(run["ac"]), repr(run["nmi"]), repr(run["ari"]), repr(run["fscore"]),
                    repr(run["t1_seconds"]), repr(run["t2_seconds"]),
                ]
            for name in METRIC_NAMES:
                for stat in ("mean", "std"):
                    v = agg[f"{name}_{stat}"]
                    row.append("" if v is None else repr(v))
            writer.writerow(row)
    return buf.getvalue()


def emit_report(report: RunReport, out_dir: str | None = None) -> dict:
    """Write report.json and report.csv (and dumped matrices) atomically.

    Returns {name: path} for everything written. JSON keys are sorted so the
    byte layout is a pure function of the content.
    """
    if out_dir is None:
        out_dir = report.config.get("output", "out")
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    json_path = os.path.join(out_dir, "report.json")
    _atomic_write(json_path, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    paths["json"] = json_path

    csv_path = os.path.join(out_dir, "report.csv")
    _atomic_write(csv_path, _csv_text(report))
    paths["csv"] = csv_path

    if report.matrices is not None:
        for name in ("affinity", "embedding"):
            mat_path = os.path.join(out_dir, f"{name}.csv")
            import io

            buf = io.StringIO()
            np.savetxt(buf, report.matrices[name], delimiter=",", fmt="%.17g")
            _atomic_write(mat_path, buf.getvalue())
            paths[name] = mat_path
    return paths
