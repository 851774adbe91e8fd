"""Per-dataset experiment driver: split, scale, four methods per replicate.

Each replicate draws a fresh 70/30 split, fits the scaler on the training
side, then runs the configured methods:

* ``standard``  - hidden ReLU stack with a Softmax output, one evaluation.
* ``random``    - n_trials uniform architectures, each trained and tested;
  the best TEST score is retained (that is this method's selection rule;
  ``strict_random`` switches selection to training accuracy instead).
* ``tpe`` / ``cmaes`` - a study maximising training accuracy; the best
  trial's already-trained model is evaluated once on the test set.

All seeds derive deterministically from (master seed, replicate, role), so
a rerun with the same configuration is bit-identical. Wall times are kept
in memory and on the diagnostic stream only; the persisted JSON lines are
seed-reproducible byte for byte.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .activations import Architecture, architecture_from_names, architecture_names, parse_af_name
from .data import DataError, Dataset, load_dataset, scaler_fit, scaler_transform, train_test_split
from .network import HIDDEN_WIDTH, TrainConfig, init_network, predict_accuracy, train
from .samplers import SearchSpace, random_suggest, study_run

METHOD_ORDER = ("standard", "random", "tpe", "cmaes")

# role tags for seed derivation
_TAG_SPLIT = 0
_TAG_EVAL = 1
_TAG_SAMPLER = {"standard": 10, "random": 11, "tpe": 12, "cmaes": 13}
_TAG_TRIAL = {"standard": 20, "random": 21, "tpe": 22, "cmaes": 23}


@dataclass
class ExperimentConfig:
    dataset: str
    n_layers: int = 5
    n_replicates: int = 30
    n_trials: int = 1000
    methods: tuple[str, ...] = METHOD_ORDER
    seed: int = 0
    output: str = "experiment_log.jsonl"
    fmt: str | None = None
    label_col: str | None = None
    hidden: int = HIDDEN_WIDTH
    strict_random: bool = False
    max_seconds_per_replicate: float | None = None
    jobs: int = 1

    def validate(self):
        if self.n_layers not in (5, 10):
            raise ValueError(f"n_layers must be 5 or 10, got {self.n_layers}")
        if self.n_replicates < 1 or self.n_trials < 1:
            raise ValueError("n_replicates and n_trials must be >= 1")
        bad = [m for m in self.methods if m not in METHOD_ORDER]
        if bad or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHOD_ORDER}, got {self.methods}")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        return self


@dataclass
class ScaledSplit:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    n_features: int
    n_classes: int


@dataclass
class EvalOutcome:
    train_accuracy: float
    test_accuracy: float | None
    failed: bool
    net: object


@dataclass
class MethodResult:
    test_score: float
    architecture: tuple[str, ...]
    objective: float
    failed: bool = False
    skipped: bool = False
    wall_time: float = 0.0  # diagnostic only, never serialised


@dataclass
class ReplicateRecord:
    dataset: str
    n_layers: int
    replicate: int
    results: dict[str, MethodResult] = field(default_factory=dict)
    truncated: bool = False


def _rng(*parts) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(p) for p in parts]))


def standard_architecture(n_layers: int) -> Architecture:
    """The baseline: ReLU on every hidden layer, Softmax on the output."""
    if n_layers < 2:
        raise ValueError("standard architecture needs at least 2 layers")
    relu = parse_af_name("ReLU")
    softmax = parse_af_name("Softmax")
    return tuple([relu] * (n_layers - 1) + [softmax])


def parse_architecture_spec(spec: str) -> Architecture:
    """Parse "standard:L" or a comma-separated list of canonical names."""
    spec = spec.strip()
    if spec.startswith("standard:"):
        try:
            n_layers = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad architecture spec {spec!r}") from None
        return standard_architecture(n_layers)
    return architecture_from_names([s.strip() for s in spec.split(",")])


def prepare_split(ds: Dataset, rng) -> ScaledSplit:
    """Split 70/30, fit the scaler on the training rows, transform both sides."""
    split = train_test_split(ds, rng)
    scaler = scaler_fit(ds, split.train)
    return ScaledSplit(
        X_train=scaler_transform(scaler, ds.X[split.train]),
        y_train=ds.y[split.train],
        X_test=scaler_transform(scaler, ds.X[split.test]),
        y_test=ds.y[split.test],
        n_features=ds.meta.n_features,
        n_classes=ds.meta.n_classes,
    )


def evaluate_architecture(
    arch: Architecture,
    split: ScaledSplit,
    train_rng,
    eval_rng=None,
    train_config: TrainConfig | None = None,
    hidden: int = HIDDEN_WIDTH,
    with_test: bool = True,
) -> EvalOutcome:
    """Train a fresh network on the split; objective is final training accuracy.

    ``with_test=False`` skips the test pass entirely, so search studies never
    touch the test set. A failed (NaN) training scores 0 on both sides.
    """
    net = init_network(split.n_features, split.n_classes, arch, train_rng, hidden=hidden)
    result = train(net, split.X_train, split.y_train, train_config, train_rng)
    if result.failed or not result.history_acc:
        return EvalOutcome(0.0, 0.0, True, net)
    train_acc = result.history_acc[-1]
    test_acc = None
    if with_test:
        test_acc = predict_accuracy(net, split.X_test, split.y_test, eval_rng)
    return EvalOutcome(train_acc, test_acc, False, net)


def run_replicate(ds: Dataset, config: ExperimentConfig, replicate: int) -> ReplicateRecord:
    """One replicate: split, scale, then every configured method in order."""
    seed = config.seed
    split = prepare_split(ds, _rng(seed, replicate, _TAG_SPLIT))
    space = SearchSpace(config.n_layers)
    record = ReplicateRecord(dataset=ds.meta.name, n_layers=config.n_layers, replicate=replicate)
    started = time.monotonic()

    def over_budget():
        if config.max_seconds_per_replicate is None:
            return False
        return time.monotonic() - started > config.max_seconds_per_replicate

    def eval_rng():
        # fixed per replicate so repeated test evaluations share their noise
        return _rng(seed, replicate, _TAG_EVAL)

    for method in METHOD_ORDER:
        if method not in config.methods:
            continue
        t0 = time.monotonic()
        if method != "standard" and over_budget():
            record.results[method] = MethodResult(0.0, (), 0.0, failed=True, skipped=True)
            record.truncated = True
            continue
        if method == "standard":
            arch = standard_architecture(config.n_layers)
            out = evaluate_architecture(
                arch, split, _rng(seed, replicate, _TAG_TRIAL[method], 0), eval_rng(), hidden=config.hidden
            )
            record.results[method] = MethodResult(
                test_score=float(out.test_accuracy),
                architecture=tuple(architecture_names(arch)),
                objective=out.train_accuracy,
                failed=out.failed,
                wall_time=time.monotonic() - t0,
            )
        elif method == "random":
            sampler_rng = _rng(seed, replicate, _TAG_SAMPLER[method])
            best_key = -1.0
            best = None
            ran = 0
            for t in range(config.n_trials):
                if t > 0 and over_budget():
                    record.truncated = True
                    break
                arch = random_suggest(space, sampler_rng)
                out = evaluate_architecture(
                    arch,
                    split,
                    _rng(seed, replicate, _TAG_TRIAL[method], t),
                    eval_rng(),
                    hidden=config.hidden,
                    with_test=not config.strict_random,
                )
                ran += 1
                if out.failed:
                    continue
                key = out.train_accuracy if config.strict_random else out.test_accuracy
                if best is None or key > best_key:
                    best_key = key
                    best = (arch, out)
            if best is None:
                record.results[method] = MethodResult(0.0, (), 0.0, failed=True, wall_time=time.monotonic() - t0)
            else:
                arch, out = best
                test = out.test_accuracy
                if config.strict_random:
                    test = predict_accuracy(out.net, split.X_test, split.y_test, eval_rng())
                record.results[method] = MethodResult(
                    test_score=float(test),
                    architecture=tuple(architecture_names(arch)),
                    objective=out.train_accuracy,
                    failed=False,
                    wall_time=time.monotonic() - t0,
                )
        else:  # tpe / cmaes study maximising training accuracy
            counter = {"t": 0}
            stash = {"objective": -1.0, "net": None}

            def objective(arch):
                t = counter["t"]
                counter["t"] += 1
                out = evaluate_architecture(
                    arch,
                    split,
                    _rng(seed, replicate, _TAG_TRIAL[method], t),
                    hidden=config.hidden,
                    with_test=False,
                )
                if not out.failed and (stash["net"] is None or out.train_accuracy > stash["objective"]):
                    stash["objective"] = out.train_accuracy
                    stash["net"] = out.net
                return out.train_accuracy, out.failed

            study = study_run(objective, method, space, config.n_trials, _rng(seed, replicate, _TAG_SAMPLER[method]))
            if study.best.failed or stash["net"] is None:
                record.results[method] = MethodResult(
                    0.0,
                    tuple(architecture_names(study.best.architecture)),
                    0.0,
                    failed=True,
                    wall_time=time.monotonic() - t0,
                )
            else:
                test = predict_accuracy(stash["net"], split.X_test, split.y_test, eval_rng())
                record.results[method] = MethodResult(
                    test_score=float(test),
                    architecture=tuple(architecture_names(study.best.architecture)),
                    objective=study.best.objective,
                    failed=False,
                    wall_time=time.monotonic() - t0,
                )
    return record


def record_to_json(record: ReplicateRecord) -> str:
    """One JSON line per replicate; wall times are deliberately left out."""
    methods = {}
    for name, res in record.results.items():
        entry = {
            "test_score": res.test_score,
            "architecture": list(res.architecture),
            "objective": res.objective,
            "failed": res.failed,
        }
        if res.skipped:
            entry["skipped"] = True
        methods[name] = entry
    payload = {
        "dataset": record.dataset,
        "n_layers": record.n_layers,
        "replicate": record.replicate,
        "truncated": record.truncated,
        "methods": methods,
    }
    return json.dumps(payload, sort_keys=True)


def record_from_json(line: str) -> ReplicateRecord:
    payload = json.loads(line)
    results = {}
    for name, entry in payload["methods"].items():
        results[name] = MethodResult(
            test_score=float(entry["test_score"]),
            architecture=tuple(entry["architecture"]),
            objective=float(entry["objective"]),
            failed=bool(entry["failed"]),
            skipped=bool(entry.get("skipped", False)),
        )
    return ReplicateRecord(
        dataset=payload["dataset"],
        n_layers=int(payload["n_layers"]),
        replicate=int(payload["replicate"]),
        results=results,
        truncated=bool(payload.get("truncated", False)),
    )


def load_log(path) -> list[ReplicateRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_json(line))
    return records


def _replicate_worker(args):
    ds, config, replicate = args
    return run_replicate(ds, config, replicate)


def run_experiment(config: ExperimentConfig, log_stream=None):
    """Run all replicates, persisting each JSON record as soon as it exists.

    Returns (records, summary_csv_text). The summary is also written next to
    the log as ``<output>.summary.csv``. With jobs > 1 replicates run in
    separate processes; results are written in replicate order so the log is
    identical to a sequential run.
    """
    from .reports import table1_csv

    config.validate()
    ds = load_dataset(config.dataset, fmt=config.fmt, label_col=config.label_col)
    if ds.meta.n_samples < 4:
        raise DataError(f"dataset too small for a 70/30 split: n={ds.meta.n_samples}")
    records: list[ReplicateRecord] = []

    def note(msg):
        if log_stream is not None:
            print(msg, file=log_stream, flush=True)

    with open(config.output, "w", encoding="utf-8") as out:
        if config.jobs > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                futures = [pool.submit(_replicate_worker, (ds, config, r)) for r in range(config.n_replicates)]
                for r, fut in enumerate(futures):
                    rec = fut.result()
                    records.append(rec)
                    out.write(record_to_json(rec) + "\n")
                    out.flush()
                    note(f"replicate {r} done in {sum(m.wall_time for m in rec.results.values()):.1f}s")
        else:
            for r in range(config.n_replicates):
                rec = run_replicate(ds, config, r)
                records.append(rec)
                out.write(record_to_json(rec) + "\n")
                out.flush()
                note(f"replicate {r} done in {sum(m.wall_time for m in rec.results.values()):.1f}s")

    summary = table1_csv(records)
    with open(str(config.output) + ".summary.csv", "w", encoding="utf-8") as fh:
        fh.write(summary)
    return records, summary


_CONFIG_TYPES = {
    "dataset": str,
    "n_layers": int,
    "n_replicates": int,
    "n_trials": int,
    "methods": str,
    "seed": int,
    "output": str,
    "fmt": str,
    "label_col": str,
    "hidden": int,
    "strict_random": bool,
    "max_seconds_per_replicate": float,
    "jobs": int,
}


def read_config_file(path) -> ExperimentConfig:
    """Flat ``key = value`` config file; keys mirror ExperimentConfig fields."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_TYPES:
                raise DataError(f"{path}:{lineno}: unknown config key {key!r} (known: {sorted(_CONFIG_TYPES)})")
            caster = _CONFIG_TYPES[key]
            try:
                if caster is bool:
                    if value.lower() not in ("true", "false"):
                        raise ValueError
                    values[key] = value.lower() == "true"
                else:
                    values[key] = caster(value)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad value {value!r} for {key!r}") from None
    if "dataset" not in values:
        raise DataError(f"{path}: missing required key 'dataset'")
    if "methods" in values:
        values["methods"] = tuple(m.strip() for m in values["methods"].split(",") if m.strip())
    config = ExperimentConfig(**values)
    config.validate()
    return config
