"""Experiment runner: single runs and label-flip sweeps.

Output layout under ``output_dir``::

    <kind>[-p<percent>]-seed<seed>/    one directory per single run
        report.txt  history.csv  metrics.txt  params/
    sweep.csv                          one row per (percent, seed)
    cells/<kind>[-p<percent>]-seed<seed>/   per-cell artifacts of a sweep
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd

from fedflip.config import ExperimentConfig, Settings
from fedflip.core.adversary import AttackSpec
from fedflip.core.federation import RunResult, run_centralized, run_federated
from fedflip.core.nn import ModelParams, load_params
from fedflip.eval.report import format_record, format_report, metrics_record
from fedflip.ingest.csv import load_csv
from fedflip.ingest.dataset import ClientShard, LabeledDataset
from fedflip.ingest.partition import partition_iid, train_test_split
from fedflip.ingest.synth import SynthSpec, synth_dataset
from fedflip.storage.artifacts import ArtifactWriter
from fedflip.utils.logging import get_logger
from fedflip.utils.seeding import derive_seed

logger = get_logger(__name__)

FEDERATED = "federated"
CENTRALIZED = "centralized"

SWEEP_COLUMNS = [
    "flip_percent",
    "clean_fl_accuracy",
    "poisoned_fl_accuracy",
    "clean_central_accuracy",
    "poisoned_central_accuracy",
    "seed",
]


@dataclass(frozen=True)
class SweepRow:
    flip_percent: float
    clean_fl_accuracy: Optional[float]
    poisoned_fl_accuracy: Optional[float]
    clean_central_accuracy: Optional[float]
    poisoned_central_accuracy: Optional[float]
    seed: int


@dataclass(frozen=True, eq=False)
class PreparedData:
    train: LabeledDataset
    test: LabeledDataset
    shards: List[ClientShard]


@dataclass(frozen=True)
class Cell:
    kind: str
    flip_percent: Optional[float]
    seed: int

    @property
    def name(self) -> str:
        percent = "" if self.flip_percent is None else f"-p{self.flip_percent:g}"
        return f"{self.kind}{percent}-seed{self.seed}"


@dataclass
class ExperimentOutcome:
    runs: Dict[str, RunResult] = field(default_factory=dict)
    sweep: List[SweepRow] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)


def sweep_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(row) for row in rows], columns=SWEEP_COLUMNS)


def summarize_sweep(rows: Sequence[SweepRow]) -> pd.DataFrame:
    """Mean and standard deviation over seeds for every flip percentage."""
    frame = sweep_frame(rows)
    value_columns = [c for c in SWEEP_COLUMNS if c.endswith("_accuracy")]
    frame[value_columns] = frame[value_columns].astype(float)
    grouped = frame.groupby("flip_percent", sort=True)[value_columns]
    summary = grouped.mean().join(grouped.std(ddof=0), rsuffix="_std")
    summary["seeds"] = frame.groupby("flip_percent", sort=True)["seed"].count()
    return summary.reset_index()


class ExperimentRunner:
    """Runs the experiments one config describes and writes their artifacts."""

    def __init__(self, config: ExperimentConfig, settings: Settings, writer: ArtifactWriter):
        self.config = config
        self.settings = settings
        self.writer = writer
        self._csv_data: Optional[LabeledDataset] = None
        self._initial: Optional[ModelParams] = None
        if config.init_params is not None:
            self._initial = load_params(config.init_params)
            logger.info(f"Starting from checkpoint {config.init_params}")

    # data

    def load_data(self, seed: int) -> LabeledDataset:
        source = self.config.data_source
        if isinstance(source, SynthSpec):
            return synth_dataset(source, derive_seed(seed, "synth"))
        if self._csv_data is None:
            self._csv_data = load_csv(source, n_features=self.config.hyper.input_dim)
        return self._csv_data

    def prepare(self, seed: int) -> PreparedData:
        data = self.load_data(seed)
        train, test = train_test_split(data, self.config.test_fraction, seed)
        shards = partition_iid(train, self.config.hyper.n_clients, derive_seed(seed, "partition"))
        return PreparedData(train, test, shards)

    def class_names(self, data: LabeledDataset) -> List[str]:
        if self.config.report_labels == "name":
            return list(data.class_names)
        return [str(i) for i in range(data.num_classes)]

    def attack_for(self, seed: int, flip_percent: float) -> AttackSpec:
        base = self.config.attack or AttackSpec()
        return AttackSpec(
            malicious_client=base.malicious_client,
            flip_percent=flip_percent,
            seed=derive_seed(seed, "attack", base.seed),
        )

    # execution

    def execute(self, cell: Cell, prepared: PreparedData, workers: int) -> RunResult:
        attack = None if cell.flip_percent is None else self.attack_for(cell.seed, cell.flip_percent)
        names = self.class_names(prepared.test)
        logger.info(f"Running {cell.name}")
        if cell.kind == FEDERATED:
            return run_federated(
                prepared.shards, prepared.test, self.config.hyper, attack, cell.seed,
                initial=self._initial, workers=workers, class_names=names,
            )
        return run_centralized(
            prepared.train, prepared.test, self.config.hyper, attack, cell.seed,
            initial=self._initial, class_names=names,
        )

    def write_run(self, relative: str, result: RunResult) -> None:
        history = pd.DataFrame(
            {
                "round": [r.round for r in result.history],
                "loss": [r.global_loss for r in result.history],
                "accuracy": [r.global_accuracy for r in result.history],
            }
        )
        self.writer.write_text(f"{relative}/report.txt", format_report(result.report))
        self.writer.write_frame(f"{relative}/history.csv", history)
        record = metrics_record(result.report, result.final_loss)
        record["initial_loss"] = f"{result.initial.global_loss:.4f}"
        self.writer.write_text(f"{relative}/metrics.txt", format_record(record))
        self.writer.write_params(f"{relative}/params", result.final_params)

    def kinds(self) -> List[str]:
        mode = self.config.mode
        return ([FEDERATED] if mode.runs_federated else []) + (
            [CENTRALIZED] if mode.runs_centralized else []
        )

    def run(self) -> ExperimentOutcome:
        """Clean or single-attack runs, one per (mode, seed)."""
        if self.config.sweep is not None:
            return self.sweep()

        outcome = ExperimentOutcome()
        attack = self.config.attack
        percent = attack.flip_percent if attack is not None else None
        for seed in self.config.seeds:
            prepared = self.prepare(seed)
            for kind in self.kinds():
                cell = Cell(kind, percent, seed)
                result = self.execute(cell, prepared, self.settings.threads)
                self.write_run(cell.name, result)
                outcome.runs[cell.name] = result
        outcome.artifacts = [str(p) for p in self.writer.written]
        return outcome

    def sweep(self) -> ExperimentOutcome:
        """Clean baselines plus one poisoned run per flip percentage, per seed."""
        percentages = self.config.sweep_percentages
        kinds = self.kinds()
        prepared = {seed: self.prepare(seed) for seed in self.config.seeds}
        cells = [
            Cell(kind, percent, seed)
            for seed in self.config.seeds
            for kind in kinds
            for percent in [None, *percentages]
        ]
        logger.info(f"Sweep: {len(cells)} cells on {self.settings.threads} thread(s)")

        # cells run in parallel, clients inside a cell serially
        with ThreadPoolExecutor(max_workers=self.settings.threads) as executor:
            futures = [executor.submit(self.execute, cell, prepared[cell.seed], 1) for cell in cells]
            results: Dict[Cell, RunResult] = {}
            for cell, future in zip(cells, futures):
                results[cell] = future.result()
                self.write_run(f"cells/{cell.name}", results[cell])

        def accuracy(kind: str, percent: Optional[float], seed: int) -> Optional[float]:
            result = results.get(Cell(kind, percent, seed))
            return None if result is None else result.accuracy

        rows = [
            SweepRow(
                flip_percent=percent,
                clean_fl_accuracy=accuracy(FEDERATED, None, seed),
                poisoned_fl_accuracy=accuracy(FEDERATED, percent, seed),
                clean_central_accuracy=accuracy(CENTRALIZED, None, seed),
                poisoned_central_accuracy=accuracy(CENTRALIZED, percent, seed),
                seed=seed,
            )
            for seed in self.config.seeds
            for percent in percentages
        ]
        self.writer.write_frame("sweep.csv", sweep_frame(rows))

        outcome = ExperimentOutcome(
            runs={cell.name: result for cell, result in results.items()},
            sweep=rows,
        )
        outcome.artifacts = [str(p) for p in self.writer.written]
        return outcome


def run_experiment(
    config: ExperimentConfig, settings: Settings, sweep: bool = False
) -> ExperimentOutcome:
    """Run ``config``; on any failure the artifacts written so far are removed."""
    writer = ArtifactWriter(config.output_dir)
    try:
        runner = ExperimentRunner(config, settings, writer)
        outcome = runner.sweep() if sweep else runner.run()
    except Exception:
        writer.rollback()
        raise
    logger.info(f"Wrote {len(writer.written)} artifact(s) under {config.output_dir}")
    return outcome
