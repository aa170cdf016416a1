"""
Three-stage training of the translation system

Training runs stages 1, 2 and 3 in order for the number of epochs each stage is given, optimizing the losses
the schedule activates for that stage. Every epoch appends one line to ``metrics.tsv``::

    stage <TAB> epoch <TAB> cma <TAB> rec <TAB> vcb <TAB> cpb <TAB> vsh <TAB> seconds

where a loss that was not optimized in the epoch is written as ``-``. A checkpoint is written at the end of
every stage (``stage1.sgpv`` ...) and the final model goes to ``model.sgpv``.
"""
import os
import sys
from time import perf_counter
from typing import Dict, Iterable, List, Optional

import numpy as np

from sgpivot import logger
from ..encoder import encode
from ..exceptions import ConfigurationError, NUMERIC_ERRORS, NumericFailure
from ..hallucination import HallucinationConfig, build_vocabularies
from ..numerics import Tape, Tensor
from ..objectives import CMA, CPB, REC, SGD, VCB, VSH, LossBundle, ScheduleConfig, label_anchors, loss_cma
from ..objectives import loss_cpb, loss_names, loss_rec, loss_vcb, loss_vsh, total_loss, training_schedule
from ..parameters import Parameters
from ..scene_graph import ToyGrammar
from ..translation import SRC, SgPivotModel
from ..utils import WorkerThread, pyqt
from .checkpoint import save_checkpoint
from .corpus import Corpus, TrainExample

if pyqt:
    from PyQt5.QtCore import pyqtSignal

sys.dont_write_bytecode = True

METRICS_FILE = "metrics.tsv"
FINAL_CHECKPOINT = "model.sgpv"
LAST_GOOD_CHECKPOINT = "last_good.sgpv"
stages = [1, 2, 3]


def stage_checkpoint(stage: int) -> str:
    return f"stage{stage}.sgpv"


def build_model(corpus: Corpus, grammar: ToyGrammar, parameters: Optional[dict] = None) -> SgPivotModel:
    """Fresh model sized by the 'model' and 'vsh' parameter groups for the corpus' visual labels"""
    parameters = parameters or Parameters().parameters
    vocabularies = build_vocabularies([ex.vsg for ex in corpus.training_examples()])
    return SgPivotModel.from_parameters(grammar, vocabularies, parameters["model"], corpus.metadata["z_dim"],
                                        parameters["vsh"]["epsilon_logit"])


class Trainer(WorkerThread):
    """
    Runs the full training schedule

    ::

        from sgpivot.scene_graph import ToyGrammar
        from sgpivot.harness import Corpus, Trainer
        from sgpivot.objectives import ScheduleConfig

        grammar = ToyGrammar.load()
        corpus = Corpus.load('/tmp/toy_corpus')
        trainer = Trainer(corpus, grammar, ScheduleConfig(epochs_stage1=5), '/tmp/toy_run')
        model = trainer.execute()

    Args:
        corpus (:obj:`Corpus`): training data. Reference translations are never read

        grammar (:obj:`ToyGrammar`): grammar the corpus was generated with

        config (:obj:`ScheduleConfig`, optional): schedule. Defaults to the 'training' parameters

        output_folder (:obj:`str`, optional): where metrics and checkpoints go. Nothing is written when None

        model (:obj:`SgPivotModel`, optional): model to continue training. A fresh one is built when None

        disabled_losses (:obj:`Iterable[str]`, optional): losses left out of every stage (ablations)

        hallucination (:obj:`HallucinationConfig`, optional): defaults to the 'vsh' parameters
    """

    if pyqt:
        training = pyqtSignal(object)

    def __init__(self, corpus: Corpus, grammar: ToyGrammar, config: Optional[ScheduleConfig] = None,
                 output_folder: Optional[str] = None, model: Optional[SgPivotModel] = None,
                 disabled_losses: Iterable[str] = (), hallucination: Optional[HallucinationConfig] = None) -> None:
        WorkerThread.__init__(self, None)
        parameters = Parameters().parameters
        if corpus.fingerprint != grammar.fingerprint:
            raise ConfigurationError("Corpus was generated with a different grammar")
        self.disabled = frozenset(disabled_losses)
        unknown = self.disabled - set(loss_names)
        if unknown:
            raise ConfigurationError(f"Unknown losses: {sorted(unknown)}")

        self.corpus = corpus
        self.grammar = grammar
        self.config = config or ScheduleConfig.from_parameters(parameters["training"])
        self.hallucination = hallucination or HallucinationConfig.from_parameters(parameters["vsh"])
        self.model = model or build_model(corpus, grammar, parameters)
        self.output_folder = output_folder
        self.history = []  # type: List[dict]
        self.report = []  # type: List[str]
        self.__last_good = None  # type: Optional[Dict[str, np.ndarray]]

    def doWork(self):
        self.execute()

    def execute(self) -> SgPivotModel:
        """Trains through all stages and returns the trained model"""
        if self.output_folder is not None:
            os.makedirs(self.output_folder, exist_ok=True)
            open(self.__path(METRICS_FILE), "w", encoding="utf-8").close()

        optimizer = SGD(self.model.parameters(), self.config.learning_rate, self.config.clip_norm)
        examples = self.corpus.training_examples()
        for stage in stages:
            active = training_schedule(stage) - self.disabled
            logger.info(f"Training stage {stage}: {', '.join(k for k in loss_names if k in active)}")
            for epoch in range(1, self.config.epochs(stage) + 1):
                self.__last_good = self.model.snapshot()
                try:
                    record = self.run_epoch(stage, epoch, examples, optimizer)
                except NUMERIC_ERRORS as err:
                    self.__abort(stage, epoch, err)
                    raise
                self.history.append(record)
                self.__write_metrics(record)
                if pyqt:
                    self.training.emit([stage, epoch, record["losses"]])
            self.__save(stage_checkpoint(stage))

        self.__save(FINAL_CHECKPOINT)
        if pyqt:
            self.training.emit(["finished_training", None])
        return self.model

    def run_epoch(self, stage: int, epoch: int, examples: List[TrainExample], optimizer: SGD) -> dict:
        """One shuffled pass over *examples*. Returns the epoch's mean losses"""
        started = perf_counter()
        rng = np.random.default_rng([self.config.seed, stage, epoch])
        order = rng.permutation(len(examples))
        active = training_schedule(stage) - self.disabled
        weights = self.config.weights
        sums = {k: 0.0 for k in loss_names}
        counts = {k: 0 for k in loss_names}
        counters = {}  # type: Dict[str, int]

        for start in range(0, len(order), self.config.batch_size):
            batch = [examples[i] for i in order[start:start + self.config.batch_size]]
            with Tape() as tape:
                totals = []
                for example in batch:
                    bundle = self.example_losses(example, stage, active, counters)
                    computed = active if example.language == SRC else active & {CMA, REC}
                    for k, value in bundle.values().items():
                        if k in computed:
                            sums[k] += value
                            counts[k] += 1
                    totals.append(total_loss(bundle, weights))
                loss = totals[0]
                for t in totals[1:]:
                    loss = loss + t
                loss = loss / float(len(totals))
            if not np.isfinite(loss.item()):
                raise NumericFailure(f"Loss is not finite in stage {stage}, epoch {epoch}")
            if loss.tracks:
                tape.backward(loss)
                optimizer.step()
            tape.reset()

        for key in sorted(counters):
            logger.warning(f"Stage {stage}, epoch {epoch}: {counters[key]} examples skipped ({key})")
        losses = {k: (sums[k] / counts[k] if counts[k] else None) for k in loss_names}
        text = ", ".join(f"{k}={v:.4f}" for k, v in losses.items() if v is not None)
        logger.info(f"Stage {stage}, epoch {epoch}: {text}")
        return {"stage": stage, "epoch": epoch, "losses": losses, "seconds": perf_counter() - started,
                "skipped": dict(counters)}

    def example_losses(self, example: TrainExample, stage: int, active: frozenset,
                       counters: Optional[dict] = None) -> LossBundle:
        """
        Loss components of one example

        Alignment and reconstruction apply to both languages. Back-translation and hallucination use
        source-side scenes only; the components a target-side example cannot provide are zero.
        """
        model, config = self.model, self.config
        components = {k: Tensor(0.0) for k in training_schedule(stage)}
        source_side = example.language == SRC

        if CMA in active or REC in active:
            lsg_reps = encode(example.lsg, model.lsg_encoder)
            vsg_reps = encode(example.vsg, model.vsg_encoder)
            if CMA in active:
                anchors = label_anchors(example.lsg, example.vsg) if config.cma_anchors and source_side else None
                components[CMA] = loss_cma(lsg_reps, vsg_reps, config.alpha, config.tau, anchors)
            if REC in active:
                components[REC] = loss_rec(lsg_reps, vsg_reps, example.tokens, example.z, model, example.language)
        if source_side:
            if VCB in active:
                components[VCB] = loss_vcb(example.tokens, example.lsg, example.vsg, model, config.alpha,
                                           config.alpha_reverse, counters)
            if CPB in active:
                components[CPB] = loss_cpb(example.vsg, model, config.alpha, config.alpha_reverse, counters)
            if VSH in active:
                components[VSH] = loss_vsh(example.lsg, example.vsg, model, self.hallucination, counters)
        return LossBundle(stage, **components)

    def metrics_lines(self) -> List[str]:
        return [metrics_line(record) for record in self.history]

    def __write_metrics(self, record: dict) -> None:
        if self.output_folder is None:
            return
        with open(self.__path(METRICS_FILE), "a", encoding="utf-8", newline="\n") as f:
            f.write(metrics_line(record) + "\n")

    def __save(self, name: str) -> None:
        if self.output_folder is not None:
            save_checkpoint(self.model, self.config, self.grammar.fingerprint, self.__path(name))

    def __abort(self, stage: int, epoch: int, err: Exception) -> None:
        logger.error(f"Numeric failure in stage {stage}, epoch {epoch}: {err}")
        self.report.append(f"Training stopped in stage {stage}, epoch {epoch}: {err}")
        if self.__last_good is not None:
            self.model.restore(self.__last_good)
        self.__save(LAST_GOOD_CHECKPOINT)
        if pyqt:
            self.training.emit(["training_failed", str(err)])

    def __path(self, name: str) -> str:
        return os.path.join(self.output_folder, name)


def metrics_line(record: dict) -> str:
    losses = record["losses"]
    cells = [str(record["stage"]), str(record["epoch"])]
    cells += ["-" if losses[k] is None else f"{losses[k]:.6f}" for k in loss_names]
    cells.append(f"{record['seconds']:.3f}")
    return "\t".join(cells)


def read_metrics(file_name: str) -> List[dict]:
    """Parses a metrics log back into records (losses written as '-' become None)"""
    records = []
    with open(file_name, "r", encoding="utf-8") as f:
        for line in f:
            cells = line.rstrip("\n").split("\t")
            if len(cells) != len(loss_names) + 3:
                continue
            losses = {k: (None if c == "-" else float(c)) for k, c in zip(loss_names, cells[2:-1])}
            records.append({"stage": int(cells[0]), "epoch": int(cells[1]), "losses": losses,
                            "seconds": float(cells[-1])})
    return records
