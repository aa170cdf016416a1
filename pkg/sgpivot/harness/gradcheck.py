"""
Gradient check of every training loss on a miniature batch

The batch is two source-side scenes of a freshly generated corpus. Back-translation losses are checked with
fixed pseudo sentences (the grammar translation of each caption), because generation is not differentiable
and runs without gradient during training anyway.
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sgpivot import logger
from ..encoder import encode
from ..exceptions import NonDeterministicError
from ..hallucination import HallucinationConfig, build_vocabularies
from ..numerics import GradientReport, Tensor, finite_difference_check
from ..objectives import CMA, CPB, REC, VCB, VSH, label_anchors, loss_cma, loss_cpb, loss_names, loss_rec
from ..objectives import loss_vcb, loss_vsh
from ..parameters import Parameters
from ..scene_graph import ToyGrammar
from ..translation import SRC, SgPivotModel
from .corpus import TrainExample, gen_corpus

Problem = Tuple[Callable[[Sequence[Tensor]], Tensor], List[Tensor]]


class GradcheckSummary:
    """
    Outcome of a gradient check over several losses

    Results:
        reports (:obj:`dict`): loss name -> :obj:`GradientReport` (absent when the check could not run)

        errors (:obj:`dict`): loss name -> message for checks that could not run
    """

    def __init__(self, tolerance: float = 1e-4) -> None:
        self.tolerance = tolerance
        self.reports = {}  # type: Dict[str, GradientReport]
        self.errors = {}  # type: Dict[str, str]

    @property
    def names(self) -> List[str]:
        return sorted(set(self.reports) | set(self.errors), key=_order)

    def passed(self) -> bool:
        return not self.errors and all(r.passed(self.tolerance) for r in self.reports.values())

    def failures(self) -> Dict[str, List[str]]:
        """Loss name -> failing tensor names (or the error message) for every failed check"""
        out = {name: r.failing_tensors(self.tolerance) for name, r in self.reports.items()
               if not r.passed(self.tolerance)}
        out.update({name: [msg] for name, msg in self.errors.items()})
        return out

    def report(self) -> List[str]:
        lines = []
        for name in self.names:
            if name in self.errors:
                lines.append(f"{name}\tFAIL\t{self.errors[name]}")
                continue
            r = self.reports[name]
            status = "ok" if r.passed(self.tolerance) else "FAIL"
            line = f"{name}\t{status}\tmax relative error {r.max_relative_error:.3e} over {r.checked} coordinates"
            if status == "FAIL":
                line += f"\tfailing tensors: {', '.join(r.failing_tensors(self.tolerance))}"
            lines.append(line)
        return lines


def _order(name: str):
    return (loss_names.index(name), name) if name in loss_names else (len(loss_names), name)


def miniature_setup(seed: int = 0, dimension: int = 4, z_dim: int = 4) -> Tuple[SgPivotModel, List[TrainExample]]:
    """A tiny model and two source-side scenes of the packaged grammar"""
    grammar = ToyGrammar.load()
    corpus = gen_corpus(grammar, n_train=2, n_test=0, seed=seed, n_train_target=1, z_dim=z_dim)
    vocabularies = build_vocabularies([ex.vsg for ex in corpus.training_examples()])
    model = SgPivotModel(grammar, vocabularies, dimension=dimension, gcn_layers=2, triaffine_hidden=2,
                         max_decode_length=8, z_dim=z_dim, seed=seed)
    return model, corpus.train_source


def loss_problems(model: SgPivotModel, batch: List[TrainExample], alpha: float = 0.5,
                  tau: float = 0.1) -> Dict[str, Problem]:
    """Loss name -> (function of the parameters, parameters it depends on)"""
    groups = model.parameter_groups()
    config = HallucinationConfig()
    source = model.grammars[SRC]

    def summed(one):
        def f(_params):
            total = Tensor(0.0)
            for ex in batch:
                total = total + one(ex)
            return total
        return f

    def cma(ex):
        return loss_cma(encode(ex.lsg, model.lsg_encoder), encode(ex.vsg, model.vsg_encoder), alpha, tau,
                        label_anchors(ex.lsg, ex.vsg))

    def rec(ex):
        return loss_rec(encode(ex.lsg, model.lsg_encoder), encode(ex.vsg, model.vsg_encoder), ex.tokens, ex.z, model)

    def vcb(ex):
        return loss_vcb(ex.tokens, ex.lsg, ex.vsg, model, alpha, alpha, pseudo=source.translate(ex.tokens))

    def cpb(ex):
        return loss_cpb(ex.vsg, model, alpha, alpha, pseudo=(ex.tokens, source.translate(ex.tokens)))

    def vsh(ex):
        return loss_vsh(ex.lsg, ex.vsg, model, config)

    encoders = groups["lsg_encoder"] + groups["vsg_encoder"]
    fused = encoders + groups["mix_encoder"]
    return {CMA: (summed(cma), encoders),
            REC: (summed(rec), encoders + groups["src_captioner"] + groups["image_head"]),
            VCB: (summed(vcb), fused + groups["src_decoder"]),
            CPB: (summed(cpb), fused + groups["src_decoder"] + groups["tgt_decoder"]),
            VSH: (summed(vsh), groups["vsg_encoder"] + groups["augmentor"])}


def run_gradcheck(parameters: Optional[dict] = None, seed: int = 0,
                  problems: Optional[Dict[str, Problem]] = None) -> GradcheckSummary:
    """
    Finite-difference check of every loss

    Args:
        parameters (:obj:`dict`, optional): the 'gradcheck' parameter group (epsilon, tolerance,
        max_coordinates). Defaults to the parameter file

        seed (:obj:`int`, optional): seeds the corpus, the initialization and the coordinate sample

        problems (:obj:`dict`, optional): loss name -> (function, parameters) to check instead of the losses

    Returns:
        *summary* (:obj:`GradcheckSummary`): one entry per loss
    """
    parameters = parameters or Parameters().parameters["gradcheck"]
    if problems is None:
        model, batch = miniature_setup(seed)
        problems = loss_problems(model, batch)

    summary = GradcheckSummary(float(parameters["tolerance"]))
    for name, (f, params) in problems.items():
        try:
            summary.reports[name] = finite_difference_check(f, params, float(parameters["epsilon"]),
                                                            int(parameters["max_coordinates"]), seed)
        except NonDeterministicError as err:
            summary.errors[name] = str(err)
    for line in summary.report():
        logger.info(f"gradcheck {line}")
    return summary
