"""
Command line interface

::

    sgpivot gen-data --out toy
    sgpivot train --data toy --out run
    sgpivot eval --checkpoint run/model.sgpv --data toy
    sgpivot translate --checkpoint run/model.sgpv --src sentences.txt
    sgpivot hallucinate --checkpoint run/model.sgpv --lsg graphs.jsonl --out imagined.jsonl
    sgpivot gradcheck

Exit codes: 0 success, 1 usage or contract error, 2 data or format error, 3 numeric failure (including a
failed gradient check).
"""
import argparse
import os
import sys
from typing import List, Optional

import yaml

from sgpivot import logger
from ..exceptions import ConfigurationError, ContractError, DATA_ERRORS, NUMERIC_ERRORS, GraphFormatError
from ..hallucination import HallucinationConfig
from ..objectives import CPB, VCB, ScheduleConfig
from ..parameters import Parameters
from ..scene_graph import LANGUAGE, ToyGrammar, check, deserialize, parse_toy_lsg, serialize, tokenize
from ..translation import SRC, TGT, translate
from .checkpoint import load_checkpoint
from .corpus import Corpus, gen_corpus, reference_audit
from .evaluation import GOLD, HALLUCINATED, alignment_gap, corpus_growth, evaluate_translation, hallucinate_graphs
from .evaluation import vsh_recovery
from .gradcheck import run_gradcheck
from .trainer import FINAL_CHECKPOINT, Trainer

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that reports usage problems as :obj:`UsageError` instead of exiting with status 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _grammar(args) -> ToyGrammar:
    return ToyGrammar.load(args.grammar)


def _hallucination() -> HallucinationConfig:
    return HallucinationConfig.from_parameters(Parameters().parameters["vsh"])


def read_run_config(file_name: Optional[str]) -> ScheduleConfig:
    """
    Training settings: the 'training' parameters overridden by a settings file

    The file holds ``key = value`` lines (``#`` starts a comment). Files ending in ``.yml`` or ``.yaml``
    are read as a YAML mapping instead.

    Raises:
        :obj:`ConfigurationError` for malformed lines, unknown keys or invalid values
    """
    values = dict(Parameters().parameters["training"])
    if file_name is not None:
        if os.path.splitext(file_name)[1].lower() in [".yml", ".yaml"]:
            overrides = _read_yaml_settings(file_name)
        else:
            overrides = _read_key_values(file_name)
        unknown = sorted(set(overrides) - set(values))
        if unknown:
            raise ConfigurationError(f"Unknown training settings in {file_name}: {', '.join(map(str, unknown))}")
        values.update(overrides)
    try:
        return ScheduleConfig(**values)
    except ValueError as err:
        raise ConfigurationError(str(err)) from err


def _read_yaml_settings(file_name: str) -> dict:
    with open(file_name, "r", encoding="utf-8") as f:
        overrides = yaml.load(f, Loader=yaml.SafeLoader) or {}
    if not isinstance(overrides, dict):
        raise ConfigurationError(f"{file_name} must hold a mapping of training settings")
    return overrides


def _number(text: str):
    # YAML 1.1 leaves exponents without a dot (1e-3) as strings
    try:
        return float(text)
    except ValueError:
        return text


def _read_key_values(file_name: str) -> dict:
    overrides = {}
    with open(file_name, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, raw = text.partition("=")
            key, raw = key.strip(), raw.strip()
            if not sep or not key or not raw:
                raise ConfigurationError(f"{file_name}, line {number}: expected 'key = value'")
            if key in overrides:
                raise ConfigurationError(f"{file_name}, line {number}: '{key}' is set twice")
            try:
                value = yaml.load(raw, Loader=yaml.SafeLoader)
            except yaml.YAMLError as err:
                raise ConfigurationError(f"{file_name}, line {number}: cannot read value '{raw}'") from err
            if isinstance(value, str):
                value = _number(value)
            if isinstance(value, (dict, list)) or value is None:
                raise ConfigurationError(f"{file_name}, line {number}: '{key}' needs a single value")
            overrides[key] = value
    return overrides


def read_sentences(file_name: str) -> List[List[str]]:
    with open(file_name, "r", encoding="utf-8") as f:
        return [tokenize(line) for line in f if line.strip()]


def read_scene_graphs(file_name: str) -> list:
    graphs = []
    with open(file_name, "r", encoding="utf-8") as f:
        for number, line in enumerate(f):
            if not line.strip():
                continue
            try:
                graphs.append(deserialize(line))
            except GraphFormatError as err:
                raise GraphFormatError(f"{file_name}, line {number + 1}: {err}") from err
    return graphs


def _write_lines(lines: List[str], file_name: Optional[str]) -> None:
    if file_name is None:
        for line in lines:
            print(line)
        return
    with open(file_name, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def gen_data(args) -> int:
    corpus_parameters = Parameters().parameters["corpus"]

    def pick(name):
        value = getattr(args, name)
        return corpus_parameters[name] if value is None else value

    corpus = gen_corpus(_grammar(args), int(pick("n_train")), int(pick("n_test")), int(pick("seed")),
                        int(pick("n_train_target")), int(pick("z_dim")), float(corpus_parameters["noise_sigma"]))
    corpus.save(args.out)
    print(f"{len(corpus.train_source)} source, {len(corpus.train_target)} target and {len(corpus.test)} "
          f"test examples written to {args.out}")
    return EXIT_OK


def train(args) -> int:
    grammar = _grammar(args)
    corpus = Corpus.load(args.data)
    disabled = [VCB, CPB] if args.no_back_translation else []
    trainer = Trainer(corpus, grammar, read_run_config(args.config), args.out, disabled_losses=disabled)
    reads = reference_audit.reads
    trainer.execute()
    if reference_audit.reads != reads:
        raise ContractError(f"Training read reference translations {reference_audit.reads - reads} times")
    print(f"Model written to {os.path.join(args.out, FINAL_CHECKPOINT)}")
    return EXIT_OK


def translate_cmd(args) -> int:
    grammar = _grammar(args)
    model, config = load_checkpoint(args.checkpoint, grammar)
    sentences = read_sentences(args.src)
    visuals = read_scene_graphs(args.gold_vsg) if args.gold_vsg else [None] * len(sentences)
    if len(visuals) != len(sentences):
        raise GraphFormatError(f"{len(sentences)} sentences but {len(visuals)} visual scene graphs")
    target = TGT if args.direction == "forward" else SRC
    source = model.grammars[SRC if target == TGT else TGT]
    alpha = config.alpha if target == TGT else config.alpha_reverse
    lines = []
    for tokens, vsg in zip(sentences, visuals):
        lsg = parse_toy_lsg(tokens, source)
        lines.append(" ".join(translate(tokens, lsg, vsg, model, target, alpha, _hallucination())))
    _write_lines(lines, args.out)
    return EXIT_OK


def hallucinate_cmd(args) -> int:
    grammar = _grammar(args)
    model, _ = load_checkpoint(args.checkpoint, grammar)
    if args.lsg:
        lsgs = read_scene_graphs(args.lsg)
        for number, lsg in enumerate(lsgs):
            if lsg.modality != LANGUAGE:
                raise GraphFormatError(f"{args.lsg}, graph {number + 1}: expected a language scene graph")
            check(lsg)
    else:
        lsgs = [parse_toy_lsg(tokens, model.grammars[SRC]) for tokens in read_sentences(args.src)]
    graphs, growth = hallucinate_graphs(lsgs, model, _hallucination())
    _write_lines([serialize(g) for g in graphs], args.out)
    for line in growth.report():
        print(line)
    return EXIT_OK


def evaluate(args) -> int:
    grammar = _grammar(args)
    model, config = load_checkpoint(args.checkpoint, grammar)
    corpus = Corpus.load(args.data)
    if corpus.fingerprint != grammar.fingerprint:
        raise ConfigurationError("Corpus was generated with a different grammar")
    cores = args.cores or Parameters().parameters["system"]["cpus"] or 1
    hconfig = _hallucination()
    modes = [HALLUCINATED, GOLD] if args.visual == "both" else [args.visual]
    for mode in modes:
        score = evaluate_translation(corpus.test, model, mode, config.alpha, hconfig, cores, args.smooth)
        print(f"BLEU {mode}\t{score:.2f}")
    recovery = vsh_recovery(corpus.test, model, hconfig)
    for key in ["node_accuracy", "edge_accuracy"]:
        value = recovery[key]
        print(f"VSH {key}\t{'-' if value is None else f'{value:.3f}'}")
    print(f"alignment gap\t{alignment_gap(corpus.test, model):.3f}")
    return EXIT_OK


def gradcheck(args) -> int:
    summary = run_gradcheck(seed=args.seed)
    for line in summary.report():
        print(line)
    return EXIT_OK if summary.passed() else EXIT_NUMERIC


def stats(args) -> int:
    corpus = Corpus.load(args.data)
    examples = corpus.train_source + corpus.test
    if args.checkpoint:
        model, _ = load_checkpoint(args.checkpoint, _grammar(args))
        growth = corpus_growth(examples, model, _hallucination())
    else:
        growth = corpus_growth(examples)
    for line in growth.report():
        print(line)
    return EXIT_OK


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="sgpivot", description="Scene-graph pivoted unsupervised multimodal translation")
    parser.add_argument("--grammar", default=None, help="toy grammar YAML file (defaults to the packaged one)")
    commands = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    commands.required = True

    p = commands.add_parser("gen-data", help="generate a synthetic corpus")
    p.add_argument("--out", required=True, help="output folder")
    p.add_argument("--n-train", dest="n_train", type=int, default=None, help="source-side training examples")
    p.add_argument("--n-train-target", dest="n_train_target", type=int, default=None,
                   help="target-side training examples")
    p.add_argument("--n-test", dest="n_test", type=int, default=None, help="test examples")
    p.add_argument("--seed", type=int, default=None, help="generator seed")
    p.add_argument("--z-dim", dest="z_dim", type=int, default=None, help="image feature width")
    p.set_defaults(func=gen_data)

    p = commands.add_parser("train", help="run the three training stages")
    p.add_argument("--data", required=True, help="corpus folder")
    p.add_argument("--out", required=True, help="folder for checkpoints and metrics")
    p.add_argument("--config", default=None,
                   help="training settings as key = value lines (YAML when the name ends in .yml)")
    p.add_argument("--no-back-translation", dest="no_back_translation", action="store_true",
                   help="leave out both back-translation losses")
    p.set_defaults(func=train)

    p = commands.add_parser("translate", help="translate sentences, one per line")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--src", required=True, help="input sentences")
    p.add_argument("--gold-vsg", dest="gold_vsg", default=None,
                   help="visual scene graphs, one JSON object per line (hallucinated when omitted)")
    p.add_argument("--direction", choices=["forward", "reverse"], default="forward")
    p.add_argument("--out", default=None, help="output file (standard output when omitted)")
    p.set_defaults(func=translate_cmd)

    p = commands.add_parser("hallucinate", help="imagine visual scene graphs, then report node growth")
    p.add_argument("--checkpoint", required=True)
    given = p.add_mutually_exclusive_group(required=True)
    given.add_argument("--lsg", default=None, help="language scene graphs, one JSON object per line")
    given.add_argument("--src", default=None, help="source sentences, parsed with the toy grammar")
    p.add_argument("--out", required=True, help="output file for the hallucinated scene graphs")
    p.set_defaults(func=hallucinate_cmd)

    p = commands.add_parser("eval", help="BLEU, hallucination recovery and alignment on the test set")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="corpus folder")
    p.add_argument("--visual", choices=[HALLUCINATED, GOLD, "both"], default="both")
    p.add_argument("--smooth", action="store_true", help="smoothed BLEU")
    p.add_argument("--cores", type=int, default=None, help="translation threads")
    p.set_defaults(func=evaluate)

    p = commands.add_parser("gradcheck", help="finite-difference check of every loss")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=gradcheck)

    p = commands.add_parser("stats", help="node growth from language to visual scene graphs")
    p.add_argument("--data", required=True, help="corpus folder")
    p.add_argument("--checkpoint", default=None, help="report hallucinated instead of gold growth")
    p.set_defaults(func=stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"sgpivot: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except NUMERIC_ERRORS as err:
        logger.error(f"{args.command}: {err}")
        print(f"sgpivot: numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except DATA_ERRORS as err:
        logger.error(f"{args.command}: {err}")
        print(f"sgpivot: {err}", file=sys.stderr)
        return EXIT_DATA
    except ContractError as err:
        logger.error(f"{args.command}: {err}")
        print(f"sgpivot: {err}", file=sys.stderr)
        return EXIT_USAGE
