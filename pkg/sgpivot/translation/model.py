from typing import Dict, List, Optional

import numpy as np

from ..encoder import EncoderParams, node_vocabulary, token_vocabulary
from ..hallucination import AugmentorParams, ConceptMatcher, VsgVocabularies
from ..numerics import Tensor
from ..scene_graph import ToyGrammar
from .decoder import DecoderParams

SRC = "src"
TGT = "tgt"
languages = [SRC, TGT]


class SgPivotModel:
    """
    Every learnable tensor of the translation system, grouped by component

    ::

        from sgpivot.scene_graph import ToyGrammar
        from sgpivot.hallucination import build_vocabularies
        from sgpivot.translation import SgPivotModel

        grammar = ToyGrammar.load()
        model = SgPivotModel(grammar, build_vocabularies(training_scenes), dimension=32)
        sorted(model.parameter_groups().keys())
      ['augmentor', 'image_head', 'lsg_encoder', 'mix_encoder', 'src_captioner', 'src_decoder', ...]

    Args:
        grammar (:obj:`ToyGrammar`): bilingual grammar fixing the node and token vocabularies

        vocabularies (:obj:`VsgVocabularies`): visual label tables

        dimension (:obj:`int`, optional): representation width. Defaults to 64

        gcn_layers (:obj:`int`, optional): layers of every graph encoder. Defaults to 2

        triaffine_hidden (:obj:`int`, optional): triaffine slices. Defaults to 4

        epsilon_logit (:obj:`float`, optional): initial bias of the empty hallucination label. Defaults to 2.0

        decoder_attention (:obj:`bool`, optional): translation decoders attend over fused nodes. Defaults to False

        max_decode_length (:obj:`int`, optional): longest generated sentence. Defaults to 12

        z_dim (:obj:`int`, optional): width of the image feature vector. Defaults to 64

        seed (:obj:`int`, optional): initializer seed. Defaults to 0
    """

    def __init__(self, grammar: ToyGrammar, vocabularies: VsgVocabularies, dimension: int = 64, gcn_layers: int = 2,
                 triaffine_hidden: int = 4, epsilon_logit: float = 2.0, decoder_attention: bool = False,
                 max_decode_length: int = 12, z_dim: int = 64, seed: int = 0) -> None:
        rng = np.random.default_rng(seed)
        self.grammars = {SRC: grammar.source_side(), TGT: grammar.target_side()}
        self.vocabularies = vocabularies
        self.settings = {"dimension": dimension, "gcn_layers": gcn_layers, "triaffine_hidden": triaffine_hidden,
                         "epsilon_logit": epsilon_logit, "decoder_attention": decoder_attention,
                         "max_decode_length": max_decode_length, "z_dim": z_dim, "seed": seed}
        self.max_decode_length = max_decode_length
        self.node_vocabulary = node_vocabulary(grammar)

        self.lsg_encoder = EncoderParams("lsg_encoder", dimension, gcn_layers, self.node_vocabulary, rng)
        self.vsg_encoder = EncoderParams("vsg_encoder", dimension, gcn_layers, self.node_vocabulary, rng)
        self.mix_encoder = EncoderParams("mix_encoder", dimension, gcn_layers, None, rng)
        self.augmentor = AugmentorParams(vocabularies, dimension, triaffine_hidden, epsilon_logit, rng)
        self.decoders = {}  # type: Dict[str, DecoderParams]
        self.captioners = {}  # type: Dict[str, DecoderParams]
        for lang in languages:
            tokens = token_vocabulary(self.grammars[lang])
            self.decoders[lang] = DecoderParams(f"{lang}_decoder", tokens, dimension, decoder_attention, rng)
            self.captioners[lang] = DecoderParams(f"{lang}_captioner", tokens, dimension, False, rng)
        limit = np.sqrt(6.0 / (dimension + z_dim))
        self.image_weight = Tensor(rng.uniform(-limit, limit, (dimension, z_dim)), requires_grad=True,
                                   name="image_head.weight")
        self.image_bias = Tensor(np.zeros(z_dim), requires_grad=True, name="image_head.bias")

    @staticmethod
    def from_parameters(grammar: ToyGrammar, vocabularies: VsgVocabularies, model: dict, z_dim: int,
                        epsilon_logit: float = 2.0):
        """Builds a model from the 'model' group of the parameter file"""
        return SgPivotModel(grammar, vocabularies, dimension=int(model["dimension"]),
                            gcn_layers=int(model["gcn_layers"]), triaffine_hidden=int(model["triaffine_hidden"]),
                            epsilon_logit=float(epsilon_logit), decoder_attention=bool(model["decoder_attention"]),
                            max_decode_length=int(model["max_decode_length"]), z_dim=int(z_dim),
                            seed=int(model["seed"]))

    def parameter_groups(self) -> Dict[str, List[Tensor]]:
        groups = {"lsg_encoder": self.lsg_encoder.parameters(), "vsg_encoder": self.vsg_encoder.parameters(),
                  "mix_encoder": self.mix_encoder.parameters(), "augmentor": self.augmentor.parameters()}
        for lang in languages:
            groups[f"{lang}_decoder"] = self.decoders[lang].parameters()
            groups[f"{lang}_captioner"] = self.captioners[lang].parameters()
        groups["image_head"] = [self.image_weight, self.image_bias]
        return groups

    def parameters(self) -> List[Tensor]:
        return [p for group in self.parameter_groups().values() for p in group]

    def named_parameters(self) -> Dict[str, Tensor]:
        return {p.name: p for p in self.parameters()}

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def matcher(self) -> ConceptMatcher:
        """Concept matcher over the current visual embedding table"""
        return ConceptMatcher(self.vsg_encoder.embedding, self.node_vocabulary)

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: p.values.copy() for name, p in self.named_parameters().items()}

    def restore(self, values: Dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters().items():
            p.values[...] = values[name]
