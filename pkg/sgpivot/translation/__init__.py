from .fusion import FusedGraph, Provenance, align_and_fuse, encode_and_pool, match_nodes, FROM_LSG, FROM_VSG, MERGED
from .decoder import DecoderParams, decode_sentence, teacher_forced_nll
from .model import SgPivotModel, SRC, TGT, languages
from .translator import translate, caption, caption_nll, translation_nll, hallucinate, fuse, fused_representation
from .translator import other
