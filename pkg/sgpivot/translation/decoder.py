"""
Recurrent sentence decoder conditioned on a pooled graph vector

The pooled vector p is the initial state and is added to every input::

    h_0 = p
    h_t = tanh((E[y_{t-1}] + p) W_x + h_{t-1} W_h + b)
    logits_t = o_t W_o + b_o,  with o_t = h_t (or h_t + attention context over node rows when enabled)
"""
from typing import List, Optional

import numpy as np

from ..encoder import BOS, EOS, Vocabulary
from ..exceptions import ContractError
from ..numerics import Tensor, einsum, linear, nll, no_grad, softmax, stack, take_rows, tanh


class DecoderParams:
    """
    Learnable tensors of one decoder

    Args:
        name (:obj:`str`): prefix of the tensor names

        vocabulary (:obj:`Vocabulary`): output tokens, including the sentence markers

        dimension (:obj:`int`): state width

        attention (:obj:`bool`, optional): attend over node rows at every step. Defaults to False

        rng (:obj:`np.random.Generator`, optional): initializer source
    """

    def __init__(self, name: str, vocabulary: Vocabulary, dimension: int, attention: bool = False,
                 rng: Optional[np.random.Generator] = None) -> None:
        if BOS not in vocabulary or EOS not in vocabulary:
            raise ContractError("Decoder vocabularies need the sentence markers")
        rng = np.random.default_rng(0) if rng is None else rng
        d, v = dimension, len(vocabulary)
        self.name = name
        self.vocabulary = vocabulary
        self.dimension = d
        self.attention = attention
        self.bos = vocabulary.index(BOS)
        self.eos = vocabulary.index(EOS)

        def param(key, values):
            return Tensor(values, requires_grad=True, name=f"{name}.{key}")

        limit = np.sqrt(6.0 / (2 * d))
        self.embedding = param("embedding", rng.normal(0.0, 1.0 / np.sqrt(d), (v, d)))
        self.w_x = param("w_x", rng.uniform(-limit, limit, (d, d)))
        self.w_h = param("w_h", rng.uniform(-limit, limit, (d, d)))
        self.bias = param("bias", np.zeros(d))
        self.w_o = param("w_o", rng.uniform(-np.sqrt(6.0 / (d + v)), np.sqrt(6.0 / (d + v)), (d, v)))
        self.b_o = param("b_o", np.zeros(v))
        self.w_a = param("w_a", rng.uniform(-limit, limit, (d, d))) if attention else None

    def parameters(self) -> List[Tensor]:
        params = [self.embedding, self.w_x, self.w_h, self.bias, self.w_o, self.b_o]
        return params + ([self.w_a] if self.w_a is not None else [])


def _step(previous: Tensor, state: Tensor, pooled: Tensor, params: DecoderParams, nodes: Optional[Tensor]):
    x = previous + pooled
    state = tanh(linear(x, params.w_x) + linear(state, params.w_h) + params.bias)
    out = state
    if params.attention and nodes is not None:
        weights = softmax(einsum("nd,de,e->n", nodes, params.w_a, state))
        out = state + einsum("n,nd->d", weights, nodes)
    return state, linear(out, params.w_o, params.b_o)


def _check(pooled: Tensor, params: DecoderParams) -> None:
    if pooled.shape != (params.dimension,):
        raise ContractError(f"Decoder '{params.name}' needs a pooled vector of size {params.dimension}")


def teacher_forced_nll(pooled: Tensor, tokens: List[str], params: DecoderParams,
                       nodes: Optional[Tensor] = None) -> Tensor:
    """
    Summed negative log-likelihood of a sentence followed by the end marker

    Raises:
        :obj:`ContractError` for empty sentences
        :obj:`OutOfVocabularyError` for tokens outside the decoder vocabulary
    """
    _check(pooled, params)
    if not tokens:
        raise ContractError("Cannot score an empty sentence")
    targets = params.vocabulary.indices(tokens) + [params.eos]
    inputs = take_rows(params.embedding, [params.bos] + targets[:-1])
    state = pooled
    logits = []
    for t in range(len(targets)):
        state, out = _step(inputs[t], state, pooled, params, nodes)
        logits.append(out)
    return nll(stack(logits, axis=0), targets)


def decode_sentence(pooled: Tensor, params: DecoderParams, max_len: int = 12,
                    nodes: Optional[Tensor] = None) -> List[str]:
    """
    Greedy decoding. Stops at the end marker (not returned) or after *max_len* tokens; never emits the start marker
    """
    _check(pooled, params)
    if max_len < 1:
        raise ContractError("max_len needs to be at least 1")
    tokens = []
    with no_grad():
        pooled = pooled.detach()
        state = pooled
        previous = params.bos
        for _ in range(max_len):
            state, logits = _step(params.embedding[previous], state, pooled, params, nodes)
            scores = logits.values.copy()
            scores[params.bos] = -np.inf
            previous = int(np.argmax(scores))
            if previous == params.eos:
                break
            tokens.append(params.vocabulary.label(previous))
    return tokens
