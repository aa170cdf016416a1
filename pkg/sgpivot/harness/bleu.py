"""
Corpus-level BLEU with clipped n-gram precisions and brevity penalty
"""
from collections import Counter
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ContractError


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[k:k + n]) for k in range(len(tokens) - n + 1))


def clipped_counts(hypothesis: Sequence[str], reference: Sequence[str], n: int) -> Tuple[int, int]:
    """(matches clipped by the reference counts, hypothesis n-gram total) for one sentence pair"""
    hyp, ref = ngrams(hypothesis, n), ngrams(reference, n)
    return sum(min(c, ref[g]) for g, c in hyp.items()), max(len(hypothesis) - n + 1, 0)


def corpus_counts(hypotheses: List[Sequence[str]], references: List[Sequence[str]], n: int) -> Tuple[int, int]:
    """(clipped matches, hypothesis n-gram total) summed over the corpus"""
    matches = total = 0
    for h, r in zip(hypotheses, references):
        m, t = clipped_counts(h, r, n)
        matches += m
        total += t
    return matches, total


def modified_precision(hypotheses: List[Sequence[str]], references: List[Sequence[str]], n: int,
                       smooth: bool = False) -> Optional[float]:
    """
    Clipped n-gram precision over the corpus

    Returns None when the hypotheses hold no n-gram of this order
    """
    matches, total = corpus_counts(hypotheses, references, n)
    if total == 0:
        return None
    if smooth and n > 1:
        matches, total = matches + 1, total + 1
    return matches / total


def brevity_penalty(hypothesis_length: int, reference_length: int) -> float:
    if hypothesis_length == 0:
        return 0.0
    if hypothesis_length > reference_length:
        return 1.0
    return float(np.exp(1.0 - reference_length / hypothesis_length))


def evaluate_bleu(hypotheses: List[Sequence[str]], references: List[Sequence[str]], max_n: int = 4,
                  smooth: bool = False) -> float:
    """
    Corpus BLEU in [0, 100]

    Args:
        hypotheses (:obj:`list`): token lists

        references (:obj:`list`): one reference token list per hypothesis

        max_n (:obj:`int`, optional): longest n-gram. Defaults to 4

        smooth (:obj:`bool`, optional): add one to the numerator and denominator of every order above 1, so that
        a missing higher-order match does not zero the score. Defaults to False

    Orders longer than every hypothesis are left out of the geometric mean, so a corpus scored against
    itself gives 100 whatever its sentence lengths.
    """
    if len(hypotheses) != len(references) or not hypotheses:
        raise ContractError("BLEU needs the same positive number of hypotheses and references")
    logs = []
    for n in range(1, max_n + 1):
        precision = modified_precision(hypotheses, references, n, smooth)
        if precision is None:
            continue
        if precision == 0:
            return 0.0
        logs.append(np.log(precision))
    if not logs:
        return 0.0
    bp = brevity_penalty(sum(len(h) for h in hypotheses), sum(len(r) for r in references))
    return float(100.0 * bp * np.exp(np.mean(logs)))
