"""
Finite-difference verification of tape gradients
"""
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from ..exceptions import ContractError, NonDeterministicError
from .tensor import Tape, Tensor, no_grad


class GradientReport:
    """
    Result of a finite-difference check

    Results:
        max_relative_error (:obj:`float`): Largest relative error over all checked coordinates

        worst (:obj:`tuple`): (tensor name, flat index) of the largest error

        per_tensor (:obj:`dict`): Largest relative error for each tensor name

        checked (:obj:`int`): Number of coordinates compared

        both_zero (:obj:`int`): Coordinates where analytic and numeric gradients were both exactly zero
    """

    def __init__(self) -> None:
        self.max_relative_error = 0.0
        self.worst = None  # type: Tuple[str, int]
        self.per_tensor = {}  # type: Dict[str, float]
        self.checked = 0
        self.both_zero = 0
        self.records = []  # type: List[Tuple[str, int, float, float, float]]

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_relative_error < tolerance

    def failing_tensors(self, tolerance: float = 1e-4) -> List[str]:
        return sorted(k for k, v in self.per_tensor.items() if v >= tolerance)


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    if analytic == 0.0 and numeric == 0.0:
        return 0.0
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def finite_difference_check(f: Callable[[Sequence[Tensor]], Tensor], params: Sequence[Tensor],
                            epsilon: float = 1e-5, max_coordinates: int = 200, seed: int = 0,
                            floor: float = 1e-6) -> GradientReport:
    """
    Compares tape gradients with central finite differences

    Args:
        f (:obj:`Callable`): Function of the parameter list returning a scalar tensor. Must be deterministic

        params (:obj:`list`): Tensors with *requires_grad* set

        epsilon (:obj:`float`, optional): Finite-difference step. Defaults to 1e-5

        max_coordinates (:obj:`int`, optional): Above this many coordinates, a fixed-seed sample is checked

        seed (:obj:`int`, optional): Seed for coordinate sampling

        floor (:obj:`float`, optional): Smallest denominator of the relative error

    Returns:
        *report* (:obj:`GradientReport`)
    """
    params = list(params)
    if not all(p.requires_grad for p in params):
        raise ContractError("Every checked tensor needs requires_grad=True")

    with Tape() as tape:
        loss = f(params)
    if loss.values.size != 1:
        raise ContractError("Checked function must return a scalar")
    analytic = tape.backward(loss, params, accumulate=False)
    reference = loss.item()

    with no_grad():
        again = f(params).item()
    if again != reference:
        raise NonDeterministicError(f"Function evaluated to {reference!r} and then to {again!r}; check aborted")

    coordinates = [(k, i) for k, p in enumerate(params) for i in range(p.size)]
    if len(coordinates) > max_coordinates:
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(len(coordinates), size=max_coordinates, replace=False))
        coordinates = [coordinates[c] for c in chosen]

    report = GradientReport()
    for k, i in coordinates:
        p = params[k]
        name = p.name or f"tensor_{k}"
        flat = p.values.reshape(-1)
        original = flat[i]
        with no_grad():
            flat[i] = original + epsilon
            plus = f(params).item()
            flat[i] = original - epsilon
            minus = f(params).item()
        flat[i] = original
        numeric = (plus - minus) / (2.0 * epsilon)
        exact = float(analytic[p].reshape(-1)[i])
        err = relative_error(exact, numeric, floor)

        report.checked += 1
        if exact == 0.0 and numeric == 0.0:
            report.both_zero += 1
        report.records.append((name, i, exact, numeric, err))
        report.per_tensor[name] = max(report.per_tensor.get(name, 0.0), err)
        if report.worst is None or err > report.max_relative_error:
            report.max_relative_error = err
            report.worst = (name, i)
    return report
