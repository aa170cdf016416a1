"""
Staged training schedule and its settings
"""
from typing import FrozenSet

from ..exceptions import ContractError

_STAGES = {1: frozenset(["cma", "rec"]), 2: frozenset(["vcb", "cpb", "vsh"]),
           3: frozenset(["cma", "rec", "vcb", "cpb", "vsh"])}


def training_schedule(stage: int) -> FrozenSet[str]:
    """
    Losses optimized in each stage: alignment and reconstruction first, then back-translation together with
    hallucination, then everything together

    Raises:
        :obj:`ContractError` for stages other than 1, 2 and 3
    """
    if stage not in _STAGES:
        raise ContractError(f"Training stages are 1, 2 and 3. Got {stage}")
    return _STAGES[stage]


class ScheduleConfig:
    """
    Settings of a training run

    ::

        from sgpivot import Parameters
        from sgpivot.objectives import ScheduleConfig

        config = ScheduleConfig.from_parameters(Parameters().parameters["training"])
        config.tau = 0.05
        config.tau = 0.0  # raises ValueError
    """

    __float_fields = ["learning_rate", "tau", "alpha", "alpha_reverse", "clip_norm"]
    __int_fields = ["epochs_stage1", "epochs_stage2", "epochs_stage3", "batch_size", "seed"]
    weight_fields = ["weight_cma", "weight_rec", "weight_vcb", "weight_cpb", "weight_vsh"]

    def __init__(self, **kwargs) -> None:
        defaults = {"epochs_stage1": 30, "epochs_stage2": 30, "epochs_stage3": 20, "learning_rate": 0.05,
                    "tau": 0.1, "alpha": 0.5, "alpha_reverse": 0.5, "batch_size": 8, "seed": 0, "clip_norm": 5.0,
                    "cma_anchors": True}
        defaults.update({w: 1.0 for w in self.weight_fields})
        for key in kwargs:
            if key not in defaults:
                raise ValueError(f"ScheduleConfig has no setting '{key}'")
        for key, value in defaults.items():
            self.__dict__[key] = value
        for key, value in kwargs.items():
            setattr(self, key, value)

    def __setattr__(self, instance, value) -> None:
        check, value, message = self.__check_attributes(instance, value)
        if check:
            self.__dict__[instance] = value
        else:
            raise ValueError(message)

    def __check_attributes(self, instance, value):
        if instance not in self.__dict__:
            return False, value, f"ScheduleConfig has no setting '{instance}'"
        if instance in self.__int_fields:
            if isinstance(value, bool) or not isinstance(value, int):
                return False, value, f"{instance} needs to be an integer"
            if instance.startswith("epochs") and value < 1:
                return False, value, "Every stage needs at least one epoch"
            if instance == "batch_size" and value < 1:
                return False, value, "Batch size needs to be positive"
        elif instance in self.__float_fields or instance in self.weight_fields:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return False, value, f"{instance} needs to be a number"
            value = float(value)
            if instance in ["tau", "learning_rate", "clip_norm"] and not value > 0:
                return False, value, f"{instance} needs to be positive"
            if instance in self.weight_fields and value < 0:
                return False, value, "Loss weights cannot be negative"
        elif instance == "cma_anchors":
            if not isinstance(value, bool):
                return False, value, "cma_anchors needs to be a boolean"
        return True, value, ""

    @staticmethod
    def from_parameters(training: dict):
        """Reads the 'training' group of the parameter file"""
        return ScheduleConfig(**training)

    def epochs(self, stage: int) -> int:
        training_schedule(stage)
        return self.__dict__[f"epochs_stage{stage}"]

    @property
    def weights(self) -> dict:
        return {w[len("weight_"):]: self.__dict__[w] for w in self.weight_fields}

    def to_dict(self) -> dict:
        return dict(self.__dict__)
