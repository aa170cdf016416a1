from sgpivot.starts_logging import logger
from sgpivot.parameters import Parameters
from sgpivot import numerics
from sgpivot import scene_graph
from sgpivot import encoder
from sgpivot import hallucination
from sgpivot import translation
from sgpivot import objectives
from sgpivot import harness
from sgpivot.scene_graph import SceneGraph, ToyGrammar, parse_toy_lsg
from sgpivot.translation import SgPivotModel, translate
from sgpivot.harness import Trainer, gen_corpus
from sgpivot.__version__ import release_version as __version__

name = "sgpivot"
