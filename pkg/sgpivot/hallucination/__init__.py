from .vocabularies import VsgVocabularies, build_vocabularies, EPSILON
from .augmentors import AugmentorParams, node_augment_scores, node_relation_label, relation_augment_scores
from .augmentors import NodeAugmentation, PairAugmentation, candidate_pairs, path_representation
from .skeleton import ConceptMatcher, sketch_skeleton
from .completion import complete_vision, HallucinationConfig
from .supervision import hallucination_targets, vsh_loss, recovery_counts, HallucinationTargets
