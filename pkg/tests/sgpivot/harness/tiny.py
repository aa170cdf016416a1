from sgpivot.hallucination import build_vocabularies
from sgpivot.objectives import ScheduleConfig
from sgpivot.scene_graph import ToyGrammar
from sgpivot.translation import SgPivotModel
from sgpivot.harness import gen_corpus

Z_DIM = 8


def tiny_corpus(seed=3, n_train=4, n_test=3, n_train_target=4):
    return gen_corpus(ToyGrammar.load(), n_train, n_test, seed, n_train_target, Z_DIM)


def tiny_model(corpus, seed=0, extra=()):
    vocabularies = build_vocabularies([ex.vsg for ex in corpus.training_examples()] + [ex.vsg for ex in extra])
    return SgPivotModel(ToyGrammar.load(), vocabularies, dimension=4, triaffine_hidden=2, max_decode_length=6,
                        z_dim=Z_DIM, seed=seed)


def one_epoch_each():
    return ScheduleConfig(epochs_stage1=1, epochs_stage2=1, epochs_stage3=1, batch_size=4)
