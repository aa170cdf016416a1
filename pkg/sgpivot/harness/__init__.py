from .corpus import Corpus, TrainExample, TestExample, gen_corpus, plant_scene, codebook, reference_audit
from .checkpoint import save_checkpoint, load_checkpoint, read_checkpoint, checkpoint_bytes, MAGIC, FORMAT_VERSION
from .bleu import evaluate_bleu, modified_precision, brevity_penalty
from .trainer import Trainer, build_model, read_metrics, metrics_line
from .evaluation import translate_examples, evaluate_translation, vsh_recovery, alignment_gap, corpus_growth
from .evaluation import hallucinate_graphs
from .gradcheck import run_gradcheck, GradcheckSummary
