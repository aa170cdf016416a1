from .vocabulary import Vocabulary, node_vocabulary, token_vocabulary, BOS, EOS
from .sg_encoder import EncoderParams, NodeReps, embed_nodes, gcn_forward, encode, neighbourhood_means
