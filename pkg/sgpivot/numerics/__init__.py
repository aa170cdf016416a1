from .tensor import Tensor, Tape, no_grad, active_tape, as_tensor, backward
from .tensor import add, sub, mul, div, exp, log, sqrt, relu, sigmoid, tanh, tsum, tmean, reshape, index
from .tensor import take_rows, concat, stack, einsum, matmul, log_softmax
from .functions import cosine_similarity, cosine_matrix, normalize_rows, softmax, pool_mean, linear, nll
from .functions import probabilities
from .gradcheck import finite_difference_check, GradientReport, relative_error
