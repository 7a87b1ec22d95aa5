from .checkpoint import checkpoint_exists, load_arrays, save_arrays
from .functional import bilinear_upsample
from .layers import LayerContext
from .losses import LossResult, loss
from .network import DecoderNet, ForwardCache, backward, forward, init_params
from .optim import step_adam, step_sgd_momentum
from .params import ParamSlot, ParamStore, polyak_reset, polyak_swap_in, polyak_swap_out, polyak_update
from .trainer import PhaseConfig, evaluate, predict, swapped_in, train_phase
