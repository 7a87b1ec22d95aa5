from .controller import (
    NUM_TOKENS,
    TOKEN_SCHEDULE,
    Controller,
    Rollout,
    genome_to_tokens,
    masked_log_softmax,
    surrogate_grad,
    tokens_to_genome,
)
