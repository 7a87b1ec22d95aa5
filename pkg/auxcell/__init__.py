# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024

    AuxCell is a desk scale architecture search engine for compact dense prediction decoders.
    A recurrent controller emits decoder genomes, every genome is trained in two progressive
    stages (decoder only on cached encoder features, then end to end) with auxiliary cells,
    knowledge distillation and Polyak averaging, and the geometric mean of mIoU, frequency
    weighted IoU and mean pixel accuracy rewards the controller through PPO.
    Everything runs on numpy, on a CPU, on a synthetic shapes task.

    Here some examples:

    ```python

    # Decode one of the published genomes and look at it:
    >>> from auxcell import ARCH0, decode, genome_to_text_table
    >>> genome = decode(ARCH0)
    >>> print(genome_to_text_table(genome))

    # Build its decoder graph over the four encoder outputs and count its cost:
    >>> from auxcell import EncoderStub, build, estimate
    >>> sources = EncoderStub().feature_descs(48)
    >>> ir = build(genome, sources, adapt_channels=16, num_classes=5)
    >>> estimate(ir)
    (..., ...)

    ```

    ## Run a small search

    ```python
    >>> from auxcell import get_settings, merge_settings, prepare_task, run_search
    >>> settings = merge_settings(get_settings(), {"search": {"total_architectures": 16}})
    >>> artifacts = prepare_task(settings, "auxcell-work")
    >>> result = run_search(settings, artifacts, "auxcell-work/search.jsonl")
    >>> result.top_k[0]
    ('[[[...]]]', 0.6...)

    ```

    ## Command line

    ```
    auxcell prepare
    auxcell search --mode rl --archs 300 --seed 0 --workers 4
    auxcell search --mode random --archs 300 --seed 0 --workers 4
    auxcell report auxcell-work/search-rl-s0.jsonl auxcell-work/search-random-s0.jsonl --out report
    auxcell train --log auxcell-work/search-rl-s0.jsonl --top-k 10
    auxcell decode "[[[3,3],[3,2],[3,0]],[8,[0,0,5,2],[0,2,8,8],[0,5,1,4]]]"
    auxcell enumerate --out connectivities.txt
    ```
"""

from .ac_types import *
from .genome import (
    ARCH0,
    ARCH1,
    ARCH2,
    Genome,
    canonicalize,
    decode,
    encode,
    enumerate_connectivities,
    genome_to_text_table,
    sample_uniform,
    search_space_size,
)
from .graph import FeatureDesc, GraphIR, build, estimate, export_dot, strip_aux
from .nn import DecoderNet, ParamStore, loss, step_adam, step_sgd_momentum
from .controller import Controller, Rollout
from .metrics import ConfusionMatrix, reward, spearman
from .tasks import EncoderStub, prepare_task
from .search import full_train, run_ablation, run_search
from .report import SearchReport
from .settings import get_settings, merge_settings
