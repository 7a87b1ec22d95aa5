# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import log_softmax

from auxcell.ac_types import AuxCellException, CheckpointError
from auxcell.ac_types.settings_models import ControllerSettingsModel
from auxcell.controller.lstm import lstm_backward, lstm_forward, lstm_init, lstm_step
from auxcell.genome import (
    NUM_OPS,
    Branch,
    CellSpec,
    ConnectivitySpec,
    Genome,
    cell_pool_size,
    connectivity_pool_size,
)
from auxcell.nn import ParamStore, load_arrays, save_arrays, step_adam


HeadName = Literal["conn", "cell", "op"]

# Fixed head widths, invalid entries are masked per step
HEAD_SIZES: Dict[HeadName, int] = {"conn": connectivity_pool_size(2), "cell": cell_pool_size(2), "op": NUM_OPS}


def _token_schedule() -> List[Tuple[HeadName, int]]:
    schedule: List[Tuple[HeadName, int]] = []
    for k in range(3):
        schedule += [("conn", connectivity_pool_size(k))] * 2
    schedule.append(("op", NUM_OPS))
    for b in range(3):
        schedule += [("cell", cell_pool_size(b))] * 2 + [("op", NUM_OPS)] * 2
    return schedule


# (head, number of valid actions) of each of the 19 decisions
TOKEN_SCHEDULE: List[Tuple[HeadName, int]] = _token_schedule()
NUM_TOKENS = len(TOKEN_SCHEDULE)
CONTROLLER_CHECKPOINT_VERSION = 1


def genome_to_tokens(genome: Genome) -> List[int]:
    """3 connectivity pairs, op0, then (i_a, i_b, op_a, op_b) per branch."""
    tokens = [i for pair in genome.connectivity.pairs for i in pair]
    tokens.append(genome.cell.op0)
    for b in genome.cell.branches:
        tokens += [b.i_a, b.i_b, b.op_a, b.op_b]
    return tokens


def tokens_to_genome(tokens: Sequence[int]) -> Genome:
    tokens = [int(t) for t in tokens]
    pairs = tuple((tokens[2 * k], tokens[2 * k + 1]) for k in range(3))
    branches = tuple(Branch(*tokens[7 + 4 * b : 11 + 4 * b]) for b in range(3))
    return Genome(ConnectivitySpec(pairs), CellSpec(tokens[6], branches))


def masked_log_softmax(logits: np.ndarray, valid: int) -> np.ndarray:
    """Log probabilities renormalised over the first `valid` actions, -inf elsewhere."""
    masked = logits.copy()
    masked[..., valid:] = -np.inf
    return log_softmax(masked, axis=-1)


@dataclass
class Rollout:
    genome: Genome
    tokens: Tuple[int, ...]
    token_logprobs: Tuple[float, ...]
    reward: Optional[float] = None
    stage_reached: int = 1

    @property
    def log_prob(self) -> float:
        return float(sum(self.token_logprobs))


def surrogate_grad(ratio: np.ndarray, advantage: np.ndarray, clip: float) -> np.ndarray:
    """
    Gradient of min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A) w.r.t. the new log probability.
    Zero wherever the clipped branch is the minimum.
    """
    unclipped = ratio * advantage
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip) * advantage
    return np.where(unclipped <= clipped, ratio * advantage, 0.0)


class Controller:
    """
    Two-layer LSTM policy emitting the 19 decisions of a genome, trained with PPO.

    Each step reads the embedding of the previous decision (a learned start embedding
    at the first step). Index decisions share one embedding table, operations have
    their own. Heads are fixed size and masked to the current pool.
    """

    def __init__(self, settings: Optional[ControllerSettingsModel] = None):
        self.settings = settings if settings is not None else ControllerSettingsModel()
        self.baseline: Optional[float] = None
        self.updates = 0

        s = self.settings
        rng = np.random.default_rng(s.seed)
        self.store = ParamStore()
        for layer in range(s.layers):
            n_input = s.embed_dim if layer == 0 else s.hidden
            self.store.add(f"lstm.l{layer}.w", lstm_init(rng, n_input, s.hidden, s.init_range), "controller")
        self.store.add("embed.index", rng.uniform(-s.init_range, s.init_range, (HEAD_SIZES["cell"], s.embed_dim)), "controller")
        self.store.add("embed.op", rng.uniform(-s.init_range, s.init_range, (NUM_OPS, s.embed_dim)), "controller")
        self.store.add("embed.start", rng.uniform(-s.init_range, s.init_range, (s.embed_dim,)), "controller")
        for head, size in HEAD_SIZES.items():
            self.store.add(f"head.{head}.w", rng.uniform(-s.init_range, s.init_range, (s.hidden, size)), "controller")
            self.store.add(f"head.{head}.b", np.zeros(size), "controller")

    def _embed(self, token: Union[int, np.ndarray], head: HeadName) -> np.ndarray:
        table = self.store["embed.op"] if head == "op" else self.store["embed.index"]
        return table[token]

    def _logits(self, h_top: np.ndarray, head: HeadName) -> np.ndarray:
        return h_top @ self.store[f"head.{head}.w"] + self.store[f"head.{head}.b"]

    def _step_distributions(self, tokens: Sequence[int], rng: Optional[np.random.Generator] = None):
        """
        Walks the decisions one step at a time. Tokens are drawn from rng once the given prefix is exhausted.
        Yields (step, log probabilities over the head, chosen token or None).
        """
        s = self.settings
        h = [np.zeros((1, s.hidden)) for _ in range(s.layers)]
        c = [np.zeros((1, s.hidden)) for _ in range(s.layers)]
        x = self.store["embed.start"][None, :]
        chosen = list(tokens)

        for t, (head, valid) in enumerate(TOKEN_SCHEDULE):
            inp = x
            for layer in range(s.layers):
                h[layer], c[layer] = lstm_step(inp, h[layer], c[layer], self.store[f"lstm.l{layer}.w"])
                inp = h[layer]
            logp = masked_log_softmax(self._logits(inp, head)[0], valid)

            if t >= len(chosen):
                if rng is None:
                    yield t, logp, None
                    return
                probs = np.exp(logp[:valid])
                chosen.append(int(rng.choice(valid, p=probs / probs.sum())))
            yield t, logp, chosen[t]
            x = self._embed(chosen[t], head)[None, :]

    def sample(self, rng: np.random.Generator) -> Rollout:
        """
        Draws the 19 decisions in order, recording the post-mask log probability of each.
        """
        tokens, logprobs = [], []
        for _, logp, token in self._step_distributions([], rng):
            tokens.append(token)
            logprobs.append(float(logp[token]))
        return Rollout(tokens_to_genome(tokens), tuple(tokens), tuple(logprobs))

    def token_distribution(self, prefix: Sequence[int] = ()) -> np.ndarray:
        """
        Probabilities of the next decision after the given prefix, over the full head width.
        """
        if len(prefix) >= NUM_TOKENS:
            raise AuxCellException(f"a genome has only {NUM_TOKENS} decisions")
        for t, logp, _ in self._step_distributions(prefix):
            if t == len(prefix):
                return np.exp(logp)
        raise AuxCellException("unreachable decision")

    # Batched re-evaluation

    def _forward(self, tokens: np.ndarray):
        """
        Teacher forced pass over a (B, 19) batch of decisions.

        Returns:
            (token log probs (B, 19), token entropies (B, 19), cache)
        """
        s = self.settings
        batch = tokens.shape[0]

        x = np.zeros((NUM_TOKENS, batch, s.embed_dim))
        x[0] = self.store["embed.start"]
        for t in range(1, NUM_TOKENS):
            x[t] = self._embed(tokens[:, t - 1], TOKEN_SCHEDULE[t - 1][0])

        layer_caches = []
        inp = x
        for layer in range(s.layers):
            inp, layer_cache = lstm_forward(inp, self.store[f"lstm.l{layer}.w"])
            layer_caches.append(layer_cache)
        top = inp

        token_logp = np.zeros((batch, NUM_TOKENS))
        entropy = np.zeros((batch, NUM_TOKENS))
        steps = []
        for t, (head, valid) in enumerate(TOKEN_SCHEDULE):
            logp = masked_log_softmax(self._logits(top[t], head), valid)
            p = np.exp(logp)
            plogp = p * np.where(np.isfinite(logp), logp, 0.0)
            token_logp[:, t] = logp[np.arange(batch), tokens[:, t]]
            entropy[:, t] = -plogp.sum(axis=1)
            steps.append({"p": p, "logp": logp, "valid": valid})

        cache = {"tokens": tokens, "top": top, "layers": layer_caches, "steps": steps}
        return token_logp, entropy, cache

    def _backward(self, cache: Dict, d_token_logp: np.ndarray, d_entropy: np.ndarray) -> None:
        """
        Accumulates parameter gradients of sum(d_token_logp * logp) + sum(d_entropy * entropy).
        """
        s = self.settings
        tokens, top = cache["tokens"], cache["top"]
        batch = tokens.shape[0]
        dtop = np.zeros_like(top)

        for t, (head, valid) in enumerate(TOKEN_SCHEDULE):
            step = cache["steps"][t]
            p, logp = step["p"], step["logp"]
            onehot = np.zeros_like(p)
            onehot[np.arange(batch), tokens[:, t]] = 1.0
            safe_logp = np.where(np.isfinite(logp), logp, 0.0)
            entropy = -(p * safe_logp).sum(axis=1, keepdims=True)
            d_ent = -p * (safe_logp + entropy)
            dlogits = d_token_logp[:, t : t + 1] * (onehot - p) + d_entropy[:, t : t + 1] * d_ent

            w = self.store[f"head.{head}.w"]
            self.store.accumulate(f"head.{head}.w", top[t].T @ dlogits)
            self.store.accumulate(f"head.{head}.b", dlogits.sum(axis=0))
            dtop[t] = dlogits @ w.T

        dx = dtop
        for layer in reversed(range(s.layers)):
            dx, dw = lstm_backward(dx, cache["layers"][layer])
            self.store.accumulate(f"lstm.l{layer}.w", dw)

        self.store.accumulate("embed.start", dx[0].sum(axis=0))
        d_index = np.zeros_like(self.store["embed.index"])
        d_op = np.zeros_like(self.store["embed.op"])
        for t in range(1, NUM_TOKENS):
            table = d_op if TOKEN_SCHEDULE[t - 1][0] == "op" else d_index
            np.add.at(table, tokens[:, t - 1], dx[t])
        self.store.accumulate("embed.index", d_index)
        self.store.accumulate("embed.op", d_op)

    def log_prob(self, genome: Genome) -> Tuple[float, np.ndarray]:
        """
        Re-evaluates a genome under the current weights.

        Returns:
            (sequence log probability, the 19 token log probabilities)
        """
        tokens = np.array([genome_to_tokens(genome)])
        token_logp, _, _ = self._forward(tokens)
        return float(token_logp[0].sum()), token_logp[0]

    def ppo_update(self, rollouts: Sequence[Rollout], rewards: Optional[Sequence[float]] = None) -> Dict[str, float]:
        """
        Clipped surrogate update, one episode per architecture: the ratio is taken over the
        whole 19 decision sequence. The advantage uses the baseline before this batch updates it.

        Returns:
            Dict[str, float]: diagnostics of the last epoch.
        """
        if not rollouts:
            raise AuxCellException("ppo_update needs at least one rollout")
        s = self.settings
        rewards = np.array([r.reward if rewards is None else rewards[i] for i, r in enumerate(rollouts)], dtype=float)
        if np.any(np.isnan(rewards)):
            raise AuxCellException("every rollout needs a reward before the update")

        if self.baseline is None:
            self.baseline = float(rewards.mean())
        advantage = rewards - self.baseline
        for reward in rewards:
            self.baseline = s.baseline_decay * self.baseline + (1.0 - s.baseline_decay) * float(reward)

        tokens = np.array([r.tokens for r in rollouts], dtype=np.int64)
        old_logp = np.array([r.log_prob for r in rollouts])
        batch = len(rollouts)

        diagnostics: Dict[str, float] = {}
        for _ in range(s.ppo_epochs):
            self.store.zero_grad()
            token_logp, entropy, cache = self._forward(tokens)
            ratio = np.exp(token_logp.sum(axis=1) - old_logp)
            g = surrogate_grad(ratio, advantage, s.ppo_clip) / batch

            # gradients of the loss: -(mean surrogate + entropy_coeff * mean sequence entropy)
            d_token_logp = -np.repeat(g[:, None], NUM_TOKENS, axis=1)
            d_entropy = -np.full((batch, NUM_TOKENS), s.entropy_coeff / batch)
            self._backward(cache, d_token_logp, d_entropy)

            grad_norm = float(np.sqrt(sum(float(np.sum(slot.grad**2)) for slot in self.store)))
            step_adam(self.store, s.lr, 0.9, 0.999, 1e-8)

            diagnostics = {
                "grad_norm": grad_norm,
                "mean_ratio": float(ratio.mean()),
                "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > s.ppo_clip)),
                "mean_advantage": float(advantage.mean()),
                "entropy": float(entropy.sum(axis=1).mean()),
                "baseline": float(self.baseline),
            }

        self.updates += 1
        logging.info(
            f"PPO update {self.updates}: grad_norm={diagnostics['grad_norm']:.4g} mean_ratio={diagnostics['mean_ratio']:.4f} "
            f"mean_advantage={diagnostics['mean_advantage']:.4f} entropy={diagnostics['entropy']:.3f}"
        )
        return diagnostics

    # Checkpoints

    def save(self, path: Union[str, Path], rng: Optional[np.random.Generator] = None) -> None:
        """
        Weights, Adam moments, the baseline and optionally the sampling generator state.
        """
        meta = {
            "controller_version": CONTROLLER_CHECKPOINT_VERSION,
            "baseline": self.baseline,
            "updates": self.updates,
            "settings": self.settings.model_dump(),
            "rng_state": rng.bit_generator.state if rng is not None else None,
        }
        save_arrays(path, self.store.state_dict(), meta, kind="controller")

    @classmethod
    def load(cls, path: Union[str, Path]) -> Tuple["Controller", Optional[np.random.Generator]]:
        """
        Returns:
            (controller, the saved sampling generator or None)
        """
        arrays, meta = load_arrays(path, kind="controller")
        if meta.get("controller_version") != CONTROLLER_CHECKPOINT_VERSION:
            raise CheckpointError(f"controller checkpoint version {meta.get('controller_version')} is not supported")

        controller = cls(ControllerSettingsModel(**meta["settings"]))
        store = ParamStore.from_state_dict(arrays, {name: "controller" for name in controller.store.slots})
        if set(store.slots) != set(controller.store.slots):
            raise CheckpointError(f"{path}: controller parameters do not match the settings")
        controller.store = store
        controller.baseline = meta["baseline"]
        controller.updates = int(meta["updates"])

        rng = None
        if meta.get("rng_state") is not None:
            rng = np.random.default_rng()
            rng.bit_generator.state = meta["rng_state"]
        return controller, rng
