"""Encoder-decoder network over transducer actions, implemented from scratch.

A bidirectional GRU encodes the lemma characters (outputs of both
directions are summed); the decoder GRU starts from the final forward
hidden state and consumes, at each step, the embedding of the previous
action, the encoder output at the transducer pointer (hard monotonic
attention) and the multi-hot feature vector.  A linear layer plus log
softmax yields action log-likelihoods.

Training is teacher-forced with batch size 1: the pointer follows the
gold actions, the per-step log-likelihoods of the gold actions feed the
length-normalized loss

    L = -(sum_i l_i) / ln(1 + s)

and one Adam update runs per sample.  All math is float64 and all
randomness flows through a seeded generator, so training trajectories
are bit-reproducible.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np

from .actions import (
    Action,
    ActionKind,
    ActionVocab,
    TransducerState,
    initial_state,
    parse_action,
    step,
    valid_action_mask,
)
from .corpus import InflectionSample
from .patches import PatchTable, parse_table, serialize_table

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = "REINFLECT-CKPT v1"

_GATE_NAMES = ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h")


class ModelError(ValueError):
    """Raised for shape mismatches, bad checkpoints, non-finite numbers."""


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ModelConfig:
    hidden_size: int
    embed_size: int
    action_vocab_size: int
    char_vocab_size: int
    feature_dim: int
    use_patches: bool
    seed: int
    # which embedding feeds the decoder; recorded for checkpoint portability
    decoder_input: str = "prev_action"

    def __post_init__(self) -> None:
        for name in ("hidden_size", "embed_size", "action_vocab_size",
                     "char_vocab_size", "feature_dim"):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be >= 1")


@dataclass
class GRUParams:
    """Weights for one gated recurrent unit.

    Convention: h' = (1-z) * h + z * h~  with
    z = sigmoid(w_z x + u_z h + b_z), r = sigmoid(w_r x + u_r h + b_r),
    h~ = tanh(w_h x + u_h (r*h) + b_h).
    """

    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_h: np.ndarray
    u_h: np.ndarray
    b_h: np.ndarray


@dataclass
class ModelParams:
    char_emb: np.ndarray
    action_emb: np.ndarray
    enc_fwd: GRUParams
    enc_bwd: GRUParams
    dec: GRUParams
    proj_w: np.ndarray
    proj_b: np.ndarray

    def tensors(self) -> dict[str, np.ndarray]:
        """Live references to every parameter tensor, in canonical order."""
        out: dict[str, np.ndarray] = {
            "char_emb": self.char_emb,
            "action_emb": self.action_emb,
        }
        for gru_name in ("enc_fwd", "enc_bwd", "dec"):
            gru = getattr(self, gru_name)
            for gate in _GATE_NAMES:
                out[f"{gru_name}.{gate}"] = getattr(gru, gate)
        out["proj_w"] = self.proj_w
        out["proj_b"] = self.proj_b
        return out


def _init_gru(rng: np.random.Generator, hidden: int, d_in: int) -> GRUParams:
    bound = math.sqrt(1.0 / hidden)
    u = lambda *shape: rng.uniform(-bound, bound, size=shape)
    return GRUParams(
        w_z=u(hidden, d_in), u_z=u(hidden, hidden), b_z=u(hidden),
        w_r=u(hidden, d_in), u_r=u(hidden, hidden), b_r=u(hidden),
        w_h=u(hidden, d_in), u_h=u(hidden, hidden), b_h=u(hidden),
    )


def init_params(config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Uniform U(-sqrt(1/s), sqrt(1/s)) for GRU/linear weights (s = hidden
    size for GRUs, fan-in for the linear layer); N(0, 1) for embeddings."""
    h, e, f = config.hidden_size, config.embed_size, config.feature_dim
    char_emb = rng.standard_normal((config.char_vocab_size, e))
    # one extra row embeds the begin-of-sequence pseudo-action
    action_emb = rng.standard_normal((config.action_vocab_size + 1, e))
    enc_fwd = _init_gru(rng, h, e)
    enc_bwd = _init_gru(rng, h, e)
    dec = _init_gru(rng, h, e + h + f)
    bound = math.sqrt(1.0 / h)
    proj_w = rng.uniform(-bound, bound, size=(config.action_vocab_size, h))
    proj_b = rng.uniform(-bound, bound, size=config.action_vocab_size)
    return ModelParams(char_emb, action_emb, enc_fwd, enc_bwd, dec, proj_w, proj_b)


# ---------------------------------------------------------------------------
# forward primitives


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def gru_cell(x: np.ndarray, h: np.ndarray, p: GRUParams) -> np.ndarray:
    """One GRU step; see GRUParams for the gate convention."""
    if x.shape[0] != p.w_z.shape[1] or h.shape[0] != p.u_z.shape[1]:
        raise ModelError(
            f"gru_cell shape mismatch: x{x.shape} h{h.shape} "
            f"w_z{p.w_z.shape}"
        )
    z = _sigmoid(p.w_z @ x + p.u_z @ h + p.b_z)
    r = _sigmoid(p.w_r @ x + p.u_r @ h + p.b_r)
    hbar = np.tanh(p.w_h @ x + p.u_h @ (r * h) + p.b_h)
    return (1.0 - z) * h + z * hbar


def _gru_forward(x, h, p):
    z = _sigmoid(p.w_z @ x + p.u_z @ h + p.b_z)
    r = _sigmoid(p.w_r @ x + p.u_r @ h + p.b_r)
    hbar = np.tanh(p.w_h @ x + p.u_h @ (r * h) + p.b_h)
    h_new = (1.0 - z) * h + z * hbar
    return h_new, (x, h, z, r, hbar)


def _gru_backward(dh_new, cache, p: GRUParams, grads: dict, prefix: str):
    x, h, z, r, hbar = cache
    dz = dh_new * (hbar - h)
    dhbar = dh_new * z
    dh = dh_new * (1.0 - z)

    da_h = dhbar * (1.0 - hbar * hbar)
    grads[f"{prefix}.w_h"] += np.outer(da_h, x)
    grads[f"{prefix}.u_h"] += np.outer(da_h, r * h)
    grads[f"{prefix}.b_h"] += da_h
    dx = p.w_h.T @ da_h
    drh = p.u_h.T @ da_h
    dr = drh * h
    dh += drh * r

    da_z = dz * z * (1.0 - z)
    grads[f"{prefix}.w_z"] += np.outer(da_z, x)
    grads[f"{prefix}.u_z"] += np.outer(da_z, h)
    grads[f"{prefix}.b_z"] += da_z
    dx += p.w_z.T @ da_z
    dh += p.u_z.T @ da_z

    da_r = dr * r * (1.0 - r)
    grads[f"{prefix}.w_r"] += np.outer(da_r, x)
    grads[f"{prefix}.u_r"] += np.outer(da_r, h)
    grads[f"{prefix}.b_r"] += da_r
    dx += p.w_r.T @ da_r
    dh += p.u_r.T @ da_r
    return dx, dh


def log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max()
    return logits - (m + math.log(np.exp(logits - m).sum()))


def encode(
    lemma_indices: Sequence[int], params: ModelParams
) -> tuple[list[np.ndarray], np.ndarray]:
    """Bidirectional encoding; returns (summed outputs, decoder init hidden).

    The final position of ``lemma_indices`` is the sentinel, so the
    decoder always has an attendable context past the last character.
    """
    enc = _encode_forward(lemma_indices, params)
    return enc["outputs"], enc["dec_init"]


def _encode_forward(lemma_indices, params: ModelParams) -> dict:
    n = len(lemma_indices)
    if n == 0:
        raise ModelError("cannot encode an empty index sequence")
    hidden = params.enc_fwd.u_z.shape[0]
    xs = [params.char_emb[i] for i in lemma_indices]

    fwd_hs, fwd_caches = [], []
    h = np.zeros(hidden)
    for x in xs:
        h, cache = _gru_forward(x, h, params.enc_fwd)
        fwd_hs.append(h)
        fwd_caches.append(cache)

    bwd_hs: list[Optional[np.ndarray]] = [None] * n
    bwd_caches: list = [None] * n
    h = np.zeros(hidden)
    for i in range(n - 1, -1, -1):
        h, cache = _gru_forward(xs[i], h, params.enc_bwd)
        bwd_hs[i] = h
        bwd_caches[i] = cache

    outputs = [f + b for f, b in zip(fwd_hs, bwd_hs)]
    return {
        "indices": list(lemma_indices),
        "outputs": outputs,
        "dec_init": fwd_hs[-1],
        "fwd_caches": fwd_caches,
        "bwd_caches": bwd_caches,
    }


def decode_step(
    prev_action_idx: int,
    encoder_output: np.ndarray,
    feature_vec: np.ndarray,
    hidden: np.ndarray,
    params: ModelParams,
) -> tuple[np.ndarray, np.ndarray]:
    """One decoder step: returns (log probs over actions, new hidden)."""
    x = np.concatenate(
        (params.action_emb[prev_action_idx], encoder_output, feature_vec)
    )
    h_new = gru_cell(x, hidden, params.dec)
    return log_softmax(params.proj_w @ h_new + params.proj_b), h_new


def sequence_loss(step_loglikes: Sequence[float]) -> float:
    """L = -(sum of log-likelihoods) / ln(1 + s)."""
    s = len(step_loglikes)
    if s == 0:
        raise ModelError("sequence loss needs at least one step")
    return -sum(step_loglikes) / math.log(1 + s)


# ---------------------------------------------------------------------------
# vocabularies / encoding glue


@dataclass(frozen=True)
class Codec:
    """Index mappings shared by training, decoding and checkpoints."""

    chars: tuple[str, ...]
    sentinel: str
    feats: tuple[str, ...]
    vocab: ActionVocab
    char_index: dict[str, int] = field(init=False, repr=False, compare=False)
    action_index: dict[Action, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "char_index", {c: i for i, c in enumerate(self.chars)}
        )
        object.__setattr__(self, "action_index", self.vocab.index())

    @property
    def sentinel_index(self) -> int:
        return len(self.chars)

    @property
    def unk_index(self) -> int:
        return len(self.chars) + 1

    @property
    def char_vocab_size(self) -> int:
        return len(self.chars) + 2

    @property
    def bos_index(self) -> int:
        # extra action-embedding row, not a real action
        return len(self.vocab)

    def encode_lemma(self, lemma: str) -> list[int]:
        """Character indices plus the trailing sentinel; unseen -> UNK."""
        out = []
        for ch in lemma:
            idx = self.char_index.get(ch)
            if idx is None:
                logger.warning("unseen character %r mapped to UNK", ch)
                idx = self.unk_index
            out.append(idx)
        out.append(self.sentinel_index)
        return out

    def feature_vec(self, tags: Sequence[str]) -> np.ndarray:
        """Multi-hot encoding; unseen tags are dropped with a warning."""
        vec = np.zeros(len(self.feats))
        for tag in tags:
            i = self.feats.index(tag) if tag in self.feats else None
            if i is None:
                logger.warning("unseen feature tag %r dropped", tag)
            else:
                vec[i] = 1.0
        return vec

    def action_indices(self, acts: Sequence[Action]) -> list[int]:
        try:
            return [self.action_index[a] for a in acts]
        except KeyError as exc:
            raise ModelError(f"action outside vocabulary: {exc}") from None

    def config(self, hidden_size: int, embed_size: int, use_patches: bool,
               seed: int) -> ModelConfig:
        return ModelConfig(
            hidden_size=hidden_size,
            embed_size=embed_size,
            action_vocab_size=len(self.vocab),
            char_vocab_size=self.char_vocab_size,
            feature_dim=len(self.feats),
            use_patches=use_patches,
            seed=seed,
        )


def gold_pointer_path(actions_seq: Sequence[Action], lemma_len: int) -> list[int]:
    """Attention positions under gold actions; mirrors transducer MOVEs."""
    path = []
    pointer = 0
    for action in actions_seq:
        path.append(pointer)
        if action.kind is ActionKind.MOVE and pointer < lemma_len:
            pointer += 1
    return path


# ---------------------------------------------------------------------------
# training


def teacher_forced_loss(
    params: ModelParams,
    codec: Codec,
    lemma: str,
    tags: Sequence[str],
    gold: Sequence[Action],
) -> float:
    """Forward-only loss of a gold action sequence (used by gradient checks)."""
    loss, _ = _teacher_forced(params, codec, lemma, tags, gold, want_grads=False)
    return loss


def teacher_forced_grads(
    params: ModelParams,
    codec: Codec,
    lemma: str,
    tags: Sequence[str],
    gold: Sequence[Action],
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss plus full reverse-mode gradients for one sample."""
    loss, grads = _teacher_forced(params, codec, lemma, tags, gold, want_grads=True)
    return loss, grads


def _teacher_forced(params, codec, lemma, tags, gold, want_grads, require_eow=True):
    if not gold or (require_eow and gold[-1].kind is not ActionKind.EOW):
        raise ModelError("gold action sequence must end with EOW")
    indices = codec.encode_lemma(lemma)
    feature_vec = codec.feature_vec(tags)
    gold_idx = codec.action_indices(gold)
    pointers = gold_pointer_path(gold, len(lemma))

    enc = _encode_forward(indices, params)
    outputs = enc["outputs"]

    s = len(gold)
    inv_z = 1.0 / math.log(1 + s)
    h = enc["dec_init"]
    prev = codec.bos_index
    loglikes = []
    steps = []
    for t in range(s):
        x = np.concatenate((params.action_emb[prev], outputs[pointers[t]], feature_vec))
        h_new, cache = _gru_forward(x, h, params.dec)
        logits = params.proj_w @ h_new + params.proj_b
        logp = log_softmax(logits)
        loglikes.append(logp[gold_idx[t]])
        steps.append((prev, pointers[t], cache, h_new, np.exp(logp)))
        prev = gold_idx[t]
        h = h_new
    loss = -sum(loglikes) * inv_z
    if not want_grads:
        return loss, None

    grads = {name: np.zeros_like(arr) for name, arr in params.tensors().items()}
    d_outputs = [np.zeros(len(h)) for _ in outputs]
    dh_carry = np.zeros(len(h))
    embed = params.action_emb.shape[1]
    hidden = len(h)
    for t in range(s - 1, -1, -1):
        prev_t, ptr_t, cache, h_new, probs = steps[t]
        dlogits = probs.copy()
        dlogits[gold_idx[t]] -= 1.0
        dlogits *= inv_z
        grads["proj_w"] += np.outer(dlogits, h_new)
        grads["proj_b"] += dlogits
        dh = params.proj_w.T @ dlogits + dh_carry
        dx, dh_carry = _gru_backward(dh, cache, params.dec, grads, "dec")
        grads["action_emb"][prev_t] += dx[:embed]
        d_outputs[ptr_t] += dx[embed : embed + hidden]
    _encode_backward(enc, d_outputs, dh_carry, params, grads)
    return loss, grads


def _encode_backward(enc, d_outputs, d_dec_init, params: ModelParams, grads):
    n = len(d_outputs)
    hidden = len(d_dec_init)
    d_xs = [np.zeros(params.char_emb.shape[1]) for _ in range(n)]

    carry = np.zeros(hidden)
    for i in range(n - 1, -1, -1):
        dh = d_outputs[i] + carry
        if i == n - 1:
            dh = dh + d_dec_init
        dx, carry = _gru_backward(dh, enc["fwd_caches"][i], params.enc_fwd, grads, "enc_fwd")
        d_xs[i] += dx

    carry = np.zeros(hidden)
    for i in range(n):
        dh = d_outputs[i] + carry
        dx, carry = _gru_backward(dh, enc["bwd_caches"][i], params.enc_bwd, grads, "enc_bwd")
        d_xs[i] += dx

    for i, idx in enumerate(enc["indices"]):
        grads["char_emb"][idx] += d_xs[i]


@dataclass
class AdamState:
    """Adam optimizer state with decoupled-from-nothing L2 weight decay."""

    alpha: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.001
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def init_adam(params: ModelParams, **kwargs) -> AdamState:
    state = AdamState(**kwargs)
    for name, arr in params.tensors().items():
        state.m[name] = np.zeros_like(arr)
        state.v[name] = np.zeros_like(arr)
    return state


def adam_update(
    params: ModelParams, grads: dict[str, np.ndarray], state: AdamState
) -> None:
    """One Adam step with bias correction; L2 penalty is added to gradients."""
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for name, arr in params.tensors().items():
        g = grads[name]
        if not np.all(np.isfinite(g)):
            raise ModelError(f"non-finite gradient in tensor {name}")
        if state.weight_decay:
            g = g + state.weight_decay * arr
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        arr -= state.alpha * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        if not np.all(np.isfinite(arr)):
            raise ModelError(f"non-finite parameter in tensor {name}")


def train_sample(
    params: ModelParams,
    opt: AdamState,
    codec: Codec,
    sample: InflectionSample,
    gold: Sequence[Action],
) -> float:
    """Teacher-forced pass on one sample followed by one Adam update."""
    loss, grads = teacher_forced_grads(
        params, codec, sample.lemma, sample.features, gold
    )
    adam_update(params, grads, opt)
    return loss


def beam_survival_steps(
    params: ModelParams,
    codec: Codec,
    lemma: str,
    tags: Sequence[str],
    gold: Sequence[Action],
    beam_size: int,
) -> int:
    """How many gold steps survive inside a width-``beam_size`` beam.

    The beam expands with the model's own probabilities; once the gold
    prefix is no longer among the kept hypotheses, the survived step
    count is returned (early-update horizon).
    """
    indices = codec.encode_lemma(lemma)
    feature_vec = codec.feature_vec(tags)
    outputs, dec_init = encode(indices, params)
    gold_idx = codec.action_indices(gold)

    # hypothesis: (prefix action indices, hidden, prev index, pointer, cum ll)
    live = [((), dec_init, codec.bos_index, 0, 0.0)]
    for t, g in enumerate(gold_idx):
        candidates = []
        for prefix, hidden, prev, pointer, ll in live:
            logp, h_new = decode_step(
                prev, outputs[pointer], feature_vec, hidden, params
            )
            for idx in range(len(codec.vocab)):
                new_pointer = pointer
                action = codec.vocab.actions[idx]
                if action.kind is ActionKind.MOVE and pointer < len(lemma):
                    new_pointer = pointer + 1
                candidates.append(
                    (prefix + (idx,), h_new, idx, new_pointer, ll + float(logp[idx]))
                )
        candidates.sort(key=lambda c: -c[4])
        live = candidates[:beam_size]
        if not any(c[0] == tuple(gold_idx[: t + 1]) for c in live):
            return t
    return len(gold_idx)


def train_sample_beam(
    params: ModelParams,
    opt: AdamState,
    codec: Codec,
    sample: InflectionSample,
    gold: Sequence[Action],
    beam_size: int,
) -> float:
    """Early-update beam training: one Adam update on the surviving prefix.

    The gold path is scored while a beam of width ``beam_size`` tracks
    the model's preferred paths; when the gold prefix falls out of the
    beam, the loss is computed over the gold log-likelihoods up to that
    point only.  Flag-gated variant; plain teacher forcing remains the
    default training mode.
    """
    survived = beam_survival_steps(
        params, codec, sample.lemma, sample.features, gold, beam_size
    )
    # gradients need at least one surviving step
    truncated = list(gold[: max(survived, 1)])
    loss, grads = _teacher_forced(
        params, codec, sample.lemma, sample.features, truncated,
        want_grads=True, require_eow=False,
    )
    adam_update(params, grads, opt)
    return loss


# ---------------------------------------------------------------------------
# decoding


@dataclass
class BeamHypothesis:
    hidden: np.ndarray
    prev_index: int
    loglike: float
    state: TransducerState
    step_loglikes: tuple[float, ...] = ()


def beam_decode(
    params: ModelParams,
    codec: Codec,
    table: PatchTable,
    lemma: str,
    tags: Sequence[str],
    beam_size: int = 1,
    cap: Optional[int] = None,
    forbid_empty_eow: bool = False,
) -> tuple[str, float]:
    """Beam search over action sequences; beam_size=1 is greedy decoding.

    Hypotheses finish on EOW or the step cap; the finished hypothesis
    with the highest cumulative log-likelihood wins (no length
    renormalization).
    """
    if beam_size < 1:
        raise ModelError("beam size must be >= 1")
    indices = codec.encode_lemma(lemma)
    feature_vec = codec.feature_vec(tags)
    outputs, dec_init = encode(indices, params)

    live = [BeamHypothesis(dec_init, codec.bos_index, 0.0, initial_state(lemma, codec.sentinel, cap))]
    finished: list[BeamHypothesis] = []
    while live:
        candidates: list[tuple[float, int, BeamHypothesis]] = []
        order = 0
        for hyp in live:
            logp, h_new = decode_step(
                hyp.prev_index, outputs[hyp.state.pointer], feature_vec,
                hyp.hidden, params,
            )
            mask = valid_action_mask(
                hyp.state, codec.vocab, table, forbid_empty_eow=forbid_empty_eow
            )
            for idx, allowed in enumerate(mask):
                if not allowed:
                    continue
                ll = hyp.loglike + float(logp[idx])
                new_state = step(hyp.state, codec.vocab.actions[idx], table)
                candidates.append(
                    (ll, order, BeamHypothesis(
                        h_new, idx, ll, new_state,
                        hyp.step_loglikes + (float(logp[idx]),),
                    ))
                )
                order += 1
        candidates.sort(key=lambda c: (-c[0], c[1]))
        live = []
        for ll, _, hyp in candidates[:beam_size]:
            if hyp.state.done:
                finished.append(hyp)
            else:
                live.append(hyp)
        # cumulative log-likelihoods only decrease, so nothing live can
        # overtake a finished hypothesis that already dominates the beam
        if finished and live:
            best_done = max(f.loglike for f in finished)
            if best_done >= max(h.loglike for h in live):
                break
    if not finished:
        raise ModelError("beam search produced no finished hypothesis")
    best = max(finished, key=lambda f: f.loglike)
    return best.state.output, best.loglike


# ---------------------------------------------------------------------------
# checkpointing


_CONFIG_FIELDS = (
    "hidden_size", "embed_size", "action_vocab_size", "char_vocab_size",
    "feature_dim", "use_patches", "seed", "decoder_input",
)


def save_checkpoint(
    params: ModelParams,
    config: ModelConfig,
    codec: Codec,
    table: PatchTable,
    out: TextIO,
) -> None:
    """Self-describing text checkpoint with bit-exact float round-trip."""
    out.write(CHECKPOINT_MAGIC + "\n")
    for name in _CONFIG_FIELDS:
        value = getattr(config, name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        out.write(f"config {name}={value}\n")
    out.write(f"config sentinel=U+{ord(codec.sentinel):04X}\n")
    out.write(f"chars {len(codec.chars)}\n")
    for ch in codec.chars:
        out.write(ch + "\n")
    out.write(f"feats {len(codec.feats)}\n")
    for tag in codec.feats:
        out.write(tag + "\n")
    out.write(f"actions {len(codec.vocab)}\n")
    for action in codec.vocab.actions:
        out.write(action.token() + "\n")
    table_text = serialize_table(table)
    rows = table_text.count("\n")
    out.write(f"patches {rows}\n")
    out.write(table_text)
    for name, arr in params.tensors().items():
        dims = " ".join(str(d) for d in arr.shape)
        out.write(f"tensor {name} {dims}\n")
        flat = arr.reshape(-1)
        out.write(" ".join(repr(float(v)) for v in flat) + "\n")


def load_checkpoint(src: TextIO) -> tuple[ModelParams, ModelConfig, Codec, PatchTable]:
    """Inverse of save_checkpoint; validates version, shapes and counts."""
    lines = src.read().split("\n")
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise ModelError("truncated checkpoint")
        line = lines[pos]
        pos += 1
        return line

    if take() != CHECKPOINT_MAGIC:
        raise ModelError(f"bad checkpoint magic; expected {CHECKPOINT_MAGIC!r}")

    raw: dict[str, str] = {}
    while pos < len(lines) and lines[pos].startswith("config "):
        key, _, value = take()[len("config "):].partition("=")
        raw[key] = value
    try:
        config = ModelConfig(
            hidden_size=int(raw["hidden_size"]),
            embed_size=int(raw["embed_size"]),
            action_vocab_size=int(raw["action_vocab_size"]),
            char_vocab_size=int(raw["char_vocab_size"]),
            feature_dim=int(raw["feature_dim"]),
            use_patches=raw["use_patches"] == "true",
            seed=int(raw["seed"]),
            decoder_input=raw["decoder_input"],
        )
        sentinel = chr(int(raw["sentinel"][2:], 16))
    except KeyError as exc:
        raise ModelError(f"checkpoint missing config key {exc}") from None

    def block(kind: str) -> list[str]:
        header = take()
        if not header.startswith(kind + " "):
            raise ModelError(f"expected {kind!r} block, got {header!r}")
        count = int(header.split()[1])
        return [take() for _ in range(count)]

    chars = tuple(block("chars"))
    feats = tuple(block("feats"))
    action_tokens = block("actions")
    vocab = ActionVocab(tuple(parse_action(tok) for tok in action_tokens))
    table = parse_table("".join(line + "\n" for line in block("patches")))
    codec = Codec(chars, sentinel, feats, vocab)

    if codec.char_vocab_size != config.char_vocab_size:
        raise ModelError("char vocab size disagrees with config")
    if len(vocab) != config.action_vocab_size:
        raise ModelError("action vocab size disagrees with config")
    if len(feats) != config.feature_dim:
        raise ModelError("feature dim disagrees with config")

    rng = np.random.default_rng(0)
    params = init_params(config, rng)
    for name, arr in params.tensors().items():
        header = take()
        parts = header.split()
        if len(parts) < 2 or parts[0] != "tensor" or parts[1] != name:
            raise ModelError(f"expected tensor {name!r}, got {header!r}")
        dims = tuple(int(d) for d in parts[2:])
        if dims != arr.shape:
            raise ModelError(
                f"tensor {name}: shape {dims} does not match expected {arr.shape}"
            )
        values = take().split()
        if len(values) != arr.size:
            raise ModelError(
                f"tensor {name}: expected {arr.size} values, got {len(values)}"
            )
        arr[...] = np.array([float(v) for v in values]).reshape(arr.shape)
    return params, config, codec, table


def save_checkpoint_file(path: str, params, config, codec, table) -> None:
    buf = io.StringIO()
    save_checkpoint(params, config, codec, table, buf)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(buf.getvalue())


def load_checkpoint_file(path: str):
    with open(path, encoding="utf-8", newline="\n") as handle:
        return load_checkpoint(handle)
