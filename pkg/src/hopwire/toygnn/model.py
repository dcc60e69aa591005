"""Graph Transformer with input embedding and readout layers.

Per layer, with ``h`` node and ``e`` edge states and ``N(i)`` the in-neighbours
of ``i`` plus ``i`` itself::

    h_hat  = Norm(h)                        e_hat = Norm_e(e)
    logit  = ((A_k h_hat_i) . (B_k h_hat_j) + C_k e_hat_ij) / d
    a      = softmax over j in N(i)
    h_mid  = concat_k sum_j a_ijk W_k h_hat_j + h
    h_out  = FFN(Norm(h_mid)) + h_mid       e_out = FFN_e(e_hat) + e

That is the pre-norm placement. Post-norm applies each norm after its
residual sum instead. The self term ``j = i`` carries no edge feature.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

from ..errors import GraphError, NumericalError
from . import autograd as ag
from .autograd import Tensor
from .batch import PE_NONE, GraphBatch

READOUTS = ("mean-pool", "sum-pool", "cls-feature", "per-node", "root")
TASKS = ("multiclass", "per-node-multiclass", "regression")
NORMS = ("pre", "post")


@dataclass
class ModelConfig:
    d_v: int
    d_e: int = 0
    out_dim: int = 1
    hidden: int = 32
    heads: int = 4
    layers: int = 4
    readout: str = "mean-pool"
    norm: str = "pre"
    pe_kind: str = PE_NONE
    pe_dim: int = 0
    short_vocab: int = 32
    task: str = "multiclass"
    seed: int = 0

    def __post_init__(self):
        if self.hidden % self.heads:
            raise GraphError("hidden dimension must be divisible by the number of heads")
        if self.layers < 1:
            raise GraphError("need at least one layer")
        if self.readout not in READOUTS:
            raise GraphError(f"readout must be one of {READOUTS}")
        if self.norm not in NORMS:
            raise GraphError(f"norm must be one of {NORMS}")
        if self.task not in TASKS:
            raise GraphError(f"task must be one of {TASKS}")
        if self.pe_kind not in (PE_NONE, "short", "adj", "lp"):
            raise GraphError(f"unknown pe_kind {self.pe_kind!r}")
        if self.pe_kind in ("adj", "lp") and self.pe_dim < 1:
            raise GraphError("pe_dim must be set for adjacency or spectral encodings")


def _glorot(rng, fan_in, fan_out):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=(fan_in, fan_out))


class ToyModel:
    """Parameters plus a forward pass; gradients come from :mod:`.autograd`."""

    def __init__(self, config: ModelConfig):
        self.config = config
        c = config
        d = c.hidden
        rng = np.random.default_rng(c.seed)
        p: Dict[str, np.ndarray] = OrderedDict()

        if c.d_v:
            p["node_in.w"] = _glorot(rng, c.d_v, d)
        p["node_in.b"] = np.zeros(d)
        if c.d_e:
            p["edge_in.w"] = _glorot(rng, c.d_e, d)
            p["edge_in.b"] = np.zeros(d)
        if c.pe_kind == "short":
            p["pe_short.table"] = rng.normal(0.0, 1.0, size=(c.short_vocab, d))
        elif c.pe_kind == "adj":
            p["pe_adj.w"] = _glorot(rng, c.pe_dim, d)
            p["pe_adj.b"] = np.zeros(d)
        elif c.pe_kind == "lp":
            p["pe_lp.w"] = _glorot(rng, c.pe_dim, d)
            p["pe_lp.b"] = np.zeros(d)

        for layer in range(c.layers):
            pre = f"layer{layer}."
            for norm in ("norm_h", "norm_ffn", "norm_e"):
                p[pre + norm + ".gamma"] = np.ones(d)
                p[pre + norm + ".beta"] = np.zeros(d)
            # Logits are divided by the full width d. The query/key gain gives the
            # initial spread of the usual 1/sqrt(head dim) temperature, and the
            # edge-bias gain of d makes C e / d start out like an unscaled
            # attention bias. Without them attention starts nearly uniform and
            # neither content matching nor the edge encodings shape it early on.
            gain = np.sqrt(d / np.sqrt(d // c.heads))
            p[pre + "A"] = gain * _glorot(rng, d, d)
            p[pre + "B"] = gain * _glorot(rng, d, d)
            p[pre + "W"] = _glorot(rng, d, d)
            p[pre + "C"] = d * _glorot(rng, d, c.heads)
            for ffn in ("ffn", "ffn_e"):
                p[pre + ffn + ".w1"] = _glorot(rng, d, 2 * d)
                p[pre + ffn + ".b1"] = np.zeros(2 * d)
                p[pre + ffn + ".w2"] = _glorot(rng, 2 * d, d)
                p[pre + ffn + ".b2"] = np.zeros(d)

        p["readout.w1"] = _glorot(rng, d, d)
        p["readout.b1"] = np.zeros(d)
        p["readout.w2"] = _glorot(rng, d, c.out_dim)
        p["readout.b2"] = np.zeros(c.out_dim)

        self.params: Dict[str, Tensor] = OrderedDict(
            (name, Tensor(value, requires_grad=True, name=name)) for name, value in p.items()
        )

    # ------------------------------------------------------------------
    def num_parameters(self) -> int:
        return int(sum(t.data.size for t in self.params.values()))

    def state_dict(self) -> Dict[str, np.ndarray]:
        return OrderedDict((k, v.data.copy()) for k, v in self.params.items())

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        for k, v in state.items():
            self.params[k].data = np.array(v, dtype=np.float64, copy=True)

    def zero_grad(self) -> None:
        for t in self.params.values():
            t.grad = None

    def config_dict(self):
        return asdict(self.config)

    # ------------------------------------------------------------------
    def _ffn(self, x: Tensor, pre: str) -> Tensor:
        p = self.params
        # a smooth activation keeps finite differences a valid gradient reference everywhere
        hidden = ag.gelu(ag.linear(x, p[pre + ".w1"], p[pre + ".b1"]))
        return ag.linear(hidden, p[pre + ".w2"], p[pre + ".b2"])

    def _norm(self, x: Tensor, pre: str) -> Tensor:
        return ag.layer_norm(x, self.params[pre + ".gamma"], self.params[pre + ".beta"])

    def embed(self, batch: GraphBatch) -> Tuple[Tensor, Tensor]:
        c = self.config
        p = self.params
        if batch.pe_kind != c.pe_kind:
            raise GraphError(f"model expects pe_kind {c.pe_kind!r}, batch has {batch.pe_kind!r}")
        if batch.x.shape[1] != c.d_v or batch.edge_attr.shape[1] != c.d_e:
            raise GraphError("feature dimensions do not match the model configuration")
        d = c.hidden
        if c.d_v:
            h = ag.linear(Tensor(batch.x), p["node_in.w"], p["node_in.b"])
        else:
            h = ag.add(Tensor(np.zeros((batch.num_nodes, d))), p["node_in.b"])
        if c.pe_kind == "lp":
            h = h + ag.linear(Tensor(batch.node_pe), p["pe_lp.w"], p["pe_lp.b"])

        e = Tensor(np.zeros((batch.num_edges, d)))
        if c.d_e:
            e = ag.linear(Tensor(batch.edge_attr), p["edge_in.w"], p["edge_in.b"])
        if c.pe_kind == "short":
            idx = batch.edge_pe[:, 0].astype(np.int64)
            if idx.size and (idx.min() < 0 or idx.max() >= c.short_vocab):
                raise GraphError(f"shortest-path value outside embedding table of size {c.short_vocab}")
            e = e + ag.gather(p["pe_short.table"], idx)
        elif c.pe_kind == "adj":
            if batch.edge_pe.shape[1] != c.pe_dim:
                raise GraphError(f"adjacency encoding width {batch.edge_pe.shape[1]} != pe_dim {c.pe_dim}")
            e = e + ag.linear(Tensor(batch.edge_pe.astype(np.float64)), p["pe_adj.w"], p["pe_adj.b"])
        return h, e

    def _layer(
        self, layer: int, h: Tensor, e: Tensor, batch: GraphBatch, need_edges: bool = True
    ) -> Tuple[Tensor, Tensor, Tensor]:
        c = self.config
        p = self.params
        pre = f"layer{layer}."
        d, heads = c.hidden, c.heads
        dh = d // heads
        m = batch.att_src.shape[0]

        if c.norm == "pre":
            hn = self._norm(h, pre + "norm_h")
            en = self._norm(e, pre + "norm_e")
        else:
            hn, en = h, e

        q = ag.gather(ag.matmul(hn, p[pre + "A"]), batch.att_dst)
        k = ag.gather(ag.matmul(hn, p[pre + "B"]), batch.att_src)
        v = ag.gather(ag.matmul(hn, p[pre + "W"]), batch.att_src)
        dot = ag.reshape(ag.sum_last(ag.mul(ag.reshape(q, (m, heads, dh)), ag.reshape(k, (m, heads, dh)))), (m, heads))
        edge_bias = ag.concat_rows([ag.matmul(en, p[pre + "C"]), Tensor(np.zeros((1, heads)))])
        logits = ag.mul(ag.add(dot, ag.gather(edge_bias, batch.att_edge)), 1.0 / d)
        att = ag.segment_softmax(logits, batch.att_starts, batch.att_dst)
        msg = ag.mul(ag.reshape(v, (m, heads, dh)), ag.reshape(att, (m, heads, 1)))
        agg = ag.reshape(ag.segment_sum(msg, batch.att_starts, batch.att_dst), (batch.num_nodes, d))

        if c.norm == "pre":
            mid = agg + h
            h_out = self._ffn(self._norm(mid, pre + "norm_ffn"), pre + "ffn") + mid
            e_out = self._ffn(en, pre + "ffn_e") + e if need_edges else e
        else:
            mid = self._norm(agg + h, pre + "norm_h")
            h_out = self._norm(self._ffn(mid, pre + "ffn") + mid, pre + "norm_ffn")
            e_out = self._norm(self._ffn(e, pre + "ffn_e") + e, pre + "norm_e") if need_edges else e
        return h_out, e_out, att

    def _readout_input(self, h: Tensor, batch: GraphBatch) -> Tensor:
        mode = self.config.readout
        if mode in ("mean-pool", "sum-pool"):
            pooled = ag.segment_sum(h, batch.node_starts, batch.graph_ids)
            if mode == "mean-pool":
                counts = np.diff(np.append(batch.node_starts, batch.num_nodes)).astype(np.float64)
                pooled = ag.mul(pooled, (1.0 / counts)[:, None])
            return pooled
        if mode == "cls-feature":
            if np.any(batch.cls_index < 0):
                raise GraphError("cls-feature readout needs a CLS node in every graph")
            return ag.gather(h, batch.cls_index)
        if mode == "root":
            return ag.gather(h, batch.node_starts)
        return h

    def forward(self, batch: GraphBatch, return_attention: bool = False):
        """Return ``(node_states, output)`` (and per-layer attention if asked)."""
        h, e = self.embed(batch)
        attentions = []
        last = self.config.layers - 1
        for layer in range(self.config.layers):
            # the final edge update feeds nothing, so it is skipped
            h, e, att = self._layer(layer, h, e, batch, need_edges=layer < last)
            if not (np.all(np.isfinite(h.data)) and np.all(np.isfinite(e.data))):
                raise NumericalError(f"non-finite activations after layer {layer}")
            attentions.append(att.data)
        z = self._readout_input(h, batch)
        out = self._ffn(z, "readout")
        if return_attention:
            return h, out, attentions
        return h, out

    __call__ = forward


def loss(output: Tensor, batch: GraphBatch, task: str) -> Tensor:
    """Cross-entropy for (per-node) classification, mean absolute error for regression."""
    if task == "multiclass":
        if batch.y is None or output.shape[0] != batch.num_graphs:
            raise GraphError("multiclass loss needs one output row and one label per graph")
        return ag.cross_entropy(output, batch.y.astype(np.int64))
    if task == "per-node-multiclass":
        if batch.node_y is None or output.shape[0] != batch.num_nodes:
            raise GraphError("per-node loss needs node outputs and node labels")
        mask = np.flatnonzero(batch.node_y >= 0)
        return ag.cross_entropy(ag.gather(output, mask), batch.node_y[mask])
    if task == "regression":
        if batch.y is None or output.shape != (batch.num_graphs, 1):
            raise GraphError("regression loss needs a single output per graph")
        return ag.l1_loss(output, batch.y.astype(np.float64))
    raise GraphError(f"unknown task {task!r}")


def predictions(output: Tensor, batch: GraphBatch, task: str):
    """Predicted class ids (classification) or values (regression) and matching targets."""
    if task == "per-node-multiclass":
        mask = batch.node_y >= 0
        return output.data[mask].argmax(axis=1), batch.node_y[mask]
    if task == "regression":
        return output.data[:, 0], batch.y
    return output.data.argmax(axis=1), batch.y


def backward(model: ToyModel, batch: GraphBatch) -> Tuple[float, Dict[str, np.ndarray]]:
    """Loss value and the gradient of every parameter for one batch."""
    model.zero_grad()
    _, out = model.forward(batch)
    value = loss(out, batch, model.config.task)
    value.backward()
    grads = OrderedDict()
    for name, t in model.params.items():
        g = np.zeros_like(t.data) if t.grad is None else t.grad
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for parameter {name}")
        grads[name] = g
    return float(value.data), grads
