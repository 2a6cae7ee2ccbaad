"""Classification metrics, inter-annotator agreement, and the deterministic
forward pass of the utterance-level emotion head.

The head is the inference side only: a softmax-weighted average over the 25
encoder layers, one hidden ReLU layer, and a 7-way softmax output. Training
lives in the extractor; weights arrive through the versioned binary format
defined here (little-endian float32 blocks in a fixed order).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import rng
from .corpus import EMOTION_LABELS, EmotionDistribution, N_LABELS
from .emotion_stats import BootstrapCI, DEFAULT_LEVEL, DEFAULT_N_BOOT, _percentiles

WEIGHT_MAGIC = b"SLWH"
WEIGHT_FORMAT_VERSION = 1
DEFAULT_HIDDEN_DIM = 128
_EVAL_STREAM = 0x4556414C


@dataclass
class SerHeadParams:
    """Weights of the layer-weighted classification head."""

    layer_logits: np.ndarray  # (n_layers,)
    hidden_w: np.ndarray  # (hidden_dim, feat_dim)
    hidden_b: np.ndarray  # (hidden_dim,)
    out_w: np.ndarray  # (n_classes, hidden_dim)
    out_b: np.ndarray  # (n_classes,)
    activation: str = "relu"
    version: str = "1"

    def __post_init__(self):
        self.layer_logits = np.asarray(self.layer_logits, dtype=np.float64)
        self.hidden_w = np.asarray(self.hidden_w, dtype=np.float64)
        self.hidden_b = np.asarray(self.hidden_b, dtype=np.float64)
        self.out_w = np.asarray(self.out_w, dtype=np.float64)
        self.out_b = np.asarray(self.out_b, dtype=np.float64)
        h, d = self.hidden_w.shape
        if self.hidden_b.shape != (h,) or self.out_w.shape[1] != h or h < 1:
            raise ValueError(
                f"inconsistent head dimensions: hidden_w {self.hidden_w.shape}, "
                f"hidden_b {self.hidden_b.shape}, out_w {self.out_w.shape}"
            )
        if self.out_b.shape != (self.out_w.shape[0],):
            raise ValueError("out bias does not match out weight rows")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation: {self.activation!r}")

    @property
    def n_layers(self) -> int:
        return int(self.layer_logits.shape[0])

    @property
    def feat_dim(self) -> int:
        return int(self.hidden_w.shape[1])

    def layer_weights(self) -> np.ndarray:
        return _softmax(self.layer_logits)


def _softmax(x: np.ndarray) -> np.ndarray:
    z = np.exp(x - x.max())
    return z / z.sum()


def ser_head_forward(layers: np.ndarray, params: SerHeadParams) -> EmotionDistribution:
    """Forward pass: softmax layer weights -> weighted layer average ->
    hidden ReLU -> output softmax. Deterministic; fixed layer and feature
    order."""
    layers = np.asarray(layers, dtype=np.float64)
    expected = (params.n_layers, params.feat_dim)
    if layers.shape != expected:
        raise ValueError(f"layer matrix has shape {layers.shape}, head expects {expected}")
    v = params.layer_weights() @ layers
    h = np.maximum(params.hidden_w @ v + params.hidden_b, 0.0)
    logits = params.out_w @ h + params.out_b
    return EmotionDistribution.from_raw(_softmax(logits))


def save_head_weights(params: SerHeadParams, path: str, extra: Optional[dict] = None) -> None:
    """Versioned header (JSON) + float32 LE blocks: layer_logits, hidden_w,
    hidden_b, out_w, out_b."""
    header = {
        "format_version": WEIGHT_FORMAT_VERSION,
        "n_layers": params.n_layers,
        "feat_dim": params.feat_dim,
        "hidden_dim": int(params.hidden_w.shape[0]),
        "n_classes": int(params.out_w.shape[0]),
        "activation": params.activation,
        "labels": list(EMOTION_LABELS),
        "version": params.version,
    }
    if extra:
        header.update(extra)
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(WEIGHT_MAGIC)
        fh.write(struct.pack("<II", WEIGHT_FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for block in (
            params.layer_logits,
            params.hidden_w,
            params.hidden_b,
            params.out_w,
            params.out_b,
        ):
            fh.write(np.ascontiguousarray(block, dtype="<f4").tobytes())


def load_head_weights(path: str) -> SerHeadParams:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != WEIGHT_MAGIC:
            raise ValueError(f"not a head weight file (magic {magic!r})")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != WEIGHT_FORMAT_VERSION:
            raise ValueError(f"unsupported weight format version {version}")
        header = json.loads(fh.read(hlen).decode("utf-8"))
        labels = header.get("labels")
        if labels != list(EMOTION_LABELS):
            raise ValueError(f"weight file label order {labels} != canonical {list(EMOTION_LABELS)}")
        nl = int(header["n_layers"])
        fd = int(header["feat_dim"])
        hd = int(header["hidden_dim"])
        nc = int(header["n_classes"])

        def block(count):
            raw = fh.read(count * 4)
            if len(raw) != count * 4:
                raise ValueError("weight file truncated")
            return np.frombuffer(raw, dtype="<f4").astype(np.float64)

        return SerHeadParams(
            layer_logits=block(nl),
            hidden_w=block(hd * fd).reshape(hd, fd),
            hidden_b=block(hd),
            out_w=block(nc * hd).reshape(nc, hd),
            out_b=block(nc),
            activation=header.get("activation", "relu"),
            version=str(header.get("version", "1")),
        )


@dataclass
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    accuracy: float
    weighted_f1: float
    per_class: dict[str, ClassScores]
    accuracy_ci: BootstrapCI
    f1_ci: BootstrapCI
    confusion: np.ndarray  # rows gold, cols predicted


def _to_label_indices(items, name: str) -> np.ndarray:
    out = np.empty(len(items), dtype=np.int64)
    for i, item in enumerate(items):
        if isinstance(item, str):
            if item not in EMOTION_LABELS:
                raise ValueError(f"{name}[{i}]: unknown label {item!r}")
            out[i] = EMOTION_LABELS.index(item)
        elif isinstance(item, EmotionDistribution):
            out[i] = EMOTION_LABELS.index(item.argmax_label())
        else:
            arr = np.asarray(item, dtype=np.float64)
            if arr.shape != (N_LABELS,):
                raise ValueError(f"{name}[{i}]: expected a label or 7-vector")
            out[i] = int(np.argmax(arr))
    return out


def _confusion(gold: np.ndarray, pred: np.ndarray) -> np.ndarray:
    cm = np.zeros((N_LABELS, N_LABELS), dtype=np.int64)
    np.add.at(cm, (gold, pred), 1)
    return cm


def _weighted_f1(cm: np.ndarray) -> float:
    support = cm.sum(axis=1)
    tp = np.diag(cm).astype(np.float64)
    pred_tot = cm.sum(axis=0)
    prec = np.divide(tp, pred_tot, out=np.zeros(N_LABELS), where=pred_tot > 0)
    rec = np.divide(tp, support, out=np.zeros(N_LABELS), where=support > 0)
    denom = prec + rec
    f1 = np.divide(2 * prec * rec, denom, out=np.zeros(N_LABELS), where=denom > 0)
    n = support.sum()
    return float((support / n * f1).sum()) if n else 0.0


def classification_report(
    gold,
    pred,
    n_boot: int = DEFAULT_N_BOOT,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> EvalReport:
    """Accuracy, weighted F1, and per-class scores with utterance-level
    bootstrap CIs. Predictions may be labels or probability vectors
    (argmax with canonical tie-breaking)."""
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} items, pred has {len(pred)}")
    if len(gold) == 0:
        raise ValueError("empty evaluation input")
    g = _to_label_indices(gold, "gold")
    p = _to_label_indices(pred, "pred")
    cm = _confusion(g, p)
    n = g.size
    accuracy = float(np.trace(cm) / n)
    weighted = _weighted_f1(cm)

    per_class: dict[str, ClassScores] = {}
    for c, label in enumerate(EMOTION_LABELS):
        tp = float(cm[c, c])
        support = int(cm[c].sum())
        pred_tot = float(cm[:, c].sum())
        prec = tp / pred_tot if pred_tot > 0 else 0.0
        rec = tp / support if support > 0 else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
        per_class[label] = ClassScores(prec, rec, f1, support)

    key = rng.seed_key(seed, _EVAL_STREAM)
    acc_stats = np.empty(n_boot)
    f1_stats = np.empty(n_boot)
    correct = (g == p).astype(np.float64)
    flat = g * N_LABELS + p
    for r in range(n_boot):
        idx = rng.bootstrap_index_matrix(key, 1, n, start=r)[0]
        acc_stats[r] = correct[idx].mean()
        cm_r = np.bincount(flat[idx], minlength=N_LABELS * N_LABELS).reshape(N_LABELS, N_LABELS)
        f1_stats[r] = _weighted_f1(cm_r)
    acc_lo, acc_hi = _percentiles(acc_stats, level)
    f1_lo, f1_hi = _percentiles(f1_stats, level)
    return EvalReport(
        accuracy=accuracy,
        weighted_f1=weighted,
        per_class=per_class,
        accuracy_ci=BootstrapCI(accuracy, acc_lo, acc_hi, level, n_boot, seed),
        f1_ci=BootstrapCI(weighted, f1_lo, f1_hi, level, n_boot, seed),
        confusion=cm,
    )


def krippendorff_alpha(annotations: Sequence[Sequence], metric: str = "nominal") -> float:
    """Krippendorff's alpha for a units x coders table with missing entries.

    Entries are labels or None. Units with fewer than two codings drop out
    of both observed and expected disagreement. Nominal metric only.
    """
    if metric != "nominal":
        raise ValueError("only the nominal metric is implemented")
    values: list[list] = []
    for row in annotations:
        coded = [v for v in row if v is not None]
        if len(coded) >= 2:
            values.append(coded)
    if not values:
        raise ValueError("no unit carries two or more codings; alpha is undefined")

    cats: dict = {}
    for row in values:
        for v in row:
            cats.setdefault(v, len(cats))
    k = len(cats)
    o = np.zeros((k, k))
    for row in values:
        m = len(row)
        # each ordered pair of distinct positions contributes 1/(m-1)
        idxs = [cats[v] for v in row]
        for i_pos, a in enumerate(idxs):
            for j_pos, b in enumerate(idxs):
                if i_pos != j_pos:
                    o[a, b] += 1.0 / (m - 1)
    n_c = o.sum(axis=1)
    n_tot = n_c.sum()
    d_o = o.sum() - np.trace(o)
    d_e = (n_tot * n_tot - (n_c * n_c).sum()) / (n_tot - 1.0)
    if d_e == 0.0:
        return 1.0  # every coding identical: perfect agreement by convention
    return float(1.0 - d_o / d_e)


def fleiss_kappa(counts, raters_per_unit: int) -> float:
    """Fleiss' kappa for a units x categories count table with a fixed
    number of raters per unit."""
    cm = np.asarray(counts, dtype=np.float64)
    if cm.ndim != 2:
        raise ValueError("counts must be a 2-D table")
    sums = cm.sum(axis=1)
    if np.any(sums != raters_per_unit):
        bad = np.flatnonzero(sums != raters_per_unit)
        raise ValueError(f"rows {bad.tolist()} do not sum to raters_per_unit={raters_per_unit}")
    n_units, _ = cm.shape
    r = float(raters_per_unit)
    p_i = ((cm * cm).sum(axis=1) - r) / (r * (r - 1.0))
    p_bar = float(p_i.mean())
    p_j = cm.sum(axis=0) / (n_units * r)
    p_e = float((p_j * p_j).sum())
    if p_e >= 1.0:
        return 1.0  # unanimous single category everywhere
    return float((p_bar - p_e) / (1.0 - p_e))
