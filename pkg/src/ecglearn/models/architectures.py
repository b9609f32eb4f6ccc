"""The nine classifier architectures and the build entry point.

Every network is organized as ``backbone`` (feature extraction to a fixed
vector) plus ``head`` (one linear layer emitting raw logits; sigmoid/softmax
live inside losses and metrics). The "head." name prefix is the contract used
by checkpoint head-swapping and fine-tune freezing.

CNN families (AlexNet, VGG11-bn, ResNet18) use 1-d convolutions over the 12
input channels and global average pooling before the head. The input grid
front-end treats the record as a 2-d [12 x L] image with temporal,
depthwise-spatial, and separable convolutions. CRNNs feed the ResNet
feature sequence to stacked recurrent layers and classify from the final
hidden state. Attention/transformer variants add learned positional
embeddings and pre-norm encoder layers over the feature sequence, mean-pooled
into the head.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from ..errors import ModelError, ShapeError
from ..seeding import substream
from ..signal import N_LEADS
from ..tensor import Parameter, Tensor
from ..tensor import functional as F
from .attention_layers import (LearnedPositionalEmbedding, SelfAttention,
                               TransformerEncoderLayer)
from .modules import (AvgPool2d, BatchNorm1d, BatchNorm2d, Conv1d, Conv2d,
                      DepthwiseConv2d, Dropout, ELU, GlobalAvgPool1d, LayerNorm,
                      Linear, MaxPool1d, Module, ReLU, Sequential)
from .recurrent import RecurrentStack
from .resnet import ResNetBackbone1d
from .spec import ModelSpec

__all__ = ["Model", "build", "summarize_parameters"]

HEAD_PREFIX = "head."


def _child_rng(rng: np.random.Generator) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(rng.integers(0, 2 ** 63)))


# ---------------------------------------------------------------------------
# backbones


class AlexNetBackbone(Module):
    def __init__(self, hp, rng, dtype):
        super().__init__()
        w = hp["width"]
        self.features = Sequential(
            Conv1d(N_LEADS, w, 11, rng, stride=4, padding=2, dtype=dtype), ReLU(),
            MaxPool1d(3, 2),
            Conv1d(w, 3 * w, 5, rng, padding=2, dtype=dtype), ReLU(),
            MaxPool1d(3, 2),
            Conv1d(3 * w, 6 * w, 3, rng, padding=1, dtype=dtype), ReLU(),
            Conv1d(6 * w, 4 * w, 3, rng, padding=1, dtype=dtype), ReLU(),
            Conv1d(4 * w, 4 * w, 3, rng, padding=1, dtype=dtype), ReLU(),
            MaxPool1d(3, 2),
        )
        self.pool = GlobalAvgPool1d()
        self.drop = Dropout(hp["dropout"], _child_rng(rng))
        self.out_features = 4 * w

    def forward(self, x: Tensor) -> Tensor:
        return self.drop(self.pool(self.features(x)))


class VggBackbone(Module):
    def __init__(self, hp, rng, dtype):
        super().__init__()
        w = hp["width"]
        plan = [w, "M", 2 * w, "M", 4 * w, 4 * w, "M", 8 * w, 8 * w, "M",
                8 * w, 8 * w, "M"]
        layers: list[Module] = []
        in_c = N_LEADS
        for item in plan:
            if item == "M":
                layers.append(MaxPool1d(2, 2))
            else:
                layers += [Conv1d(in_c, item, 3, rng, padding=1, dtype=dtype,
                                  bias=False),
                           BatchNorm1d(item, dtype), ReLU()]
                in_c = item
        self.features = Sequential(*layers)
        self.pool = GlobalAvgPool1d()
        self.out_features = 8 * w

    def forward(self, x: Tensor) -> Tensor:
        return self.pool(self.features(x))


class ResNetClassifierBackbone(Module):
    def __init__(self, hp, rng, dtype):
        super().__init__()
        self.resnet = ResNetBackbone1d(N_LEADS, hp["base_width"], rng, dtype)
        self.pool = GlobalAvgPool1d()
        self.out_features = self.resnet.out_channels

    def forward(self, x: Tensor) -> Tensor:
        return self.pool(self.resnet(x))


class GridConvBackbone(Module):
    """Treats the record as a 2-d [12 x L] grid (compact EEG-style network)."""

    def __init__(self, hp, rng, dtype):
        super().__init__()
        f1, d, f2 = hp["f1"], hp["depth_mult"], hp["f2"]
        kern = hp["kern_length"]
        self.temporal = Conv2d(1, f1, (1, kern), rng, padding=(0, kern // 2),
                               dtype=dtype, bias=False)
        self.bn1 = BatchNorm2d(f1, dtype)
        self.spatial = DepthwiseConv2d(f1, d, (N_LEADS, 1), rng, dtype=dtype,
                                       bias=False)
        self.bn2 = BatchNorm2d(f1 * d, dtype)
        self.act = ELU()
        self.pool1 = AvgPool2d((1, 4))
        self.drop1 = Dropout(hp["dropout"], _child_rng(rng))
        self.sep_depth = DepthwiseConv2d(f1 * d, 1, (1, 16), rng,
                                         padding=(0, 8), dtype=dtype, bias=False)
        self.sep_point = Conv2d(f1 * d, f2, (1, 1), rng, dtype=dtype, bias=False)
        self.bn3 = BatchNorm2d(f2, dtype)
        self.pool2 = AvgPool2d((1, 8))
        self.drop2 = Dropout(hp["dropout"], _child_rng(rng))
        self.out_features = f2

    def forward(self, x: Tensor) -> Tensor:
        B, C, L = x.shape
        x = x.reshape(B, 1, C, L)
        # activation between the norm layers: a norm -> linear -> norm
        # sandwich would cancel the first norm's affine shift exactly,
        # leaving it without gradient
        x = self.act(self.bn1(self.temporal(x)))
        x = self.drop1(self.pool1(self.act(self.bn2(self.spatial(x)))))
        x = self.sep_point(self.sep_depth(x))
        x = self.drop2(self.pool2(self.act(self.bn3(x))))
        B2, C2, H2, W2 = x.shape
        return F.global_avg_pool1d(x.reshape(B2, C2 * H2, W2))


class CrnnBackbone(Module):
    def __init__(self, hp, kind: str, rng, dtype):
        super().__init__()
        self.resnet = ResNetBackbone1d(N_LEADS, hp["base_width"], rng, dtype)
        self.rnn = RecurrentStack(kind, self.resnet.out_channels,
                                  hp["hidden_size"], hp["num_layers"], rng, dtype)
        self.out_features = hp["hidden_size"]

    def forward(self, x: Tensor) -> Tensor:
        seq = self.resnet(x).transpose(0, 2, 1)   # [B, T, C]
        _, final = self.rnn(seq)
        return final


class AttResNetBackbone(Module):
    def __init__(self, hp, rng, dtype):
        super().__init__()
        self.resnet = ResNetBackbone1d(N_LEADS, hp["base_width"], rng, dtype)
        if hp["embed_dim"] != self.resnet.out_channels:
            raise ModelError(
                f"embed_dim {hp['embed_dim']} must equal the feature width "
                f"{self.resnet.out_channels} (8 * base_width)")
        self.attn = SelfAttention(hp["embed_dim"], hp["num_heads"], rng, dtype)
        self.out_features = hp["embed_dim"]

    def forward(self, x: Tensor) -> Tensor:
        seq = self.resnet(x).transpose(0, 2, 1)
        seq = seq + self.attn(seq)
        return seq.mean(axis=1)


class TransformerBackbone(Module):
    def __init__(self, hp, rng, dtype):
        super().__init__()
        e = hp["embed_dim"]
        self.stem = Conv1d(N_LEADS, e, hp["stem_kernel"], rng,
                           stride=hp["stem_stride"],
                           padding=hp["stem_kernel"] // 2, dtype=dtype)
        self.posemb = LearnedPositionalEmbedding(hp["max_tokens"], e, rng, dtype)
        for li in range(hp["num_layers"]):
            setattr(self, f"enc{li}",
                    TransformerEncoderLayer(e, hp["num_heads"], hp["ffn_dim"],
                                            hp["dropout"], rng, dtype))
        self.num_layers = hp["num_layers"]
        self.final_ln = LayerNorm(e, dtype)
        self.out_features = e

    def forward(self, x: Tensor) -> Tensor:
        seq = self.stem(x).transpose(0, 2, 1)
        seq = self.posemb(seq)
        for li in range(self.num_layers):
            seq = getattr(self, f"enc{li}")(seq)
        return self.final_ln(seq).mean(axis=1)


class ResTransformerBackbone(Module):
    def __init__(self, hp, rng, dtype):
        super().__init__()
        self.resnet = ResNetBackbone1d(N_LEADS, hp["base_width"], rng, dtype)
        e = hp["embed_dim"]
        if e != self.resnet.out_channels:
            raise ModelError(
                f"embed_dim {e} must equal the feature width "
                f"{self.resnet.out_channels} (8 * base_width)")
        self.posemb = LearnedPositionalEmbedding(hp["max_tokens"], e, rng, dtype)
        for li in range(hp["num_layers"]):
            setattr(self, f"enc{li}",
                    TransformerEncoderLayer(e, hp["num_heads"], hp["ffn_dim"],
                                            hp["dropout"], rng, dtype))
        self.num_layers = hp["num_layers"]
        self.final_ln = LayerNorm(e, dtype)
        self.out_features = e

    def forward(self, x: Tensor) -> Tensor:
        seq = self.resnet(x).transpose(0, 2, 1)
        seq = self.posemb(seq)
        for li in range(self.num_layers):
            seq = getattr(self, f"enc{li}")(seq)
        return self.final_ln(seq).mean(axis=1)


class Classifier(Module):
    def __init__(self, backbone: Module, k: int, rng, dtype):
        super().__init__()
        self.backbone = backbone
        self.head = Linear(backbone.out_features, k, rng, dtype,
                           init_kind="xavier")

    def forward(self, x: Tensor) -> Tensor:
        return self.head(self.backbone(x))


_BUILDERS = {
    "AlexNet1D": lambda hp, rng, dt: AlexNetBackbone(hp, rng, dt),
    "VGG11bn1D": lambda hp, rng, dt: VggBackbone(hp, rng, dt),
    "ResNet18_1D": lambda hp, rng, dt: ResNetClassifierBackbone(hp, rng, dt),
    "EEGNet2D": lambda hp, rng, dt: GridConvBackbone(hp, rng, dt),
    "CRNN_LSTM": lambda hp, rng, dt: CrnnBackbone(hp, "lstm", rng, dt),
    "CRNN_GRU": lambda hp, rng, dt: CrnnBackbone(hp, "gru", rng, dt),
    "AttResNet": lambda hp, rng, dt: AttResNetBackbone(hp, rng, dt),
    "TransformerEnc": lambda hp, rng, dt: TransformerBackbone(hp, rng, dt),
    "ResTransformer": lambda hp, rng, dt: ResTransformerBackbone(hp, rng, dt),
}

_MIN_INPUT_LEN = {
    "AlexNet1D": 63, "VGG11bn1D": 32, "ResNet18_1D": 1, "EEGNet2D": 27,
    "CRNN_LSTM": 1, "CRNN_GRU": 1, "AttResNet": 1, "TransformerEnc": 1,
    "ResTransformer": 1,
}


class Model:
    """A built network: spec, parameter namespace, and train/eval mode."""

    def __init__(self, spec: ModelSpec, net: Module, seed: int):
        self.spec = spec
        self.net = net
        self.seed = seed
        self.min_input_len = _MIN_INPUT_LEN[spec.architecture]
        self.head_prefix = HEAD_PREFIX
        for name, p in net.named_parameters():
            p.name = name

    def forward(self, x) -> Tensor:
        if not isinstance(x, Tensor):
            x = Tensor(x)
        if x.ndim != 3 or x.shape[1] != N_LEADS:
            raise ShapeError(
                f"{self.spec.architecture} expects input [B, {N_LEADS}, L], "
                f"got {x.shape}")
        if x.shape[2] < self.min_input_len:
            raise ShapeError(
                f"{self.spec.architecture} requires input length >= "
                f"{self.min_input_len}, got {x.shape[2]}")
        return self.net(x)

    __call__ = forward

    # -- mode and state --------------------------------------------------------

    def train_mode(self) -> "Model":
        self.net.train(True)
        return self

    def eval_mode(self) -> "Model":
        self.net.train(False)
        return self

    def named_parameters(self) -> "OrderedDict[str, Parameter]":
        return OrderedDict(self.net.named_parameters())

    def trainable_parameters(self) -> "OrderedDict[str, Parameter]":
        return OrderedDict((n, p) for n, p in self.net.named_parameters()
                           if p.requires_grad)

    def state_dict(self) -> dict[str, np.ndarray]:
        return self.net.state_dict()

    def load_state_dict(self, state: dict[str, np.ndarray]):
        self.net.load_state_dict(state)

    def zero_grad(self):
        self.net.zero_grad()

    def astype(self, dtype) -> "Model":
        self.net.astype(dtype)
        return self

    # -- freezing ----------------------------------------------------------------

    def head_parameter_names(self) -> set[str]:
        return {n for n in self.named_parameters() if n.startswith(self.head_prefix)}

    def freeze_backbone(self) -> "Model":
        """Make only head parameters trainable; backbone stays in eval mode
        (so normalization statistics and dropout cannot change it)."""
        for name, p in self.net.named_parameters():
            if not name.startswith(self.head_prefix):
                p.requires_grad = False
        self.net.backbone.force_eval = True
        self.net.backbone.train(False)
        return self

    def unfreeze_all(self) -> "Model":
        for p in self.net.parameters():
            p.requires_grad = True
        self.net.backbone.force_eval = False
        return self


def build(spec: ModelSpec, seed: int, dtype=np.float32) -> Model:
    """Instantiate a spec with seeded initialization.

    Two builds with the same spec/seed/dtype are bit-identical. Convolutions
    and linear layers feeding ReLU/ELU use He-uniform; recurrent, attention,
    and head projections use Xavier-uniform; norm layers start at
    gamma=1/beta=0; biases start at zero.
    """
    rng = substream(seed, "model-init", spec.architecture)
    backbone = _BUILDERS[spec.architecture](spec.hyperparams, rng, dtype)
    net = Classifier(backbone, spec.k, rng, dtype)
    return Model(spec, net, seed)


def summarize_parameters(model: Model) -> tuple[list[tuple[str, tuple, int]], int]:
    """(name, shape, count) per parameter in stable traversal order, plus total."""
    rows = [(name, tuple(p.shape), int(p.size))
            for name, p in model.named_parameters().items()]
    return rows, sum(r[2] for r in rows)
