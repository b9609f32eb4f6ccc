"""Acceptance gate: one test per exit criterion, run in order.

Each test prints a CRITERION line (visible with ``pytest -s``); with
``pytest -v`` the per-test PASSED/FAILED report is the canonical pass/fail
line. Criterion 10 needs a locally prepared full-scale public dataset and is
skipped unless ECGLEARN_PTBXL_DIR points at one; it is excluded from CI by
construction.
"""

import itertools
import json
import math
import os
import time

import numpy as np
import pytest

from ecglearn.config import (FilterConfig, LossConfig, ModelConfig,
                             PreprocessConfig, RunConfig)
from ecglearn.augment import AugmentConfig
from ecglearn.dataio import (BatchLoader, TaskKind, TaskSpec,
                             generate_imbalanced_binary,
                             generate_synthetic_dataset, ptbxl_split,
                             save_dataset, split_indices)
from ecglearn.errors import AutodiffError
from ecglearn.learn import (Adam, OptimizerConfig, compute_metrics, evaluate,
                            focal_loss, train_model)
from ecglearn.models import ModelSpec, build
from ecglearn.run import run_finetune, run_train
from ecglearn.signal import (EcgRecord, FilterSpec, butterworth_bandpass,
                             draw_segment_start)
from ecglearn.tensor import (Tensor, functional as F, gradcheck, gru_cell,
                             lstm_cell, multihead_attention, param_gradcheck,
                             unroll)
from ecglearn.transfer import (FineTuneMode, adapt_head, finetune,
                               load_checkpoint, save_checkpoint, tensor_hashes)
from oracles import oracle_report

GRAD_TOL = 1e-4


def announce(number: int, name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"\nCRITERION {number:2d} {name}: {status}  {detail}")
    assert ok, f"criterion {number} ({name}) failed: {detail}"


# ---------------------------------------------------------------------------
# criterion 1: gradient correctness


def _primitive_cases(seed):
    # every constant is drawn up-front: lambdas must be pure in x, or the
    # gradcheck determinism probe rejects them
    rng = np.random.default_rng(seed)

    def t(shape, scale=1.0):
        return Tensor(rng.normal(size=shape) * scale)

    add_c = t((4, 5))
    mul_c = t((4, 5))
    mm_b = t((4, 5))
    ln_mix = t((2, 5))
    sig_mix = t((3, 4))
    tanh_mix = t((3, 4))
    sm_mix = t((3, 7))
    mp_mix = t((2, 3, 5))
    ap_mix = t((2, 3, 4))
    ap2_mix = t((2, 2, 1, 4))
    cs_mix = t((2, 5))
    tr_mix = t((3, 8))
    mix23 = rng.normal(size=(2, 3))
    mix235 = rng.normal(size=(2, 3, 5))
    w_c1 = Tensor(rng.normal(size=(4, 3, 3)))
    mix_c1 = rng.normal(size=(2, 4, 5))
    w_c2 = Tensor(rng.normal(size=(3, 2, 2, 3)))
    mix_c2 = rng.normal(size=(2, 3, 3, 3))
    w_dw = Tensor(rng.normal(size=(2, 2, 2, 1)))
    mix_dw = rng.normal(size=(2, 4, 2, 5))
    gamma = Tensor(rng.normal(size=3) + 1.5)
    beta = Tensor(rng.normal(size=3))
    mix_bn = rng.normal(size=(4, 3, 6))
    mix_bn2 = rng.normal(size=(2, 3, 2, 4))
    gamma2, beta2 = Tensor(np.abs(rng.normal(size=3)) + 0.5), Tensor(rng.normal(size=3))
    rm, rv = rng.normal(size=3), np.abs(rng.normal(size=3)) + 0.5
    w_lin = Tensor(rng.normal(size=(4, 2)))
    b_lin = Tensor(rng.normal(size=2))
    gru_w = {k: Tensor(rng.normal(size=s) * 0.4) for k, s in
             (("w_ih", (3, 12)), ("w_hh", (4, 12)), ("b_ih", 12), ("b_hh", 12))}
    lstm_w = {k: Tensor(rng.normal(size=s) * 0.4) for k, s in
              (("w_ih", (3, 16)), ("w_hh", (4, 16)), ("b_ih", 16), ("b_hh", 16))}
    h0 = Tensor(rng.normal(size=(2, 4)))
    c0 = Tensor(rng.normal(size=(2, 4)))
    mix_h = rng.normal(size=(2, 4))
    eye = Tensor(np.eye(4))
    zero4 = Tensor(np.zeros(4))
    attn_mix = rng.normal(size=(2, 3, 4))
    mix_relu = rng.normal(size=(6, 4))
    mix_elu = rng.normal(size=(5, 4))

    return [
        ("add", lambda x: (x + add_c + 2.5).sum(), (4, 5)),
        ("mul", lambda x: (x * mul_c * 1.7).sum(), (4, 5)),
        ("matmul", lambda x: ((x @ mm_b) * mix235).sum(), (2, 3, 4)),
        ("conv1d", lambda x: (F.conv1d(x, w_c1, stride=2, padding=1) * mix_c1).sum(),
         (2, 3, 9)),
        ("conv2d", lambda x: (F.conv2d(x, w_c2, stride=(1, 2), padding=(1, 1))
                              * mix_c2).sum(), (2, 2, 2, 5)),
        ("depthwise_conv", lambda x: (F.depthwise_conv2d(x, w_dw, padding=(1, 0))
                                      * mix_dw).sum(), (2, 2, 1, 5)),
        ("batchnorm_train", lambda x: (F.batchnorm(
            x, gamma, beta, np.zeros(3), np.zeros(3), training=True)
            * mix_bn).sum(), (4, 3, 6)),
        ("batchnorm_eval", lambda x: (F.batchnorm(
            x, gamma, beta, rm, rv, training=False) * mix_bn).sum(), (4, 3, 6)),
        ("batchnorm2d", lambda x: (F.batchnorm(
            x, gamma2, beta2, np.zeros(3), np.zeros(3), training=True)
            * mix_bn2).sum(), (2, 3, 2, 4)),
        ("layernorm", lambda x: (F.layernorm(x, Tensor(np.ones(5)),
                                             Tensor(np.zeros(5)))
                                 * ln_mix).sum(), (2, 5)),
        ("relu", lambda x: (F.relu(x) * mix_relu).sum(), None),
        ("elu", lambda x: (F.elu(x) * mix_elu).sum(), (5, 4)),
        ("sigmoid", lambda x: (x.sigmoid() * sig_mix).sum(), (3, 4)),
        ("tanh", lambda x: (x.tanh() * tanh_mix).sum(), (3, 4)),
        ("softmax", lambda x: (F.softmax(x, axis=-1) * sm_mix).sum(), (3, 7)),
        ("logsigmoid_pow_exp", lambda x: (F.logsigmoid(x)
                                          * x.sigmoid().pow(2.0) + x.exp() * 0.01
                                          ).sum(), (5,)),
        ("maxpool1d", lambda x: (F.maxpool1d(x, 3, 2, padding=1) * mp_mix
                                 ).sum(), (2, 3, 9)),
        ("avgpool1d", lambda x: (F.avgpool1d(x, 2, 2) * ap_mix).sum(),
         (2, 3, 8)),
        ("avgpool2d", lambda x: (F.avgpool2d(x, (2, 2)) * ap2_mix).sum(),
         (2, 2, 2, 8)),
        ("global_avg_pool", lambda x: (F.global_avg_pool1d(x) * mix23).sum(),
         (2, 3, 8)),
        ("concat_slice", lambda x: (F.concat([x[:, 2:], x[:, :2]], axis=1)
                                    * cs_mix).sum(), (2, 5)),
        ("transpose_reshape", lambda x: ((x.transpose(1, 0, 2).reshape(3, 8))
                                         * tr_mix).sum(), (2, 3, 4)),
        ("linear", lambda x: (F.linear(x, w_lin, b_lin) * mix23[:, :2]).sum(),
         (2, 4)),
        ("gru_cell", lambda x: (gru_cell(x, h0, **gru_w) * mix_h).sum(), (2, 3)),
        ("lstm_cell", lambda x: (lstm_cell(x, (h0, c0), **lstm_w)[0]
                                 * mix_h).sum(), (2, 3)),
        ("unroll", lambda x: (unroll(x, [dict(w_ih=gru_w["w_ih"],
                                              w_hh=gru_w["w_hh"],
                                              b_ih=gru_w["b_ih"],
                                              b_hh=gru_w["b_hh"])],
                                     kind="gru")[1][0] * mix_h).sum(), (2, 4, 3)),
        ("attention", lambda x: (multihead_attention(
            x, x, x, 2, eye, zero4, eye, zero4, eye, zero4, eye, zero4)
            * attn_mix).sum(), (2, 3, 4)),
    ]


ARCH_GRADCHECK_HP = {
    "AlexNet1D": {"width": 4, "dropout": 0.0},
    "VGG11bn1D": {"width": 2},
    "ResNet18_1D": {"base_width": 2},
    "EEGNet2D": {"f1": 2, "depth_mult": 2, "f2": 4, "kern_length": 9,
                 "dropout": 0.0},
    "CRNN_GRU": {"base_width": 2, "hidden_size": 6, "num_layers": 2},
    "CRNN_LSTM": {"base_width": 2, "hidden_size": 6, "num_layers": 2},
    "AttResNet": {"base_width": 2, "embed_dim": 16, "num_heads": 2},
    "TransformerEnc": {"embed_dim": 8, "num_heads": 2, "num_layers": 2,
                       "ffn_dim": 16, "stem_kernel": 7, "stem_stride": 4,
                       "max_tokens": 32, "dropout": 0.0},
    "ResTransformer": {"base_width": 2, "embed_dim": 16, "num_heads": 2,
                       "num_layers": 1, "ffn_dim": 32, "max_tokens": 32,
                       "dropout": 0.0},
}


def test_criterion_01_gradient_correctness():
    started = time.time()
    worst = 0.0
    # every primitive, three seeds, exhaustive elements
    for seed in (0, 1, 2):
        rng = np.random.default_rng(seed + 1000)
        for name, f, shape in _primitive_cases(seed):
            if shape is None:  # relu: keep inputs away from the kink
                x = Tensor(np.sign(rng.normal(size=(6, 4)))
                           * (0.1 + np.abs(rng.normal(size=(6, 4)))))
            else:
                x = Tensor(rng.normal(size=shape))
            report = gradcheck(f, x, tol=GRAD_TOL)
            assert report.passed, \
                f"{name} seed {seed}: rel err {report.max_rel_err:.2e}"
            worst = max(worst, report.max_rel_err)

    # dropout must refuse gradcheck while stochastic
    drop_rng = np.random.default_rng(0)
    with pytest.raises(AutodiffError):
        gradcheck(lambda x: F.dropout(x, 0.5, drop_rng, training=True).sum(),
                  Tensor(2.0 ** np.arange(8, dtype=np.float64)))

    # every architecture at reduced width: inputs, parameters, live branches
    task = TaskSpec(TaskKind.MULTILABEL, ("a", "b", "c"))
    for arch, hp in ARCH_GRADCHECK_HP.items():
        for seed in (0, 1, 2):
            model = build(ModelSpec(arch, task, hp), seed=seed, dtype=np.float64)
            model.train_mode()
            rng = np.random.default_rng(seed + 40)
            x0 = rng.normal(size=(2, 12, 64))
            targets = (rng.random((2, 3)) < 0.5).astype(np.float64)
            rep = gradcheck(lambda x: focal_loss(model.forward(x), targets),
                            Tensor(x0), tol=GRAD_TOL, max_elements=16,
                            rng=np.random.default_rng(seed))
            assert rep.passed, f"{arch} seed {seed} input: {rep.max_rel_err:.2e}"
            worst = max(worst, rep.max_rel_err)
            x_fixed = Tensor(x0)
            prep = param_gradcheck(
                lambda: focal_loss(model.forward(x_fixed), targets),
                model.named_parameters(), tol=GRAD_TOL, samples_per_param=2,
                rng=np.random.default_rng(seed))
            assert prep.passed, f"{arch} seed {seed} params: {prep.max_rel_err:.2e}"
            worst = max(worst, prep.max_rel_err)
            model.zero_grad()
            focal_loss(model.forward(Tensor(x0)), targets).backward()
            dead = [n for n, p in model.named_parameters().items()
                    if p.grad is None or not np.any(p.grad)]
            assert not dead, f"{arch} seed {seed}: dead parameters {dead}"

    elapsed = time.time() - started
    announce(1, "gradient-correctness",
             worst < GRAD_TOL and elapsed < 600,
             f"max rel err {worst:.2e}, {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# criterion 2: filter oracle


def _independent_bandpass_gain(freq_hz, fs, low, high, order, passes):
    """Closed-form Butterworth bandpass magnitude at bilinear-prewarped
    frequencies, written from the |H|^2 = 1/(1 + x^(2N)) formula."""
    warp = lambda f: 2.0 * fs * math.tan(math.pi * f / fs)
    w, w1, w2 = warp(freq_hz), warp(low), warp(high)
    x = (w * w - w1 * w2) / ((w2 - w1) * w)
    return (1.0 / math.sqrt(1.0 + x ** (2 * order))) ** passes


def test_criterion_02_filter_oracle():
    fs = 500.0
    spec = FilterSpec(fs=fs, order=2, low_cut=1.0, high_cut=45.0)
    n = 10000
    t = np.arange(n) / fs
    worst_db = 0.0
    for freq in (0.5, 1.0, 10.0, 45.0, 60.0, 100.0):
        rec = EcgRecord(signal=np.tile(np.sin(2 * np.pi * freq * t), (12, 1)),
                        fs=fs, id=f"probe{freq}")
        out = butterworth_bandpass(rec, spec)
        sl = slice(n // 4, 3 * n // 4)
        basis = np.stack([np.sin(2 * np.pi * freq * t[sl]),
                          np.cos(2 * np.pi * freq * t[sl]),
                          np.ones(sl.stop - sl.start)], axis=1)
        coef, *_ = np.linalg.lstsq(basis, out.signal[0][sl], rcond=None)
        measured = float(np.hypot(coef[0], coef[1]))
        expected = _independent_bandpass_gain(freq, fs, 1.0, 45.0, 2, passes=2)
        db = abs(20 * math.log10(measured) - 20 * math.log10(expected))
        assert db < 0.5, f"{freq} Hz: {db:.3f} dB off (measured {measured:.3e})"
        worst_db = max(worst_db, db)

    dc = butterworth_bandpass(
        EcgRecord(signal=np.ones((12, 5000)), fs=fs, id="dc"), spec)
    dc_peak = float(np.max(np.abs(dc.signal[:, 1500:3500])))
    assert dc_peak < 1e-3, f"DC leak {dc_peak}"
    announce(2, "filter-oracle", True,
             f"worst probe {worst_db:.3f} dB, DC residue {dc_peak:.1e}")


# ---------------------------------------------------------------------------
# criterion 3: segment start sampling


def test_criterion_03_segment_start_uniformity():
    m, l, draws, bins = 5000, 2048, 10000, 32
    span = m - l + 1  # valid starts 0..2952
    rng = np.random.default_rng(424242)
    counts = np.zeros(bins)
    for _ in range(draws):
        s = draw_segment_start(m, l, rng).s
        assert 0 <= s <= m - l
        counts[s * bins // span] += 1
    # expected per bin is proportional to how many integers it covers
    ints_per_bin = np.array(
        [sum(1 for s in range(span) if s * bins // span == b) for b in range(bins)],
        dtype=np.float64)
    expected = draws * ints_per_bin / span
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    critical = 52.1914  # chi-square upper 1% point, 31 degrees of freedom
    announce(3, "segment-start-uniformity", chi2 < critical,
             f"chi2 {chi2:.2f} < {critical} (df=31, alpha=0.01)")


# ---------------------------------------------------------------------------
# criterion 4: metric oracle equivalence


def _compare_reports(scores, targets, kind=TaskKind.MULTILABEL, threshold=0.5):
    report = compute_metrics(np.asarray(scores, dtype=np.float64),
                             np.asarray(targets, dtype=np.int8), kind,
                             threshold=threshold)
    expect = oracle_report(np.asarray(scores).tolist(),
                           np.asarray(targets).astype(int).tolist(),
                           kind=kind.value, threshold=threshold)
    for m in ("accuracy", "f1", "sensitivity", "specificity", "ppv", "gmean"):
        assert getattr(report, m) == expect[m], (m, scores, targets)
    for m in ("map", "auc"):
        got, want = getattr(report, m), expect[m]
        if math.isnan(want):
            assert math.isnan(got), (m, scores, targets)
        else:
            assert abs(got - want) < 1e-12, (m, scores, targets)


def test_criterion_04_metric_oracle_equivalence():
    started = time.time()
    checked = 0
    # metrics decompose per class; single columns exhaustively up to n=4
    for n in (1, 2, 3, 4):
        for sb in itertools.product((0.0, 1.0), repeat=n):
            for tb in itertools.product((0, 1), repeat=n):
                _compare_reports(np.array(sb)[:, None], np.array(tb)[:, None])
                checked += 1
    # full matrices exhaustively while 4^(n*k) stays tractable
    for n, k in ((2, 2), (2, 3), (3, 2), (1, 3), (4, 1)):
        cells = n * k
        for sbits in itertools.product((0.0, 1.0), repeat=cells):
            for tbits in itertools.product((0, 1), repeat=cells):
                _compare_reports(np.reshape(sbits, (n, k)),
                                 np.reshape(tbits, (n, k)))
                checked += 1
    # random binary matrices at the full 4x3 size
    rng = np.random.default_rng(5150)
    for _ in range(2000):
        _compare_reports(rng.integers(0, 2, size=(4, 3)).astype(float),
                         rng.integers(0, 2, size=(4, 3)))
        checked += 1
    # a thousand random real-valued score matrices
    for _ in range(1000):
        n = int(rng.integers(2, 65))
        k = int(rng.integers(1, 6))
        scores = rng.normal(size=(n, k))
        targets = (rng.random((n, k)) < rng.uniform(0.1, 0.9)).astype(np.int8)
        _compare_reports(scores, targets, threshold=0.0)
        checked += 1
    announce(4, "metric-oracle-equivalence", True,
             f"{checked} cases, {time.time() - started:.0f}s")


# ---------------------------------------------------------------------------
# criterion 5: focal loss identities


def test_criterion_05_focal_loss_identities():
    rng = np.random.default_rng(77)
    logits = rng.normal(size=(32, 7)) * 4
    targets = (rng.random((32, 7)) < 0.35).astype(np.float64)
    focal0 = float(focal_loss(Tensor(logits), targets, gamma=0.0,
                              alpha=0.5).data)
    bce = float(np.mean(np.logaddexp(0.0, logits) - targets * logits))
    gap = abs(focal0 - 0.5 * bce)
    assert gap < 1e-9, f"gamma=0 identity off by {gap:.2e}"

    worked = float(focal_loss(Tensor(np.array([[0.0]], dtype=np.float64)),
                              np.array([[1.0]]), gamma=2.0, alpha=0.7).data)
    expected = 0.7 * 0.25 * math.log(2.0)
    assert abs(worked - expected) < 1e-6
    assert abs(worked - 0.121301) < 1e-6
    announce(5, "focal-loss-identities", True,
             f"bce gap {gap:.1e}, worked value {worked:.6f}")


# ---------------------------------------------------------------------------
# criterion 6: learnability of all nine architectures


LEARNABILITY = {
    # architecture: (hyperparams, lr, normalization)
    "AlexNet1D": ({}, 2e-4, "logscale"),
    "VGG11bn1D": ({}, 2e-4, "logscale"),
    "ResNet18_1D": ({}, 2e-4, "logscale"),
    "EEGNet2D": ({}, 1.5e-3, "zscore"),
    "CRNN_GRU": ({}, 5e-4, "l2"),
    "CRNN_LSTM": ({}, 5e-4, "l2"),
    "AttResNet": ({}, 2e-4, "l2"),
    "TransformerEnc": ({}, 1e-4, "zscore"),
    "ResTransformer": ({}, 2e-4, "zscore"),
}


def test_criterion_06_learnability_all_architectures():
    manifest, records = generate_synthetic_dataset(
        2, 32, TaskKind.MULTICLASS, seed=101, length=1200)
    results = []
    for arch, (hp, lr, norm) in LEARNABILITY.items():
        started = time.time()
        train = BatchLoader(records, manifest.task, batch_size=32,
                            segment_len=256, normalization=norm, seed=7,
                            training=True)
        train_eval = BatchLoader(records, manifest.task, batch_size=32,
                                 segment_len=256, normalization=norm, seed=7,
                                 training=False)
        model = build(ModelSpec(arch, manifest.task, hp), seed=11)
        opt = Adam(model.trainable_parameters(), lr=lr)
        reached = None
        for epoch in range(1, 201):
            model.train_mode()
            for xb, yb in train.batches(epoch):
                loss = focal_loss(model.forward(Tensor(xb)), yb)
                model.zero_grad()
                loss.backward()
                opt.step()
            accuracy = evaluate(model, train_eval).accuracy
            if accuracy >= 0.95:
                reached = epoch
                break
        elapsed = time.time() - started
        assert reached is not None, \
            f"{arch}: never reached 95% train accuracy in 200 epochs"
        assert elapsed < 900, f"{arch}: {elapsed:.0f}s exceeds the budget"
        results.append(f"{arch}@{reached}ep/{elapsed:.0f}s")
    announce(6, "learnability", True, " ".join(results))


# ---------------------------------------------------------------------------
# criterion 7: transfer learning direction


def test_criterion_07_transfer_direction(tmp_path):
    hp = {"base_width": 16, "hidden_size": 64, "num_layers": 1}
    seg = 256

    def loader(records, task, idx, training, seed, batch):
        return BatchLoader([records[i] for i in idx], task, batch_size=batch,
                           segment_len=seg, normalization="l2", seed=seed,
                           training=training)

    # source task: four signature classes, plentiful and clean
    src_manifest, src_records = generate_synthetic_dataset(
        4, 500, TaskKind.MULTICLASS, seed=900, length=1200, signature_amp=0.35)
    src_idx = split_indices(src_manifest, ptbxl_split(src_manifest))
    pre_model = build(ModelSpec("CRNN_GRU", src_manifest.task, hp), seed=500)
    train_model(pre_model,
                loader(src_records, src_manifest.task, src_idx["train"], True,
                       1, 64),
                loader(src_records, src_manifest.task, src_idx["val"], False,
                       1, 64),
                focal_loss, OptimizerConfig(lr=1e-3, batch_size=64, epochs=3,
                                            patience=99))
    ckpt_path = tmp_path / "source.ckpt"
    save_checkpoint(pre_model, {"source": "synthetic:transfer-source"},
                    ckpt_path)
    ckpt = load_checkpoint(ckpt_path)

    # target: imbalanced binary with the 824 (222/602) / 103 (39/64) layout,
    # weaker signatures and more noise
    tgt_manifest, tgt_records = generate_imbalanced_binary(
        222, 602, 39, 64, seed=901, length=1200, signature_amp=0.10, noise=0.08)
    tgt_idx = split_indices(tgt_manifest, ptbxl_split(tgt_manifest))

    def run(seed, mode):
        train = loader(tgt_records, tgt_manifest.task, tgt_idx["train"], True,
                       seed, 32)
        val = loader(tgt_records, tgt_manifest.task, tgt_idx["val"], False,
                     seed, 32)
        test = loader(tgt_records, tgt_manifest.task, tgt_idx["test"], False,
                      seed, 32)
        cfg = OptimizerConfig(lr=5e-4, batch_size=32, epochs=4, patience=99)
        if mode == "scratch":
            model = build(ModelSpec("CRNN_GRU", tgt_manifest.task, hp),
                          seed=seed)
            train_model(model, train, val, focal_loss, cfg)
        else:
            model = adapt_head(ckpt, tgt_manifest.task, seed=seed)
            finetune(model, FineTuneMode(mode), train, val, focal_loss, cfg)
        return evaluate(model, test).f1

    seeds = range(5)
    scratch = np.mean([run(s, "scratch") for s in seeds])
    ft_all = np.mean([run(s, "all") for s in seeds])
    ft_head = np.mean([run(s, "head") for s in seeds])
    ok = ft_all > scratch and ft_all >= ft_head
    announce(7, "transfer-direction", ok,
             f"finetuned(all) {ft_all:.3f} > scratch {scratch:.3f}; "
             f"all {ft_all:.3f} >= head-only {ft_head:.3f}")


# ---------------------------------------------------------------------------
# criterion 8: reproducibility


def _base_config(dataset_dir, out_dir, seed=5):
    return RunConfig(
        manifest=str(dataset_dir), out_dir=str(out_dir), seed=seed,
        preprocess=PreprocessConfig(filter=None, max_len=None, segment_len=96),
        augment=AugmentConfig(),
        model=ModelConfig(architecture="CRNN_GRU",
                          hyperparams={"base_width": 4, "hidden_size": 8,
                                       "num_layers": 1}),
        loss=LossConfig(kind="focal"),
        optimizer=OptimizerConfig(lr=1e-3, batch_size=8, epochs=3, patience=9))


def test_criterion_08_reproducibility(tmp_path):
    manifest, records = generate_synthetic_dataset(
        2, 16, TaskKind.MULTICLASS, seed=321, length=500, n_folds=10)
    ds = tmp_path / "ds"
    save_dataset(manifest, records, ds)

    run_a = run_train(_base_config(ds, tmp_path / "a"))
    run_b = run_train(_base_config(ds, tmp_path / "b"))
    history_same = (run_a / "history.csv").read_bytes() == \
        (run_b / "history.csv").read_bytes()
    hashes_a = tensor_hashes(load_checkpoint(run_a / "best.ckpt").tensors)
    hashes_b = tensor_hashes(load_checkpoint(run_b / "best.ckpt").tensors)
    params_same = hashes_a == hashes_b

    ft_a = run_finetune(_base_config(ds, tmp_path / "fa", seed=6),
                        run_a / "best.ckpt", FineTuneMode.ALL_WEIGHTS)
    ft_b = run_finetune(_base_config(ds, tmp_path / "fb", seed=6),
                        run_a / "best.ckpt", FineTuneMode.ALL_WEIGHTS)
    ft_same = ((ft_a / "history.csv").read_bytes()
               == (ft_b / "history.csv").read_bytes()
               and tensor_hashes(load_checkpoint(ft_a / "best.ckpt").tensors)
               == tensor_hashes(load_checkpoint(ft_b / "best.ckpt").tensors))
    announce(8, "reproducibility", history_same and params_same and ft_same,
             "train and finetune runs repeat bit-identically")


# ---------------------------------------------------------------------------
# criterion 9: checkpoint round-trip and head-swap discipline


def test_criterion_09_checkpoint_head_swap(tmp_path):
    task5 = TaskSpec(TaskKind.MULTILABEL, tuple(f"c{i}" for i in range(5)))
    hp = {"base_width": 4, "hidden_size": 8, "num_layers": 1}
    model = build(ModelSpec("CRNN_GRU", task5, hp), seed=2)
    model.train_mode()
    model.forward(Tensor(np.random.default_rng(0)
                         .normal(size=(4, 12, 96)).astype(np.float32)))

    path = tmp_path / "m.ckpt"
    save_checkpoint(model, {"source": "synthetic:gate"}, path)
    ckpt = load_checkpoint(path)
    state = model.state_dict()
    roundtrip_ok = all(np.array_equal(ckpt.tensors[n], state[n]) for n in state)

    task1 = TaskSpec(TaskKind.BINARY, ("positive",))
    adapted = adapt_head(ckpt, task1, seed=9)
    astate = adapted.state_dict()
    backbone_ok = all(np.array_equal(astate[n], state[n]) for n in state
                      if not n.startswith("head."))
    head_fresh = astate["head.weight"].shape == (8, 1)

    manifest, records = generate_synthetic_dataset(
        2, 12, TaskKind.BINARY, seed=55, length=500, n_folds=4)
    train = BatchLoader(records, manifest.task, batch_size=8, segment_len=96,
                        seed=3, training=True)
    val = BatchLoader(records, manifest.task, batch_size=8, segment_len=96,
                      seed=3, training=False)
    before = adapted.state_dict()
    finetune(adapted, FineTuneMode.HEAD_ONLY, train, val, focal_loss,
             OptimizerConfig(lr=1e-3, batch_size=8, epochs=2, patience=9))
    after = adapted.state_dict()
    changed = {n for n in before if not np.array_equal(before[n], after[n])}
    freeze_ok = changed == {"head.weight", "head.bias"}

    announce(9, "checkpoint-head-swap",
             roundtrip_ok and backbone_ok and head_fresh and freeze_ok,
             f"changed under head-only: {sorted(changed)}")


# ---------------------------------------------------------------------------
# criterion 10: optional full-scale benchmark (not desk scale)


@pytest.mark.skipif("ECGLEARN_PTBXL_DIR" not in os.environ,
                    reason="full-scale public-benchmark check; set "
                           "ECGLEARN_PTBXL_DIR to a prepared dataset "
                           "directory to enable (hours of CPU time)")
def test_criterion_10_full_scale_benchmark(tmp_path):
    dataset_dir = os.environ["ECGLEARN_PTBXL_DIR"]
    cfg = RunConfig(
        manifest=dataset_dir, out_dir=str(tmp_path / "ptbxl-run"), seed=0,
        preprocess=PreprocessConfig(filter=FilterConfig(), max_len=5000,
                                    segment_len=2048, normalization="l2"),
        augment=AugmentConfig(),
        model=ModelConfig(architecture="CRNN_GRU", hyperparams={}),
        loss=LossConfig(kind="focal"),
        optimizer=OptimizerConfig(lr=5e-4, batch_size=32, epochs=50,
                                  patience=10))
    run_dir = run_train(cfg)
    metrics = json.loads((run_dir / "metrics.json").read_text())
    target, tolerance = 0.761, 0.04
    announce(10, "full-scale-benchmark",
             abs(metrics["f1"] - target) <= tolerance,
             f"test macro F1 {metrics['f1']:.3f} vs {target} +/- {tolerance}")
