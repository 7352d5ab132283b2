"""Shared test utilities: finite-difference oracles and small run configs."""

import numpy as np

from tricl.config import RunConfig
from tricl.tensor import Tensor, backward


def finite_difference(f, x0: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central finite differences of a scalar function over a flat array."""
    x0 = np.asarray(x0, dtype=np.float64)
    grad = np.zeros_like(x0)
    flat = x0.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        up = flat.copy()
        dn = flat.copy()
        up[i] += h
        dn[i] -= h
        gflat[i] = (f(up.reshape(x0.shape)) - f(dn.reshape(x0.shape))) / (2 * h)
    return grad


def check_grad(build, params: list[Tensor], h: float = 1e-4, rtol: float = 1e-4,
               atol: float = 1e-6, probe_per_param: int | None = None, rng=None):
    """Compare analytic gradients of build() (a scalar Tensor) to central FD.

    `probe_per_param` limits FD probes to a random subset of entries per
    parameter, which keeps end-to-end checks fast. Gradients below `atol`
    count as zero so FD rounding noise cannot dominate the relative error.
    """
    loss = build()
    for p in params:
        p.grad = None
    backward(loss)
    base_values = [p.values.copy() for p in params]
    worst = 0.0
    for p, base in zip(params, base_values):
        assert p.grad is not None, f"no grad for {p.name}"
        flat = base.ravel()
        idx = range(flat.size)
        if probe_per_param is not None and flat.size > probe_per_param:
            rng = rng or np.random.default_rng(0)
            idx = rng.choice(flat.size, size=probe_per_param, replace=False)
        for i in idx:
            up = flat.copy()
            up[i] += h
            p.values = up.reshape(base.shape)
            f_up = float(build().values)
            dn = flat.copy()
            dn[i] -= h
            p.values = dn.reshape(base.shape)
            f_dn = float(build().values)
            p.values = base.copy()
            fd = (f_up - f_dn) / (2 * h)
            an = float(p.grad.ravel()[i])
            denom = max(abs(fd), abs(an), atol)
            rel = abs(an - fd) / denom
            worst = max(worst, rel)
            assert rel <= rtol, f"{p.name}[{i}]: analytic {an} vs fd {fd} (rel {rel:.2e})"
    return worst


def tiny_run_config(seed: int = 0, modalities: str = "tri", epochs: int = 1, lr: float = 1e-3,
                    batch_size: int = 4) -> RunConfig:
    """Desk-scale config: 0.05 s segments, 4 wavelet scales, small encoders."""
    return RunConfig.from_dict(
        {
            "preprocess": {
                "segment_seconds": 0.05,
                "overlap_seconds": 0.0,
                "frame_length_ms": 10.0,
                "frame_shift_ms": 5.0,
                "n_scales": 4,
                "fmin_hz": 500.0,
                "fmax_hz": 4000.0,
                "wavelet_hop": 160,
                "spec_input": "stft",
            },
            "encoder": {
                "d": 8,
                "conv_channels": (4, 6),
                "transformer_layers": 1,
                "transformer_heads": 2,
                "transformer_width": 16,
                "seed": seed,
            },
            "train": {
                "batch_size": batch_size,
                "epochs": epochs,
                "lr": lr,
                "seed": seed,
                "modalities": modalities,
                "vocab_size": 280,
                "max_tokens": 64,
            },
        }
    )
