"""Dense float64 tensor helpers: distances, padding and a direct 2-D convolution.

Tensors are plain ``numpy.ndarray`` objects of dtype float64. The convolution
routines are deliberately direct (no FFT); they exist to check shape and
receptive-field bookkeeping, not to be fast.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ArgumentError, ParseError, ShapeError

PAD_MODES = ("reflect", "zero")
TENSOR_MAGIC = b"TNSR"


def as_tensor(x) -> np.ndarray:
    """Coerce ``x`` to a float64 array with every extent >= 1."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if any(n < 1 for n in arr.shape):
        raise ShapeError(f"tensor extents must be >= 1, got {arr.shape}")
    return arr


def _same_dims(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: dimension mismatch {a.shape} vs {b.shape}")


def l1_mean(a, b) -> float:
    """Mean absolute difference over all elements."""
    a, b = as_tensor(a), as_tensor(b)
    _same_dims(a, b, "l1_mean")
    return float(np.mean(np.abs(a - b)))


def euclidean(a, b) -> float:
    """Euclidean (L2) distance between two equally shaped tensors."""
    a, b = as_tensor(a), as_tensor(b)
    _same_dims(a, b, "euclidean")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _check_chw(x: np.ndarray, name: str) -> None:
    if x.ndim != 3:
        raise ShapeError(f"{name}: expected a (C, H, W) tensor, got shape {x.shape}")


def pad2d(x, amount: int, mode: str = "zero") -> np.ndarray:
    """Pad the two spatial axes of a (C, H, W) tensor by ``amount`` on every side.

    ``reflect`` mirrors about the edge element without repeating it, so it
    needs ``amount`` strictly smaller than both spatial extents.
    """
    x = as_tensor(x)
    _check_chw(x, "pad2d")
    if mode not in PAD_MODES:
        raise ArgumentError(f"unknown pad mode {mode!r}")
    if amount < 0:
        raise ArgumentError(f"padding must be >= 0, got {amount}")
    if amount == 0:
        return x.copy()
    _, h, w = x.shape
    if mode == "reflect":
        if amount >= h or amount >= w:
            raise ArgumentError(
                f"reflect padding {amount} too large for spatial extent {h}x{w}"
            )
        return np.pad(x, ((0, 0), (amount, amount), (amount, amount)), mode="reflect")
    return np.pad(x, ((0, 0), (amount, amount), (amount, amount)), mode="constant")


def conv_output_extent(n: int, kernel: int, stride: int, padding: int) -> int:
    return (n + 2 * padding - kernel) // stride + 1


def conv2d(x, weights, stride: int = 1, padding: int = 0, pad_mode: str = "zero",
           bias=None) -> np.ndarray:
    """Direct cross-correlation of a (Cin, H, W) input with (Cout, Cin, k, k) weights."""
    x = as_tensor(x)
    weights = as_tensor(weights)
    _check_chw(x, "conv2d")
    if weights.ndim != 4 or weights.shape[2] != weights.shape[3]:
        raise ShapeError(f"conv2d: weights must be (Cout, Cin, k, k), got {weights.shape}")
    cout, cin, k, _ = weights.shape
    if cin != x.shape[0]:
        raise ShapeError(f"conv2d: input has {x.shape[0]} channels, weights expect {cin}")
    if stride < 1:
        raise ShapeError(f"conv2d: stride must be >= 1, got {stride}")
    if padding < 0:
        raise ShapeError(f"conv2d: padding must be >= 0, got {padding}")
    _, h, w = x.shape
    if k > h + 2 * padding or k > w + 2 * padding:
        raise ShapeError(f"conv2d: kernel {k} exceeds padded extent {h + 2 * padding}x{w + 2 * padding}")

    xp = pad2d(x, padding, pad_mode) if padding else x
    # (Cin, H-k+1, W-k+1, k, k) view, then subsample by stride
    windows = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::stride, ::stride]
    out = np.tensordot(weights, windows, axes=([1, 2, 3], [0, 3, 4]))
    if bias is not None:
        out = out + np.asarray(bias, dtype=np.float64).reshape(cout, 1, 1)
    return out


def conv_transpose_output_extent(n: int, kernel: int, stride: int, padding: int,
                                 output_padding: int) -> int:
    return (n - 1) * stride - 2 * padding + kernel + output_padding


def conv_transpose2d(x, weights, stride: int = 1, padding: int = 0,
                     output_padding: int = 0, bias=None) -> np.ndarray:
    """Direct transposed convolution with (Cin, Cout, k, k) weights.

    Each input pixel scatters a weighted kernel copy into the output, which is
    then cropped by ``padding`` on the leading side of each spatial axis.
    """
    x = as_tensor(x)
    weights = as_tensor(weights)
    _check_chw(x, "conv_transpose2d")
    if weights.ndim != 4 or weights.shape[2] != weights.shape[3]:
        raise ShapeError(f"conv_transpose2d: weights must be (Cin, Cout, k, k), got {weights.shape}")
    cin, cout, k, _ = weights.shape
    if cin != x.shape[0]:
        raise ShapeError(f"conv_transpose2d: input has {x.shape[0]} channels, weights expect {cin}")
    if stride < 1 or padding < 0 or not 0 <= output_padding < stride:
        raise ShapeError("conv_transpose2d: need stride >= 1, padding >= 0, 0 <= output_padding < stride")
    _, h, w = x.shape
    ho = conv_transpose_output_extent(h, k, stride, padding, output_padding)
    wo = conv_transpose_output_extent(w, k, stride, padding, output_padding)
    if ho < 1 or wo < 1:
        raise ShapeError(f"conv_transpose2d: output extent {ho}x{wo} < 1")

    full = np.zeros((cout, (h - 1) * stride + k + output_padding,
                     (w - 1) * stride + k + output_padding))
    for r in range(h):
        for c in range(w):
            patch = np.tensordot(x[:, r, c], weights, axes=(0, 0))
            full[:, r * stride:r * stride + k, c * stride:c * stride + k] += patch
    out = full[:, padding:padding + ho, padding:padding + wo]
    if bias is not None:
        out = out + np.asarray(bias, dtype=np.float64).reshape(cout, 1, 1)
    return out


def write_tensor(path, x) -> None:
    """Write ``x`` in the TNSR binary format (little-endian u32 header, f64 payload)."""
    x = as_tensor(x)
    header = TENSOR_MAGIC + struct.pack(f"<I{x.ndim}I", x.ndim, *x.shape)
    Path(path).write_bytes(header + x.astype("<f8").tobytes(order="C"))


def read_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != TENSOR_MAGIC:
        raise ParseError(f"{path}: missing TNSR magic")
    if len(raw) < 8:
        raise ParseError(f"{path}: truncated header")
    (ndim,) = struct.unpack_from("<I", raw, 4)
    offset = 8 + 4 * ndim
    if ndim < 1 or len(raw) < offset:
        raise ParseError(f"{path}: bad ndim {ndim}")
    dims = struct.unpack_from(f"<{ndim}I", raw, 8)
    count = int(np.prod(dims))
    if any(d < 1 for d in dims):
        raise ParseError(f"{path}: extents must be >= 1, got {dims}")
    if len(raw) - offset != 8 * count:
        raise ParseError(f"{path}: payload holds {(len(raw) - offset) / 8:g} values, header says {count}")
    return np.frombuffer(raw, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(dims)
