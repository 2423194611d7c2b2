"""File formats.

Tensors are raw little-endian payloads, row-major, beside a JSON sidecar
``<payload>.json`` holding at least ``{"dtype", "shape"}``. Images are binary
PPM (P6, 8-bit). Tables are CSV with a header row. Every writer goes through
a temporary file and an atomic rename, so a failed run leaves no partial output.
"""
from __future__ import annotations

import contextlib
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .. import IGNORE
from ..errors import (CodecError, DataError, MissingColumn, PayloadLengthMismatch, TruncatedFile,
                      UnknownDtype)

DTYPES = {"float32": np.dtype("<f4"), "uint8": np.dtype("u1")}


@contextlib.contextmanager
def atomic_write(path, mode="w", newline=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        kwargs = {} if "b" in mode else {"encoding": "utf-8", "newline": newline}
        with os.fdopen(fd, mode, **kwargs) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def sidecar_path(path):
    return Path(str(path) + ".json")


def write_json(path, obj):
    with atomic_write(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise TruncatedFile(f"{path}: malformed or truncated JSON ({exc.msg} at char {exc.pos})") from None


# ---------------------------------------------------------------- tensors

def write_tensor(path, array, dtype="float32", **meta):
    if dtype not in DTYPES:
        raise UnknownDtype(f"{path}: unsupported dtype '{dtype}'")
    a = np.ascontiguousarray(np.asarray(array).astype(DTYPES[dtype], copy=False))
    with atomic_write(path, "wb") as fh:
        fh.write(a.tobytes(order="C"))
    write_json(sidecar_path(path), {"dtype": dtype, "shape": list(a.shape), **meta})


def read_tensor(path, expect_ndim=None):
    """Returns ``(array, sidecar)``; the array is native-endian with the sidecar's shape."""
    path = Path(path)
    meta = read_json(sidecar_path(path))
    for key in ("dtype", "shape"):
        if key not in meta:
            raise CodecError(f"{sidecar_path(path)}: sidecar lacks field '{key}'")
    dtype = meta["dtype"]
    if dtype not in DTYPES:
        raise UnknownDtype(f"{sidecar_path(path)}: unknown dtype '{dtype}'")
    shape = tuple(int(s) for s in meta["shape"])
    if any(s < 0 for s in shape):
        raise CodecError(f"{sidecar_path(path)}: negative dimension in shape {list(shape)}")
    if expect_ndim is not None and len(shape) != expect_ndim:
        raise CodecError(f"{sidecar_path(path)}: expected {expect_ndim} dimensions, sidecar says {list(shape)}")
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    dt = DTYPES[dtype]
    if len(raw) % dt.itemsize:
        raise TruncatedFile(f"{path}: {len(raw)} bytes is not a whole number of {dtype} elements")
    n = len(raw) // dt.itemsize
    expected = math.prod(shape)
    if n != expected:
        raise PayloadLengthMismatch(f"{path}: payload length mismatch, sidecar shape {list(shape)} needs "
                                    f"{expected} elements, file holds {n}")
    arr = np.frombuffer(raw, dtype=dt).reshape(shape).astype(dt.newbyteorder("="))
    return arr, meta


def write_labels(path, labels, classes=None):
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise DataError(f"label raster must be 2-D, got shape {labels.shape}")
    if labels.min(initial=0) < 0 or labels.max(initial=0) > 255:
        raise DataError("label values must fit in 8 bits")
    meta = {"ignore": IGNORE}
    if classes is not None:
        meta["classes"] = list(classes)
    write_tensor(path, labels.astype(np.uint8), "uint8", **meta)


def read_labels(path):
    arr, meta = read_tensor(path, expect_ndim=2)
    if meta["dtype"] != "uint8":
        raise CodecError(f"{path}: label rasters must be uint8, sidecar says {meta['dtype']}")
    if meta.get("ignore", IGNORE) != IGNORE:
        raise CodecError(f"{path}: IGNORE value {meta['ignore']} differs from {IGNORE}")
    return arr, meta


# ---------------------------------------------------------------- PPM

def write_ppm(path, image):
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise DataError(f"PPM output needs an H x W x 3 uint8 image, got {img.shape} {img.dtype}")
    H, W, _ = img.shape
    with atomic_write(path, "wb") as fh:
        fh.write(f"P6\n{W} {H}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


def _ppm_tokens(data, count):
    tokens, i = [], 2
    while len(tokens) < count:
        while i < len(data) and (chr(data[i]).isspace() or data[i] == ord("#")):
            if data[i] == ord("#"):
                while i < len(data) and data[i] not in (10, 13):
                    i += 1
            else:
                i += 1
        j = i
        while j < len(data) and not chr(data[j]).isspace():
            j += 1
        if j == i:
            raise TruncatedFile("truncated PPM header")
        tokens.append(data[i:j].decode("ascii"))
        i = j
    return tokens, i + 1   # exactly one whitespace byte after maxval


def read_ppm(path):
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    if data[:2] != b"P6":
        raise CodecError(f"{path}: not a binary PPM (P6) file")
    try:
        (w, h, maxval), start = _ppm_tokens(data, 3)
        W, H, maxval = int(w), int(h), int(maxval)
    except (TruncatedFile, ValueError):
        raise TruncatedFile(f"{path}: truncated or malformed PPM header") from None
    if maxval != 255:
        raise CodecError(f"{path}: only 8-bit PPM supported (maxval {maxval})")
    payload = data[start:]
    need = W * H * 3
    if len(payload) < need:
        raise TruncatedFile(f"{path}: PPM payload has {len(payload)} of {need} bytes")
    if len(payload) > need:
        raise PayloadLengthMismatch(f"{path}: {len(payload) - need} trailing bytes after PPM payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(H, W, 3).copy()


# ---------------------------------------------------------------- CSV

def read_csv(path, required):
    """Rows as dicts; raises MissingColumn naming the first absent required column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    reader = csv.DictReader(io.StringIO(text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    for col in required:
        if col not in header:
            raise MissingColumn(f"{path}: missing column '{col}' (header: {','.join(header)})")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        row = {(k or "").strip(): (v.strip() if isinstance(v, str) else v) for k, v in row.items()}
        if any(row.get(c) is None for c in required):
            raise TruncatedFile(f"{path}: line {line_no} has fewer fields than the header")
        row["_line"] = line_no
        rows.append(row)
    return rows


def write_csv(path, fieldnames, rows):
    with atomic_write(path, newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def parse_float(row, col, path):
    try:
        return float(row[col])
    except (TypeError, ValueError):
        raise DataError(f"{path}: line {row.get('_line', '?')} column '{col}': "
                        f"'{row.get(col)}' is not a number") from None


def fmt(x):
    """Shortest round-tripping text for a float."""
    return repr(float(x))
