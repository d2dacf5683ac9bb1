"""Flat-file formats for tensors and sampling masks.

Tensor files (.tns) hold one JSON header line followed by the raw payload:

    {"dims":[n1,n2,n3],"dtype":"f64","order":"slice-major","seed-provenance":"...","units":"..."}\n
    <n1*n2*n3 little-endian float64>

The payload is slice-major: frontal slice index varies slowest, then rows,
then columns.  Reading and re-writing a file reproduces it byte for byte.

Mask files are plain JSON: {"n1": .., "n2": .., "true_indices": [[i,j], ..]}
with indices sorted row-major.
"""

import json

import numpy as np

from .errors import BadFile
from .sampling import SampleMask

TENSOR_DTYPE = "f64"
TENSOR_ORDER = "slice-major"


def write_tensor(path, t, units="dBm", seed_provenance=""):
    """Write tensor `t` to `path` in the header + payload format."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise BadFile(f"tensor files hold third-order tensors, got shape {t.shape}")
    header = {
        "dims": list(t.shape),
        "dtype": TENSOR_DTYPE,
        "order": TENSOR_ORDER,
        "seed-provenance": seed_provenance,
        "units": units,
    }
    payload = np.ascontiguousarray(t.transpose(2, 0, 1)).astype("<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode())
        fh.write(b"\n")
        fh.write(payload)


def read_tensor(path):
    """Read a tensor file; returns (tensor, header dict)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise BadFile(f"{path}: no header line")
    try:
        header = json.loads(raw[:nl])
    except json.JSONDecodeError as exc:
        raise BadFile(f"{path}: header is not valid JSON: {exc}") from exc
    dims = header.get("dims")
    if (
        not isinstance(dims, list) or len(dims) != 3
        or header.get("dtype") != TENSOR_DTYPE or header.get("order") != TENSOR_ORDER
    ):
        raise BadFile(f"{path}: unsupported header {header!r}")
    n1, n2, n3 = dims
    payload = raw[nl + 1:]
    if len(payload) != 8 * n1 * n2 * n3:
        raise BadFile(f"{path}: payload holds {len(payload)} bytes, dims need {8 * n1 * n2 * n3}")
    flat = np.frombuffer(payload, dtype="<f8")
    t = flat.reshape(n3, n1, n2).transpose(1, 2, 0)
    return np.ascontiguousarray(t), header


def write_mask(path, mask):
    """Write a SampleMask as JSON with row-major sorted true indices."""
    idx = np.argwhere(mask.flags)
    doc = {
        "n1": mask.n1,
        "n2": mask.n2,
        "true_indices": [[int(i), int(j)] for i, j in idx],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def read_mask(path):
    """Read a mask JSON file back into a SampleMask."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BadFile(f"{path}: not valid JSON: {exc}") from exc
    try:
        n1, n2 = int(doc["n1"]), int(doc["n2"])
        pairs = doc["true_indices"]
        flags = np.zeros((n1, n2), dtype=bool)
        for i, j in pairs:
            if not (0 <= i < n1 and 0 <= j < n2):
                raise BadFile(f"{path}: index ({i},{j}) outside {n1}x{n2}")
            flags[i, j] = True
    except (KeyError, TypeError, ValueError) as exc:
        raise BadFile(f"{path}: malformed mask document: {exc}") from exc
    return SampleMask(flags)
