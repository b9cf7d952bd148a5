"""File formats: config files, edge lists, binary matrices, JSON and CSV reports."""

import configparser
import csv
import json
import math
import os
import platform
from dataclasses import asdict, dataclass, field

import numpy as np

CONFIG_KEYS = {
    "n": int,
    "q": float,
    "f_override": float,
    "include_diagonal": "bool",
    "seed": int,
}


def _parse_kv(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path, encoding="utf-8") as fh:
        parser.read_string("[root]\n" + fh.read(), source=str(path))
    return parser["root"]


def read_config(path):
    """Read a ``key = value`` ensemble config into keyword arguments."""
    section = _parse_kv(path)
    out = {}
    for key in section:
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r} in {path}")
        kind = CONFIG_KEYS[key]
        if kind == "bool":
            out[key] = section.getboolean(key)
        elif section[key].strip().lower() in ("", "none"):
            out[key] = None
        else:
            out[key] = kind(section[key])
    return out


def write_edge_list(path, edges):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, j in edges:
            fh.write(f"{i} {j}\n")


def read_edge_list(path):
    data = np.loadtxt(path, dtype=np.int64, ndmin=2)
    if data.size and data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns per line")
    return data.reshape(-1, 2)


def _write_binary(path, array, dtype):
    array = np.ascontiguousarray(array, dtype=dtype)
    with open(path, "wb") as fh:
        fh.write(np.uint64(array.shape[0]).astype("<u8").tobytes())
        fh.write(array.tobytes(order="C"))


def _read_binary(path, dtype, vector=False):
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size < 8:
        raise ValueError(f"{path}: truncated header")
    n = int(raw[:8].view("<u8")[0])
    body = raw[8:].view(dtype)
    expected = n if vector else n * n
    if body.size != expected:
        raise ValueError(f"{path}: expected {expected} entries for dimension {n}, found {body.size}")
    return body.astype(dtype.newbyteorder("=")).reshape((n,) if vector else (n, n))


def write_matrix(path, A):
    """Dense real matrix: little-endian u64 dimension, then row-major f64."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("write_matrix expects a square matrix")
    _write_binary(path, A, np.dtype("<f8"))


def read_matrix(path):
    return _read_binary(path, np.dtype("<f8"))


def write_complex_matrix(path, G):
    """Dense complex matrix: u64 dimension, then interleaved re/im f64."""
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("write_complex_matrix expects a square matrix")
    _write_binary(path, G, np.dtype("<c16"))


def read_complex_matrix(path):
    return _read_binary(path, np.dtype("<c16"))


def read_coefficient_file(path, vector):
    """Coefficient payload in either binary layout; the width is inferred from the size."""
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        n = int(np.frombuffer(fh.read(8), dtype="<u8")[0])
    count = n if vector else n * n
    if size == 8 + 16 * count:
        return _read_binary(path, np.dtype("<c16"), vector)
    if size == 8 + 8 * count:
        return _read_binary(path, np.dtype("<f8"), vector)
    raise ValueError(f"{path}: size {size} does not match dimension {n}")


def parse_coefficients(text):
    """Comma-separated numbers (complex allowed, e.g. ``1+2j``); rows split by ``;``."""
    rows = [r for r in text.replace(" ", "").split(";") if r]
    parsed = [[complex(v) for v in row.split(",") if v] for row in rows]
    if not parsed or any(not row for row in parsed):
        raise ValueError("empty coefficient list")
    arr = np.array(parsed[0] if len(parsed) == 1 else parsed, dtype=np.complex128)
    if np.all(arr.imag == 0):
        arr = arr.real.copy()
    return arr


def read_ldp_instance(path):
    """LDP instance file with keys kind, n, q, r, p and ``coeffs`` or ``coeffs_file``."""
    section = _parse_kv(path)
    allowed = {"kind", "n", "q", "r", "p", "coeffs", "coeffs_file"}
    extra = set(section) - allowed
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)} in {path}")
    kind = section.get("kind")
    if kind is None:
        raise ValueError(f"{path}: missing 'kind'")
    vector = kind in ("linear", "squares")
    if "coeffs" in section:
        coeffs = parse_coefficients(section["coeffs"])
        if not vector and coeffs.ndim == 1:
            n = math.isqrt(coeffs.size)
            if n * n != coeffs.size:
                raise ValueError("matrix coefficients must be square")
            coeffs = coeffs.reshape(n, n)
    elif "coeffs_file" in section:
        ref = section["coeffs_file"]
        if not os.path.isabs(ref):
            ref = os.path.join(os.path.dirname(os.path.abspath(path)), ref)
        coeffs = read_coefficient_file(ref, vector)
    else:
        raise ValueError(f"{path}: need 'coeffs' or 'coeffs_file'")
    out = {"kind": kind, "coefficients": coeffs}
    for key, conv in (("n", int), ("q", float), ("r", int), ("p", float)):
        if key in section:
            out[key] = conv(section[key])
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _jsonable(float(x.real)), "im": _jsonable(float(x.imag))}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def dumps_json(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(obj))


def _csv_cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row.get(h, "") for h in header]
            w.writerow([_csv_cell(v) for v in row])


LONG_HEADER = ("experiment", "N", "q", "f", "E", "eta", "quantity", "quantile", "value")


@dataclass
class RunManifest:
    """Provenance for one CLI run. Kept beside, not inside, the numeric payload."""

    command: str
    params: dict
    seed: int
    seed_source: str
    artifacts: list = field(default_factory=list)
    wall_clock_seconds: float = 0.0
    workers: int = 1
    python: str = field(default_factory=platform.python_version)
    numpy: str = np.__version__

    def to_dict(self):
        return asdict(self)

    def write(self, path):
        write_json(path, self.to_dict())
