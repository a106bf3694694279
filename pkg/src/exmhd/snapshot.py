"""Binary snapshots of forms and MHD states.

Layout (all little-endian)::

    b"NFRM1\\0"  u8 n  u8 k  u8 flags
    u32 dims[n]  f64 lengths[n]  f64 metric[n]  f64 t
    components, each prod(dims) f64 in row-major order

``k = 0xFF`` marks a full MHD state stored as rho, u (n comps), A (n comps).
Flag bit 0 appends the C(n, 2) constant coefficients of a harmonic
background 2-form; bit 1 marks an Euler (B = 0) run.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exterior import KForm, constant_form
from .lattice import build_box
from .mhd import MhdState

MAGIC = b"NFRM1\x00"
STATE_TAG = 0xFF
FLAG_HARMONIC = 0x01
FLAG_EULER = 0x02


class SnapshotError(ValueError):
    """Unreadable or malformed snapshot."""


@dataclass
class Snapshot:
    obj: KForm | MhdState
    t: float = 0.0
    flags: int = 0

    @property
    def is_state(self) -> bool:
        return isinstance(self.obj, MhdState)

    @property
    def euler(self) -> bool:
        return bool(self.flags & FLAG_EULER)


def encode(obj, t: float | None = None, euler: bool = False) -> bytes:
    if isinstance(obj, MhdState):
        box, k, t = obj.box, STATE_TAG, obj.t if t is None else t
        flags = FLAG_EULER if euler else 0
        comps = [obj.rho, *obj.u.comps, *obj.A.comps]
        if obj.xi is not None:
            flags |= FLAG_HARMONIC
    elif isinstance(obj, KForm):
        box, k, flags = obj.box, obj.degree, 0
        t = 0.0 if t is None else t
        comps = list(obj.comps)
    else:
        raise TypeError(f"cannot snapshot {type(obj).__name__}")
    n = box.n
    parts = [
        MAGIC,
        struct.pack("<BBB", n, k, flags),
        struct.pack(f"<{n}I", *box.dims),
        struct.pack(f"<{n}d", *box.lengths),
        struct.pack(f"<{n}d", *box.metric),
        struct.pack("<d", t),
    ]
    parts += [np.ascontiguousarray(c, dtype="<f8").tobytes() for c in comps]
    if flags & FLAG_HARMONIC:
        means = obj.xi.comps.reshape(obj.xi.comps.shape[0], -1)[:, 0]
        parts.append(np.asarray(means, dtype="<f8").tobytes())
    return b"".join(parts)


def decode(buf: bytes) -> Snapshot:
    if buf[:6] != MAGIC:
        raise SnapshotError("bad magic: not an NFRM1 snapshot")
    try:
        n, k, flags = struct.unpack_from("<BBB", buf, 6)
        off = 9
        dims = struct.unpack_from(f"<{n}I", buf, off); off += 4 * n
        lengths = struct.unpack_from(f"<{n}d", buf, off); off += 8 * n
        metric = struct.unpack_from(f"<{n}d", buf, off); off += 8 * n
        (t,) = struct.unpack_from("<d", buf, off); off += 8
    except struct.error as exc:
        raise SnapshotError(f"truncated header ({exc})") from None
    try:
        box = build_box(n, dims, lengths, metric)
    except ValueError as exc:
        raise SnapshotError(f"invalid geometry: {exc}") from None
    ncomp = 2 * n + 1 if k == STATE_TAG else math.comb(n, k) if k <= n else -1
    if ncomp < 0:
        raise SnapshotError(f"invalid degree byte {k}")
    size = math.prod(dims)
    extra = math.comb(n, 2) if (k == STATE_TAG and flags & FLAG_HARMONIC) else 0
    expected = off + 8 * (ncomp * size + extra)
    if len(buf) != expected:
        raise SnapshotError(f"payload size {len(buf)} bytes, expected {expected}")
    data = np.frombuffer(buf, dtype="<f8", count=ncomp * size, offset=off).astype(float)
    comps = data.reshape((ncomp,) + box.dims)
    if k != STATE_TAG:
        return Snapshot(KForm(box, k, comps.copy()), t, flags)
    xi = None
    if extra:
        coeffs = np.frombuffer(buf, dtype="<f8", count=extra, offset=off + 8 * ncomp * size)
        xi = constant_form(box, 2, coeffs)
    state = MhdState(
        t,
        comps[0].copy(),
        KForm(box, 1, comps[1:n + 1].copy()),
        KForm(box, 1, comps[n + 1:].copy()),
        xi,
    )
    return Snapshot(state, t, flags)


def write_snapshot(path, obj, t: float | None = None, euler: bool = False) -> None:
    Path(path).write_bytes(encode(obj, t, euler))


def read_snapshot(path) -> Snapshot:
    return decode(Path(path).read_bytes())
