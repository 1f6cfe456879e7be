"""Binary state snapshots and CSV trace persistence.

Snapshot layout: magic ``ELSNAP1\\n``, an ASCII header (dim, cells and
spacing per axis, boundary condition, time), a ``data`` marker, then
little-endian 8-byte floats in row-major order: v (3 components), d
(3 components), p (1 component).  Round trips are bit-exact.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .dynamics import State
from .energetics import EnergyTrace, RelativeTrace
from .grid import Grid, ScalarField, VectorField

MAGIC = b"ELSNAP1\n"

#: CSV column order for trace files.
TRACE_COLUMNS = (
    "t", "kinetic", "elastic", "penalty", "total",
    "diss_mu1", "diss_mu4", "diss_dir", "diss_q", "cross_term",
    "E", "W", "K", "bound", "residual_energy",
)


class SnapshotError(IOError):
    """Malformed, truncated, or non-finite snapshot file."""


def _atomic_write(path: str, payload: bytes):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".snap-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_snapshot(state: State, path: str):
    grid = state.v.grid
    header = (
        f"dim {grid.dim}\n"
        f"n {' '.join(str(v) for v in grid.n)}\n"
        f"h {' '.join(repr(v) for v in grid.h)}\n"
        f"bc {grid.bc}\n"
        f"time {state.t!r}\n"
        "data\n"
    ).encode("ascii")
    arrays = [
        np.ascontiguousarray(state.v.values, dtype="<f8"),
        np.ascontiguousarray(state.d.values, dtype="<f8"),
        np.ascontiguousarray(state.p.values, dtype="<f8"),
    ]
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise SnapshotError(f"{path}: refusing to write non-finite values")
    payload = MAGIC + header + b"".join(a.tobytes() for a in arrays)
    _atomic_write(path, payload)


def read_snapshot(path: str) -> State:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MAGIC):
        raise SnapshotError(f"{path}: bad magic, not a snapshot file")
    rest = blob[len(MAGIC):]
    marker = b"data\n"
    idx = rest.find(marker)
    if idx < 0:
        raise SnapshotError(f"{path}: missing data marker")
    header, body = rest[:idx].decode("ascii"), rest[idx + len(marker):]

    fields = {}
    for line in header.splitlines():
        key, _, value = line.partition(" ")
        fields[key] = value
    try:
        dim = int(fields["dim"])
        n = tuple(int(v) for v in fields["n"].split())
        h = tuple(float(v) for v in fields["h"].split())
        bc = fields["bc"]
        t = float(fields["time"])
    except (KeyError, ValueError) as exc:
        raise SnapshotError(f"{path}: malformed header ({exc})")
    if len(n) != dim or len(h) != dim:
        raise SnapshotError(f"{path}: header axis counts disagree with dim")
    grid = Grid(n=n, h=h, bc=bc)

    count = grid.cell_count
    expected = (3 * count + 3 * count + count) * 8
    if len(body) != expected:
        raise SnapshotError(
            f"{path}: truncated or oversized payload ({len(body)} bytes, expected {expected})"
        )
    flat = np.frombuffer(body, dtype="<f8")
    if not np.all(np.isfinite(flat)):
        raise SnapshotError(f"{path}: non-finite values in payload")
    v = flat[: 3 * count].reshape(grid.shape + (3,))
    d = flat[3 * count: 6 * count].reshape(grid.shape + (3,))
    p = flat[6 * count:].reshape(grid.shape)
    return State(
        t=t,
        v=VectorField(grid, v.copy()),
        d=VectorField(grid, d.copy()),
        p=ScalarField(grid, p.copy()),
    )


# ---------------------------------------------------------------------------
# CSV traces (17 significant digits for exact double round trips)
# ---------------------------------------------------------------------------

def write_trace_csv(
    path: str,
    energy: EnergyTrace | None = None,
    relative: RelativeTrace | None = None,
    residual=None,
):
    if energy is None and relative is None:
        raise ValueError("need at least one trace to write")
    n = len(energy.t) if energy is not None else len(relative.t)
    zeros = np.zeros(n)

    cols = {name: zeros for name in TRACE_COLUMNS}
    if energy is not None:
        cols.update(
            t=energy.t, kinetic=energy.kinetic, elastic=energy.elastic,
            penalty=energy.penalty, total=energy.total,
            diss_mu1=energy.diss_mu1, diss_mu4=energy.diss_mu4,
            diss_dir=energy.diss_dir, diss_q=energy.diss_q,
            cross_term=energy.cross_term,
        )
    if relative is not None:
        cols.update(t=relative.t, E=relative.E, W=relative.W,
                    K=relative.K, bound=relative.bound)
    if residual is not None:
        cols["residual_energy"] = np.asarray(residual)

    lines = [",".join(TRACE_COLUMNS)]
    for i in range(n):
        lines.append(",".join(f"{cols[name][i]:.17g}" for name in TRACE_COLUMNS))
    _atomic_write(path, ("\n".join(lines) + "\n").encode("ascii"))


def read_trace_csv(path: str) -> dict:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if tuple(header) != TRACE_COLUMNS:
        raise SnapshotError(f"{path}: unexpected trace columns {header}")
    data = np.array([[float(v) for v in row] for row in rows])
    if data.size == 0:
        data = data.reshape(0, len(TRACE_COLUMNS))
    return {name: data[:, i] for i, name in enumerate(TRACE_COLUMNS)}
