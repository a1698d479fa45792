"""Escape/pole-capture classification renders and box-counting.

Orbits are iterated from pixel centers; a pixel is Escaped once the
orbit leaves the escape radius, Captured once it enters the capture
radius of a catalogued pole (landing on infinity next step), and
Undecided at the iteration cap.  The Julia set is approximated by the
boundary between differently classified pixels; its box-counting
slope is a soft sanity signal, not a rigorous estimate.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateMask
from .families import Family

STATUS_UNDECIDED = 0
STATUS_ESCAPED = 1
STATUS_CAPTURED = 2


@dataclass(frozen=True)
class RenderGrid:
    """Pixel frame and iteration policy.

    Pixels are square with pitch width / pixels_x; the frame height
    follows from pixels_y.  The escape radius must exceed the frame
    width so an escape is never a mere frame exit.
    """

    center: complex = 0j
    width: float = 4.0
    pixels_x: int = 512
    pixels_y: int = 512
    max_iter: int = 64
    escape_radius: float = 1e6
    pole_capture_radius: float = 1e-6

    def __post_init__(self):
        if self.pixels_x < 16 or self.pixels_y < 16:
            raise ConfigError("need at least 16 pixels per side")
        if self.width <= 0:
            raise ConfigError("frame width must be positive")
        if self.escape_radius <= self.width:
            raise ConfigError("escape radius must exceed the frame width")
        if self.max_iter < 0:
            raise ConfigError("max_iter must be nonnegative")
        if self.pole_capture_radius <= 0:
            raise ConfigError("pole capture radius must be positive")

    @property
    def pitch(self) -> float:
        return self.width / self.pixels_x

    @property
    def height(self) -> float:
        return self.pitch * self.pixels_y

    def row_points(self, row_start: int, row_count: int) -> np.ndarray:
        """Pixel centers of rows [row_start, row_start + row_count)."""
        j = np.arange(self.pixels_x)
        i = np.arange(row_start, row_start + row_count)
        x = self.center.real + (j + 0.5 - self.pixels_x / 2) * self.pitch
        y = self.center.imag + (self.pixels_y / 2 - (i + 0.5)) * self.pitch
        return x[None, :] + 1j * y[:, None]


@dataclass(frozen=True)
class RenderResult:
    """Per-pixel classification: status code and deciding step.

    steps holds the 1-based iteration at which the pixel escaped or
    was captured, and max_iter for undecided pixels.
    """

    grid: RenderGrid
    status: np.ndarray  # uint8, shape (pixels_y, pixels_x)
    steps: np.ndarray  # uint16, same shape


def _classify_rows(family: Family, grid: RenderGrid, row_start: int, row_count: int):
    """Classify a contiguous row block; pure in its inputs."""
    pts = grid.row_points(row_start, row_count).ravel()
    status = np.zeros(pts.size, dtype=np.uint8)
    steps = np.full(pts.size, grid.max_iter, dtype=np.uint16)
    idx = np.arange(pts.size)
    z = pts.copy()
    for k in range(1, grid.max_iter + 1):
        if idx.size == 0:
            break
        captured = family.distance_to_poles(z) < grid.pole_capture_radius
        if captured.any():
            hit = idx[captured]
            status[hit] = STATUS_CAPTURED
            steps[hit] = k
            idx = idx[~captured]
            z = z[~captured]
            if idx.size == 0:
                break
        z = family.value_raw(z)
        escaped = np.abs(z) > grid.escape_radius
        if escaped.any():
            hit = idx[escaped]
            status[hit] = STATUS_ESCAPED
            steps[hit] = k
            idx = idx[~escaped]
            z = z[~escaped]
    shape = (row_count, grid.pixels_x)
    return status.reshape(shape), steps.reshape(shape)


def render(family: Family, grid: RenderGrid, threads: int = 1) -> RenderResult:
    """Classify every pixel; output is independent of the thread count.

    Rows are computed in contiguous blocks and written back by row
    index, and each block is a pure function of the family and frame,
    so any parallel schedule produces identical buffers.
    """
    if threads < 1:
        raise ConfigError("thread count must be positive")
    status = np.empty((grid.pixels_y, grid.pixels_x), dtype=np.uint8)
    steps = np.empty_like(status, dtype=np.uint16)
    blocks = []
    per = -(-grid.pixels_y // threads)
    for start in range(0, grid.pixels_y, per):
        blocks.append((start, min(per, grid.pixels_y - start)))
    if threads == 1:
        results = [_classify_rows(family, grid, s, c) for s, c in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_classify_rows, family, grid, s, c) for s, c in blocks]
            results = [f.result() for f in futures]
    for (start, count), (st, sp) in zip(blocks, results):
        status[start : start + count] = st
        steps[start : start + count] = sp
    return RenderResult(grid=grid, status=status, steps=steps)


def boundary_mask(result: RenderResult) -> np.ndarray:
    """Pixels whose classification differs from a 4-neighbor.

    The pair (status, deciding step) is fused into one code so both a
    status change and a step change count as a boundary.
    """
    code = result.status.astype(np.int64) * (int(result.grid.max_iter) + 2)
    code += result.steps.astype(np.int64)
    mask = np.zeros(code.shape, dtype=bool)
    diff = code[1:, :] != code[:-1, :]
    mask[1:, :] |= diff
    mask[:-1, :] |= diff
    diff = code[:, 1:] != code[:, :-1]
    mask[:, 1:] |= diff
    mask[:, :-1] |= diff
    return mask


def _write_binary(sink, payload: bytes) -> None:
    if hasattr(sink, "write"):
        sink.write(payload)
        return
    with open(sink, "wb") as fh:
        fh.write(payload)


def write_p6(sink, result: RenderResult) -> None:
    """Binary portable pixmap with a label-dependent palette."""
    st, sp = result.status, result.steps.astype(np.int64)
    r = np.zeros(st.shape, dtype=np.uint8)
    g = np.zeros_like(r)
    b = np.zeros_like(r)
    esc = st == STATUS_ESCAPED
    cap = st == STATUS_CAPTURED
    r[esc] = (40 + 11 * sp[esc]) % 216
    g[esc] = (90 + 7 * sp[esc]) % 166
    b[esc] = 160 + (5 * sp[esc]) % 96
    r[cap] = 200 + (3 * sp[cap]) % 56
    g[cap] = (60 + 9 * sp[cap]) % 140
    b[cap] = (20 + 5 * sp[cap]) % 80
    header = f"P6\n{st.shape[1]} {st.shape[0]}\n255\n".encode()
    _write_binary(sink, header + np.stack([r, g, b], axis=-1).tobytes())


def write_p4(sink, mask: np.ndarray) -> None:
    """Binary portable bitmap of a boolean mask (set pixels black)."""
    packed = np.packbits(mask.astype(np.uint8), axis=1)
    header = f"P4\n{mask.shape[1]} {mask.shape[0]}\n".encode()
    _write_binary(sink, header + packed.tobytes())


@dataclass(frozen=True)
class BoxCountResult:
    """Occupied-box counts per box size and the fitted slope."""

    sizes: tuple
    counts: tuple
    dimension: float


def box_counting(mask: np.ndarray, box_sizes=None) -> BoxCountResult:
    """Slope of log(occupied boxes) against log(1 / box size).

    The default ladder is dyadic starting at 4 (finer boxes saturate
    at pixel granularity and flatten the fit) and capped at an eighth
    of the short side; at least four sizes are required.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be two-dimensional")
    if not mask.any():
        raise DegenerateMask("empty mask has no box-counting slope")
    if box_sizes is None:
        box_sizes = []
        s = 4
        while s <= min(mask.shape) // 8:
            box_sizes.append(s)
            s *= 2
    box_sizes = sorted(int(s) for s in box_sizes)
    if len(box_sizes) < 4:
        raise ValueError("need at least 4 box sizes")
    if box_sizes[0] < 1:
        raise ValueError("box sizes must be positive")
    counts = []
    for s in box_sizes:
        ny = -(-mask.shape[0] // s)
        nx = -(-mask.shape[1] // s)
        padded = np.zeros((ny * s, nx * s), dtype=bool)
        padded[: mask.shape[0], : mask.shape[1]] = mask
        occ = padded.reshape(ny, s, nx, s).any(axis=(1, 3))
        counts.append(int(occ.sum()))
    slope = float(
        np.polyfit(np.log(1.0 / np.array(box_sizes, dtype=float)), np.log(counts), 1)[0]
    )
    return BoxCountResult(sizes=tuple(box_sizes), counts=tuple(counts), dimension=slope)
