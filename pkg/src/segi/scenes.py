"""Procedural test objects and moving-object frame series.

Frames are rasterized from the base image and an accumulated affine pose
with nearest-neighbour sampling, so binary objects stay binary and thin
features are not eroded by repeated resampling. Regions uncovered by the
motion are dark (0).

Coordinates are ``(x, y)`` = (column, row) with row 0 at the top. A positive
rotation turns the image counter-clockwise as displayed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Translate",
    "Rotate",
    "MotionPhase",
    "SceneSpec",
    "make_primitive",
    "transform_matrix",
    "rasterize",
    "transform_frame",
    "frame_poses",
    "generate_frames",
    "three_phase_motion",
    "shapes_object",
    "random_shapes_object",
    "grayscale_blocks_object",
]


@dataclass(frozen=True)
class Translate:
    dx: float = 0.0
    dy: float = 0.0


@dataclass(frozen=True)
class Rotate:
    degrees: float = 0.0
    center: tuple[float, float] | None = None  # (x, y); image centre when None


Transform = Union[Translate, Rotate]


@dataclass(frozen=True)
class MotionPhase:
    frame_count: int
    transform: Transform

    def __post_init__(self):
        if self.frame_count < 1:
            raise ValueError("a motion phase needs at least one frame")


@dataclass
class SceneSpec:
    base: np.ndarray
    phases: Sequence[MotionPhase] = field(default_factory=list)
    binary: bool = True

    @property
    def frame_count(self) -> int:
        return sum(p.frame_count for p in self.phases) if self.phases else 1


def make_primitive(kind: str, dims: tuple[int, int], value: float = 1.0, **geom) -> np.ndarray:
    """Rasterize one shape into a ``dims = (height, width)`` dark image.

    Geometry keywords by kind:

    - ``rectangle``: ``top, left, height, width``
    - ``disk``: ``cx, cy, radius`` (radius 0 lights the centre pixel only)
    - ``ring``: ``cx, cy, inner, outer`` (pixels with inner <= distance <= outer)
    - ``checkerboard``: ``cell`` (cells whose index sum is even are lit)
    """
    h, w = dims
    if h < 1 or w < 1:
        raise ValueError("dims must be positive")
    if not 0.0 <= value <= 1.0:
        raise ValueError("value must lie in [0, 1]")
    yy, xx = np.mgrid[0:h, 0:w]
    if kind == "rectangle":
        top, left, rh, rw = (int(geom[k]) for k in ("top", "left", "height", "width"))
        if rh < 1 or rw < 1 or top < 0 or left < 0 or top + rh > h or left + rw > w:
            raise ValueError("rectangle does not fit inside the image")
        mask = (yy >= top) & (yy < top + rh) & (xx >= left) & (xx < left + rw)
    elif kind in ("disk", "ring"):
        cx, cy = float(geom["cx"]), float(geom["cy"])
        outer = float(geom["radius"] if kind == "disk" else geom["outer"])
        inner = 0.0 if kind == "disk" else float(geom["inner"])
        if inner < 0 or outer < inner:
            raise ValueError("radii must satisfy 0 <= inner <= outer")
        if cx - outer < 0 or cy - outer < 0 or cx + outer > w - 1 or cy + outer > h - 1:
            raise ValueError(f"{kind} does not fit inside the image")
        d2 = (xx - cx) ** 2 + (yy - cy) ** 2
        mask = (d2 <= outer**2 + 1e-9) & (d2 >= inner**2 - 1e-9)
    elif kind == "checkerboard":
        cell = int(geom["cell"])
        if cell < 1 or cell > max(h, w):
            raise ValueError("checkerboard cell must be between 1 and the image size")
        mask = ((yy // cell) + (xx // cell)) % 2 == 0
    else:
        raise ValueError(f"unknown primitive {kind!r}")
    return np.where(mask, value, 0.0)


def transform_matrix(transform: Transform, dims: tuple[int, int]) -> np.ndarray:
    """3x3 homogeneous matrix mapping ``(x, y, 1)`` to its moved position."""
    if isinstance(transform, Translate):
        return np.array([[1.0, 0.0, transform.dx], [0.0, 1.0, transform.dy], [0.0, 0.0, 1.0]])
    if isinstance(transform, Rotate):
        h, w = dims
        cx, cy = transform.center if transform.center is not None else ((w - 1) / 2, (h - 1) / 2)
        t = math.radians(transform.degrees)
        c, s = math.cos(t), math.sin(t)
        # y points down, so a visually counter-clockwise turn uses +sin on x
        rot = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
        to_origin = np.array([[1.0, 0.0, -cx], [0.0, 1.0, -cy], [0.0, 0.0, 1.0]])
        back = np.array([[1.0, 0.0, cx], [0.0, 1.0, cy], [0.0, 0.0, 1.0]])
        return back @ rot @ to_origin
    raise TypeError(f"unsupported transform {transform!r}")


def rasterize(base: np.ndarray, pose: np.ndarray) -> np.ndarray:
    """Render ``base`` moved by ``pose`` with nearest-neighbour sampling."""
    base = np.asarray(base, dtype=np.float64)
    h, w = base.shape
    inv = np.linalg.inv(pose)
    yy, xx = np.mgrid[0:h, 0:w]
    src_x = inv[0, 0] * xx + inv[0, 1] * yy + inv[0, 2]
    src_y = inv[1, 0] * xx + inv[1, 1] * yy + inv[1, 2]
    # tiny bias keeps exact half-pixel offsets rounding the same way everywhere
    ix = np.floor(src_x + 0.5 + 1e-9).astype(np.int64)
    iy = np.floor(src_y + 0.5 + 1e-9).astype(np.int64)
    inside = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    out = np.zeros_like(base)
    out[inside] = base[iy[inside], ix[inside]]
    return out


def transform_frame(image: np.ndarray, transform: Transform) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    return rasterize(image, transform_matrix(transform, image.shape))


def frame_poses(spec: SceneSpec) -> list[np.ndarray]:
    """Accumulated pose of every frame.

    Frame 1 is the base pose. Each later frame applies the step of the phase
    it belongs to, so a scene has exactly ``sum(frame_count)`` frames.
    """
    dims = np.shape(spec.base)
    steps = [p.transform for p in spec.phases for _ in range(p.frame_count)]
    pose = np.eye(3)
    poses = [pose]
    for t in steps[1:]:
        pose = transform_matrix(t, dims) @ pose
        poses.append(pose)
    return poses


def generate_frames(spec: SceneSpec) -> list[np.ndarray]:
    base = np.asarray(spec.base, dtype=np.float64)
    frames = [base.copy()] + [rasterize(base, p) for p in frame_poses(spec)[1:]]
    if spec.binary and not np.all((base == 0) | (base == 1)):
        raise ValueError("scene flagged binary but base image is not binary")
    return frames


def three_phase_motion(
    slow: float = 0.5, fast: float = 2.0, spin: float = 1.0, counts=(40, 28, 44)
) -> list[MotionPhase]:
    """Slow translation, fast translation, then slow rotation (112 frames by default)."""
    return [
        MotionPhase(counts[0], Translate(slow, 0.0)),
        MotionPhase(counts[1], Translate(fast, 0.0)),
        MotionPhase(counts[2], Rotate(spin)),
    ]


def shapes_object(dims: tuple[int, int] = (64, 64)) -> np.ndarray:
    """Deterministic binary test object: an open ring with a bar, about 15% lit."""
    h, w = dims
    cx, cy = (w - 1) / 2, (h - 1) / 2
    r = 0.3 * min(h, w)
    img = make_primitive("ring", dims, cx=cx, cy=cy, inner=r - 0.09 * min(h, w), outer=r)
    # cut the ring open on the right and add a horizontal bar, G-like
    yy, xx = np.mgrid[0:h, 0:w]
    img[(xx > cx) & (np.abs(yy - cy) < 0.12 * h) & (yy < cy)] = 0.0
    bar_h = max(1, round(0.09 * h))
    img[round(cy) : round(cy) + bar_h, round(cx) : round(cx + r) + 1] = 1.0
    return img


def random_shapes_object(
    dims: tuple[int, int], rng: np.random.Generator, fill: float = 0.15
) -> np.ndarray:
    """Union of random rectangles and disks grown until about ``fill`` is lit."""
    h, w = dims
    img = np.zeros(dims)
    while img.mean() < fill:
        if rng.random() < 0.5:
            rh = int(rng.integers(2, max(3, h // 3)))
            rw = int(rng.integers(2, max(3, w // 3)))
            top = int(rng.integers(0, h - rh + 1))
            left = int(rng.integers(0, w - rw + 1))
            shape = make_primitive("rectangle", dims, top=top, left=left, height=rh, width=rw)
        else:
            r = float(rng.integers(1, max(2, min(h, w) // 6)))
            cx = float(rng.integers(int(r), int(w - 1 - r) + 1))
            cy = float(rng.integers(int(r), int(h - 1 - r) + 1))
            shape = make_primitive("disk", dims, cx=cx, cy=cy, radius=r)
        img = np.maximum(img, shape)
    return img


def grayscale_blocks_object(dims: tuple[int, int] = (64, 64)) -> np.ndarray:
    """Three blocks of different gray levels and shapes over a checkered background."""
    h, w = dims
    img = 0.15 + 0.15 * make_primitive("checkerboard", dims, cell=max(1, min(h, w) // 8))
    rect = make_primitive("rectangle", dims, top=h // 8, left=w // 8, height=h // 4, width=w // 3)
    disk = make_primitive("disk", dims, cx=0.7 * w, cy=0.3 * h, radius=min(h, w) / 7)
    bar = make_primitive("rectangle", dims, top=5 * h // 8, left=w // 4, height=h // 5, width=w // 2)
    img = np.where(rect > 0, 0.6, img)
    img = np.where(disk > 0, 0.85, img)
    img = np.where(bar > 0, 1.0, img)
    return img
