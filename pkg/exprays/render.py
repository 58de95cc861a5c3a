"""
Escape-time pictures of the parameter plane and of dynamical planes, with
ray traces drawn on top as black polylines.

Images are 8-bit grayscale numpy arrays: non-escaping pixels are white,
escaping pixels get a gray level from their escape iteration, overlays are 0.
"""

import math
from dataclasses import dataclass

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from tqdm import tqdm

from exprays.common import EXP_LIMIT

WHITE = 255
BLACK = 0
GRAY_LO, GRAY_HI = 32, 224
BLOCK_ROWS = 64


@dataclass(frozen=True)
class ImageSpec:
    center: complex
    width_units: float
    width_px: int
    height_px: int
    max_iter: int = 256
    escape_re: float = 50.0

    def __post_init__(self):
        if not self.width_units > 0:
            raise ValueError("width_units must be positive")
        if self.width_px < 1 or self.height_px < 1:
            raise ValueError("image dimensions must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    @classmethod
    def from_settings(cls, settings):
        return cls(center=complex(settings["center"]), width_units=settings["width"],
                   width_px=settings["width_px"], height_px=settings["height_px"],
                   max_iter=settings["max_iter"], escape_re=settings["escape_re"])

    @property
    def pixel_size(self):
        return self.width_units / self.width_px

    @property
    def height_units(self):
        return self.pixel_size * self.height_px

    @property
    def left(self):
        """ Real part of the left image edge; pixel (h//2, w//2) is centered on center """
        return self.center.real - (self.width_px//2 + 0.5)*self.pixel_size

    @property
    def top(self):
        return self.center.imag + (self.height_px//2 + 0.5)*self.pixel_size

    def pixel_center(self, row, col):
        """ Complex coordinate of the center of pixel (row, col); row 0 is the top """
        return complex(self.left + (col + 0.5)*self.pixel_size, self.top - (row + 0.5)*self.pixel_size)

    def to_pixel(self, z):
        """ Fractional (row, col) position of z; pixel (r, c) covers [r, r+1) x [c, c+1) """
        return (self.top - z.imag) / self.pixel_size, (z.real - self.left) / self.pixel_size

    def grid(self, row_lo=0, row_hi=None):
        """ Pixel-center coordinates of rows [row_lo, row_hi) as a complex array """
        if row_hi is None:
            row_hi = self.height_px
        x = self.left + (np.arange(self.width_px) + 0.5)*self.pixel_size
        y = self.top - (np.arange(row_lo, row_hi) + 0.5)*self.pixel_size
        return x[np.newaxis, :] + 1j*y[:, np.newaxis]


@dataclass
class Rendering:
    spec: ImageSpec
    image: np.ndarray
    counts: np.ndarray
    overlay_mask: np.ndarray


def escape_counts(z0, kappa, max_iter, escape_re):
    """ Vectorised escape times under z -> exp(z + kappa).

        z0 and kappa broadcast against each other. The count is the index n of the
        first orbit point z_n with Re(z_n) > escape_re; -1 marks orbits that did not
        escape within max_iter steps.
    """
    z0, kappa = np.broadcast_arrays(np.asarray(z0, dtype=complex), np.asarray(kappa, dtype=complex))
    z = z0.copy()
    k = kappa.copy()
    counts = np.full(z.shape, -1, dtype=np.int64)
    active = np.ones(z.shape, dtype=bool)

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(max_iter + 1):
            escaped = active & ~(z.real <= escape_re)
            counts[escaped] = n
            active &= ~escaped
            if n == max_iter or not active.any():
                break
            w = z[active] + k[active]
            # overflowing exponents count as escaped at the next step
            big = w.real > EXP_LIMIT
            zn = np.exp(np.where(big, 0j, w))
            zn[big] = complex(math.inf, 0.0)
            z[active] = zn
    return counts


def shade(counts, max_iter):
    """ Grayscale ramp from escape counts; non-escaping pixels are white """
    image = np.full(counts.shape, WHITE, dtype=np.uint8)
    escaped = counts >= 0
    level = np.log1p(counts[escaped]) / math.log1p(max_iter)
    image[escaped] = (GRAY_LO + np.round((GRAY_HI - GRAY_LO)*level)).astype(np.uint8)
    return image


def _clip_segment(r0, c0, r1, c1, height, width):
    """ Liang-Barsky clip of a segment to [0, height] x [0, width]; None if outside """
    t0, t1 = 0.0, 1.0
    dr, dc = r1 - r0, c1 - c0
    for p, q in ((-dr, r0), (dr, height - r0), (-dc, c0), (dc, width - c0)):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return r0 + t0*dr, c0 + t0*dc, r0 + t1*dr, c0 + t1*dc


def _bresenham(r0, c0, r1, c1):
    """ Integer pixels on the line between (r0, c0) and (r1, c1) """
    pixels = []
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dc - dr
    r, c = r0, c0
    while True:
        pixels.append((r, c))
        if r == r1 and c == c1:
            break
        e2 = 2*err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr
    return pixels


def polyline_pixels(spec, points):
    """ Pixels covered by 1-px strokes through consecutive points, clipped to the image """
    pixels = set()
    h, w = spec.height_px, spec.width_px
    pos = [spec.to_pixel(complex(z)) for z in points]
    if len(pos) == 1:
        pos = pos*2
    for (r0, c0), (r1, c1) in zip(pos[:-1], pos[1:]):
        if not all(math.isfinite(v) for v in (r0, c0, r1, c1)):
            continue
        clipped = _clip_segment(r0, c0, r1, c1, h, w)
        if clipped is None:
            continue
        a, b, c, d = clipped
        ia, ib = min(int(math.floor(a)), h-1), min(int(math.floor(b)), w-1)
        ic, id_ = min(int(math.floor(c)), h-1), min(int(math.floor(d)), w-1)
        for r, col in _bresenham(ia, ib, ic, id_):
            if 0 <= r < h and 0 <= col < w:
                pixels.add((r, col))
    return pixels


def draw_overlays(image, spec, polylines):
    """ Paint polylines black onto image in place; returns the mask of painted pixels """
    mask = np.zeros(image.shape, dtype=bool)
    for points in polylines:
        for r, c in polyline_pixels(spec, points):
            mask[r, c] = True
    image[mask] = BLACK
    return mask


def _render(spec, iterate_block, polylines, verbose, desc):
    counts = np.empty((spec.height_px, spec.width_px), dtype=np.int64)
    blocks = range(0, spec.height_px, BLOCK_ROWS)
    for lo in tqdm(blocks, disable=not verbose, desc=desc):
        hi = min(lo + BLOCK_ROWS, spec.height_px)
        counts[lo:hi] = iterate_block(spec.grid(lo, hi))
    image = shade(counts, spec.max_iter)
    mask = draw_overlays(image, spec, polylines)
    return Rendering(spec=spec, image=image, counts=counts, overlay_mask=mask)


def render_parameter_plane(spec, overlays=(), verbose=False):
    """ Parameter plane picture: each pixel is a parameter kappa, colored by the escape
        time of the singular orbit 0, E_kappa(0), ...

        overlays is a list of ParamTrace objects.
    """
    polylines = [[smp.kappa for smp in trace.samples] for trace in overlays]
    block = lambda kappas: escape_counts(np.zeros_like(kappas), kappas, spec.max_iter, spec.escape_re)
    return _render(spec, block, polylines, verbose, "parameter plane")


def render_dynamic_plane(kappa, spec, overlays=(), verbose=False):
    """ Dynamical plane of E_kappa colored by escape time; overlays is a list of RayTrace objects """
    kappa = complex(kappa)
    polylines = [[smp.z for smp in trace.samples] for trace in overlays]
    block = lambda zs: escape_counts(zs, kappa, spec.max_iter, spec.escape_re)
    return _render(spec, block, polylines, verbose, f"dynamic plane kappa={kappa}")


def write_ppm(path, image):
    """ Binary PPM (P6) with the gray level repeated in all three channels """
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim == 2:
        image = np.repeat(image[:, :, np.newaxis], 3, axis=2)
    h, w, _ = image.shape
    with open(path, "wb") as fid:
        fid.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fid.write(np.ascontiguousarray(image).tobytes())


def read_ppm(path):
    """ Read a binary PPM written by write_ppm; returns an (h, w, 3) uint8 array """
    with open(path, "rb") as fid:
        data = fid.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos+1].isspace():
            pos += 1
        if data[pos:pos+1] == b"#":
            while data[pos:pos+1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while not data[pos:pos+1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise ValueError(f"{path} is not a binary PPM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError("only 8-bit PPM files are supported")
    pixels = np.frombuffer(data[pos+1:pos+1+3*w*h], dtype=np.uint8)
    return pixels.reshape(h, w, 3)


def write_png(path, image):
    plt.imsave(path, np.asarray(image), cmap="gray", vmin=0, vmax=255)
