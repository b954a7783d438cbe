"""Policy heatmaps rendered without a plotting stack.

Grids are drawn with elapsed time on the horizontal axis and the last
observed fault count on the vertical axis, one fill per action: black
for do-nothing, gray for inspect, white for repair.  SVG output is
assembled as text; PNG output goes through a minimal zlib/struct encoder
with a built-in 5x7 pixel font for the legend.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

__all__ = ["render_policy_png", "render_policy_svg", "save_policy_image"]

_SVG_FILLS = {1: "#000000", 2: "#9e9e9e", 3: "#ffffff"}
_RGB_FILLS = {1: (0, 0, 0), 2: (158, 158, 158), 3: (255, 255, 255)}
_LEGEND = ((1, "1 do nothing"), (2, "2 inspect"), (3, "3 repair"))

# 5x7 glyphs, one 5-bit mask per row, top to bottom
_FONT = {
    " ": (0, 0, 0, 0, 0, 0, 0),
    "1": (0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110),
    "2": (0b01110, 0b10001, 0b00001, 0b00110, 0b01000, 0b10000, 0b11111),
    "3": (0b11110, 0b00001, 0b00001, 0b01110, 0b00001, 0b00001, 0b11110),
    "a": (0, 0, 0b01110, 0b00001, 0b01111, 0b10001, 0b01111),
    "c": (0, 0, 0b01110, 0b10001, 0b10000, 0b10001, 0b01110),
    "d": (0b00001, 0b00001, 0b01111, 0b10001, 0b10001, 0b10001, 0b01111),
    "e": (0, 0, 0b01110, 0b10001, 0b11111, 0b10000, 0b01110),
    "g": (0, 0, 0b01111, 0b10001, 0b01111, 0b00001, 0b01110),
    "h": (0b10000, 0b10000, 0b11110, 0b10001, 0b10001, 0b10001, 0b10001),
    "i": (0b00100, 0, 0b01100, 0b00100, 0b00100, 0b00100, 0b01110),
    "n": (0, 0, 0b11110, 0b10001, 0b10001, 0b10001, 0b10001),
    "o": (0, 0, 0b01110, 0b10001, 0b10001, 0b10001, 0b01110),
    "p": (0, 0, 0b11110, 0b10001, 0b11110, 0b10000, 0b10000),
    "r": (0, 0, 0b10110, 0b11001, 0b10000, 0b10000, 0b10000),
    "s": (0, 0, 0b01111, 0b10000, 0b01110, 0b00001, 0b11110),
    "t": (0b01000, 0b01000, 0b11110, 0b01000, 0b01000, 0b01001, 0b00110),
}


def _validated(actions) -> np.ndarray:
    grid = np.asarray(actions)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError("policy grid must be a non-empty 2-D array")
    if not np.isin(grid, (1, 2, 3)).all():
        bad = sorted(set(np.unique(grid)) - {1, 2, 3})
        raise ValueError(f"action codes must be 1, 2 or 3, found {bad}")
    return grid.astype(int)


def _cell_size(rows: int, cols: int) -> int:
    return max(4, min(28, 920 // cols, 460 // rows))


def _ticks(last: int) -> list[int]:
    return sorted({0, last // 2, last})


def render_policy_svg(actions) -> str:
    """Vector heatmap of a policy grid with axes and a legend."""
    grid = _validated(actions)
    rows, cols = grid.shape
    cell = _cell_size(rows, cols)
    left, top, right, bottom = 64, 34, 16, 48
    plot_w, plot_h = cols * cell, rows * cell
    width, height = left + plot_w + right, top + plot_h + bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for s in range(rows):
        y = top + (rows - 1 - s) * cell
        for z in range(cols):
            x = left + z * cell
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{_SVG_FILLS[grid[s, z]]}"/>'
            )
    parts.append(
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#000000" stroke-width="1"/>'
    )
    font = 'font-family="sans-serif" font-size="11"'
    for z in _ticks(cols - 1):
        x = left + z * cell + cell / 2
        parts.append(
            f'<text x="{x:.1f}" y="{top + plot_h + 14}" {font} text-anchor="middle">{z}</text>'
        )
    for s in _ticks(rows - 1):
        y = top + (rows - 1 - s) * cell + cell / 2 + 4
        parts.append(
            f'<text x="{left - 8}" y="{y:.1f}" {font} text-anchor="end">{s}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 10}" {font} text-anchor="middle">'
        "elapsed steps since last observation (z)</text>"
    )
    parts.append(
        f'<text x="14" y="{top + plot_h / 2:.1f}" {font} text-anchor="middle" '
        f'transform="rotate(-90 14 {top + plot_h / 2:.1f})">last observed fault count (s)</text>'
    )
    x = left
    for code, label in _LEGEND:
        parts.append(
            f'<rect x="{x}" y="{top - 22}" width="12" height="12" fill="{_SVG_FILLS[code]}" '
            'stroke="#000000" stroke-width="0.5"/>'
        )
        parts.append(f'<text x="{x + 17}" y="{top - 12}" {font}>{label}</text>')
        x += 24 + 7 * len(label)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _draw_text(image: np.ndarray, x: int, y: int, text: str, color=(0, 0, 0)) -> int:
    for ch in text:
        glyph = _FONT.get(ch)
        if glyph is None:
            glyph = _FONT[" "]
        for r, mask in enumerate(glyph):
            for c in range(5):
                if mask & (1 << (4 - c)):
                    image[y + r, x + c] = color
        x += 6
    return x


def _png_bytes(rgb: np.ndarray) -> bytes:
    """Encode an (H, W, 3) uint8 array as an 8-bit RGB PNG."""
    height, width = rgb.shape[:2]
    raw = b"".join(b"\x00" + row.tobytes() for row in rgb)

    def chunk(tag: bytes, payload: bytes) -> bytes:
        body = tag + payload
        return struct.pack(">I", len(payload)) + body + struct.pack(">I", zlib.crc32(body))

    header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )


def render_policy_png(actions) -> bytes:
    """Raster heatmap of a policy grid with a color legend strip."""
    grid = _validated(actions)
    rows, cols = grid.shape
    cell = _cell_size(rows, cols)
    pad = 8
    legend_h = 16
    legend_w = pad
    for _, label in _LEGEND:
        legend_w += 10 + 4 + 6 * len(label) + 12
    plot_w, plot_h = cols * cell, rows * cell
    width = max(plot_w + 2 * pad, legend_w)
    height = plot_h + 3 * pad + legend_h
    image = np.full((height, width, 3), 255, dtype=np.uint8)
    x0, y0 = pad, pad
    for s in range(rows):
        y = y0 + (rows - 1 - s) * cell
        for z in range(cols):
            x = x0 + z * cell
            image[y : y + cell, x : x + cell] = _RGB_FILLS[grid[s, z]]
    # 1px frame so white regions stay visible
    image[y0 - 1, x0 - 1 : x0 + plot_w + 1] = 0
    image[y0 + plot_h, x0 - 1 : x0 + plot_w + 1] = 0
    image[y0 - 1 : y0 + plot_h + 1, x0 - 1] = 0
    image[y0 - 1 : y0 + plot_h + 1, x0 + plot_w] = 0
    x = pad
    y = plot_h + 2 * pad
    for code, label in _LEGEND:
        image[y : y + 10, x : x + 10] = _RGB_FILLS[code]
        image[y, x : x + 10] = 0
        image[y + 9, x : x + 10] = 0
        image[y : y + 10, x] = 0
        image[y : y + 10, x + 9] = 0
        x = _draw_text(image, x + 14, y + 2, label) + 12
    return _png_bytes(image)


def save_policy_image(path, actions) -> None:
    """Write the grid as .svg or .png depending on the file suffix."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".svg":
        path.write_text(render_policy_svg(actions))
    elif suffix == ".png":
        path.write_bytes(render_policy_png(actions))
    else:
        raise ValueError(f"unsupported image suffix '{path.suffix}': use .svg or .png")
