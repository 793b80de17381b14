#!/usr/bin/env python3
"""Regenerates core/data/colormaps.json from matplotlib's palette tables.

Discrete maps are ColorBrewer/Tableau qualitative prefixes and evenly spaced
samples of sequential ramps. A discrete candidate is kept only when every color
survives the histogram filters (not near-black, not pure white) and all pairs
are at least MIN_SEPARATION apart in normalized Lab, so the clustering radius
used by refinement can never merge two entries.

Usage: python3 tools/scripts/gen_colormap_library.py > core/data/colormaps.json
"""
import itertools
import json
import sys

import numpy as np
from matplotlib import colormaps

MIN_SEPARATION = 0.10
MIN_CURVE_GAP = 0.05  # continuous maps must not fold back onto themselves

QUALITATIVE = ["Set1", "Set2", "Set3", "Dark2", "Paired", "Accent", "Pastel1", "tab10"]
SAMPLED = ["viridis", "plasma", "cividis", "YlGnBu", "YlOrRd", "RdBu", "BrBG",
           "Spectral", "PuOr", "GnBu", "Blues", "Greens", "Oranges", "Purples",
           "RdYlGn", "PiYG"]
CONTINUOUS = ["viridis", "plasma", "inferno", "magma", "cividis", "YlGnBu",
              "YlOrRd", "BuPu", "RdBu", "BrBG", "Spectral", "PuOr", "GnBu",
              "coolwarm", "PiYG", "RdYlGn", "Blues", "Greens", "Oranges"]


def srgb_to_lab(rgb):
    def lin(c):
        c = c / 255.0
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4

    r, g, b = (lin(c) for c in rgb)
    x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b
    y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b
    z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b

    def f(t):
        d = 6.0 / 29.0
        return t ** (1.0 / 3.0) if t > d ** 3 else t / (3 * d * d) + 4.0 / 29.0

    fx, fy, fz = f(x / 0.95047), f(y / 1.0), f(z / 1.08883)
    return (116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz))


def norm(lab):
    return np.array([lab[0] / 100.0, (lab[1] + 128) / 255.0, (lab[2] + 128) / 255.0])


def to_bytes(rgba):
    return tuple(int(round(255 * c)) for c in rgba[:3])


def hexstr(rgb):
    return "#%02x%02x%02x" % rgb


def usable(rgb):
    if rgb == (255, 255, 255):
        return False
    L, a, b = srgb_to_lab(rgb)
    if L < 10 and abs(a) < 10 and abs(b) < 10:
        return False
    return L <= 97


def separated(colors):
    labs = [norm(srgb_to_lab(c)) for c in colors]
    return all(np.linalg.norm(p - q) >= MIN_SEPARATION for p, q in itertools.combinations(labs, 2))


def discrete_maps():
    out = []
    for name in QUALITATIVE:
        cmap = colormaps[name]
        full = [to_bytes(cmap(i)) for i in range(cmap.N)]
        for m in range(3, min(cmap.N, 10) + 1):
            colors = full[:m]
            if all(usable(c) for c in colors) and separated(colors):
                out.append((f"{name}_{m}", colors))
    for name in SAMPLED:
        cmap = colormaps[name]
        for m in range(3, 11):
            colors = [to_bytes(cmap(0.12 + 0.76 * i / (m - 1))) for i in range(m)]
            if all(usable(c) for c in colors) and separated(colors):
                out.append((f"{name}_{m}", colors))
    return out


def continuous_maps():
    out = []
    for name in CONTINUOUS:
        cmap = colormaps[name]
        colors = [to_bytes(cmap(i / 255.0)) for i in range(256)]
        labs = np.array([norm(srgb_to_lab(c)) for c in colors])
        arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(labs, axis=0), axis=1))])
        folded = any(
            np.linalg.norm(labs[i] - labs[j]) < MIN_CURVE_GAP
            for i in range(256) for j in range(i + 1, 256) if arc[j] - arc[i] > 3 * MIN_CURVE_GAP)
        if not folded:
            out.append((name, colors))
    # Linear lightness ramp with neutral chroma, L from 12 to 88.
    gray = []
    for i in range(256):
        L = 12.0 + 76.0 * i / 255.0
        gray.append(lab_gray_to_bytes(L))
    out.append(("grays", gray))
    return out


def lab_gray_to_bytes(L):
    fy = (L + 16) / 116.0
    d = 6.0 / 29.0
    y = fy ** 3 if fy > d else 3 * d * d * (fy - 4.0 / 29.0)
    c = 12.92 * y if y <= 0.0031308 else 1.055 * y ** (1 / 2.4) - 0.055
    v = int(round(255 * min(max(c, 0.0), 1.0)))
    return (v, v, v)


def main():
    maps = []
    for name, colors in discrete_maps():
        maps.append({"name": name, "kind": "discrete", "colors_hex": [hexstr(c) for c in colors]})
    for name, colors in continuous_maps():
        maps.append({"name": name, "kind": "continuous", "colors_hex": [hexstr(c) for c in colors]})
    sizes = {}
    for m in maps:
        if m["kind"] == "discrete":
            sizes[len(m["colors_hex"])] = sizes.get(len(m["colors_hex"]), 0) + 1
    print(f"discrete by size: {dict(sorted(sizes.items()))}; continuous: "
          f"{sum(m['kind'] == 'continuous' for m in maps)}", file=sys.stderr)
    json.dump({"version": 1, "colormaps": maps}, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
