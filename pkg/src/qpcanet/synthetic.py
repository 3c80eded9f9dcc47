"""Seeded procedural colour-image datasets for end-to-end checks."""
from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

__all__ = ["TEXTURES", "PALETTES", "colored_textures", "rotated_objects"]

TEXTURES = ("horizontal", "vertical", "diagonal", "checker")
PALETTES = (
    ((0.85, 0.15, 0.10), (0.10, 0.20, 0.80)),  # red on blue
    ((0.15, 0.75, 0.20), (0.90, 0.85, 0.15)),  # green on yellow
)


def _texture(kind, size, period, phase, rng):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    w = 2 * np.pi / period
    if kind == "horizontal":
        field = np.sin(w * yy + phase)
    elif kind == "vertical":
        field = np.sin(w * xx + phase)
    elif kind == "diagonal":
        field = np.sin(w * (xx + yy) / np.sqrt(2) + phase)
    elif kind == "checker":
        field = np.sin(w * xx + phase) * np.sin(w * yy + rng.uniform(0, 2 * np.pi))
    else:
        raise ValueError(kind)
    return 0.5 * (1 + np.tanh(3 * field))


def colored_textures(per_class: int = 40, size: int = 32, seed: int = 0, noise: float = 0.04):
    """Eight classes: four stripe/checker textures times two colour palettes.

    Period, phase and colours are jittered per image and Gaussian pixel noise
    is added. Returns ``(images, labels)`` with images ``(size, size, 3)``
    in ``[0, 1]`` and labels ``"<texture>-<palette>"``.
    """
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for t_idx, kind in enumerate(TEXTURES):
        for p_idx, (fg, bg) in enumerate(PALETTES):
            for _ in range(per_class):
                period = rng.uniform(5.0, 9.0)
                mask = _texture(kind, size, period, rng.uniform(0, 2 * np.pi), rng)[..., None]
                fg_c = np.clip(np.array(fg) + rng.normal(0, 0.05, 3), 0, 1)
                bg_c = np.clip(np.array(bg) + rng.normal(0, 0.05, 3), 0, 1)
                img = mask * fg_c + (1 - mask) * bg_c + rng.normal(0, noise, (size, size, 3))
                images.append(np.clip(img, 0.0, 1.0))
                labels.append(f"{kind}-{p_idx}")
    return images, labels


def _base_object(rng, canvas):
    img = Image.new("RGB", (canvas, canvas), (0, 0, 0))
    draw = ImageDraw.Draw(img)
    c = canvas / 2
    radius = canvas * 0.34  # keeps every shape inside the rotation-safe disc
    for _ in range(rng.integers(3, 6)):
        color = tuple(int(v) for v in rng.integers(40, 256, 3))
        r = rng.uniform(0.0, radius * 0.6)
        a = rng.uniform(0, 2 * np.pi)
        cx, cy = c + r * np.cos(a), c + r * np.sin(a)
        ext = rng.uniform(canvas * 0.06, radius - r + canvas * 0.02)
        ext = min(ext, radius - r) if radius - r > 2 else 2
        shape = rng.integers(0, 3)
        box = [cx - ext, cy - ext * rng.uniform(0.4, 1.0), cx + ext, cy + ext * rng.uniform(0.4, 1.0)]
        if shape == 0:
            draw.ellipse(box, fill=color)
        elif shape == 1:
            draw.rectangle(box, fill=color)
        else:
            pts = [(cx + ext * np.cos(a + k * 2.1), cy + ext * np.sin(a + k * 2.1)) for k in range(3)]
            draw.polygon(pts, fill=color)
    return img


def rotated_objects(n_classes: int = 10, size: int = 32, seed: int = 0, step_deg: int = 10, canvas: int = 96):
    """Each class is one random colour object rotated through a full turn.

    Objects are drawn on a black canvas inside a centred disc so rotation
    never clips them, rotated bilinearly in ``step_deg`` steps and scaled to
    ``size x size``. Returns ``(images, labels)`` with labels ``"obj<k>"``.
    """
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for k in range(n_classes):
        base = _base_object(rng, canvas)
        for angle in range(0, 360, step_deg):
            rot = base.rotate(angle, resample=Image.BILINEAR)
            small = rot.resize((size, size), Image.BILINEAR)
            images.append(np.asarray(small, dtype=np.float64) / 255.0)
            labels.append(f"obj{k}")
    return images, labels
