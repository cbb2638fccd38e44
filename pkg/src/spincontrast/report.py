"""Artifact writers: delimited output, JSON, PGM phantoms and figure files.

Every artifact embeds the canonical configuration hash of the run that
produced it, and writers avoid timestamps so identical configurations yield
byte-identical files.
"""

import hashlib
import json
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def canonical_config(cfg):
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=_jsonable)


def config_hash(cfg):
    return hashlib.sha256(canonical_config(cfg).encode()).hexdigest()[:12]


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    raise TypeError(f"not JSON-serializable: {type(value)}")


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    return f"{v:.12g}"


def write_csv(path, columns, rows, cfg=None):
    """Delimited table with a header row and config-echo comment lines."""
    lines = []
    if cfg is not None:
        lines.append(f"# config_hash: {config_hash(cfg)}")
        lines.append(f"# config: {canonical_config(cfg)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_json(path, payload, cfg=None):
    doc = dict(payload)
    if cfg is not None:
        doc["config"] = cfg
        doc["config_hash"] = config_hash(cfg)
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2, default=_jsonable)
        fh.write("\n")
    return path


def write_pgm(path, image, cfg=None):
    """8-bit binary PGM (P5); the config hash rides in a comment."""
    img = np.asarray(image)
    if img.dtype != np.uint8:
        raise ValueError("PGM writer expects a uint8 image")
    h, w = img.shape
    header = f"P5\n# config_hash: {config_hash(cfg) if cfg else 'none'}\n{w} {h}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode())
        fh.write(img.tobytes())
    return path


# ---------------------------------------------------------------------------
# phantom rendering
# ---------------------------------------------------------------------------

def render_phantom(level_inner, level_ring, resolution=256, disk_radius=0.55,
                   ring_outer=0.95, border=0.02):
    """Grayscale disk-in-ring image; levels in [0, 1] map 0->black, 1->white.

    The inner disk carries level_inner, the surrounding ring level_ring, a
    thin black circle separates them and everything beyond the ring is black.
    """
    ax = np.linspace(-1.0, 1.0, resolution)
    X, Y = np.meshgrid(ax, ax)
    r = np.hypot(X, Y)
    img = np.zeros((resolution, resolution))
    img[r <= disk_radius - border / 2.0] = level_inner
    ring = (r >= disk_radius + border / 2.0) & (r <= ring_outer)
    img[ring] = level_ring
    return np.clip(np.round(255.0 * img), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _save(fig, path):
    fig.savefig(path, dpi=130, metadata={"Software": "spincontrast"})
    plt.close(fig)
    return path


def fig_disk(path, curves, z0=None, title=None):
    """Trajectories in the meridian disk; curves = [(label, y, z), ...]."""
    fig, ax = plt.subplots(figsize=(5, 5))
    theta = np.linspace(0.0, 2.0 * math.pi, 256)
    ax.plot(np.cos(theta), np.sin(theta), color="0.7", lw=0.8)
    if z0 is not None:
        half = math.sqrt(max(0.0, 1.0 - z0 * z0))
        ax.plot([-half, half], [z0, z0], color="0.4", lw=0.8, ls="--")
    for label, y, z in curves:
        ax.plot(y, z, lw=1.0, label=label)
    ax.set_xlabel("y")
    ax.set_ylabel("z")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    if curves and len(curves) <= 8:
        ax.legend(fontsize=7, loc="lower right")
    return _save(fig, path)


def fig_series(path, t, values, ylabel, title=None, xlabel="normalized time"):
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(t, values, lw=1.0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def fig_contrast_vs_time(path, times, contrasts, tmin=None):
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(times, contrasts, marker="o", ms=3, lw=1.0)
    ax.set_xlabel("transfer time")
    ax.set_ylabel("terminal contrast")
    if tmin is not None:
        ax.axvline(tmin, color="0.6", lw=0.8, ls=":")
    fig.tight_layout()
    return _save(fig, path)


def fig_sweep(path, t1_ms, t2_ms, contrast, spin1_ms=None, probes=()):
    """Scattered contrast map over second-species relaxation times."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    pts = np.column_stack([t1_ms, t2_ms])
    ok = np.isfinite(contrast)
    if ok.sum() >= 4:
        tri = ax.tricontourf(pts[ok, 0], pts[ok, 1], np.asarray(contrast)[ok],
                             levels=21, cmap="viridis")
        fig.colorbar(tri, ax=ax, label="contrast")
    ax.plot(pts[ok, 0], pts[ok, 1], "k.", ms=2)
    if spin1_ms is not None:
        ax.plot([spin1_ms[0]], [spin1_ms[1]], "r*", ms=10, label="S (spin 1)")
    for px, py in probes:
        ax.plot([px], [py], "w^", ms=7, mec="k")
    ax.set_xlabel("T1 of spin 2 (ms)")
    ax.set_ylabel("T2 of spin 2 (ms)")
    if spin1_ms is not None:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def fig_projections(path, rays, z0=None):
    """Two-panel projection of product-state trajectories onto each spin plane.

    rays = [(label, x_samples) ...] with x_samples columns (y1, z1, y2, z2);
    dashed style marks rays flagged divergent (label ending in '!').
    """
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.5))
    theta = np.linspace(0.0, 2.0 * math.pi, 256)
    for k, ax in enumerate(axes):
        ax.plot(np.cos(theta), np.sin(theta), color="0.8", lw=0.8)
        if z0 is not None and k == 0:
            half = math.sqrt(max(0.0, 1.0 - z0 * z0))
            ax.plot([-half, half], [z0, z0], color="0.4", lw=0.8)
        for label, X in rays:
            style = "--" if label.endswith("!") else "-"
            ax.plot(X[:, 2 * k], X[:, 2 * k + 1], style, lw=0.8)
        ax.set_xlabel(f"y{k + 1}")
        ax.set_ylabel(f"z{k + 1}")
        ax.set_aspect("equal")
        ax.set_title(f"spin {k + 1}")
    fig.tight_layout()
    return _save(fig, path)


def fig_phantom(path, image):
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(image, cmap="gray", vmin=0, vmax=255)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    return _save(fig, path)
