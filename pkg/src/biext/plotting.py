"""Figures written next to the CSV/JSON outputs (Agg backend, files only)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .periods import ScanResult  # noqa: E402
from .surfaces import Surface  # noqa: E402


def _punctures(ax, s: Surface, region):
    x0, x1, y0, y1 = region
    pts = []
    for p in s.finite_punctures:
        if s.lattice is None:
            pts.append(p)
            continue
        for m in range(-3, 4):
            for n in range(-3, 4):
                pts.append(p + m + n * s.tau)
    pts = [z for z in pts if x0 <= z.real <= x1 and y0 <= z.imag <= y1]
    if pts:
        ax.plot([z.real for z in pts], [z.imag for z in pts], "kx", ms=6, label="punctures")


def scan_figure(res: ScanResult, s: Surface, path, title: str = "") -> None:
    """Heat map of ``log10 |Ψ|`` with flagged cells overlaid."""
    x0, x1, y0, y1 = res.region
    fig, ax = plt.subplots(figsize=(6, 5))
    with np.errstate(divide="ignore"):
        img = np.log10(np.where(res.norm > 0, res.norm, np.nan))
    im = ax.imshow(img, origin="lower", extent=(x0, x1, y0, y1), cmap="viridis", aspect="equal")
    fig.colorbar(im, ax=ax, label="log10 |Ψ|")
    iy, ix = np.nonzero(res.flagged)
    if iy.size:
        z = res.centers[iy, ix]
        ax.plot(z.real, z.imag, "s", color="red", ms=2, label=f"|Ψ| < {res.tol:g}")
    _punctures(ax, s, res.region)
    verdict = "nowhere dense" if res.nowhere_dense else "has interior"
    ax.set_title(title or f"{res.n}x{res.n} scan: {verdict}")
    ax.set_xlabel("Re q")
    ax.set_ylabel("Im q")
    if iy.size or s.finite_punctures:
        ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def greens_figure(points: np.ndarray, values: np.ndarray, s: Surface, path, title: str = "") -> None:
    """Scatter/contour of Green current samples."""
    fig, ax = plt.subplots(figsize=(6, 5))
    pts = np.asarray(points)
    sc = ax.scatter(pts.real, pts.imag, c=values, cmap="coolwarm", s=12)
    fig.colorbar(sc, ax=ax, label="f")
    xs, ys = pts.real, pts.imag
    _punctures(ax, s, (xs.min(), xs.max(), ys.min(), ys.max()))
    ax.set_aspect("equal")
    ax.set_title(title or "Green current")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
