"""Figures written next to the CSV / JSON outputs."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .image_core import RasterImage  # noqa: E402

DEFAULT_STYLE = {
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def plot_sweep(rows: Sequence, path: Union[str, Path], title: Optional[str] = None) -> None:
    """Detection rate and false-detection rate against the attack parameter.

    One line per target. Error rows are skipped.
    """
    ok = [r for r in rows if r.metrics is not None]
    with plt.rc_context(DEFAULT_STYLE):
        fig, (ax_d, ax_f) = plt.subplots(1, 2, figsize=(7.0, 2.8))
        labels = list(dict.fromkeys(r.param for r in rows))
        x = {p: k for k, p in enumerate(labels)}
        for target in dict.fromkeys(r.target for r in rows):
            sel = [r for r in ok if r.target == target]
            if not sel:
                continue
            xs = [x[r.param] for r in sel]
            ax_d.plot(xs, [r.metrics.d_percent for r in sel], "o-", label=target)
            ax_f.plot(xs, [r.metrics.f_percent for r in sel], "s--", label=target)
        for ax, name in ((ax_d, "d (%)"), (ax_f, "f (%)")):
            ax.set_xticks(range(len(labels)))
            ax.set_xticklabels(labels)
            ax.set_xlabel(rows[0].attack if rows else "")
            ax.set_ylabel(name)
            ax.grid(alpha=0.3)
        ax_d.set_ylim(-2, 102)
        ax_d.legend(frameon=False)
        if title:
            fig.suptitle(title)
        fig.savefig(path)
        plt.close(fig)


def plot_detection(
    img: RasterImage,
    mask,
    path: Union[str, Path],
    truth=None,
) -> None:
    """Image, detected mask and (optionally) ground truth side by side."""
    bits = np.asarray(getattr(mask, "bits", mask), dtype=bool)
    panels = [("image", img.data), ("detected", bits)]
    if truth is not None:
        panels.append(("ground truth", np.asarray(getattr(truth, "bits", truth), dtype=bool)))
    with plt.rc_context(DEFAULT_STYLE):
        fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 2.4))
        for ax, (name, arr) in zip(axes, panels):
            if arr.ndim == 2:
                ax.imshow(arr, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
            else:
                ax.imshow(arr, interpolation="nearest")
            ax.set_title(name)
            ax.set_axis_off()
        fig.savefig(path)
        plt.close(fig)
