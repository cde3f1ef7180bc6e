"""ROC figures written next to the delimited report files.

SVG output is made byte-reproducible: fixed hash salt for element ids, no
date metadata, text rendered as paths.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "svg.hashsalt": "xspec-eval",
    "svg.fonttype": "path",
    "font.size": 11,
    "axes.labelsize": 12,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.6,
    "legend.fontsize": 9,
    "legend.frameon": False,
}
FIGSIZE = (8.0, 6.0)


def _far_floor(curves) -> float:
    positive = [f for c in curves for f in c.far.tolist() if f > 0]
    return min(positive) if positive else 1e-3


def plot_roc(curves: dict, path, title: str = "ROC", log_far: bool = True) -> None:
    """Plot GAR against FAR for one or more labelled curves and save to ``path``.

    With ``log_far`` the zero-FAR sentinel is drawn at the smallest positive
    FAR present, since a log axis cannot show 0.
    """
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=FIGSIZE)
        floor = _far_floor(curves.values())
        for label, curve in curves.items():
            far = curve.far.copy()
            if log_far:
                far[far <= 0] = floor
            ax.plot(far, curve.gar, drawstyle="default", label=label)
        if log_far:
            ax.set_xscale("log")
            ax.set_xlim(floor, 1.0)
        else:
            ax.set_xlim(0.0, 1.0)
        ax.set_ylim(0.0, 1.02)
        ax.set_xlabel("False Acceptance Rate")
        ax.set_ylabel("Genuine Acceptance Rate")
        ax.set_title(title)
        if len(curves) > 1:
            ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
