"""Figure rendering for the report path.

Curves emitted as CSV by the command line can also be rendered to a PNG
placed alongside the delimited output.  Rendering is headless (Agg) and
deterministic; styling stays close to matplotlib defaults.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "figure.figsize": (6.4, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.5,
    "legend.fontsize": 9,
}


def render_curve(header, rows, path, title=None, logx=False):
    """Plot the 2nd.. columns of the rows against the first, save to path.

    Non-numeric columns are skipped.  Returns the path.
    """
    cols = list(zip(*rows)) if rows else [[] for _ in header]
    x = [float(v) for v in cols[0]]
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots()
        for name, values in zip(header[1:], cols[1:]):
            try:
                y = [float(v) for v in values]
            except (TypeError, ValueError):
                continue
            ax.plot(x, y, marker="o", markersize=3, label=name)
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(header[0])
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path
