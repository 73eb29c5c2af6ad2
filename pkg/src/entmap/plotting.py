"""SVG figures of the two-measure entanglement map.

Figures are 800 x 600 SVG user units with linear axes padded 5% around the
data.  Text is kept as ``<text>`` elements and the SVG hash salt and date
are fixed, so reruns produce identical files.
"""

import matplotlib

matplotlib.use("Agg")

from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .measures import NEGATIVITY_CONVENTION  # noqa: E402

WIDTH, HEIGHT = 800, 600
MARGIN = 40
POINT_RADIUS = 2.0

_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": "entmap",
    "font.size": 10,
    "axes.xmargin": 0.05,
    "axes.ymargin": 0.05,
}


def _figure():
    # one SVG user unit == 1/72 in
    fig = Figure(figsize=(WIDTH / 72.0, HEIGHT / 72.0))
    FigureCanvasSVG(fig)
    left = (MARGIN + 20) / WIDTH
    bottom = (MARGIN + 20) / HEIGHT
    fig.subplots_adjust(left=left, right=1 - MARGIN / WIDTH, bottom=bottom, top=1 - MARGIN / HEIGHT)
    return fig


def map_figure(xs, ys, label_x, label_y, title=None, path=None):
    """Scatter of ``(E_A, E_B)`` pairs, optionally with a trajectory polyline.

    ``path`` is a sequence of ``(x, y)`` points drawn over the scatter.
    """
    with matplotlib.rc_context(_RC):
        fig = _figure()
        ax = fig.add_subplot(1, 1, 1)
        # marker size is an area in pt^2
        ax.scatter(xs, ys, s=(2 * POINT_RADIUS) ** 2, c="#1f4e79", linewidths=0, label="states")
        if path is not None and len(path):
            px = [p[0] for p in path]
            py = [p[1] for p in path]
            ax.plot(px, py, "-", color="#c0392b", lw=1.2, marker="o", ms=3, label="trajectory")
            ax.plot(px[:1], py[:1], marker="s", ms=5, color="#c0392b", ls="none")
        if not len(xs) and (path is None or not len(path)):
            ax.set_xlim(0.0, 1.0)
            ax.set_ylim(0.0, 1.0)
        ax.set_xlabel(label_x)
        ax.set_ylabel(label_y)
        if title:
            ax.set_title(title)
        fig.text(0.99, 0.01, NEGATIVITY_CONVENTION, ha="right", va="bottom", fontsize=8, color="0.35")
    return fig


def save_svg(fig, path):
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
