"""
Optional static SVG renderings of the CSV artifacts (needs matplotlib).

The SVG writer is pinned to a fixed hash salt and no date stamp so repeated
runs produce identical files.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SVG_METADATA = {"Date": None, "Creator": None}


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "risbeam", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)


def reward_curve_svg(path, rewards, smoothed):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(1, len(rewards) + 1), rewards, lw=0.4, alpha=0.4, label="reward")
    ax.plot(range(1, len(smoothed) + 1), smoothed, lw=1.2, label="moving average")
    ax.set_xlabel("step")
    ax.set_ylabel("reward")
    ax.legend()
    _save(fig, path)


def sweep_svg(path, rows):
    fig, ax = plt.subplots(figsize=(6, 4))
    series = {}
    for dist, n, scheme, mean, _ in rows:
        series.setdefault((dist, scheme), []).append((n, mean))
    for (dist, scheme), pts in series.items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", ls="-" if scheme == "ddpg" else "--",
                label=f"{dist} / {scheme}")
    ax.set_xlabel("ground users")
    ax.set_ylabel("sum rate (bit/s)")
    ax.legend(fontsize="small")
    _save(fig, path)
