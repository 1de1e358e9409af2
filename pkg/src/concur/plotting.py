"""Matplotlib rendering for report outputs (PNG files next to the JSON/CSV)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_ARM_COLORS = {"cp": "tab:red", "baseline": "tab:blue"}


def plot_loss_curves(histories, path, dpi=150):
    """Per-arm training loss; one thin line per run plus the run mean.

    ``histories`` maps arm name to a list of runs, each a list of
    (epoch, loss, val_f1) rows.
    """
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    for arm in sorted(histories):
        color = _ARM_COLORS.get(arm, "tab:gray")
        runs = histories[arm]
        for rows in runs:
            ax.plot([r[0] for r in rows], [r[1] for r in rows],
                    color=color, alpha=0.25, lw=0.8)
        if runs and all(len(r) == len(runs[0]) for r in runs):
            n = len(runs[0])
            mean = [sum(r[e][1] for r in runs) / len(runs) for e in range(n)]
            ax.plot(range(n), mean, color=color, lw=2.0, label=arm)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def plot_arm_comparison(summaries, path, dpi=150):
    """Grouped bars of mean test F1/AUC per arm with sd error bars."""
    arms = sorted(summaries)
    metrics = ["test_f1", "test_auc"]
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    width = 0.8 / max(1, len(arms))
    for i, arm in enumerate(arms):
        s = summaries[arm]
        means = [s.get(f"{m}_mean") or 0.0 for m in metrics]
        sds = [s.get(f"{m}_sd") or 0.0 for m in metrics]
        xs = [j + i * width for j in range(len(metrics))]
        ax.bar(xs, means, width=width, yerr=sds, capsize=3,
               color=_ARM_COLORS.get(arm, "tab:gray"), label=arm)
    ax.set_xticks([j + width * (len(arms) - 1) / 2 for j in range(len(metrics))])
    ax.set_xticklabels(["F1 (test)", "AUC (test)"])
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def plot_metric_vs_k(report_dict, path, dpi=150):
    """ANCD and ANCC against the hop bound, one line per node class."""
    ks = report_dict["k"]
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.4), sharex=True)
    for ax, name in zip(axes, ("ancd", "ancc")):
        for z, style in (("1", "tab:red"), ("0", "tab:blue")):
            ax.plot(ks, report_dict[name][z], marker="o", color=style,
                    label=f"class {z}")
        ax.set_xlabel("hops k")
        ax.set_ylabel(name.upper())
        ax.set_ylim(0.0, 1.05)
    axes[0].legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
