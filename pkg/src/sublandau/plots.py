"""Figure rendering for the CLI report paths (Agg backend, files only).

Figures are a convenience next to the canonical CSV; the determinism
contract applies to the CSV, not the PNG.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_bound_curves", "plot_error_curves", "plot_codebook_curves"]


def plot_bound_curves(path: Path, snr_db, series: dict[str, tuple]) -> Path:
    """series maps label -> (values, std_errors or None)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for label, (vals, ses) in series.items():
        if ses is not None:
            ax.errorbar(snr_db, vals, yerr=[3 * s for s in ses], label=label,
                        marker="o", capsize=3)
        else:
            ax.plot(snr_db, vals, label=label, marker="s", linestyle="--")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("bits per channel use")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_error_curves(path: Path, snr_db, series: dict[str, list], analytic: dict[str, list]) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for label, vals in series.items():
        ax.semilogy(snr_db, [max(v, 1e-12) for v in vals], marker="o", label=label)
    for label, vals in analytic.items():
        ax.semilogy(snr_db, [max(v, 1e-12) for v in vals], linestyle="--", label=label)
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("support detection error probability")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_codebook_curves(path: Path, rows: list[dict]) -> Path:
    """rows: per-configuration dicts with block_length, num_messages,
    msg_err, sup_err."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    by_m: dict[int, list[tuple[int, float, float]]] = {}
    for r in rows:
        by_m.setdefault(r["num_messages"], []).append(
            (r["block_length"], r["msg_err"], r["sup_err"])
        )
    for m, pts in sorted(by_m.items()):
        pts.sort()
        ns = [p[0] for p in pts]
        ax.plot(ns, [max(p[1], 1e-12) for p in pts], marker="o",
                label=f"message error, M={m}")
        ax.plot(ns, [max(p[2], 1e-12) for p in pts], marker="x", linestyle=":",
                label=f"support error, M={m}")
    ax.set_yscale("log")
    ax.set_xlabel("block length N")
    ax.set_ylabel("error rate")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
