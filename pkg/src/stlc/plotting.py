"""Figure rendering for the CLI report paths.

Each writer takes already-computed data and saves one PNG next to the
delimited output.  Figures are a convenience view; the CSV stays the
canonical artifact.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_bler_figure(points, title: str, path) -> None:
    snr = [p.snr_db for p in points]
    bler = [p.bler for p in points]
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.semilogy(snr, bler, "o-", lw=1.8)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("block error rate")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_profile_figure(result, title: str, path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    if len(result.sensitivity):
        ax1.scatter(result.sensitivity, result.nodes, s=4, alpha=0.35)
        ax1.set_yscale("log")
    ax1.set_xlabel("sensitivity metric")
    ax1.set_ylabel("nodes visited")
    ax1.grid(True, alpha=0.3)
    means = [b.mean_nodes for b in result.bins]
    ax2.plot(range(len(result.bins)), means, "s-")
    ax2.set_xlabel("sensitivity quantile bin")
    ax2.set_ylabel("mean nodes visited")
    ax2.grid(True, alpha=0.3)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_dmt_figure(r_values, d_values, family: str, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(r_values, d_values, "-", lw=1.8, label=family)
    ax.set_xlabel("multiplexing gain r")
    ax.set_ylabel("diversity gain d(r)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_energy_figure(sizes, energies, lattice: str, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(sizes, energies, "o-", lw=1.8, label=lattice)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("code size K")
    ax.set_ylabel("average energy (min-det normalized)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
