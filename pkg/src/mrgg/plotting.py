"""Figure rendering for the report commands: small self-contained SVG line charts."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

plt.rcParams["figure.figsize"] = (5.0, 3.2)
plt.rcParams["savefig.bbox"] = "tight"

__all__ = ["save_overlay", "save_errorbars", "save_posterior_markers", "save_risk_bars"]


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def save_overlay(path, x, curves, xlabel, ylabel, title=None):
    """Overlay of named curves on a shared grid; estimates solid, truths dotted."""
    fig, ax = plt.subplots()
    for label, y in curves.items():
        style = ":" if "true" in label else "-"
        ax.plot(x, y, style, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    _save(fig, path)


def save_errorbars(path, x, series, xlabel, ylabel, title=None):
    """Mean curves with standard-deviation bars, one per label."""
    fig, ax = plt.subplots()
    for label, (mean, sd) in series.items():
        ax.errorbar(x, mean, yerr=sd, marker="o", capsize=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    _save(fig, path)


def save_posterior_markers(path, nodes, columns, title=None):
    """Per-node posterior values for several predictors, one marker style each."""
    fig, ax = plt.subplots()
    markers = ["x", "+", "*", "o"]
    for (label, values), marker in zip(columns.items(), markers):
        ax.plot(nodes, values, marker, linestyle="none", markersize=8, label=label)
    ax.set_xlabel("node")
    ax.set_ylabel("posterior connection probability")
    ax.set_ylim(-0.05, 1.05)
    if title:
        ax.set_title(title)
    ax.legend()
    _save(fig, path)


def save_risk_bars(path, labels, values, ylabel, title=None):
    fig, ax = plt.subplots()
    ax.bar(labels, values)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    _save(fig, path)
