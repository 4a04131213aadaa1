"""Result emission: deterministic JSON/CSV writers and companion figures.

All floats are serialized with 17 significant digits so outputs round-trip
bit-exactly and identical runs produce identical bytes.  CSV files written by
the CLI get a rendered PNG figure next to them unless plotting is disabled.
"""

from __future__ import annotations

import os

import numpy as np

from .profile_solver import fmt17

__all__ = ["dumps17", "csv_text", "write_text", "figure_path",
           "rate_figure", "scan_figure", "trajectory_figure"]


def dumps17(obj) -> str:
    """Compact JSON with 17-significant-digit floats and stable key order."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt17(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return '{"re":%s,"im":%s}' % (fmt17(obj.real), fmt17(obj.imag))
    if isinstance(obj, dict):
        return "{" + ",".join(f"{dumps17(str(k))}:{dumps17(v)}"
                              for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps17(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _cell(v) -> str:
    if v is None:
        return ""
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, (float, np.floating)):
        return fmt17(float(v))
    return str(v)


def csv_text(header: list[str], rows) -> str:
    """CSV with a header row and LF line endings."""
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def figure_path(out_path: str) -> str:
    root, _ = os.path.splitext(out_path)
    return root + ".png"


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


_SAVE_KW = dict(dpi=150, metadata={"Software": "vortexlab"})


def rate_figure(path: str, ms, h2_errs, linf_errs, rate_h2=None, rate_linf=None):
    """Log-log convergence plot of the profile-vs-ring-soliton errors."""
    plt = _pyplot()
    ms = np.asarray(ms, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(ms, h2_errs, "o-", label="H2 error")
    ax.loglog(ms, linf_errs, "s-", label="Linf error")
    if rate_h2 is not None:
        ref = h2_errs[0] * (ms / ms[0]) ** rate_h2
        ax.loglog(ms, ref, "k--", lw=1, label=f"fit slope {rate_h2:.2f}")
    if rate_linf is not None:
        ref = linf_errs[0] * (ms / ms[0]) ** rate_linf
        ax.loglog(ms, ref, "k:", lw=1, label=f"fit slope {rate_linf:.2f}")
    ax.set_xlabel("spin m")
    ax.set_ylabel("error vs shifted 1D soliton")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def scan_figure(path: str, rows):
    """Growth rate vs perturbation index, with the predicted line and bracket."""
    plt = _pyplot()
    js = np.array([r.j for r in rows], dtype=float)
    max_re = np.array([r.max_re for r in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot(js, max_re, "o-", label="max Re eigenvalue")
    if all(r.predicted is not None for r in rows):
        pred = np.array([r.predicted for r in rows])
        lo = np.array([r.bracket[0] for r in rows])
        hi = np.array([r.bracket[1] for r in rows])
        ax.plot(js, pred, "k--", lw=1, label="predicted")
        ax.fill_between(js, lo, hi, alpha=0.15, color="gray", label="bracket")
    for r in rows:
        if r.flagged:
            ax.axvline(r.j, color="crimson", lw=1, ls=":", label=f"j* = {r.j}")
    ax.set_xlabel("perturbation index j")
    ax.set_ylabel("growth rate")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def trajectory_figure(path: str, traj, rate=None, burn_in_fraction=0.0):
    """Norm history on a log scale with the fitted exponential."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.semilogy(traj.t, traj.norm, lw=1.2, label="||w(t)||")
    if rate is not None:
        k0 = int(burn_in_fraction * len(traj))
        ref = traj.norm[k0] * np.exp(rate * (traj.t - traj.t[k0]))
        ax.semilogy(traj.t, ref, "k--", lw=1, label=f"fit rate {rate:.4f}")
    ax.set_xlabel("t")
    ax.set_ylabel("perturbation norm")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
