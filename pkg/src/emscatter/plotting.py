"""Figure rendering for sweep output: sigma_N curves per method.

Renders the same rows that go into the CSV, one line per (method, group),
against the sweep's natural axis (kR, phase shift rho, or refractive
index n).  Files are written with the Agg backend so rendering works
headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

_AXIS_LABEL = {
    "kr": r"$kR$",
    "rho": r"$\rho = 2(n-1)kR$",
    "n": r"refractive index $n$",
}

_METHOD_LABEL = {
    "mie": "Mie series",
    "rayleigh_gans": "Rayleigh-Gans",
    "semigroup": "semigroup",
    "vdh": "van de Hulst",
    "evans_fournier": "Evans-Fournier",
    "rayleigh_quartic": "Rayleigh quartic",
}

_STYLE = {
    "mie": dict(color="black", lw=1.8),
    "rayleigh_gans": dict(color="tab:red", lw=1.2, ls="--"),
    "semigroup": dict(color="tab:blue", lw=1.4),
    "vdh": dict(color="tab:green", lw=1.2, ls="-."),
    "evans_fournier": dict(color="tab:purple", lw=1.2, ls=":"),
    "rayleigh_quartic": dict(color="tab:orange", lw=1.0, ls="--"),
}


def render_sweep_figure(rows: list[dict], axis: str, out_path: str, title: str = "") -> None:
    """Plot sigma_N against the sweep axis, one panel per group key.

    ``rows`` are sweep-result dicts with keys n, kR, rho, method, sigma_n
    (sigma_n may be None for failed points).  Groups are panels: for an
    n-axis sweep the group is kR, otherwise n.
    """
    if axis not in _AXIS_LABEL:
        raise ValueError(f"unknown axis kind {axis!r}")
    groups: dict[float, list[dict]] = {}
    for row in rows:
        key = row["kR"] if axis == "n" else row["n"]
        groups.setdefault(key, []).append(row)

    fig, axes = plt.subplots(
        len(groups), 1, figsize=(6.4, 3.2 * len(groups)), squeeze=False, sharex=True
    )
    for ax, (key, grp) in zip(axes[:, 0], sorted(groups.items())):
        methods: dict[str, list[tuple[float, float]]] = {}
        for row in grp:
            if row["sigma_n"] is None:
                continue
            if axis == "kr":
                x = row["kR"]
            elif axis == "rho":
                x = row["rho"]
            else:
                x = row["n"]
            methods.setdefault(row["method"], []).append((x, row["sigma_n"]))
        for name, pts in methods.items():
            pts.sort()
            ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                label=_METHOD_LABEL.get(name, name),
                **_STYLE.get(name, {}),
            )
        if axis == "n":
            ax.set_title(f"$kR = {key:.6g}$" + (f"  ({title})" if title else ""))
        else:
            ax.set_title(f"$n = {key:.6g}$" + (f"  ({title})" if title else ""))
        ax.set_ylabel(r"$\sigma_{sc} / (\pi R^2)$")
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)
    axes[-1, 0].set_xlabel(_AXIS_LABEL[axis])
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_lab_figure(trace: list[tuple[float, float]], skin: list[tuple[float, float]], out_path: str) -> None:
    """Two-panel summary of a semigroup lab run: decay trace and skin probe."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    taus = [t for t, _ in trace]
    norms = [v for _, v in trace]
    ax1.plot(taus, norms, "o-", ms=3, color="tab:blue")
    ax1.set_xlabel(r"$\tau$")
    ax1.set_ylabel(r"$\Vert \psi_\tau \Vert$")
    ax1.set_title("evolution trace")
    if taus[-1] > 0 and taus[1] > 0:
        ax1.set_xscale("symlog", linthresh=max(taus[1], 1e-12))
    ax1.grid(alpha=0.3)
    mags = [m for m, _ in skin]
    vals = [v for _, v in skin]
    ax2.loglog(mags, vals, "s-", color="tab:red")
    ax2.set_xlabel(r"$|\chi|$")
    ax2.set_ylabel("probe functional")
    ax2.set_title("interior-current probe")
    ax2.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
