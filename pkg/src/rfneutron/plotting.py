"""Figures written next to the CSV tables."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "svg.hashsalt": "rfneutron",
}
GOLDEN = (np.sqrt(5) - 1.0) / 2.0


def _figure(width=5.0, height=None, ncols=1):
    height = height or width * GOLDEN
    return plt.subplots(1, ncols, figsize=(width, height), squeeze=False)


def _save(fig, path):
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def fringe_figure(path, x, o, h, fit=None, xlabel="phase shifter χ (rad)"):
    with plt.rc_context(RC):
        fig, axes = _figure()
        ax = axes[0, 0]
        ax.plot(x, o, "o", color="C0", label="O beam")
        ax.plot(x, h, "s", color="C1", mfc="none", label="H beam")
        if fit is not None:
            xx = np.linspace(np.min(x), np.max(x), 400)
            ax.plot(xx, fit.offset * (1 + fit.visibility * np.cos(xx + fit.phase)), "-", color="C0",
                    label=f"fit ν={fit.visibility:.3f}")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("intensity (port-share units)")
        ax.legend()
        _save(fig, path)


def slopes_figure(path, records):
    with plt.rc_context(RC):
        fig, axes = _figure(width=8.0, height=3.2, ncols=2)
        for ax, parameter, label in zip(axes[0], ("phi_omega", "phi_half"), ("φ_ω", "φ_ω/2")):
            mine = [r for r in records if r.parameter == parameter]
            for rec, marker, color in zip(mine, ("o", "s"), ("C0", "C3")):
                phases = np.unwrap(rec.phases)
                ax.plot(rec.settings, phases, marker, mfc="none", color=color,
                        label=f"spin {rec.spin.value}: slope {rec.fit.slope:+.4f}")
                ax.plot(rec.settings, rec.fit.intercept + rec.fit.slope * rec.settings, "-",
                        lw=0.8, color=color)
            ax.set_xlabel(f"{label} (rad)")
            ax.set_ylabel("ΔΦ (rad)")
            ax.legend()
        _save(fig, path)


def polarization_figure(path, t, pol):
    with plt.rc_context(RC):
        fig, axes = _figure()
        ax = axes[0, 0]
        for i, name in enumerate(("P_x", "P_y", "P_z")):
            ax.plot(np.asarray(t) * 1e6, pol[:, i], label=name)
        ax.set_xlabel("detection time t (µs)")
        ax.set_ylabel("polarization")
        ax.legend()
        _save(fig, path)


def rabi_figure(path, areas, quantum, semiclassical):
    with plt.rc_context(RC):
        fig, axes = _figure()
        ax = axes[0, 0]
        ax.plot(areas, semiclassical, "-", color="0.5", label="semiclassical")
        ax.plot(areas, quantum, "o", mfc="none", label="quantized field")
        ax.set_xlabel("pulse area (rad)")
        ax.set_ylabel("flip probability")
        ax.legend()
        _save(fig, path)
