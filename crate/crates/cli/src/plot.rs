//! Optional matplotlib script for the files a command writes.

/// Script that draws each grid as a heat map over its two sampled axes and,
/// when given, the alignment signal.
pub fn script(grids: &[&str], signal: Option<&str>) -> String {
    let list = grids.iter().map(|g| format!("{g:?}")).collect::<Vec<_>>().join(", ");
    let signal = signal.map_or("None".to_string(), |s| format!("{s:?}"));
    format!(
        r#"import os
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
GRIDS = [{list}]
SIGNAL = {signal}
PAIRS = [("alpha", "m_alpha"), ("beta", "m_beta"), ("gamma", "m_gamma")]


def plot_grid(stem):
    t = np.genfromtxt(os.path.join(HERE, stem + ".tsv"), names=True, delimiter="\t")
    for ang, mom in PAIRS:
        a = np.unique(t[ang])
        m = np.unique(t[mom])
        if len(a) > 1 and len(m) > 1:
            break
    else:
        return
    w = np.zeros((len(m), len(a)))
    ia = np.searchsorted(a, t[ang])
    im = np.searchsorted(m, t[mom])
    np.add.at(w, (im, ia), t["W"])
    lim = np.abs(w).max() or 1.0
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(a, m, w, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="W")
    ax.set_xlabel(ang)
    ax.set_ylabel(mom)
    ax.set_title(stem)
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, stem + ".png"), dpi=150)
    plt.close(fig)


def plot_signal(name):
    t = np.genfromtxt(os.path.join(HERE, name), names=True, delimiter="\t")
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(t["t_bar"], t["cos2beta"], "o-")
    ax.set_xlabel("t_bar")
    ax.set_ylabel("<cos^2 beta>")
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, os.path.splitext(name)[0] + ".png"), dpi=150)
    plt.close(fig)


for g in GRIDS:
    plot_grid(g)
if SIGNAL:
    plot_signal(SIGNAL)
"#
    )
}
