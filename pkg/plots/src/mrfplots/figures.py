"""The three figure kinds rendered from mrfcrb result CSVs.

crb_vs_theta  exact CRB line with Monte Carlo estimates as markers,
              logarithmic y axis.
crb_vs_n      CRB against the number of lattice sites, one series per
              label count K, log-log, with a least-squares line per K.
variance_vs_crb  CRB line under empirical estimator variances,
              logarithmic y axis.

Rendering only rearranges numbers already present in the CSV; the one
computation is the log-log least-squares line in crb_vs_n.
"""

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .reader import InputError, read_rows, require_columns

FIGURE_KINDS = ("crb_vs_theta", "crb_vs_n", "variance_vs_crb")

# fixed salt and stripped date metadata keep SVG output byte-stable
plt.rcParams["svg.hashsalt"] = "mrfplots"
plt.rcParams["svg.fonttype"] = "none"


@dataclass
class FigureSpec:
    inputs: list
    kind: str
    output: str
    logx: bool = False
    logy: bool = True
    title: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise InputError(f"unknown figure kind: {self.kind}")
        suffix = self.output.rsplit(".", 1)[-1].lower()
        if suffix not in ("svg", "png"):
            raise InputError(f"output must be .svg or .png, got {self.output}")


def _numeric(rows, name):
    vals = []
    for row in rows:
        if name not in row:
            raise InputError(f"missing column: {name}")
        cell = (row[name] or "").strip()
        vals.append(float(cell) if cell else None)
    return vals


def _pairs(xs, ys):
    pts = [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None]
    return sorted(pts)


def _save(fig, spec):
    if spec.output.lower().endswith(".svg"):
        fig.savefig(spec.output, metadata={"Date": None})
    else:
        fig.savefig(spec.output, dpi=150)
    plt.close(fig)


def _crb_vs_theta(rows, spec, ax):
    require_columns(rows, ["theta", "crb", "exact_crb"])
    theta = _numeric(rows, "theta")
    exact = _pairs(theta, _numeric(rows, "exact_crb"))
    est = _pairs(theta, _numeric(rows, "crb"))
    if not exact:
        raise InputError("no values in column: exact_crb")
    if not est:
        raise InputError("no values in column: crb")
    # the exact curve repeats once per seed in validate output
    exact = sorted(dict(exact).items())
    ax.plot(*zip(*exact), "-", color="tab:red", label="exact CRB")
    ax.plot(*zip(*est), "o", ms=4, mfc="none", color="tab:blue", label="MC estimate")
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("CRB")


def _crb_vs_n(rows, spec, ax):
    require_columns(rows, ["K", "width", "height", "crb"])
    ks = _numeric(rows, "K")
    n = [w * h if w is not None and h is not None else None
         for w, h in zip(_numeric(rows, "width"), _numeric(rows, "height"))]
    crb = _numeric(rows, "crb")
    spec.logx = True
    any_series = False
    for k in sorted({int(k) for k in ks if k is not None}):
        pts = _pairs([ni for ni, ki in zip(n, ks) if ki == k],
                     [ci for ci, ki in zip(crb, ks) if ki == k])
        if not pts:
            continue
        any_series = True
        xs, ys = zip(*pts)
        line, = ax.plot(xs, ys, "o", ms=5, label=f"K={k}")
        if len(set(xs)) >= 2:
            slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
            grid = np.linspace(min(np.log(xs)), max(np.log(xs)), 50)
            ax.plot(np.exp(grid), np.exp(slope * grid + intercept), "-",
                    color=line.get_color(), lw=1)
    if not any_series:
        raise InputError("no values in column: crb")
    ax.set_xlabel("number of sites N")
    ax.set_ylabel("CRB")


def _variance_vs_crb(rows, spec, ax):
    require_columns(rows, ["theta", "crb", "emp_var"])
    theta = _numeric(rows, "theta")
    crb = _pairs(theta, _numeric(rows, "crb"))
    var = _pairs(theta, _numeric(rows, "emp_var"))
    if not crb:
        raise InputError("no values in column: crb")
    if not var:
        raise InputError("no values in column: emp_var")
    ax.plot(*zip(*crb), "-", color="tab:red", label="CRB")
    ax.plot(*zip(*var), "s", ms=5, mfc="none", color="tab:blue",
            label="estimator variance")
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("variance")


_RENDERERS = {
    "crb_vs_theta": _crb_vs_theta,
    "crb_vs_n": _crb_vs_n,
    "variance_vs_crb": _variance_vs_crb,
}


def render(spec: FigureSpec) -> str:
    """Render the figure described by `spec` and return the output path."""
    rows = read_rows(spec.inputs)
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    _RENDERERS[spec.kind](rows, spec, ax)
    if spec.logy:
        ax.set_yscale("log")
    if spec.logx:
        ax.set_xscale("log")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, spec)
    return spec.output
