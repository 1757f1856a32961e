"""Parameter sets of the published Figures 1-3.

Each preset fixes the model parameters, the swept parameter with its values,
and the wealth level x at which C(t, x) and pi(t, x) are evaluated.
Figure 1 has two candidate p-lists (body text and caption); the body-text
list is the default and the alternative is kept for reference.
"""

FIGURES = {
    "fig1_linear": dict(
        mode="linear", T=2.0, delta=0.1, x0=5.0, z0=1.0, mu=0.2, sigma=0.6, p=0.5,
        x_eval=5.0, sweep="p", values=(0.2, 0.3, 0.5), caption_values=(0.2, 0.5, 0.7),
    ),
    "fig1_mult": dict(
        mode="multiplicative", T=2.0, delta=0.1, x0=5.0, z0=10.0, mu=0.2, sigma=0.2, p=0.5,
        alpha=1.0, x_eval=1.0, sweep="p", values=(0.2, 0.5, 0.7), caption_values=(0.2, 0.3, 0.5),
    ),
    "fig2_linear": dict(
        mode="linear", T=2.0, p=0.1, x0=3.0, z0=0.5, mu=0.1, sigma=0.1, delta=0.1,
        x_eval=2.0, sweep="delta", values=(0.1, 0.2, 0.3),
    ),
    "fig2_mult": dict(
        mode="multiplicative", T=2.0, p=0.4, x0=3.0, z0=10.0, mu=0.2, sigma=0.2, delta=0.1,
        alpha=1.0, x_eval=1.0, sweep="delta", values=(0.1, 0.2, 0.3),
    ),
    "fig3_mult": dict(
        mode="multiplicative", T=2.0, p=0.5, x0=3.0, mu=0.1, delta=0.1, sigma=0.8, z0=0.2,
        alpha=1.0, x_eval=1.0, sweep="alpha", values=(0.5, 0.8, 1.0),
    ),
}

MODEL_KEYS = ("mode", "T", "mu", "sigma", "p", "x0", "z0", "delta", "alpha")


def figure_params(name, value=None):
    """Model parameters of a figure, with the swept parameter set to ``value``."""
    if name not in FIGURES:
        raise KeyError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
    fig = FIGURES[name]
    out = {k: fig[k] for k in MODEL_KEYS if k in fig}
    out.setdefault("alpha", 1.0)
    if value is not None:
        out[fig["sweep"]] = value
    return out


def all_parameter_sets():
    """Every (figure, swept value) combination, as plain parameter dicts."""
    for name, fig in FIGURES.items():
        for v in fig["values"]:
            yield name, v, figure_params(name, v)
