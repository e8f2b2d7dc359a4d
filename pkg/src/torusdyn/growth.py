"""Growth curves: (n, log quantity) samples with a least-squares rate fit.

Every estimator in the toolkit reports its raw samples next to the fitted
exponential rate, and the residual RMS over the fit window is never hidden;
a fit with a large residual is a result, not an error.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GrowthCurve:
    """Log-quantity samples against n, with a slope fit over a window.

    `x_scale` is "linear" for the usual (1/n) log(.) limits and "log" for
    log-log fits (effective-density exponents).
    """

    ns: tuple
    values: tuple
    fit_window: tuple
    slope: float
    intercept: float
    residual_rms: float
    x_scale: str = "linear"
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def points(self):
        return list(zip(self.ns, self.values))

    def to_dict(self):
        return {
            "ns": list(self.ns),
            "values": [float(v) for v in self.values],
            "fit_window": list(self.fit_window),
            "slope": self.slope,
            "intercept": self.intercept,
            "residual_rms": self.residual_rms,
            "x_scale": self.x_scale,
        }


def fit_growth_curve(ns, values, fit_window=None, x_scale="linear", metadata=None):
    """Least-squares line through (n, value) restricted to the fit window.

    The window must be contained in the sampled range and hold at least two
    points; n must be strictly increasing.
    """
    ns = [int(n) for n in ns]
    values = [float(v) for v in values]
    if len(ns) != len(values) or not ns:
        raise ValueError("ns and values must be equal-length and non-empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n must be strictly increasing")
    if fit_window is None:
        fit_window = (ns[0], ns[-1])
    n_min, n_max = int(fit_window[0]), int(fit_window[1])
    if n_min < ns[0] or n_max > ns[-1] or n_min >= n_max:
        raise ValueError(
            f"fit window [{n_min}, {n_max}] not inside sampled range [{ns[0]}, {ns[-1]}]"
        )
    arr_n = np.array(ns, dtype=float)
    arr_v = np.array(values, dtype=float)
    mask = (arr_n >= n_min) & (arr_n <= n_max)
    if mask.sum() < 2:
        raise ValueError("fit window must contain at least two samples")
    xs = np.log(arr_n[mask]) if x_scale == "log" else arr_n[mask]
    slope, intercept = np.polyfit(xs, arr_v[mask], 1)
    resid = arr_v[mask] - (slope * xs + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return GrowthCurve(
        ns=tuple(ns),
        values=tuple(values),
        fit_window=(n_min, n_max),
        slope=float(slope),
        intercept=float(intercept),
        residual_rms=rms,
        x_scale=x_scale,
        metadata=metadata or {},
    )
