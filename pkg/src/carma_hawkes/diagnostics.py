"""Residual analysis and goodness-of-fit for simulated event logs.

The random time change maps event times through the compensator
Lam(t) = integral of the intensity: for a correctly specified model and
simulator the transformed inter-event gaps tau_i = Lam(T_i) - Lam(T_{i-1})
are i.i.d. unit exponentials.  A one-sample Kolmogorov-Smirnov test against
Exp(1) turns that into a single statistic and p-value per component.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import EmptySample, SpecLogMismatch
from .model import (
    Spec,
    apply_event,
    compensator_increment,
    initial_state,
    spec_hash,
    stationary_rates,
    validate,
)
from .thinning import EventLog

# Terms of the asymptotic p-value series are dropped below this size, so the
# alternating-series truncation error stays under 1e-10.
_SERIES_TOL = 1e-12
# Below this argument the survival function is 1 within 1e-12; short-circuit
# to keep the series loop bounded.
_KAPPA_FLOOR = 0.18


@dataclass(frozen=True)
class ResidualSeries:
    """Compensator-transformed inter-event gaps for one component."""

    taus: tuple[float, ...]
    component: int

    def __len__(self) -> int:
        return len(self.taus)

    @property
    def mean(self) -> float:
        return sum(self.taus) / len(self.taus) if self.taus else math.nan


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n: int


def residual_transform(spec: Spec, log: EventLog, component: int = 1) -> ResidualSeries:
    """Transformed inter-event gaps of one component along a full log.

    The compensator of the chosen component is accumulated in closed form
    across every global event (events of the other component change the
    state and therefore the integrand).  The trailing censored gap after the
    last event is discarded.  Raises SpecLogMismatch when the log carries a
    spec hash that differs from the given spec's.
    """
    n_comp = spec.n_components
    if not 1 <= component <= n_comp:
        raise ValueError(f"component must be in 1..{n_comp}")
    if log.meta.spec_hash is not None and log.meta.spec_hash != spec_hash(spec):
        raise SpecLogMismatch(
            "event log was produced under a different spec (hash mismatch)"
        )
    state = initial_state(spec)
    acc = 0.0
    taus = []
    t_prev = 0.0
    for t, mark in zip(log.times, log.marks):
        inc = compensator_increment(spec, state, t_prev, t)
        acc += inc if n_comp == 1 else inc[component - 1]
        state = apply_event(spec, state, t, mark)
        if mark == component:
            taus.append(acc)
            acc = 0.0
        t_prev = t
    return ResidualSeries(taus=tuple(taus), component=component)


def kolmogorov_survival(kappa: float) -> float:
    """P(sup-norm statistic > kappa) in the large-sample limit.

    Alternating series 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 kappa^2),
    truncated when terms fall below 1e-12, clamped to [0, 1].
    """
    if kappa <= _KAPPA_FLOOR:
        return 1.0
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * kappa * kappa)
        if term < _SERIES_TOL:
            break
        total += sign * term
        sign = -sign
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_exp1(residuals) -> KsResult:
    """One-sample Kolmogorov-Smirnov test of the residuals against Exp(1).

    D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n) with F(x) = 1 - e^-x;
    the p-value uses the asymptotic survival series at sqrt(n) * D (treat it
    as approximate below n of a few dozen).
    """
    taus = residuals.taus if isinstance(residuals, ResidualSeries) else tuple(residuals)
    n = len(taus)
    if n == 0:
        raise EmptySample("cannot run a KS test on an empty sample")
    xs = sorted(taus)
    d = 0.0
    for i, x in enumerate(xs, start=1):
        f = -math.expm1(-x)
        d = max(d, i / n - f, f - (i - 1) / n)
    p = kolmogorov_survival(math.sqrt(n) * d)
    return KsResult(statistic=d, p_value=p, n=n)


# ---------------------------------------------------------------------------
# summary reports


@dataclass(frozen=True)
class ComponentDiagnostics:
    component: int
    n_events: int
    empirical_rate: float
    theoretical_rate: float
    ks: KsResult | None
    residual_mean: float

    def to_dict(self, acceptance_ratio: float) -> dict:
        return {
            "component": self.component,
            "n_events": self.n_events,
            "empirical_rate": self.empirical_rate,
            "theoretical_rate": self.theoretical_rate
            if math.isfinite(self.theoretical_rate)
            else None,
            "ks_statistic": self.ks.statistic if self.ks else None,
            "ks_p_value": self.ks.p_value if self.ks else None,
            "residual_mean": self.residual_mean
            if math.isfinite(self.residual_mean)
            else None,
            "acceptance_ratio": acceptance_ratio,
        }


@dataclass(frozen=True)
class DiagnosticsReport:
    components: tuple[ComponentDiagnostics, ...]
    horizon: float
    acceptance_ratio: float
    residuals: tuple[ResidualSeries, ...]

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "acceptance_ratio": self.acceptance_ratio,
            "components": [
                c.to_dict(self.acceptance_ratio) for c in self.components
            ],
        }


def summarize(spec: Spec, log: EventLog) -> DiagnosticsReport:
    """Per-component event counts, rates, and residual KS results."""
    validate(spec)  # populate caches; admissibility is the caller's concern
    rates = stationary_rates(spec)
    horizon = log.meta.horizon if log.meta.horizon > 0 else (log.times[-1] if log.times else 0.0)
    comps = []
    residuals = []
    for c in range(1, spec.n_components + 1):
        series = residual_transform(spec, log, component=c)
        residuals.append(series)
        n = len(series)
        ks = ks_exp1(series) if n > 0 else None
        comps.append(
            ComponentDiagnostics(
                component=c,
                n_events=n,
                empirical_rate=n / horizon if horizon > 0 else 0.0,
                theoretical_rate=rates[c - 1],
                ks=ks,
                residual_mean=series.mean,
            )
        )
    return DiagnosticsReport(
        components=tuple(comps),
        horizon=horizon,
        acceptance_ratio=log.meta.acceptance_ratio,
        residuals=tuple(residuals),
    )


def write_report_json(report: DiagnosticsReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def write_residuals_csv(series: ResidualSeries, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("tau\n")
        for tau in series.taus:
            fh.write(f"{tau:.15g}\n")
