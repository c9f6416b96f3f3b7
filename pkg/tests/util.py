"""Shared fixtures' guts: reference parameter sets, random spec generators,
and small helpers used across the test modules."""

import math

import numpy as np

from carma_hawkes import (
    BivariateSpec,
    EventLog,
    SimulationMeta,
    UnivariateSpec,
    spec_hash,
)

# The three univariate demo parameter sets (orders 1, 2, 3).
A31 = (1.3, 0.34 + math.pi**2 / 4, 0.025 + 0.025 * math.pi**2)


def hawkes_spec() -> UnivariateSpec:
    return UnivariateSpec(mu=0.3, a=(3.0,), b=(1.0,))


def carma21_spec() -> UnivariateSpec:
    return UnivariateSpec(mu=0.3, a=(3.0, 2.0), b=(1.0, 0.3))


def carma31_spec() -> UnivariateSpec:
    return UnivariateSpec(mu=0.3, a=A31, b=(0.2, 0.3))


def biv_independent() -> BivariateSpec:
    # two exponential components, no cross-excitation
    return BivariateSpec(
        mu=(0.3, 0.3), a1=(3.0,), a2=(2.0,),
        b11=(1.0,), b12=(0.0,), b21=(0.0,), b22=(1.0,),
    )


def biv_cross() -> BivariateSpec:
    # order (2,1) with both cross-excitation channels active
    return BivariateSpec(
        mu=(0.3, 0.3), a1=(3.0, 2.0), a2=(4.0,),
        b11=(1.0, 0.7), b12=(1.0,), b21=(1.0,), b22=(0.3,),
    )


def biv_lagged() -> BivariateSpec:
    # order (1,2); the lagged channels (leading MA coefficient zero) dip
    # negative, so this one only simulates with the validation override
    return BivariateSpec(
        mu=(0.3, 0.3), a1=(1.0,), a2=(4.0, 2.0),
        b11=(0.5,), b12=(0.0, 0.8), b21=(0.0,), b22=(0.0, 1.0),
    )


def univariate_sets():
    return [hawkes_spec(), carma21_spec(), carma31_spec()]


def bivariate_sets():
    return [biv_independent(), biv_cross(), biv_lagged()]


def all_sets():
    return univariate_sets() + bivariate_sets()


def needs_override(spec) -> bool:
    from carma_hawkes import validate

    return not validate(spec).admissible


# ---------------------------------------------------------------------------
# random spec generation


def random_stable_roots(rng: np.random.Generator, p: int, min_sep: float = 0.2):
    """Distinct roots with real parts in [-3, -0.3], conjugate-closed."""
    n_pairs = int(rng.integers(0, p // 2 + 1))
    n_real = p - 2 * n_pairs
    roots: list[complex] = []
    attempts = 0
    while len(roots) < n_real:
        cand = complex(rng.uniform(-3.0, -0.3), 0.0)
        if all(abs(cand - r) >= min_sep for r in roots):
            roots.append(cand)
        attempts += 1
        if attempts > 500:
            raise RuntimeError("failed to place distinct real roots")
    pairs: list[complex] = []
    while len(pairs) < n_pairs:
        cand = complex(rng.uniform(-3.0, -0.3), rng.uniform(0.35, 2.0))
        if all(abs(cand - r) >= min_sep for r in pairs + roots):
            pairs.append(cand)
        attempts += 1
        if attempts > 1000:
            raise RuntimeError("failed to place distinct complex roots")
    for z in pairs:
        roots.extend([z, z.conjugate()])
    return roots


def poly_from_roots(roots) -> tuple[float, ...]:
    coeffs = np.poly(np.array(roots))
    return tuple(float(c) for c in coeffs.real[1:])


def random_univariate_spec(rng: np.random.Generator, p_max: int = 5) -> UnivariateSpec:
    p = int(rng.integers(1, p_max + 1))
    a = poly_from_roots(random_stable_roots(rng, p))
    q = int(rng.integers(0, p))
    b = rng.uniform(-1.0, 1.0, size=q + 1)
    b[0] = rng.uniform(0.1, 1.0)
    target = rng.uniform(0.1, 0.85)
    b *= target * a[-1] / b[0]
    return UnivariateSpec(mu=float(rng.uniform(0.1, 1.0)), a=a, b=tuple(b))


def random_bivariate_spec(rng: np.random.Generator, p_max: int = 3) -> BivariateSpec:
    p1 = int(rng.integers(1, p_max + 1))
    p2 = int(rng.integers(1, p_max + 1))
    a1 = poly_from_roots(random_stable_roots(rng, p1))
    a2 = poly_from_roots(random_stable_roots(rng, p2))

    def ma(p, lead_positive):
        q = int(rng.integers(0, p))
        v = rng.uniform(-0.5, 0.5, size=q + 1)
        if lead_positive:
            v[0] = rng.uniform(0.1, 1.0)
        return v

    b11, b12, b21, b22 = ma(p1, True), ma(p2, False), ma(p1, False), ma(p2, True)
    k = np.array(
        [
            [b11[0] / a1[-1], b12[0] / a2[-1]],
            [b21[0] / a1[-1], b22[0] / a2[-1]],
        ]
    )
    rho = max(abs(np.linalg.eigvals(k)))
    if rho >= 0.85:
        scale = 0.8 / rho
        b11, b12, b21, b22 = (v * scale for v in (b11, b12, b21, b22))
    return BivariateSpec(
        mu=(float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.1, 1.0))),
        a1=a1, a2=a2,
        b11=tuple(b11), b12=tuple(b12), b21=tuple(b21), b22=tuple(b22),
    )


# ---------------------------------------------------------------------------
# synthetic logs


def make_log(times, marks=None, horizon=None, spec=None) -> EventLog:
    times = tuple(float(t) for t in times)
    if marks is None:
        marks = (1,) * len(times)
    meta = SimulationMeta(
        seed=None,
        horizon=float(horizon) if horizon is not None else (times[-1] if times else 0.0),
        proposed=len(times),
        accepted=len(times),
        acceptance_ratio=1.0 if times else 0.0,
        wall_time_seconds=0.0,
        spec_hash=spec_hash(spec) if spec is not None else None,
    )
    return EventLog(times=times, marks=tuple(marks), meta=meta)
