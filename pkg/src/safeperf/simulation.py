"""Monte Carlo oracle for the confirmation model.

Trials are split into fixed-size blocks.  Block ``b`` draws its uniforms
from a Philox stream keyed by ``SeedSequence(seed, spawn_key=(b,))``, so the
random numbers a trial sees depend only on the seed and its block index.
Per-block results are integer counts, so the total is bit-identical no
matter how many workers process the blocks or in which order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import beta

from . import _kernels
from .confirmation import binomial_tail_geq
from .errors import ValidationError

BLOCK_TRIALS = 1 << 16
MAX_ENUMERATION_N = 20
_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class SimConfig:
    n: int
    x_min: int
    p_miss: float
    trials: int
    seed: int
    rho: float = 0.0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"must be a positive integer, got {self.n!r}", "n")
        if not 0 <= self.x_min <= self.n:
            raise ValidationError(f"must lie in [0, {self.n}], got {self.x_min!r}", "x_min")
        if not 0.0 <= self.p_miss <= 1.0:
            raise ValidationError(f"must lie in [0, 1], got {self.p_miss!r}", "p_miss")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ValidationError(f"must be a positive integer, got {self.trials!r}", "trials")
        if not isinstance(self.seed, int) or not 0 <= self.seed < _SEED_LIMIT:
            raise ValidationError(f"must be an unsigned 64-bit integer, got {self.seed!r}", "seed")
        if not 0.0 <= self.rho < 1.0:
            raise ValidationError(f"must lie in [0, 1), got {self.rho!r}", "rho")

    @property
    def y_min(self) -> int:
        return self.n - self.x_min + 1

    def transitions(self) -> tuple[float, float]:
        """P(miss -> miss) and P(hit -> miss) of the stationary two-state chain."""
        p, rho = self.p_miss, self.rho
        p_mm = p + rho * (1.0 - p)
        p_hm = p * (1.0 - rho)
        for name, v in (("P(miss->miss)", p_mm), ("P(hit->miss)", p_hm)):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} = {v!r} is not a probability", "rho")
        return p_mm, p_hm


@dataclass(frozen=True)
class SimResult:
    estimate: float
    standard_error: float
    trials: int
    seed: int
    failures: int
    miss_frequency: float
    ci95: tuple[float, float] | None = None
    rho: float = 0.0
    backend: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95) if self.ci95 is not None else None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def clopper_pearson(failures: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    a = (1.0 - level) / 2.0
    lo = 0.0 if failures == 0 else float(beta.ppf(a, failures, trials - failures + 1))
    hi = 1.0 if failures == trials else float(beta.ppf(1.0 - a, failures + 1, trials - failures))
    return lo, hi


def _block_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, BLOCK_TRIALS)
    return [BLOCK_TRIALS] * full + ([rest] if rest else [])


def block_uniforms(seed: int, block: int, size: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss)).random((size, n))


def _run(c: SimConfig, markov: bool, workers: int, backend: str | None) -> SimResult:
    kernels = _kernels.backend_module(backend)
    y_min = c.y_min
    if markov:
        p_mm, p_hm = c.transitions()

        def one(b: int, size: int):
            return kernels.markov_block(block_uniforms(c.seed, b, size, c.n), c.p_miss, p_mm, p_hm, y_min)
    else:

        def one(b: int, size: int):
            return kernels.iid_block(block_uniforms(c.seed, b, size, c.n), c.p_miss, y_min)

    sizes = _block_sizes(c.trials)
    if workers <= 1:
        counts = [one(b, s) for b, s in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(one, range(len(sizes)), sizes))
    failures = sum(r for r, _ in counts)
    misses = sum(m for _, m in counts)

    est = failures / c.trials
    ci = clopper_pearson(failures, c.trials) if failures < 100 else None
    return SimResult(
        estimate=est,
        standard_error=math.sqrt(est * (1.0 - est) / c.trials),
        trials=c.trials,
        seed=c.seed,
        failures=failures,
        miss_frequency=misses / (c.trials * c.n),
        ci95=ci,
        rho=c.rho,
        backend=_kernels.backend_name(kernels),
    )


def simulate_iid(c: SimConfig, workers: int = 1, backend: str | None = None) -> SimResult:
    """Estimate P(T=0) from IID Bernoulli(p_miss) detection vectors."""
    if c.rho != 0.0:
        raise ValidationError("simulate_iid needs rho = 0; use simulate_markov", "rho")
    return _run(c, False, workers, backend)


def simulate_markov(c: SimConfig, workers: int = 1, backend: str | None = None) -> SimResult:
    """Estimate P(T=0) when frame outcomes follow a stationary two-state chain.

    With ``rho = 0`` the chain draws exactly the IID misses from the same
    uniforms, so it reproduces :func:`simulate_iid` trial by trial.
    """
    return _run(c, True, workers, backend)


def markov_reject_exact(n: int, x_min: int, p_miss: float, rho: float) -> float:
    """P(T=0) under the two-state chain by summing over all 2**n miss paths."""
    if not 1 <= n <= MAX_ENUMERATION_N:
        raise ValidationError(f"enumeration supports 1 <= n <= {MAX_ENUMERATION_N}", "n")
    c = SimConfig(n, x_min, p_miss, 1, 0, rho)
    p_mm, p_hm = c.transitions()
    codes = np.arange(1 << n, dtype=np.int64)
    paths = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)  # True = miss
    prob = np.where(paths[:, 0], p_miss, 1.0 - p_miss)
    for j in range(1, n):
        prev, cur = paths[:, j - 1], paths[:, j]
        to_miss = np.where(prev, p_mm, p_hm)
        prob = prob * np.where(cur, to_miss, 1.0 - to_miss)
    rejected = paths.sum(axis=1) >= c.y_min
    return math.fsum(prob[rejected])


def correlation_sensitivity(n: int, x_min: int, p_miss: float, rhos) -> list[dict]:
    """Exact P(T=0) under correlation next to the IID value, per rho."""
    y_min = n - x_min + 1
    iid = binomial_tail_geq(n, y_min, p_miss) if y_min <= n else 0.0
    rows = []
    for rho in rhos:
        exact = markov_reject_exact(n, x_min, p_miss, rho)
        rows.append({
            "rho": rho,
            "prob_no_confirm": exact,
            "prob_no_confirm_iid": iid,
            "ratio_to_iid": exact / iid if iid > 0 else None,
        })
    return rows
