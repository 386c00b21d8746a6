import itertools
import math
from dataclasses import replace

import pytest

from oracles import markov_path_probability
from safeperf import _kernels, _pykernels
from safeperf.confirmation import binomial_tail_geq
from safeperf.errors import ValidationError
from safeperf.simulation import (
    BLOCK_TRIALS,
    SimConfig,
    block_uniforms,
    clopper_pearson,
    correlation_sensitivity,
    markov_reject_exact,
    simulate_iid,
    simulate_markov,
)

BACKENDS = ["python"] + (["cython"] if _kernels.BACKEND == "cython" else [])


def within(res, exact, k=4.0):
    se = math.sqrt(exact * (1 - exact) / res.trials)
    return abs(res.estimate - exact) <= k * se


@pytest.mark.parametrize("backend", BACKENDS)
def test_iid_agrees_with_closed_form(backend):
    c = SimConfig(8, 4, 0.3, 300_000, 42)
    res = simulate_iid(c, backend=backend)
    assert within(res, binomial_tail_geq(8, 5, 0.3))
    assert res.miss_frequency == pytest.approx(0.3, abs=4 * math.sqrt(0.21 / (8 * 300_000)))
    assert res.backend == backend


def test_backends_are_bit_identical():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    c = SimConfig(12, 6, 0.25, 200_000, 9)
    a, b = simulate_iid(c, backend="python"), simulate_iid(c, backend="cython")
    assert replace(a, backend="") == replace(b, backend="")
    m = SimConfig(12, 6, 0.25, 100_000, 9, rho=0.6)
    a, b = simulate_markov(m, backend="python"), simulate_markov(m, backend="cython")
    assert replace(a, backend="") == replace(b, backend="")


def test_kernels_on_shared_uniforms():
    u = block_uniforms(3, 0, 5000, 10)
    py = _pykernels.iid_block(u, 0.4, 5)
    assert _kernels.iid_block(u, 0.4, 5) == py
    misses = (u < 0.4).sum(axis=1)
    assert py == (int((misses >= 5).sum()), int(misses.sum()))


def test_worker_invariance():
    c = SimConfig(12, 6, 0.2, 3 * BLOCK_TRIALS + 17, 123)
    one = simulate_iid(c, workers=1)
    assert simulate_iid(c, workers=4) == one
    m = SimConfig(12, 6, 0.2, 2 * BLOCK_TRIALS + 5, 123, rho=0.3)
    assert simulate_markov(m, workers=3) == simulate_markov(m, workers=1)


def test_seed_controls_stream():
    a = simulate_iid(SimConfig(12, 6, 0.3, 50_000, 1))
    b = simulate_iid(SimConfig(12, 6, 0.3, 50_000, 2))
    assert a.failures != b.failures or a.miss_frequency != b.miss_frequency
    assert simulate_iid(SimConfig(12, 6, 0.3, 50_000, 1)) == a


def test_markov_at_zero_correlation_reproduces_iid():
    c = SimConfig(12, 6, 0.3, 100_000, 5)
    a = simulate_iid(c)
    b = simulate_markov(c)
    assert (a.failures, a.miss_frequency) == (b.failures, b.miss_frequency)
    assert markov_reject_exact(12, 6, 0.1, 0.0) == pytest.approx(binomial_tail_geq(12, 7, 0.1), rel=1e-12)


@pytest.mark.parametrize("rho", [0.2, 0.7])
def test_markov_exact_matches_path_oracle(rho):
    n, x, p = 6, 3, 0.3
    y = n - x + 1
    oracle = math.fsum(
        markov_path_probability(path, p, rho)
        for path in itertools.product((False, True), repeat=n) if sum(path) >= y
    )
    assert markov_reject_exact(n, x, p, rho) == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("rho", [0.3, 0.9])
def test_markov_simulation_agrees_with_enumeration(rho):
    c = SimConfig(12, 6, 0.1, 400_000, 77, rho=rho)
    res = simulate_markov(c)
    assert within(res, markov_reject_exact(12, 6, 0.1, rho))
    # the first frame is drawn from the stationary law, so the per-frame miss rate stays p
    assert res.miss_frequency == pytest.approx(0.1, abs=0.003)


def test_chain_marginal_is_stationary():
    p, rho = 0.2, 0.8
    for n in (1, 3, 5):
        paths = itertools.product((False, True), repeat=n)
        last = math.fsum(markov_path_probability(s, p, rho) for s in paths if s[-1])
        assert last == pytest.approx(p, rel=1e-12)


def test_correlation_increases_rejection():
    rows = correlation_sensitivity(12, 6, 0.1, [0.0, 0.5, 0.9, 0.999])
    vals = [r["prob_no_confirm"] for r in rows]
    assert vals == sorted(vals)
    assert rows[0]["ratio_to_iid"] == pytest.approx(1.0)
    assert vals[-1] == pytest.approx(0.0999, abs=1e-3)


def test_clopper_pearson():
    lo, hi = clopper_pearson(0, 1000)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.025 ** (1 / 1000), rel=1e-9)
    lo, hi = clopper_pearson(10, 1000)
    assert lo < 0.01 < hi
    assert simulate_iid(SimConfig(12, 6, 0.1, 20_000, 3)).ci95 is not None


@pytest.mark.parametrize("kwargs,field", [
    (dict(n=0, x_min=0, p_miss=0.1, trials=1, seed=0), "n"),
    (dict(n=4, x_min=5, p_miss=0.1, trials=1, seed=0), "x_min"),
    (dict(n=4, x_min=2, p_miss=1.1, trials=1, seed=0), "p_miss"),
    (dict(n=4, x_min=2, p_miss=0.1, trials=0, seed=0), "trials"),
    (dict(n=4, x_min=2, p_miss=0.1, trials=1, seed=-1), "seed"),
    (dict(n=4, x_min=2, p_miss=0.1, trials=1, seed=2**64), "seed"),
    (dict(n=4, x_min=2, p_miss=0.1, trials=1, seed=0, rho=1.0), "rho"),
])
def test_config_validation(kwargs, field):
    with pytest.raises(ValidationError) as e:
        SimConfig(**kwargs)
    assert e.value.field == field


def test_iid_refuses_correlation():
    with pytest.raises(ValidationError):
        simulate_iid(SimConfig(4, 2, 0.1, 10, 0, rho=0.5))
    with pytest.raises(ValidationError):
        markov_reject_exact(21, 2, 0.1, 0.5)


def test_result_json():
    res = simulate_iid(SimConfig(4, 2, 0.1, 1000, 0))
    d = res.to_dict()
    assert d["trials"] == 1000 and isinstance(d["ci95"], (list, type(None)))
    assert '"seed": 0' in res.to_json()
