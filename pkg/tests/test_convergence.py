import numpy as np

from mrfcrb.fim import accumulator_from_batch
from mrfcrb.model import make_model
from mrfcrb.oracle import enumerate_moments
from mrfcrb.samplers import SamplerKind, derive_seeds, run_chain


def test_fim_error_shrinks_with_chain_length():
    # median absolute error over 20 seeds must drop as n_mc grows
    m = make_model(3, 3, "toroidal", 2)
    theta = 0.5
    exact = enumerate_moments(m, theta).cov_stat[0, 0]
    seeds = derive_seeds(400, 20)
    medians = []
    for n_mc in (1_000, 10_000, 100_000):
        errs = []
        for seed in seeds:
            out = run_chain(m, theta, SamplerKind.GIBBS_SYSTEMATIC,
                            n_burn=500, n_mc=n_mc, seed=seed)
            acc = accumulator_from_batch(out.stat_series)
            errs.append(abs(acc.comoment[0, 0] / (n_mc - 1) - exact))
        medians.append(np.median(errs))
    assert medians[0] > medians[1] > medians[2]
