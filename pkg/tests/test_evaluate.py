import numpy as np

from magres.esn import make_random_esn
from magres.evaluate import EsnEncoding, decode_film, encode_film, evaluate_esn, film_space
from magres.film import ReservoirGenome
from magres.tasks import narma_generate


def test_film_genotype_roundtrip():
    space = film_space(9)
    assert space.size == 2 * 9 + 3
    vec = space.sample(np.random.default_rng(0))
    template = ReservoirGenome(w_in=np.zeros((9, 2)), side=3)
    g = decode_film(vec, template)
    assert np.array_equal(encode_film(g), vec)
    assert g.b == vec[18] and g.alpha_damping == vec[19] and g.leak_a == vec[20]


def test_film_space_bounds_are_valid_genomes():
    space = film_space(4)
    template = ReservoirGenome(w_in=np.zeros((4, 2)), side=2)
    decode_film(space.lo, template)
    decode_film(space.hi, template)


def test_esn_seed_gene():
    enc = EsnEncoding(30)
    cfg = enc.decode(np.array([0.5, 0.7, 0.9, 0.25]))
    ref = make_random_esn(30, int(0.25 * 2**31), 0.5, 0.7, 0.9)
    assert np.array_equal(cfg.w, ref.w) and (cfg.b, cfg.c, cfg.leak_a) == (0.5, 0.7, 0.9)
    enc.decode(np.array([0.5, 0.7, 0.9, 1.0]))  # upper bound maps to a valid seed


def test_esn_weight_genes():
    enc = EsnEncoding(16, topology="lattice", evolve_weights=True, base_seed=4)
    space = enc.space()
    vec = space.sample(np.random.default_rng(1))
    cfg = enc.decode(vec)
    template = enc.build(4)
    assert np.array_equal(cfg.w != 0, template.w != 0)
    k_in = np.count_nonzero(template.w_in)
    assert np.array_equal(cfg.w_in[template.w_in != 0], vec[3: 3 + k_in])
    assert space.size == 3 + k_in + np.count_nonzero(template.w)


def test_esn_scores_on_narma():
    task = narma_generate(10, 1000, seed=0)
    score = evaluate_esn(make_random_esn(50, 1, b=0.5, c=0.8, leak_a=0.8), task)
    assert 0 < score.test_nmse < 1.5 and np.isfinite(score.val_nmse)
