import math

import numpy as np
import pytest

import plmix


def toy(seed=3):
    p = np.array([[0.5, 0.3, 0.15, 0.05], [0.05, 0.15, 0.3, 0.5]])
    lengths = [1 + s % 3 for s in range(150)]
    return plmix.simulate(p, np.array([0.5, 0.5]), lengths, seed)


def test_dataset_roundtrip():
    ds = plmix.parse_dataset("# K=4\n1,2\n3\n4,1,2\n")
    assert ds.num_items == 4
    assert ds.num_units == 3
    assert ds.orderings() == [[1, 2], [3], [4, 1, 2]]
    assert list(ds.top1_frequencies()) == [1, 0, 1, 1]
    again = plmix.parse_dataset(ds.to_csv())
    assert again.orderings() == ds.orderings()


def test_bad_input_raises_value_error():
    with pytest.raises(ValueError, match="line 2"):
        plmix.parse_dataset("# K=3\n1,1\n")
    assert issubclass(plmix.InputError, ValueError)


def test_pl_log_prob():
    assert math.isclose(plmix.pl_log_prob([1, 2], [0.5, 0.3, 0.2]),
                        math.log(0.5 * 0.3 / 0.5))


def test_simulate_is_seeded():
    a, labels_a = toy()
    b, labels_b = toy()
    assert a.orderings() == b.orderings()
    assert labels_a == labels_b
    assert set(labels_a) <= {1, 2}


def test_fit_and_checks():
    ds, _ = toy()
    m = plmix.fit_map(ds, 2, n_starts=2)
    assert np.allclose(m["p"].sum(axis=1), 1.0)
    assert all(b >= a - 1e-9 for a, b in zip(m["trace"], m["trace"][1:]))

    fit = plmix.fit(ds, 2, iters=400, burnin=100, n_starts=2)
    assert fit.posterior_p.shape == (2, 4)
    assert len(fit.deviance) == 300
    crit = fit.criteria
    assert math.isclose(crit["DIC2"], crit["D_bar"] + crit["D_var"] / 2)
    gof = fit.posterior_predictive(ds, 50)
    assert 0.0 <= gof["p_b1"] <= 1.0
    assert "p_b2_cond" in gof


def test_cli_entry_point():
    code, out, err = plmix.run_cli(["summary", "missing.csv"])
    assert code == 2
    assert "not found" in err
