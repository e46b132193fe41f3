import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import DATA, load
from linsem.estimators import ConstraintTester, LinearSEM, TianDecomposer
from linsem.graph import serialize
from linsem.identifiability import STATUS_GLOBAL
from linsem.numerics import NumericsError, phi_numeric, sample_params


def _sigma(name, seed=0):
    p = sample_params(load(name), seed)
    return p, phi_numeric(p.lam, p.omega)


def test_linear_sem_fit_from_path():
    p, S = _sigma("verma")
    est = LinearSEM(DATA / "verma.graph").fit(S)
    assert est.status_ == STATUS_GLOBAL
    np.testing.assert_allclose(est.lambda_, p.lam, atol=1e-10)
    np.testing.assert_allclose(est.covariance(), S, atol=1e-10)


def test_linear_sem_from_data():
    p, S = _sigma("iv", 2)
    X = np.random.default_rng(0).multivariate_normal(np.zeros(3), S, size=20_000)
    est = LinearSEM(serialize(load("iv")), input="data").fit(X)
    assert abs(est.lambda_[1, 2] - p.lam[1, 2]) < 0.1


def test_params_and_clone():
    est = LinearSEM("nodes: 1 2\n1 -> 2\n")
    assert est.get_params() == {"graph": "nodes: 1 2\n1 -> 2\n", "input": "covariance"}
    assert clone(est).get_params() == est.get_params()


def test_not_fitted():
    with pytest.raises(NotFittedError):
        LinearSEM(load("iv")).covariance()
    with pytest.raises(NotFittedError):
        TianDecomposer(load("iv")).transform(np.eye(3))


def test_input_validation():
    est = LinearSEM(load("iv"))
    with pytest.raises(NumericsError):
        est.fit(np.ones((3, 3)))
    with pytest.raises(NumericsError):
        est.fit(np.eye(2))
    with pytest.raises(ValueError):
        LinearSEM(load("iv"), input="other").fit(np.eye(3))
    with pytest.raises(TypeError):
        LinearSEM(42).fit(np.eye(3))


def test_tian_decomposer_round_trip():
    _, S = _sigma("decomp", 4)
    dec = TianDecomposer(load("decomp")).fit()
    taus = dec.transform(S)
    assert [t.shape for t in taus] == [(4, 4), (5, 5)]
    assert dec.blocks_ == [["1", "4"], ["2", "3", "5"]]
    np.testing.assert_allclose(dec.inverse_transform(taus), S, atol=1e-10)


def test_constraint_tester():
    _, S = _sigma("sink5", 1)
    ct = ConstraintTester(load("sink5")).fit()
    assert len(ct.constraints_) == 2
    assert np.all(np.abs(ct.transform(S)) < 1e-10)
    A = np.random.default_rng(1).normal(size=(5, 5))
    assert np.all(np.abs(ct.transform(A @ A.T + np.eye(5))) > 1e-6)
