import numpy as np
import pytest

from crosslab import autodiff as ad
from crosslab.errors import NumericsError
from crosslab.gradcheck import finite_diff_check


def test_exact_quadratic_tiny_error():
    p = ad.parameter(np.random.default_rng(0).normal(size=(6,)), "p")
    rep = finite_diff_check(lambda: (p * p).sum(), [p], step=1e-5)
    assert rep.max_rel_error <= 1e-10
    assert rep.n_checked == 6
    assert rep.failures == []


def test_zero_step_rejected():
    p = ad.parameter(np.ones(2), "p")
    with pytest.raises(NumericsError):
        finite_diff_check(lambda: (p * p).sum(), [p], step=0.0)


def test_corrupted_adjoint_is_reported(monkeypatch):
    # negative control: break tanh's backward rule and expect a failure report
    true_tanh = ad.tanh

    def bad_tanh(x):
        x = ad.as_tensor(x)
        out_data = np.tanh(x.data)

        def backward(g):
            if x.requires_grad:
                x._accumulate(g * 0.5)  # wrong adjoint

        return ad._make(out_data, (x,), backward)

    monkeypatch.setattr(ad, "tanh", bad_tanh)
    p = ad.parameter(np.array([0.3, -0.7, 1.2]), "p")
    rep = finite_diff_check(lambda: ad.tanh(p).sum(), [p], step=1e-5)
    monkeypatch.setattr(ad, "tanh", true_tanh)
    assert not rep.ok(1e-4)
    assert rep.failures
    assert rep.worst_param == "p"


def test_subsampling_checks_fewer_entries():
    p = ad.parameter(np.random.default_rng(1).normal(size=(40,)), "p")
    rep = finite_diff_check(lambda: (p * p).sum(), [p], max_entries_per_param=7,
                            rng=np.random.default_rng(2))
    assert rep.n_checked == 7
    assert rep.ok(1e-8)
