import numpy as np
import pytest

from hopwire.toygnn import autograd as ag
from hopwire.toygnn.autograd import Tensor


def numeric_grad(f, x, eps=1e-6):
    g = np.zeros_like(x)
    flat, gf = x.reshape(-1), g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + eps
        hi = f()
        flat[i] = old - eps
        lo = f()
        flat[i] = old
        gf[i] = (hi - lo) / (2 * eps)
    return g


def check(build, *shapes, seed=0, tol=1e-6):
    """Compare reverse-mode gradients of ``sum(w * build(...))`` with central differences."""
    rng = np.random.default_rng(seed)
    xs = [Tensor(rng.normal(size=s), requires_grad=True) for s in shapes]
    out_shape = build(*xs).shape
    w = rng.normal(size=out_shape)

    def value():
        return float(np.sum(w * build(*xs).data))

    out = build(*xs)
    out.backward(w)
    for x in xs:
        expect = numeric_grad(value, x.data)
        assert np.allclose(x.grad, expect, atol=tol, rtol=tol), (x.grad, expect)


def test_elementwise_with_broadcasting():
    check(lambda a, b: ag.add(a, b), (3, 4), (4,))
    check(lambda a, b: ag.sub(a, b), (3, 1), (3, 4))
    check(lambda a, b: ag.mul(a, b), (2, 3, 4), (3, 1))
    check(lambda a: ag.relu(a), (5, 3))
    check(lambda a: ag.gelu(a), (5, 3))


def test_linear_algebra():
    check(lambda a, b: ag.matmul(a, b), (3, 4), (4, 2))
    check(lambda x, w, b: ag.linear(x, w, b), (5, 3), (3, 2), (2,))
    check(lambda a: ag.reshape(a, (2, 6)), (3, 4))
    check(lambda a: ag.sum_last(a), (3, 2, 4))
    check(lambda a: ag.mean_all(a), (3, 4))
    check(lambda a, b: ag.concat_rows([a, b]), (2, 3), (4, 3))


def test_gather_and_segments():
    idx = np.array([0, 2, 2, 1, 0])
    check(lambda a: ag.gather(a, idx), (3, 2))
    starts = np.array([0, 2, 3])
    seg = np.array([0, 0, 1, 2, 2, 2])
    check(lambda a: ag.segment_sum(a, starts, seg), (6, 2))
    check(lambda a: ag.segment_softmax(a, starts, seg), (6, 3))


def test_segment_softmax_rows_sum_to_one():
    starts = np.array([0, 1, 4])
    seg = np.array([0, 1, 1, 1, 2, 2])
    a = ag.segment_softmax(Tensor(np.random.default_rng(2).normal(size=(6, 2)) * 50), starts, seg)
    assert np.allclose(np.add.reduceat(a.data, starts, axis=0), 1.0, atol=1e-12)


def test_layer_norm():
    check(lambda x, g, b: ag.layer_norm(x, g, b), (4, 5), (5,), (5,))
    out = ag.layer_norm(Tensor(np.arange(10.0).reshape(2, 5)), Tensor(np.ones(5)), Tensor(np.zeros(5)))
    assert np.allclose(out.data.mean(axis=1), 0) and np.allclose(out.data.var(axis=1), 1, atol=1e-4)


def test_losses():
    t = np.array([2, 0, 1])
    check(lambda z: ag.cross_entropy(z, t), (3, 4))
    y = np.array([0.3, -1.0, 2.0])
    check(lambda p: ag.l1_loss(p, y), (3, 1))


def test_loss_closed_forms():
    logits = Tensor(np.zeros((2, 5)))
    assert float(ag.cross_entropy(logits, [1, 3]).data) == pytest.approx(np.log(5))
    sure = Tensor(np.array([[50.0, 0.0, 0.0]]))
    assert float(ag.cross_entropy(sure, [0]).data) < 1e-12
    assert float(ag.l1_loss(Tensor(np.array([[1.5]])), [1.5]).data) == 0.0


def test_shared_subexpression_accumulates():
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    y = ag.mul(x, x)
    z = ag.add(y, ag.mul(y, 3.0))
    z.backward(np.ones(2))
    assert np.allclose(x.grad, 8 * x.data)


def test_no_grad_records_nothing():
    x = Tensor(np.ones(3), requires_grad=True)
    with ag.no_grad():
        y = ag.mul(x, 2.0)
    assert not y.requires_grad and y._backward is None
    z = ag.mul(x, 2.0)
    assert z.requires_grad


def test_deep_chain_does_not_recurse():
    x = Tensor(np.ones(2), requires_grad=True)
    y = x
    for _ in range(5000):
        y = ag.add(y, 1.0)
    y.backward(np.ones(2))
    assert np.allclose(x.grad, 1.0)


def test_gelu_values():
    x = ag.Tensor(np.array([-1.0, 0.0, 1.0]))
    # tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
    assert np.allclose(ag.gelu(x).data, [-0.15880800939172324, 0.0, 0.8411919906082768], atol=1e-15)
