"""Smoke test for the osml_elm_py extension. Build it first with
`maturin develop` (or `pip install .`) from crates/python."""

import os
import random
import tempfile

import osml_elm_py as om


def dataset(n, seed):
    rng = random.Random(seed)
    xs, ys = [], []
    for _ in range(n):
        c = rng.random() < 0.5
        s = 1.0 if c else -1.0
        xs.append([s + rng.gauss(0, 0.3), -s + rng.gauss(0, 0.3), rng.gauss(0, 1)])
        ys.append([1, 0, 1] if c else [0, 1, 0])
    return xs, ys


def main():
    x, y = dataset(200, 1)
    model = om.Model.fit_stream(x, y, hidden=10, block=20, seed=3)
    assert model.samples_seen == 200
    assert model.blocks_seen == 1 + 9
    pred = model.predict(x)
    loss = om.hamming_loss(pred, y)
    assert loss < 0.05, loss

    x0, y0 = x[:40], y[:40]
    a = om.Model.fit_initial(x0, y0, hidden=10, seed=3)
    b = om.Model.fit_initial(x0, y0, hidden=10, seed=3)
    a.update(x[40:57], y[40:57])
    for i in range(40, 57):
        b.update([x[i]], [y[i]])
    diff = max(abs(p - q) for ra, rb in zip(a.beta(), b.beta()) for p, q in zip(ra, rb))
    assert diff < 1e-8, diff

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "m.txt")
        model.save(path)
        back = om.Model.load(path)
        assert back.to_text() == model.to_text()

    assert om.hamming_loss([[1, 0]], [[0, 0]]) == 0.5
    assert om.example_prf([[0, 0]], [[0, 0]]) == (1.0, 1.0, 1.0)
    assert om.label_cardinality([[1, 1], [0, 1]]) == 1.5
    t, h, _ = om.calibrate_threshold([[0.9, -0.9], [0.8, -0.7]], [[1, 0], [1, 0]])
    assert h == 0.0 and -0.7 < t < 0.8
    folds = om.kfold(10, 3, 7)
    assert sorted(i for _, test in folds for i in test) == list(range(10))
    try:
        om.hamming_loss([[1, 2]], [[0, 0]])
    except ValueError:
        pass
    else:
        raise AssertionError("bad labels accepted")
    print("smoke test ok", repr(model))


if __name__ == "__main__":
    main()
