import numpy as np
import pytest

from dualcert.model import AffineLayer, Network


def make_net(*specs):
    """Build a Network from (weights, bias, activation) triples."""
    layers = tuple(
        AffineLayer(weights=np.asarray(w, dtype=float), bias=np.asarray(b, dtype=float), activation=a)
        for w, b, a in specs
    )
    return Network(layers=layers)


@pytest.fixture
def two_hidden_sigmoid():
    rng = np.random.default_rng(1234)
    return make_net(
        (rng.normal(size=(4, 3)) * 0.8, rng.normal(size=4) * 0.3, "sigmoid"),
        (rng.normal(size=(3, 4)) * 0.8, rng.normal(size=3) * 0.3, "sigmoid"),
        (rng.normal(size=(2, 3)) * 0.8, rng.normal(size=2) * 0.3, "linear"),
    )
