import numpy as np
import pytest

from scenestudio.data import (
    AttributeVector,
    build_synthetic_corpus,
    desk_recipe,
    render_oracle,
    sample_layout,
)


@pytest.fixture(scope="session")
def recipe():
    return desk_recipe()


@pytest.fixture(scope="session")
def small_corpus(recipe):
    return build_synthetic_corpus(recipe, n_train=40, n_test=10, seed=7)


@pytest.fixture()
def layout():
    return sample_layout(np.random.default_rng(11))


@pytest.fixture()
def neutral_attrs():
    return AttributeVector.zeros()


@pytest.fixture()
def rendered(layout, neutral_attrs, recipe):
    return render_oracle(layout, neutral_attrs, recipe, seed=5)
