import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from kuranishi.polycore import PolyMap

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def polymaps(draw, n_in=None, n_out=None, max_degree=3, max_terms=4):
    """Small random PolyMaps with integer coefficients (exact in floating point)."""
    n_in = draw(st.integers(1, 3)) if n_in is None else n_in
    n_out = draw(st.integers(1, 3)) if n_out is None else n_out
    coords = []
    for _ in range(n_out):
        terms = draw(
            st.lists(
                st.tuples(st.lists(st.integers(0, max_degree), min_size=n_in, max_size=n_in).filter(lambda e: sum(e) <= max_degree), st.integers(-5, 5)),
                max_size=max_terms,
            )
        )
        coord = {}
        for e, c in terms:
            coord[tuple(e)] = coord.get(tuple(e), 0.0) + float(c)
        coords.append(coord)
    return PolyMap(n_in, n_out, tuple(coords))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
