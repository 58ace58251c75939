import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bacforge import CodeSpec, GF2, cyclic_shift_code, good_vector, good_vector_code


def col(*symbols, n):
    """Generator column with a 1 at each listed 1-based symbol index."""
    out = [0] * n
    for s in symbols:
        out[s - 1] = 1
    return tuple(out)


@pytest.fixture(scope="session")
def c2_code():
    """The (4, 13, 4, 5) linear-response reference code."""
    return cyclic_shift_code(4, 4, 5)


@pytest.fixture(scope="session")
def c2_table():
    """Hand-encoded buckets of the (4, 13, 4, 5) code, straight from the
    published table."""
    n = 4
    return CodeSpec(
        GF2,
        n,
        (
            (col(1, n=n), col(2, n=n), col(3, n=n)),
            (col(1, n=n), col(2, n=n), col(4, n=n)),
            (col(1, n=n), col(3, n=n), col(4, n=n)),
            (col(2, n=n), col(3, n=n), col(4, n=n)),
            (col(1, 2, 3, 4, n=n),),
        ),
    )


@pytest.fixture(scope="session")
def c1_code():
    """Hand-encoded (4, 14, 4, 5, 1) projection-only batch code: like the
    13-symbol code but the parity bucket stores x1+x4 and x2+x3."""
    n = 4
    return CodeSpec(
        GF2,
        n,
        (
            (col(1, n=n), col(2, n=n), col(3, n=n)),
            (col(1, n=n), col(2, n=n), col(4, n=n)),
            (col(1, n=n), col(3, n=n), col(4, n=n)),
            (col(2, n=n), col(3, n=n), col(4, n=n)),
            (col(1, 4, n=n), col(2, 3, n=n)),
        ),
    )


@pytest.fixture(scope="session")
def gv1_vector():
    return good_vector((1, 1))


@pytest.fixture(scope="session")
def gv1_code(gv1_vector):
    """The (5, 10, 3, 5) code seeded by the good vector (1, 1)."""
    return good_vector_code(gv1_vector)


@pytest.fixture(scope="session")
def t4_vector():
    return good_vector((2, 3, 2, 4, 3, 1, 1, 4))


@pytest.fixture(scope="session")
def t4_code(t4_vector):
    """The (17, 85, 7, 17) code seeded by the length-8 good vector."""
    return good_vector_code(t4_vector)
