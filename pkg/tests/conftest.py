import pytest

from scgvb.workflow import TABLE_TWO_BODY_SCALE, DeterminantProblem


@pytest.fixture(scope="session")
def square():
    """Square H4 with the two-electron convention of the reference tables."""
    return DeterminantProblem.h4(0.7414, 0.7414, two_body_scale=TABLE_TWO_BODY_SCALE)


@pytest.fixture(scope="session")
def square_textbook():
    return DeterminantProblem.h4(0.7414, 0.7414)
