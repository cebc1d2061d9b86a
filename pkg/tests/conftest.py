import pytest

from helpers import example_instance


@pytest.fixture
def example5x3():
    """The 5-job, 3-machine worked example: s=(2,3,3,2,2), p=(3,5,4,5,3)."""
    return example_instance()
