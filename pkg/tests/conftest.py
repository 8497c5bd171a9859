import pytest

from tweetspam.features import default_resources


@pytest.fixture(scope="session")
def resources():
    return default_resources()
