import pytest
from hypothesis import settings

from emdm.demo.familytree import family_tree_scheme

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def family():
    return family_tree_scheme()
