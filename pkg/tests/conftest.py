import pytest

from spinecell import generate, lens_space


@pytest.fixture(scope="session")
def b4():
    return generate("boundary4simplex")


@pytest.fixture(scope="session")
def ms3():
    return generate("minimal-s3")


@pytest.fixture(scope="session")
def rp3():
    return lens_space(2, 1)
