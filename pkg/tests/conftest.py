import pytest

from yieldsign.synthetic import generate_corpus


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """A compact corpus for CLI-level tests: 2 cycles, 3 countries."""
    directory = tmp_path_factory.mktemp("small_corpus")
    config_path = generate_corpus(
        directory,
        countries=("UK", "GRM", "CND"),
        target_country="US",
        n_months=300,
        n_cycles=2,
        seed=5,
    )
    return directory, config_path
