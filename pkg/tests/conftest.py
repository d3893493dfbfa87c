import warnings

import pytest

from sqprimes.primes import interval_counts, table_for_k

warnings.filterwarnings("ignore", message=".*TBB.*")


@pytest.fixture(scope="session")
def table_1k():
    """Primes through p_1101, enough for every k <= 1100 test."""
    return table_for_k(1100)


@pytest.fixture(scope="session")
def counts_1k(table_1k):
    """Exact interval counts for k = 1..1000."""
    return interval_counts(table_1k, 1000)
