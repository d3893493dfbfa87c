"""Laboratory for the distribution of primes in intervals between consecutive squared primes."""

__version__ = "0.1.0"
