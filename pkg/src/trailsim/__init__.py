"""trailsim: round-based simulator for trail-validated sharded currency consensus."""

__version__ = "0.1.0"
