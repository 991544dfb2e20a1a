"""Research spaces from publication records: relatedness networks, field-entry
prediction, and backbone analysis."""

__version__ = "0.1.0"
