"""Figure rendering for mrfcrb result CSVs."""

__version__ = "0.1.0"
