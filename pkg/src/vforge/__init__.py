"""vforge: build adversarially edited news datasets and evaluate detectors."""

__version__ = "0.1.0"
