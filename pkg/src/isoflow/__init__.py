"""Zero-preserving iso-spectral flows built from parallel sums of PSD operators."""

__version__ = "0.1.0"
