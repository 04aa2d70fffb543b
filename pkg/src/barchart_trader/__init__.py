"""Trading on 30-day bar-chart images with a small convolutional network."""

__version__ = "0.1.0"
