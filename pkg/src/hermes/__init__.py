"""Hybrid crowdsensing simulator and pipeline for earthquake emergencies."""
import os

__version__ = "0.1.0"

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_path(*parts):
    """Path to a bundled data file."""
    return os.path.join(_DATA_DIR, *parts)
