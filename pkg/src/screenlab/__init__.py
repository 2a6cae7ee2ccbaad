"""screenlab: corpus analytics for emotion in film acting performances."""

__version__ = "0.1.0"
