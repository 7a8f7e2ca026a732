"""wavegen - synthesis and application of orthogonal two-channel filter banks."""

__version__ = "0.1.0"
