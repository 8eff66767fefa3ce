"""Q-learning checkpoint scheduling for secure intermittently-powered processors."""

__version__ = "0.1.0"
