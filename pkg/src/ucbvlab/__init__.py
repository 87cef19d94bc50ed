"""Variance-aware UCB bandit simulation and asymptotics toolkit."""

__version__ = "0.1.0"
