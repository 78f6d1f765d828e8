"""Distributional RL agent with temporal contrastive auxiliary objectives,
synthetic environments, and exact Markov-chain analysis tools."""

__version__ = "0.1.0"
