"""Offline Q-learning and the action-bit policy table."""
