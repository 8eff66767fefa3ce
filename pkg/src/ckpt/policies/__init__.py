"""Online checkpointing policies."""
