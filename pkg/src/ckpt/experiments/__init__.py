"""Command implementations, manifests and sweeps."""
