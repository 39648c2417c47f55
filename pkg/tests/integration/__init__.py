"""Integration tests for cumret."""
