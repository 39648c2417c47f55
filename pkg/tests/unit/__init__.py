"""Unit tests for cumret."""
