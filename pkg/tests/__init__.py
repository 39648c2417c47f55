"""Tests for cumret."""
