"""Tests for the raw sensor pipeline."""
