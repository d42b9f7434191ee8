"""Tests for the optimizer, batching, training loop and inference."""
