"""Tests for ray generation, sampling and volume compositing."""
