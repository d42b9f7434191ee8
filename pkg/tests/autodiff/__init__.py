"""Tests for the reverse-mode autodiff core."""
