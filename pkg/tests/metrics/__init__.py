"""Tests for the image quality metrics."""
