"""Tests for synthetic scenes and dataset generation."""
