"""Tests for the training losses."""
