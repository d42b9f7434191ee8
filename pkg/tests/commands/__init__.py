"""Tests for the command-line commands."""
