"""Tests for the positional encoding and field network."""
