"""Test package for Lumenfield."""
