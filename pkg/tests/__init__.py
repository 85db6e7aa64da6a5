"""Test package for locsvm."""
