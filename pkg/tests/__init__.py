"""Tests for thinningpy."""
