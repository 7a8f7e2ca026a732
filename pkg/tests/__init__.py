"""Tests for the wavegen filter-bank toolkit."""
