"""Test suite for qfp."""
