"""Tests for hyperpark."""
