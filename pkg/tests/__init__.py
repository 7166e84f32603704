"""Tests for entangle."""
