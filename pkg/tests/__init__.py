"""Tests for iwasawa."""
