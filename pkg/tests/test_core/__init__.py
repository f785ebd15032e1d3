"""Tests for core functionality."""