"""Command line interface for iwasawa."""
