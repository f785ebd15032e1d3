"""iwasawa - exact-arithmetic rank-one Iwasawa theory toolkit."""

__version__ = "0.1.0"
