"""Coroutine annotation checking, CPS translation and a trampoline runtime for a small C-like language."""

__version__ = "0.1.0"
