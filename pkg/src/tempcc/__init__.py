"""MiniCC: a small C-like language with checked fat pointers for temporal
memory safety, plus a simulated runtime and deterministic benchmark harness."""

__version__ = "0.1.0"
