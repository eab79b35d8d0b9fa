"""Repository-aware LLM assistant workbench."""

__version__ = "0.1.0"
