"""embed_dump: export encoder hidden states into the alignment dump format."""

__version__ = "0.1.0"
