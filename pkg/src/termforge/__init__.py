"""termforge: glossary-constrained machine translation post-editing toolkit.

Subpackages cover glossary management, term spotting, embedding-based word
alignment, target-side substitution, terminology-aware decoding, prompt-based
refinement, translation metrics, agreement/coverage statistics, and a CLI.
"""

__version__ = "0.1.0"
