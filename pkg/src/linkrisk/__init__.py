"""Linkability and identity-disclosure risk analytics for pseudonymous text profiles."""

from . import anonymity, corpus, evaluation, framework, lm, metric

__version__ = "0.1.0"

__all__ = ["anonymity", "corpus", "evaluation", "framework", "lm", "metric", "__version__"]
