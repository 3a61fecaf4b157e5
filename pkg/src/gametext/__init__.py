"""Toolkit for turning basketball box scores into model-ready text data:
parsing, linearization, corpus construction, subword segmentation, and
document-level BLEU evaluation."""

__version__ = "0.1.0"
