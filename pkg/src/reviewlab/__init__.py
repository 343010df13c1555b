"""Review analytics, lexicon sentiment labeling, and a from-scratch
bidirectional LSTM classifier for clothing e-commerce reviews."""

__version__ = "0.1.0"
