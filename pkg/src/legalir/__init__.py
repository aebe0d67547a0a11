"""Legal case retrieval pipeline: lexical scorers, LambdaRank trees, post-processing."""

__version__ = "0.1.0"
