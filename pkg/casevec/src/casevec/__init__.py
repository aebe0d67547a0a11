"""Structure-aware dense case encoder: pre-train on Fact/Reasoning/Decision
sections with asymmetric masking, fine-tune contrastively, export embeddings."""

__version__ = "0.1.0"
