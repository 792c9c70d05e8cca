"""manipkit: curation, annotation, VQA generation and scoring for robot demos."""

__version__ = "0.1.0"
