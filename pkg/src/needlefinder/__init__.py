"""needlefinder: mine C corpora for model-checkable functions, infer likely
preconditions from execution traces, and check generated harnesses."""

__version__ = "0.1.0"
