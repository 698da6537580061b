"""Reference implementation of the scorer wire protocol.

The stub backend is an independent reimplementation of the client
toolkit's deterministic mock scorer, used for cross-implementation
protocol conformance tests.  The transformer backend wraps any locally
available encoder-decoder summarizer plus a sentence classifier.
"""

__version__ = "0.1.0"
