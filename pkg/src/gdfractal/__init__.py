"""Graph-directed IFSs on the real line: exact construction, gap analysis and self-similarity verdicts."""
__version__ = "0.1.0"
