"""Subgraph-centric analytics: extract neighborhoods, pack them into bins, run programs per subgraph."""

__version__ = "0.1.0"
