"""benchforge: build execution-based code-generation benchmarks from raw code
fragments and evaluate code generators against them."""

__version__ = "0.1.0"
